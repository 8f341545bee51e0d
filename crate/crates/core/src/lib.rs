//! Trace-driven cycle-level simulation of in-order, slice-based and
//! out-of-order cores.
//!
//! The usual entry point is [`simulate`] with a [`Trace`], a [`CoreConfig`]
//! and a [`HierarchyConfig`]. [`config`] parses text configurations and
//! [`sweep`] runs parameter grids in parallel.

pub mod config;
pub mod memory;
pub mod pipeline;
pub mod slicer;
pub mod stats;
pub mod suite;
pub mod sweep;
pub mod trace;

pub use config::{ConfigError, SimConfig};
pub use memory::{HierarchyConfig, MemError};
pub use pipeline::{simulate, simulate_detailed, CoreConfig, SimError, Variant};
pub use stats::{emit_report, ReportFormat, RunRecord, RunStats, StallCategory};
pub use trace::{generate, MicroOp, OpKind, Trace, WorkloadSpec};
