//! Cycle-level core model.
//!
//! Each cycle runs, in order: completion events, in-order retirement,
//! oldest-first issue across the queue heads, and dispatch of new µops,
//! which become issuable the following cycle. A µop's result is available
//! to dependents in the cycle it completes.

pub mod audit;
pub mod config;
pub mod engine;

use thiserror::Error;

use crate::memory::MemError;

pub use audit::{audit_memory_order, AuditReport};
pub use config::{CoreConfig, CoreOptions, FuConfig, Variant};
pub use engine::{simulate, simulate_detailed, QueueTag, RunDetail, UopPart, UopRecord, CYCLE_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid core configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Mem(#[from] MemError),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("cycle budget of {budget} exceeded; {dump}")]
    CycleBudget { budget: u64, dump: String },
    #[error("no forward progress possible at cycle {cycle}; {dump}")]
    Deadlock { cycle: u64, dump: String },
}
