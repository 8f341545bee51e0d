//! Caches, MSHRs, the LLC stride prefetcher and the store buffer.
//!
//! Latencies compose additively: an L1 miss that hits the LLC costs the L1
//! lookup plus the LLC round trip, and a DRAM access adds the DRAM latency
//! on top. With the default parameters that is 4, 34 and 124 cycles.

pub mod cache;
pub mod hierarchy;
pub mod prefetch;
pub mod store_buffer;

use thiserror::Error;

pub use cache::{Cache, CacheConfig, LINE_BYTES};
pub use hierarchy::{
    gbps_to_bytes_per_cycle, ns_to_cycles, Hierarchy, HierarchyConfig, HitLevel, MemCounters, MemRequest, CLOCK_GHZ,
};
pub use prefetch::{StridePrefetcher, StrideStream};
pub use store_buffer::{LoadCheck, OracleDep, StoreBuffer, StoreBufferEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MemError {
    #[error("invalid memory configuration: {0}")]
    Config(String),
    #[error("all MSHRs busy")]
    MshrFull,
    #[error("store buffer full")]
    StoreBufferFull,
}
