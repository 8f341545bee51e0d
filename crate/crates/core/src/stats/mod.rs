//! Run counters and derived metrics.

pub mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::memory::{HitLevel, MemCounters};
use crate::pipeline::{AuditReport, Variant};

pub use report::{emit_report, parse_json_report, ReportFormat, RunRecord, CSV_COLUMNS, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("run has zero cycles")]
    ZeroCycles,
    #[error("geometric mean of an empty set")]
    EmptySuite,
    #[error("speedup values must be positive, got {0}")]
    NonPositive(String),
    #[error("unknown report format '{0}' (expected csv or json)")]
    UnknownFormat(String),
    #[error("malformed report: {0}")]
    Malformed(String),
}

/// Why a cycle issued nothing. `None` marks cycles that issued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StallCategory {
    SliceDep,
    EmptyBiq,
    LsAlias,
    Other,
    None,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StallCounts {
    pub slice_dep: u64,
    pub empty_biq: u64,
    pub ls_alias: u64,
    pub other: u64,
}

impl StallCounts {
    pub fn add(&mut self, cat: StallCategory, cycles: u64) {
        match cat {
            StallCategory::SliceDep => self.slice_dep += cycles,
            StallCategory::EmptyBiq => self.empty_biq += cycles,
            StallCategory::LsAlias => self.ls_alias += cycles,
            StallCategory::Other => self.other += cycles,
            StallCategory::None => {}
        }
    }

    pub fn get(&self, cat: StallCategory) -> u64 {
        match cat {
            StallCategory::SliceDep => self.slice_dep,
            StallCategory::EmptyBiq => self.empty_biq,
            StallCategory::LsAlias => self.ls_alias,
            StallCategory::Other => self.other,
            StallCategory::None => 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.slice_dep + self.empty_biq + self.ls_alias + self.other
    }
}

/// Where depth-0 producer loads with at least one dependent found their data.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitSite {
    pub l1: u64,
    pub llc: u64,
    pub mem: u64,
}

impl HitSite {
    pub fn add(&mut self, level: HitLevel) {
        match level {
            HitLevel::L1 => self.l1 += 1,
            HitLevel::Llc => self.llc += 1,
            HitLevel::Mem => self.mem += 1,
            HitLevel::MshrMerge => unreachable!("merges are attributed to the parent's level"),
        }
    }

    pub fn total(&self) -> u64 {
        self.l1 + self.llc + self.mem
    }

    pub fn l1_fraction(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.l1 as f64 / self.total() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub trace: String,
    pub variant: Variant,
    pub cycles: u64,
    pub retired_uops: u64,
    /// Architectural instructions; a cracked store counts once.
    pub retired_instrs: u64,
    pub zero_issue_cycles: u64,
    pub issue_stall: StallCounts,
    /// Cycles in which a full window, queue or store buffer blocked dispatch.
    pub dispatch_stall_cycles: u64,
    /// Cycles in which dispatch waited on a branch misprediction.
    pub frontend_stall_cycles: u64,
    pub mispredicts: u64,
    /// Dependence depth of every dynamic memory op.
    pub depth_histogram: BTreeMap<u32, u64>,
    pub producer_hit_site: HitSite,
    pub llc_accesses: u64,
    pub llc_misses: u64,
    pub mlp_avg: f64,
    pub mem: MemCounters,
    pub audit: AuditReport,
}

impl RunStats {
    pub fn ipc(&self) -> f64 {
        if self.cycles == 0 {
            0.0
        } else {
            self.retired_instrs as f64 / self.cycles as f64
        }
    }

    pub fn mpki(&self) -> f64 {
        if self.retired_instrs == 0 {
            0.0
        } else {
            1000.0 * self.llc_misses as f64 / self.retired_instrs as f64
        }
    }
}

/// `base.cycles / other.cycles`.
pub fn speedup(base: &RunStats, other: &RunStats) -> Result<f64, StatsError> {
    if base.cycles == 0 || other.cycles == 0 {
        return Err(StatsError::ZeroCycles);
    }
    Ok(base.cycles as f64 / other.cycles as f64)
}

pub fn gmean(values: &[f64]) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptySuite);
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
        return Err(StatsError::NonPositive(bad.to_string()));
    }
    let log_sum: f64 = values.iter().map(|v| v.ln()).sum();
    Ok((log_sum / values.len() as f64).exp())
}

/// Stall cycles per category as a fraction of total cycles.
pub fn stall_fractions(stats: &RunStats) -> BTreeMap<StallCategory, f64> {
    let denom = stats.cycles.max(1) as f64;
    [
        StallCategory::SliceDep,
        StallCategory::EmptyBiq,
        StallCategory::LsAlias,
        StallCategory::Other,
    ]
    .into_iter()
    .map(|c| (c, stats.issue_stall.get(c) as f64 / denom))
    .collect()
}

/// Same categories as a fraction of zero-issue cycles.
pub fn stall_shares(stats: &RunStats) -> BTreeMap<StallCategory, f64> {
    let denom = stats.zero_issue_cycles.max(1) as f64;
    stall_fractions(stats)
        .into_keys()
        .map(|c| (c, stats.issue_stall.get(c) as f64 / denom))
        .collect()
}

/// Mean number of outstanding requests over cycles with at least one
/// outstanding, given `[start, end)` intervals.
pub fn mlp_from_intervals(intervals: &[(u64, u64)]) -> f64 {
    let mut sorted: Vec<(u64, u64)> = intervals.iter().copied().filter(|(s, e)| e > s).collect();
    if sorted.is_empty() {
        return 0.0;
    }
    sorted.sort_unstable();
    let busy: u64 = sorted.iter().map(|(s, e)| e - s).sum();
    let mut covered = 0u64;
    let (mut cur_s, mut cur_e) = sorted[0];
    for &(s, e) in &sorted[1..] {
        if s > cur_e {
            covered += cur_e - cur_s;
            cur_s = s;
            cur_e = e;
        } else {
            cur_e = cur_e.max(e);
        }
    }
    covered += cur_e - cur_s;
    busy as f64 / covered as f64
}
