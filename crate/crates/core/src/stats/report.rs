//! CSV and JSON run reports.
//!
//! Both formats carry `schema=1`. Row order is the order of the records
//! passed in; callers that run sweeps pass them in configuration order.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{RunStats, StallCategory, StatsError};
use crate::memory::HierarchyConfig;
use crate::pipeline::CoreConfig;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: &str = "trace,variant,width,window,q_a,q_b,q_y,l1_lat,prefetch,cycles,ipc,speedup_vs_ino,stall_slice_dep,stall_empty_biq,stall_alias,stall_other,mpki,mlp_avg";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(StatsError::UnknownFormat(s.to_string())),
        }
    }
}

/// One (configuration, trace) run. `stats` is `None` when the run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub trace: String,
    pub core: CoreConfig,
    pub mem: HierarchyConfig,
    pub stats: Option<RunStats>,
    pub speedup_vs_ino: Option<f64>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn ok(trace: impl Into<String>, core: CoreConfig, mem: HierarchyConfig, stats: RunStats) -> RunRecord {
        RunRecord {
            trace: trace.into(),
            core,
            mem,
            stats: Some(stats),
            speedup_vs_ino: None,
            error: None,
        }
    }

    pub fn failed(trace: impl Into<String>, core: CoreConfig, mem: HierarchyConfig, error: String) -> RunRecord {
        RunRecord {
            trace: trace.into(),
            core,
            mem,
            stats: None,
            speedup_vs_ino: None,
            error: Some(error),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.stats.is_none()
    }
}

#[derive(Serialize, Deserialize)]
struct JsonReport {
    schema: u32,
    runs: Vec<RunRecord>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(r: &RunRecord) -> String {
    let c = &r.core;
    let mut row = format!(
        "{},{},{},{},{},{},{},{},{}",
        csv_field(&r.trace),
        c.variant,
        c.issue_width,
        c.window,
        c.q_a,
        c.q_b,
        c.q_y,
        r.mem.l1.hit_latency,
        if r.mem.prefetcher_enabled { "on" } else { "off" },
    );
    match &r.stats {
        None => row.push_str(",FAILED,,,,,,,,"),
        Some(s) => {
            let frac = |cat| s.issue_stall.get(cat) as f64 / s.cycles.max(1) as f64;
            let speedup = r.speedup_vs_ino.map(|v| format!("{v:.6}")).unwrap_or_default();
            let _ = write!(
                row,
                ",{},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                s.cycles,
                s.ipc(),
                speedup,
                frac(StallCategory::SliceDep),
                frac(StallCategory::EmptyBiq),
                frac(StallCategory::LsAlias),
                frac(StallCategory::Other),
                s.mpki(),
                s.mlp_avg,
            );
        }
    }
    row
}

pub fn emit_report(records: &[RunRecord], format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = format!("# schema={SCHEMA_VERSION}\n{CSV_COLUMNS}\n");
            for r in records {
                out.push_str(&csv_row(r));
                out.push('\n');
            }
            out
        }
        ReportFormat::Json => {
            let doc = JsonReport {
                schema: SCHEMA_VERSION,
                runs: records.to_vec(),
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("report is serializable");
            s.push('\n');
            s
        }
    }
}

pub fn parse_json_report(text: &str) -> Result<Vec<RunRecord>, StatsError> {
    let doc: JsonReport = serde_json::from_str(text).map_err(|e| StatsError::Malformed(e.to_string()))?;
    if doc.schema != SCHEMA_VERSION {
        return Err(StatsError::Malformed(format!("unsupported schema {}", doc.schema)));
    }
    Ok(doc.runs)
}
