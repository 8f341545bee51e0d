//! Parameter sweeps over configurations and traces.
//!
//! A plan file holds `key = value` base overrides, `axis` lines, `trace`
//! lines and optional `base`, `output` and `format` directives:
//!
//! ```text
//! base = freeway.cfg
//! core.width = 2
//! axis core.variant = LSC, FREEWAY
//! axis core.window, core.width = 32:2, 128:4
//! trace = dep-chain:depth=2,iters=200
//! trace = file:traces/loop.trace
//! trace = suite
//! ```
//!
//! Runs expand as the cartesian product of axes (first axis varies
//! slowest) with traces innermost. Results come back in that order no
//! matter how many threads ran them.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{insert_pair, parse_config_text, ConfigError, ConfigPairs, SimConfig};
use crate::pipeline::{simulate, Variant};
use crate::stats::{speedup, ReportFormat, RunRecord, RunStats};
use crate::suite::suite_traces;
use crate::trace::{canonical_fig1, generate, parse_trace_with_meta, Trace, WorkloadSpec};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("plan line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("plan line {line}: {source}")]
    Config { line: usize, source: ConfigError },
    #[error("configuration for run {run}: {source}")]
    Run { run: String, source: ConfigError },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("plan has no traces")]
    NoTraces,
    #[error("cannot build thread pool: {0}")]
    Threads(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub keys: Vec<String>,
    /// One tuple per point; each tuple has `keys.len()` entries.
    pub points: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceSource {
    Spec(WorkloadSpec),
    File(PathBuf),
    Fig1,
    Suite,
}

impl TraceSource {
    pub fn parse(text: &str, base_dir: &Path) -> Result<TraceSource, String> {
        let text = text.trim();
        if let Some(path) = text.strip_prefix("file:") {
            let p = Path::new(path.trim());
            Ok(TraceSource::File(if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }))
        } else if text == "fig1" {
            Ok(TraceSource::Fig1)
        } else if text == "suite" {
            Ok(TraceSource::Suite)
        } else {
            text.parse().map(TraceSource::Spec).map_err(|e| e.to_string())
        }
    }

    /// Materializes the traces; `suite` yields several.
    pub fn load(&self) -> Result<Vec<Trace>, String> {
        match self {
            TraceSource::Spec(s) => generate(s).map(|t| vec![t]).map_err(|e| e.to_string()),
            TraceSource::Fig1 => Ok(vec![canonical_fig1()]),
            TraceSource::Suite => Ok(suite_traces()),
            TraceSource::File(p) => load_trace_file(p).map(|t| vec![t]),
        }
    }
}

/// Reads a trace file; a missing name header falls back to the file stem.
pub fn load_trace_file(path: &Path) -> Result<Trace, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut t = parse_trace_with_meta(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if t.meta.name.is_empty() {
        t.meta.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "trace".to_string());
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub base: ConfigPairs,
    pub axes: Vec<Axis>,
    pub traces: Vec<TraceSource>,
    pub output: Option<PathBuf>,
    pub format: Option<ReportFormat>,
}

/// One configuration point before it is paired with traces.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigPoint {
    pub label: String,
    pub pairs: ConfigPairs,
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect()
}

pub fn parse_plan(text: &str, base_dir: &Path) -> Result<ExperimentPlan, PlanError> {
    let mut plan = ExperimentPlan {
        base: ConfigPairs::new(),
        axes: Vec::new(),
        traces: Vec::new(),
        output: None,
        format: None,
    };
    let mut file_base: Option<ConfigPairs> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let perr = |reason: String| PlanError::Parse { line: line_no, reason };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((lhs, rhs)) = line.split_once('=') else {
            return Err(perr(format!("expected 'key = value', got '{line}'")));
        };
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        if rhs.is_empty() {
            return Err(perr(format!("missing value for '{lhs}'")));
        }
        if let Some(keys) = lhs.strip_prefix("axis ") {
            let keys = split_list(keys);
            let points: Vec<Vec<String>> = split_list(rhs)
                .into_iter()
                .map(|p| p.split(':').map(|v| v.trim().to_string()).collect())
                .collect();
            if keys.is_empty() || points.is_empty() {
                return Err(perr("axis needs keys and at least one value".into()));
            }
            if let Some(p) = points.iter().find(|p| p.len() != keys.len()) {
                return Err(perr(format!(
                    "axis point '{}' does not match {} keys",
                    p.join(":"),
                    keys.len()
                )));
            }
            for k in &keys {
                // Validates the key name against the config key list.
                insert_pair(&mut ConfigPairs::new(), k, "0")
                    .map_err(|source| PlanError::Config { line: line_no, source })?;
            }
            plan.axes.push(Axis { keys, points });
            continue;
        }
        match lhs {
            "trace" => plan.traces.push(TraceSource::parse(rhs, base_dir).map_err(perr)?),
            "output" => plan.output = Some(base_dir.join(rhs)),
            "format" => plan.format = Some(rhs.parse().map_err(|e: crate::stats::StatsError| perr(e.to_string()))?),
            "base" => {
                let path = base_dir.join(rhs);
                let text = std::fs::read_to_string(&path).map_err(|e| PlanError::Io {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                })?;
                file_base =
                    Some(parse_config_text(&text).map_err(|source| PlanError::Config { line: line_no, source })?);
            }
            key => {
                insert_pair(&mut plan.base, key, rhs).map_err(|source| PlanError::Config { line: line_no, source })?
            }
        }
    }
    if let Some(fb) = file_base {
        // Inline keys in the plan override the base file.
        for (k, v) in fb {
            plan.base.entry(k).or_insert(v);
        }
    }
    if plan.traces.is_empty() {
        return Err(PlanError::NoTraces);
    }
    Ok(plan)
}

impl ExperimentPlan {
    /// Configuration points in expansion order.
    pub fn config_points(&self) -> Vec<ConfigPoint> {
        let mut points = vec![ConfigPoint {
            label: String::new(),
            pairs: self.base.clone(),
        }];
        for axis in &self.axes {
            let mut next = Vec::with_capacity(points.len() * axis.points.len());
            for p in &points {
                for tuple in &axis.points {
                    let mut q = p.clone();
                    for (k, v) in axis.keys.iter().zip(tuple) {
                        // Axes override base values.
                        q.pairs.insert(k.clone(), v.clone());
                        if !q.label.is_empty() {
                            q.label.push(';');
                        }
                        q.label.push_str(&format!("{k}={v}"));
                    }
                    next.push(q);
                }
            }
            points = next;
        }
        points
    }

    pub fn run_count(&self) -> usize {
        self.axes.iter().map(|a| a.points.len()).product::<usize>() * self.traces.len()
    }
}

/// Loaded traces (or load errors) in plan order, with `suite` expanded.
pub fn load_traces(sources: &[TraceSource]) -> Vec<Result<Trace, String>> {
    sources
        .iter()
        .flat_map(|s| match s.load() {
            Ok(ts) => ts.into_iter().map(Ok).collect::<Vec<_>>(),
            Err(e) => vec![Err(e)],
        })
        .collect()
}

type Outcome = Result<RunStats, String>;

fn run_one(trace: &Trace, cfg: &SimConfig) -> Outcome {
    simulate(trace, &cfg.core, &cfg.mem).map_err(|e| e.to_string())
}

/// Runs every (configuration, trace) pair and attaches speedups over an
/// in-order core with otherwise identical settings.
pub fn run_sweep(
    points: &[ConfigPoint],
    traces: &[Result<Trace, String>],
    threads: Option<usize>,
) -> Result<Vec<RunRecord>, PlanError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| PlanError::Threads(e.to_string()))?;

    let configs: Vec<SimConfig> = points
        .iter()
        .map(|p| {
            SimConfig::from_pairs(&p.pairs).map_err(|source| PlanError::Run {
                run: if p.label.is_empty() {
                    "base".into()
                } else {
                    p.label.clone()
                },
                source,
            })
        })
        .collect::<Result<_, _>>()?;

    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..traces.len()).map(move |t| (c, t)))
        .collect();

    // Baselines deduplicated by their serialized configuration.
    let mut baseline_index: HashMap<(String, usize), usize> = HashMap::new();
    let mut baselines: Vec<(SimConfig, usize)> = Vec::new();
    let mut job_baseline = Vec::with_capacity(jobs.len());
    for &(c, t) in &jobs {
        let mut b = configs[c].clone();
        b.core = b.core.with_variant(Variant::Ino);
        let key = (format!("{:?}", (&b.core, &b.mem)), t);
        let next = baselines.len();
        let idx = *baseline_index.entry(key).or_insert_with(|| {
            baselines.push((b, t));
            next
        });
        job_baseline.push(idx);
    }

    let (results, base_results): (Vec<Outcome>, Vec<Outcome>) = pool.install(|| {
        rayon::join(
            || {
                jobs.par_iter()
                    .map(|&(c, t)| match &traces[t] {
                        Ok(tr) => run_one(tr, &configs[c]),
                        Err(e) => Err(e.clone()),
                    })
                    .collect()
            },
            || {
                baselines
                    .par_iter()
                    .map(|(b, t)| match &traces[*t] {
                        Ok(tr) => run_one(tr, b),
                        Err(e) => Err(e.clone()),
                    })
                    .collect()
            },
        )
    });

    Ok(jobs
        .iter()
        .zip(results)
        .zip(&job_baseline)
        .map(|((&(c, t), res), &b)| {
            let cfg = &configs[c];
            let name = match &traces[t] {
                Ok(tr) => tr.meta.name.clone(),
                Err(_) => format!("trace#{t}"),
            };
            match res {
                Ok(stats) => {
                    let mut rec = RunRecord::ok(name, cfg.core.clone(), cfg.mem.clone(), stats);
                    if let (Ok(base), Some(s)) = (&base_results[b], &rec.stats) {
                        rec.speedup_vs_ino = speedup(base, s).ok();
                    }
                    rec
                }
                Err(e) => RunRecord::failed(name, cfg.core.clone(), cfg.mem.clone(), e),
            }
        })
        .collect())
}

/// Loads the plan's traces and runs every point.
pub fn run_plan(plan: &ExperimentPlan, threads: Option<usize>) -> Result<Vec<RunRecord>, PlanError> {
    let traces = load_traces(&plan.traces);
    run_sweep(&plan.config_points(), &traces, threads)
}
