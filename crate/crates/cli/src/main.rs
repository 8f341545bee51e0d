//! `slicesim` command-line driver.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slicesim::config::{parse_config_text, ConfigPairs, SimConfig};
use slicesim::slicer::oracle_slice_graph;
use slicesim::stats::{emit_report, ReportFormat, RunRecord};
use slicesim::sweep::{load_traces, parse_plan, run_sweep, ConfigPoint, TraceSource};
use slicesim::trace::{canonical_fig1, format_trace, generate, Trace, WorkloadSpec};

const EXIT_USAGE: u8 = 1;
const EXIT_RUN: u8 = 2;

#[derive(Parser)]
#[command(
    name = "slicesim",
    version,
    about = "Cycle-level simulator for in-order, slice-based and out-of-order cores"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration on one or more traces.
    Simulate(SimulateArgs),
    /// Run every point of an experiment plan.
    Sweep(SweepArgs),
    /// Generate a synthetic trace file.
    Gen(GenArgs),
    /// Print the oracle slice graph of a trace as CSV.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Report file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// csv or json; defaults to json for `.json` outputs, csv otherwise.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads (capped by SLICESIM_THREADS).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Configuration file of `key = value` lines.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Trace file, `fig1`, `suite` or a workload spec such as `dep-chain:depth=2`.
    #[arg(short, long, required = true)]
    trace: Vec<String>,
    /// Overrides core.variant.
    #[arg(long)]
    variant: Option<String>,
    /// Overrides core.width.
    #[arg(long)]
    width: Option<u32>,
    /// Overrides core.window.
    #[arg(long)]
    window: Option<u32>,
    /// Overrides l1.lat.
    #[arg(long)]
    l1_lat: Option<u32>,
    /// Overrides prefetch.llc (on/off).
    #[arg(long)]
    prefetch: Option<String>,
    /// Any other override, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the effective configuration to stderr.
    #[arg(long)]
    show_config: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Plan file.
    plan: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct GenArgs {
    /// indep-loads, dep-chain, mixed-slices, alias-mix, stream or fig1.
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    depth: Option<u32>,
    /// Dependent fraction for mixed-slices.
    #[arg(long)]
    frac: Option<f64>,
    /// Alias probability for alias-mix.
    #[arg(long)]
    alias: Option<f64>,
    #[arg(long)]
    stride: Option<u64>,
    #[arg(long)]
    iters: Option<u32>,
    /// Footprint in bytes.
    #[arg(long)]
    footprint: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Branch mispredict probability.
    #[arg(long)]
    mispredict: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Trace file, `fig1` or a workload spec.
    trace: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Run(String),
}

type CmdResult = Result<(), Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn run_err(e: impl std::fmt::Display) -> Failure {
    Failure::Run(e.to_string())
}

fn write_output(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| run_err(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn resolve_format(
    flag: Option<&str>,
    plan: Option<ReportFormat>,
    output: Option<&Path>,
) -> Result<ReportFormat, Failure> {
    if let Some(f) = flag {
        return f.parse().map_err(usage);
    }
    if let Some(f) = plan {
        return Ok(f);
    }
    let json = output
        .and_then(|p| p.extension())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    Ok(if json { ReportFormat::Json } else { ReportFormat::Csv })
}

/// Smaller of the flag and SLICESIM_THREADS when both are set.
fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    let env = match std::env::var("SLICESIM_THREADS") {
        Ok(v) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| usage(format!("SLICESIM_THREADS must be a positive integer, got '{v}'")))?,
        ),
        _ => None,
    };
    if flag == Some(0) {
        return Err(usage("--threads must be positive"));
    }
    Ok(match (flag, env) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    })
}

/// A path that exists is read as a trace file; anything else must be a
/// trace source keyword or workload spec.
fn trace_source(text: &str) -> Result<TraceSource, Failure> {
    let p = Path::new(text);
    if p.is_file() {
        return Ok(TraceSource::File(p.to_path_buf()));
    }
    TraceSource::parse(text, Path::new(".")).map_err(|e| {
        run_err(format!(
            "trace '{text}' is not a readable file or a workload spec ({e})"
        ))
    })
}

fn report_failures(records: &[RunRecord]) -> CmdResult {
    let failed: Vec<&RunRecord> = records.iter().filter(|r| r.is_failed()).collect();
    for r in &failed {
        eprintln!(
            "run failed: {} {}: {}",
            r.trace,
            r.core.variant,
            r.error.as_deref().unwrap_or("")
        );
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Run(format!(
            "{} of {} runs failed",
            failed.len(),
            records.len()
        )))
    }
}

fn simulate_cmd(a: SimulateArgs) -> CmdResult {
    let mut pairs = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
            parse_config_text(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => ConfigPairs::new(),
    };
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut flag = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            overrides.push((k.to_string(), v));
        }
    };
    flag("core.variant", a.variant);
    flag("core.width", a.width.map(|v| v.to_string()));
    flag("core.window", a.window.map(|v| v.to_string()));
    flag("l1.lat", a.l1_lat.map(|v| v.to_string()));
    flag("prefetch.llc", a.prefetch);
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    for (k, v) in overrides {
        // Command-line values replace file values for the same key.
        pairs.remove(&k);
        slicesim::config::insert_pair(&mut pairs, &k, &v).map_err(usage)?;
    }
    let cfg = SimConfig::from_pairs(&pairs).map_err(usage)?;
    if a.show_config {
        eprint!("{}", cfg.to_text());
    }
    let sources = a.trace.iter().map(|t| trace_source(t)).collect::<Result<Vec<_>, _>>()?;
    let traces = load_traces(&sources);
    if let Some(Err(e)) = traces.iter().find(|t| t.is_err()) {
        return Err(run_err(e));
    }
    let point = ConfigPoint {
        label: String::new(),
        pairs,
    };
    let records = run_sweep(&[point], &traces, thread_count(a.out.threads)?).map_err(run_err)?;
    let format = resolve_format(a.out.format.as_deref(), None, a.out.output.as_deref())?;
    write_output(a.out.output.as_deref(), &emit_report(&records, format))?;
    report_failures(&records)
}

fn sweep_cmd(a: SweepArgs) -> CmdResult {
    let text = fs::read_to_string(&a.plan).map_err(|e| usage(format!("cannot read {}: {e}", a.plan.display())))?;
    let dir = a.plan.parent().unwrap_or(Path::new("."));
    let plan = parse_plan(&text, dir).map_err(|e| usage(format!("{}: {e}", a.plan.display())))?;
    let output = a.out.output.clone().or_else(|| plan.output.clone());
    let format = resolve_format(a.out.format.as_deref(), plan.format, output.as_deref())?;
    let traces = load_traces(&plan.traces);
    let records = run_sweep(&plan.config_points(), &traces, thread_count(a.out.threads)?).map_err(|e| match e {
        slicesim::sweep::PlanError::Run { .. } => usage(e),
        other => run_err(other),
    })?;
    write_output(output.as_deref(), &emit_report(&records, format))?;
    report_failures(&records)
}

fn gen_trace(a: &GenArgs) -> Result<Trace, Failure> {
    if a.pattern == "fig1" {
        return Ok(canonical_fig1());
    }
    let mut params = Vec::new();
    let mut add = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            params.push(format!("{k}={v}"));
        }
    };
    add("depth", a.depth.map(|v| v.to_string()));
    add("frac", a.frac.map(|v| v.to_string()));
    add("alias", a.alias.map(|v| v.to_string()));
    add("stride", a.stride.map(|v| v.to_string()));
    add("iters", a.iters.map(|v| v.to_string()));
    add("footprint", a.footprint.map(|v| v.to_string()));
    add("seed", a.seed.map(|v| v.to_string()));
    add("mispredict", a.mispredict.map(|v| v.to_string()));
    let spec: WorkloadSpec = format!("{}:{}", a.pattern, params.join(",")).parse().map_err(usage)?;
    generate(&spec).map_err(usage)
}

fn gen_cmd(a: GenArgs) -> CmdResult {
    let trace = gen_trace(&a)?;
    write_output(a.output.as_deref(), &format_trace(&trace))
}

fn analyze_cmd(a: AnalyzeArgs) -> CmdResult {
    let traces = trace_source(&a.trace)?.load().map_err(run_err)?;
    let mut out = String::new();
    for t in &traces {
        if traces.len() > 1 {
            out.push_str(&format!("# {}\n", t.meta.name));
        }
        out.push_str(&oracle_slice_graph(&t.ops).to_csv());
    }
    write_output(a.output.as_deref(), &out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Gen(a) => gen_cmd(a),
        Command::Analyze(a) => analyze_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUN)
        }
    }
}
