//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Runs without the libtest harness so the lines
//! always reach stdout.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use slicesim::memory::HierarchyConfig;
use slicesim::pipeline::{simulate, simulate_detailed, CoreConfig, Variant};
use slicesim::slicer::{oracle_slice_graph, Ist, Slicer};
use slicesim::stats::RunStats;
use slicesim::suite::{suite_specs, suite_traces};
use slicesim::trace::{canonical_fig1, generate, Pattern, Trace, WorkloadSpec};

const FIG1_RUNTIME_LIMIT: Duration = Duration::from_secs(1);
const SUITE_RUNTIME_LIMIT: Duration = Duration::from_secs(30);
const L1_SWEEP_RUNTIME_LIMIT: Duration = Duration::from_secs(60);
/// Strict FREEWAY < LSC is required on mixed traces at or above this fraction.
const STRICT_MIXED_FRACTION: f64 = 0.3;
const PREFETCH_MPKI_REDUCTION_MIN: f64 = 0.90;
const RANDOM_MPKI_CHANGE_MAX: f64 = 0.05;
const L1_LATENCIES: [u32; 4] = [2, 4, 6, 8];
const THREAD_COUNTS: [usize; 3] = [1, 2, 8];

const KB: u64 = 1024;

type Job = (Trace, CoreConfig, HierarchyConfig);

/// Runs simulations and remembers every (input, result) for the
/// determinism replay.
#[derive(Default)]
struct Runner {
    log: RefCell<Vec<(Job, RunStats)>>,
}

impl Runner {
    fn run(&self, trace: &Trace, core: &CoreConfig, mem: &HierarchyConfig) -> Result<RunStats, String> {
        let stats = simulate(trace, core, mem).map_err(|e| format!("{} on {}: {e}", core.variant, trace.meta.name))?;
        self.log
            .borrow_mut()
            .push(((trace.clone(), core.clone(), mem.clone()), stats.clone()));
        Ok(stats)
    }

    fn cycles(&self, trace: &Trace, core: &CoreConfig, mem: &HierarchyConfig) -> Result<u64, String> {
        self.run(trace, core, mem).map(|s| s.cycles)
    }
}

type Check = Result<String, String>;
type Criterion = (&'static str, fn(&Runner) -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

struct Fig1Oracle {
    variant: Variant,
    cycles: u64,
    issue: Vec<u64>,
    overlap: Vec<u64>,
}

fn fig1_oracle() -> Vec<Fig1Oracle> {
    include_str!("data/fig1_timeline.txt")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            let nums = |s: &str| -> Vec<u64> {
                if s == "-" {
                    Vec::new()
                } else {
                    s.split(',').map(|v| v.parse().unwrap()).collect()
                }
            };
            Fig1Oracle {
                variant: f[0].parse().unwrap(),
                cycles: f[1].parse().unwrap(),
                issue: nums(f[2]),
                overlap: nums(f[3]),
            }
        })
        .collect()
}

fn fig1_overlap(r: &Runner) -> Check {
    let start = Instant::now();
    let trace = canonical_fig1();
    let mem = HierarchyConfig::default();
    let oracle = fig1_oracle();
    ensure(oracle.len() == 5, || "timeline oracle must list all five cores".into())?;
    for o in &oracle {
        let mut core = CoreConfig::new(o.variant);
        core.options.warm_ist = true;
        let (stats, detail) = simulate_detailed(&trace, &core, &mem).map_err(|e| e.to_string())?;
        r.run(&trace, &core, &mem)?;
        let issue: Vec<u64> = (0..trace.len() as u64)
            .map(|s| detail.issue_cycle(s).unwrap())
            .collect();
        ensure(issue == o.issue, || {
            format!("{}: issue {issue:?} != {:?}", o.variant, o.issue)
        })?;
        ensure(stats.cycles == o.cycles, || {
            format!("{}: {} cycles != {}", o.variant, stats.cycles, o.cycles)
        })?;
        let overlap = detail.overlapping_loads();
        ensure(overlap == o.overlap, || {
            format!("{}: overlap {overlap:?} != {:?}", o.variant, o.overlap)
        })?;
    }
    let expect = |v: Variant| oracle.iter().find(|o| o.variant == v).unwrap().overlap.clone();
    ensure(expect(Variant::Lsc) == [0, 3], || "LSC overlap set".into())?;
    ensure(
        expect(Variant::Freeway) == [0, 3, 7] && expect(Variant::IdealSooo) == [0, 3, 7],
        || "FREEWAY/IDEAL overlap set".into(),
    )?;
    ensure(expect(Variant::Ino).is_empty(), || "INO overlap set".into())?;
    let took = within(FIG1_RUNTIME_LIMIT, start)?;
    Ok(format!(
        "overlap sets and cycle counts match the timeline oracle ({took:.2?})"
    ))
}

fn variant_ordering(r: &Runner) -> Check {
    let start = Instant::now();
    let mem = HierarchyConfig::default();
    let specs = suite_specs();
    ensure(specs.len() >= 12, || "suite has fewer than 12 traces".into())?;
    let mut strict = 0;
    for (spec, trace) in specs.iter().zip(suite_traces()) {
        let c = |v| r.cycles(&trace, &CoreConfig::new(v), &mem);
        let (ideal, fw, lsc, ino) = (
            c(Variant::IdealSooo)?,
            c(Variant::Freeway)?,
            c(Variant::Lsc)?,
            c(Variant::Ino)?,
        );
        let name = &trace.meta.name;
        ensure(ideal <= fw && fw <= lsc && lsc <= ino, || {
            format!("{name}: IDEAL {ideal} FREEWAY {fw} LSC {lsc} INO {ino}")
        })?;
        if let Pattern::MixedSlices { dependent_fraction } = spec.pattern {
            if dependent_fraction >= STRICT_MIXED_FRACTION {
                ensure(fw < lsc, || format!("{name}: FREEWAY {fw} not below LSC {lsc}"))?;
                strict += 1;
            }
        }
    }
    ensure(strict > 0, || "no mixed trace exercised the strict check".into())?;
    let took = within(SUITE_RUNTIME_LIMIT, start)?;
    Ok(format!("{} traces ordered, {strict} strict ({took:.2?})", specs.len()))
}

fn zero_dependent_equivalence(r: &Runner) -> Check {
    let mem = HierarchyConfig::default();
    let mut checked = 0;
    for trace in suite_traces() {
        if oracle_slice_graph(&trace.ops).has_edges() {
            continue;
        }
        let fw = r.cycles(&trace, &CoreConfig::new(Variant::Freeway), &mem)?;
        let lsc = r.cycles(&trace, &CoreConfig::new(Variant::Lsc), &mem)?;
        ensure(fw == lsc, || format!("{}: FREEWAY {fw} != LSC {lsc}", trace.meta.name))?;
        checked += 1;
    }
    ensure(checked > 0, || "no edge-free trace in the suite".into())?;
    Ok(format!("{checked} edge-free traces identical"))
}

fn classifier_soundness(_: &Runner) -> Check {
    let mut loops = 0;
    for trace in suite_traces() {
        if trace.meta.iterations < 2 {
            continue;
        }
        loops += 1;
        let graph = oracle_slice_graph(&trace.ops);
        let final_start = (trace.len() - trace.final_iteration().len()) as u64;
        let mut slicer = Slicer::new(Ist::unbounded());
        let mut mismatches = 0;
        for op in &trace.ops {
            let info = slicer.process(op);
            let truth = graph.class[op.seq as usize];
            if op.seq >= final_start && (info.is_slice, info.is_dependent) != (truth.is_slice, truth.is_dependent) {
                mismatches += 1;
            }
        }
        ensure(mismatches == 0, || {
            format!("{}: {mismatches} mismatches", trace.meta.name)
        })?;
    }
    ensure(loops > 0, || "no loop traces".into())?;
    Ok(format!("0 mismatches over {loops} loop traces"))
}

fn memory_order_audit(r: &Runner) -> Check {
    let mem = HierarchyConfig::default();
    let mut runs = 0;
    let mut loads = 0;
    for trace in suite_traces() {
        for v in Variant::ALL {
            for oracle in [false, true] {
                let mut core = CoreConfig::new(v);
                core.options.oracle_load_spec = oracle;
                let s = r.run(&trace, &core, &mem)?;
                ensure(s.audit.early_completions == 0, || {
                    format!("{v} oracle={oracle} on {}: {:?}", trace.meta.name, s.audit)
                })?;
                loads += s.audit.loads_checked;
                runs += 1;
            }
        }
    }
    ensure(loads > 0, || "audit checked no loads".into())?;
    Ok(format!("{runs} runs, {loads} loads, 0 early completions"))
}

fn stall_attribution(r: &Runner) -> Check {
    let mem = HierarchyConfig::default();
    let mut runs = 0;
    for trace in suite_traces() {
        for v in Variant::ALL {
            let s = r.run(&trace, &CoreConfig::new(v), &mem)?;
            ensure(s.issue_stall.total() == s.zero_issue_cycles, || {
                format!(
                    "{v} on {}: {:?} vs {} zero-issue",
                    trace.meta.name, s.issue_stall, s.zero_issue_cycles
                )
            })?;
            runs += 1;
        }
    }
    // L1-resident: the footprint fits in L1 and the caches start warm.
    let chain = generate(&WorkloadSpec::new(Pattern::DepChain { depth: 1 }, 16 * KB, 200, 3)).unwrap();
    let mut core = CoreConfig::new(Variant::Lsc);
    core.options.warm_caches = true;
    let s = r.run(&chain, &core, &mem)?;
    ensure(s.issue_stall.total() == s.zero_issue_cycles, || "dep-chain sum".into())?;
    ensure(s.issue_stall.slice_dep > 0, || {
        format!("SLICE_DEP is zero: {:?}", s.issue_stall)
    })?;
    let hits = s.producer_hit_site;
    ensure(hits.total() > 0 && hits.l1 == hits.total(), || {
        format!("producer hits {hits:?}")
    })?;
    Ok(format!(
        "sums exact over {runs} runs; dep-chain SLICE_DEP {} cycles, {}/{} producers in L1",
        s.issue_stall.slice_dep,
        hits.l1,
        hits.total()
    ))
}

fn depth_histogram(r: &Runner) -> Check {
    let mem = HierarchyConfig::default();
    for k in 0..=3u32 {
        for iters in [1u32, 50] {
            let trace = generate(&WorkloadSpec::new(Pattern::DepChain { depth: k }, 16 * KB, iters, 11)).unwrap();
            let expect: BTreeMap<u32, u64> = (0..=k).map(|d| (d, iters as u64)).collect();
            for v in Variant::ALL {
                let s = r.run(&trace, &CoreConfig::new(v), &mem)?;
                ensure(s.depth_histogram == expect, || {
                    format!("k={k} n={iters} {v}: {:?} != {expect:?}", s.depth_histogram)
                })?;
            }
        }
    }
    Ok("k = 0..3 exact on every core".into())
}

fn l1_latency_trend(r: &Runner) -> Check {
    let start = Instant::now();
    let trace = generate(&WorkloadSpec::new(
        Pattern::MixedSlices {
            dependent_fraction: 0.5,
        },
        1024 * KB,
        100,
        7,
    ))
    .unwrap();
    let mut ratios = Vec::new();
    for lat in L1_LATENCIES {
        let mut mem = HierarchyConfig::default();
        mem.l1.hit_latency = lat;
        let lsc = r.cycles(&trace, &CoreConfig::new(Variant::Lsc), &mem)?;
        let fw = r.cycles(&trace, &CoreConfig::new(Variant::Freeway), &mem)?;
        ratios.push(lsc as f64 / fw as f64);
    }
    ensure(ratios.windows(2).all(|w| w[1] >= w[0]), || format!("ratios {ratios:?}"))?;
    let took = within(L1_SWEEP_RUNTIME_LIMIT, start)?;
    let shown: Vec<String> = ratios.iter().map(|x| format!("{x:.5}")).collect();
    Ok(format!("LSC/FREEWAY = [{}] ({took:.2?})", shown.join(", ")))
}

fn queue_size_trend(r: &Runner) -> Check {
    let mem = HierarchyConfig::default();
    let mut out = Vec::new();
    for depth in 1..=3 {
        let trace = generate(&WorkloadSpec::new(Pattern::DepChain { depth }, 16 * KB, 300, 3)).unwrap();
        let mut fw = CoreConfig::new(Variant::Freeway);
        fw.set_total_queue_entries(20);
        fw.options.warm_caches = true;
        ensure((fw.q_a, fw.q_b, fw.q_y) == (10, 5, 5), || "FREEWAY split".into())?;
        let mut lsc = CoreConfig::new(Variant::Lsc);
        lsc.options.warm_caches = true;
        ensure((lsc.q_a, lsc.q_b) == (64, 64), || "LSC split".into())?;
        let (f, l) = (r.cycles(&trace, &fw, &mem)?, r.cycles(&trace, &lsc, &mem)?);
        ensure(f <= l, || format!("dep-chain({depth}): FREEWAY-20 {f} > LSC-128 {l}"))?;
        out.push(format!("k{depth} {f}<={l}"));
    }
    Ok(out.join(", "))
}

fn prefetcher_efficacy(r: &Runner) -> Check {
    let mpki = |pattern, prefetch: bool| -> Result<f64, String> {
        let trace = generate(&WorkloadSpec::new(pattern, 4096 * KB, 2000, 3)).unwrap();
        let mut mem = HierarchyConfig::default();
        ensure(4096 * KB > mem.llc.size, || "footprint must exceed the LLC".into())?;
        mem.prefetcher_enabled = prefetch;
        Ok(r.run(&trace, &CoreConfig::new(Variant::Freeway), &mem)?.mpki())
    };
    let stream = Pattern::Stream { stride: 64 };
    let (on, off) = (mpki(stream, true)?, mpki(stream, false)?);
    let reduction = 1.0 - on / off;
    ensure(reduction >= PREFETCH_MPKI_REDUCTION_MIN, || {
        format!("stream MPKI {off} -> {on}")
    })?;
    let (ron, roff) = (mpki(Pattern::IndepLoads, true)?, mpki(Pattern::IndepLoads, false)?);
    let change = (ron - roff).abs() / roff;
    ensure(change < RANDOM_MPKI_CHANGE_MAX, || {
        format!("random MPKI {roff} -> {ron}")
    })?;
    Ok(format!(
        "stream MPKI {off:.1} -> {on:.2} ({:.1}% less), random change {:.2}%",
        100.0 * reduction,
        100.0 * change
    ))
}

fn remaining_opportunity(r: &Runner) -> Check {
    let mem = HierarchyConfig::default();
    let alias = generate(&WorkloadSpec::new(
        Pattern::AliasMix { alias_probability: 1.0 },
        64 * KB,
        150,
        12,
    ))
    .unwrap();
    let mut core = CoreConfig::new(Variant::Freeway);
    let base = r.cycles(&alias, &core, &mem)?;
    core.options.skip_aliased_loads = true;
    let skip = r.cycles(&alias, &core, &mem)?;
    ensure(skip < base, || format!("skip_aliased_loads {base} -> {skip}"))?;
    let mut n = 0;
    for trace in suite_traces() {
        let mut c = CoreConfig::new(Variant::Freeway);
        let b = r.cycles(&trace, &c, &mem)?;
        c.options.second_yiq = true;
        let y2 = r.cycles(&trace, &c, &mem)?;
        ensure(y2 <= b, || format!("{}: second_yiq {b} -> {y2}", trace.meta.name))?;
        n += 1;
    }
    Ok(format!(
        "skip_aliased_loads {base} -> {skip}; second_yiq never slower on {n} traces"
    ))
}

fn determinism(r: &Runner) -> Check {
    let guard = r.log.borrow();
    let log: &[(Job, RunStats)] = &guard;
    ensure(!log.is_empty(), || "no runs recorded".into())?;
    let expected: Vec<&RunStats> = log.iter().map(|(_, s)| s).collect();
    let replay = |threads: usize| -> Result<Vec<RunStats>, String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        pool.install(|| {
            log.par_iter()
                .map(|((t, c, m), _)| simulate(t, c, m).map_err(|e| e.to_string()))
                .collect()
        })
    };
    for threads in THREAD_COUNTS {
        let got = replay(threads)?;
        let diverged = got.iter().zip(&expected).position(|(a, b)| a != *b);
        ensure(diverged.is_none(), || {
            let i = diverged.unwrap();
            format!("run {i} ({}) differs with {threads} threads", log[i].0 .0.meta.name)
        })?;
    }
    ensure(suite_traces() == suite_traces(), || {
        "suite generation is not reproducible".into()
    })?;
    Ok(format!(
        "{} runs identical across {:?} threads",
        log.len(),
        THREAD_COUNTS
    ))
}

fn main() {
    let runner = Runner::default();
    let criteria: [Criterion; 12] = [
        ("fig1 overlap semantics", fig1_overlap),
        ("variant ordering", variant_ordering),
        ("zero-dependent equivalence", zero_dependent_equivalence),
        ("slice classifier soundness", classifier_soundness),
        ("memory-order audit", memory_order_audit),
        ("stall attribution", stall_attribution),
        ("depth histogram", depth_histogram),
        ("L1-latency trend", l1_latency_trend),
        ("queue-size trend", queue_size_trend),
        ("prefetcher efficacy", prefetcher_efficacy),
        ("remaining-opportunity options", remaining_opportunity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check(&runner) {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
