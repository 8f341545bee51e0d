//! Benchmark helpers.

use slicesim::trace::{generate, Pattern, Trace, WorkloadSpec};

/// Workloads sized so one simulation takes on the order of milliseconds.
pub fn bench_traces() -> Vec<Trace> {
    [
        WorkloadSpec::new(Pattern::DepChain { depth: 2 }, 1 << 20, 500, 1),
        WorkloadSpec::new(
            Pattern::MixedSlices {
                dependent_fraction: 0.5,
            },
            256 << 10,
            300,
            2,
        ),
        WorkloadSpec::new(Pattern::Stream { stride: 64 }, 4 << 20, 2000, 3),
    ]
    .iter()
    .map(|s| generate(s).expect("valid bench spec"))
    .collect()
}
