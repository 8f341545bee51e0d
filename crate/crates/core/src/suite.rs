//! The bundled microbenchmark suite.
//!
//! Fourteen small loop traces spanning every generator pattern, a range of
//! footprints (L1-resident to LLC-exceeding) and a few with branch
//! mispredictions. Each runs in well under a second on every core.

use crate::trace::{generate, Pattern, Trace, WorkloadSpec};

const KB: u64 = 1024;

pub fn suite_specs() -> Vec<WorkloadSpec> {
    use Pattern::*;
    let mixed = |f| MixedSlices { dependent_fraction: f };
    let alias = |p| AliasMix { alias_probability: p };
    vec![
        WorkloadSpec::new(IndepLoads, 1024 * KB, 400, 1),
        WorkloadSpec::new(IndepLoads, 16 * KB, 400, 2),
        WorkloadSpec::new(DepChain { depth: 1 }, 16 * KB, 200, 3),
        WorkloadSpec::new(DepChain { depth: 2 }, 1024 * KB, 150, 4),
        WorkloadSpec::new(DepChain { depth: 3 }, 64 * KB, 100, 5),
        WorkloadSpec::new(mixed(0.3), 256 * KB, 100, 6),
        WorkloadSpec::new(mixed(0.5), 1024 * KB, 100, 7).with_mispredict_rate(0.05),
        WorkloadSpec::new(mixed(0.8), 32 * KB, 100, 8),
        WorkloadSpec::new(mixed(0.5), 8 * KB, 100, 9).with_mispredict_rate(0.1),
        WorkloadSpec::new(alias(0.0), 64 * KB, 150, 10),
        WorkloadSpec::new(alias(0.5), 256 * KB, 150, 11).with_mispredict_rate(0.1),
        WorkloadSpec::new(alias(1.0), 64 * KB, 150, 12),
        WorkloadSpec::new(Stream { stride: 64 }, 2048 * KB, 500, 13),
        WorkloadSpec::new(Stream { stride: 128 }, 64 * KB, 300, 14),
    ]
}

pub fn suite_traces() -> Vec<Trace> {
    suite_specs()
        .iter()
        .map(|s| generate(s).expect("bundled specs are valid"))
        .collect()
}
