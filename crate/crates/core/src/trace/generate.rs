//! Synthetic loop workloads.
//!
//! Each pattern is a static loop body (fixed PCs and register dependences,
//! chosen once from the seed) repeated `iterations` times with fresh memory
//! addresses per iteration. Identical specs produce byte-identical traces.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{MicroOp, Reg, RegSet, Trace, TraceMeta};

pub const LINE_BYTES: u64 = 64;
const DATA_BASE: u64 = 0x1000_0000;
const CODE_BASE: u64 = 0x40_0000;

/// Longest pointer chase DEP_CHAIN can allocate registers for.
pub const MAX_CHAIN_DEPTH: u32 = 31;

/// Slices per MIXED_SLICES loop body.
pub const MIXED_SLICES_PER_BODY: usize = 8;

// Register allocation shared by the templates.
const ADDR_REG: u8 = 8;
const LOAD_REG: u8 = 16;
const USE_REG: u8 = 24;
const COUNTER_REG: u8 = 50;
/// Loop-invariant base register; never written inside any generated trace.
const BASE_REG: u8 = 62;

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("footprint of {0} bytes is smaller than one cache line")]
    FootprintTooSmall(u64),
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("invalid workload parameter: {0}")]
    BadParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Pattern {
    IndepLoads,
    DepChain { depth: u32 },
    MixedSlices { dependent_fraction: f64 },
    AliasMix { alias_probability: f64 },
    Stream { stride: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub pattern: Pattern,
    /// Bytes of data the loop touches.
    pub footprint: u64,
    pub iterations: u32,
    pub seed: u64,
    /// Probability that a loop branch carries the mispredict flag.
    pub mispredict_rate: f64,
}

impl WorkloadSpec {
    pub fn new(pattern: Pattern, footprint: u64, iterations: u32, seed: u64) -> WorkloadSpec {
        WorkloadSpec {
            pattern,
            footprint,
            iterations,
            seed,
            mispredict_rate: 0.0,
        }
    }

    pub fn with_mispredict_rate(mut self, rate: f64) -> WorkloadSpec {
        self.mispredict_rate = rate;
        self
    }

    /// Short identifier safe for file names and CSV cells.
    pub fn name(&self) -> String {
        let tag = match self.pattern {
            Pattern::IndepLoads => "indep".to_string(),
            Pattern::DepChain { depth } => format!("depchain{depth}"),
            Pattern::MixedSlices { dependent_fraction } => format!("mixed{dependent_fraction:.2}"),
            Pattern::AliasMix { alias_probability } => format!("alias{alias_probability:.2}"),
            Pattern::Stream { stride } => format!("stream{stride}"),
        };
        let mut name = format!("{tag}-n{}-fp{}-s{}", self.iterations, self.footprint, self.seed);
        if self.mispredict_rate > 0.0 {
            name.push_str(&format!("-bp{:.2}", self.mispredict_rate));
        }
        name
    }

    fn validate(&self) -> Result<(), GenError> {
        if self.footprint < LINE_BYTES {
            return Err(GenError::FootprintTooSmall(self.footprint));
        }
        if self.iterations == 0 {
            return Err(GenError::NoIterations);
        }
        let unit = |what: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(GenError::BadParameter(format!("{what}={v} outside [0, 1]")))
            }
        };
        unit("mispredict", self.mispredict_rate)?;
        match self.pattern {
            Pattern::DepChain { depth } if depth > MAX_CHAIN_DEPTH => {
                Err(GenError::BadParameter(format!("depth={depth} exceeds register budget")))
            }
            Pattern::MixedSlices { dependent_fraction } => unit("frac", dependent_fraction),
            Pattern::AliasMix { alias_probability } => unit("alias", alias_probability),
            Pattern::Stream { stride: 0 } => Err(GenError::BadParameter("stride=0".into())),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for WorkloadSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pattern {
            Pattern::IndepLoads => write!(f, "indep-loads:")?,
            Pattern::DepChain { depth } => write!(f, "dep-chain:depth={depth},")?,
            Pattern::MixedSlices { dependent_fraction } => write!(f, "mixed-slices:frac={dependent_fraction},")?,
            Pattern::AliasMix { alias_probability } => write!(f, "alias-mix:alias={alias_probability},")?,
            Pattern::Stream { stride } => write!(f, "stream:stride={stride},")?,
        }
        write!(
            f,
            "iters={},footprint={},seed={}",
            self.iterations, self.footprint, self.seed
        )?;
        if self.mispredict_rate > 0.0 {
            write!(f, ",mispredict={}", self.mispredict_rate)?;
        }
        Ok(())
    }
}

impl FromStr for WorkloadSpec {
    type Err = GenError;

    /// Parses `<pattern>[:key=value,...]`, e.g. `dep-chain:depth=2,iters=500,seed=3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let mut depth = 1u32;
        let mut frac = 0.5f64;
        let mut alias = 0.5f64;
        let mut stride = LINE_BYTES;
        let mut spec = WorkloadSpec::new(Pattern::IndepLoads, 16 * 1024, 100, 1);
        let bad = |k: &str, v: &str| GenError::BadParameter(format!("{k}={v}"));
        for kv in params.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| GenError::BadParameter(kv.to_string()))?;
            match k {
                "depth" => depth = v.parse().map_err(|_| bad(k, v))?,
                "frac" => frac = v.parse().map_err(|_| bad(k, v))?,
                "alias" => alias = v.parse().map_err(|_| bad(k, v))?,
                "stride" => stride = v.parse().map_err(|_| bad(k, v))?,
                "iters" => spec.iterations = v.parse().map_err(|_| bad(k, v))?,
                "footprint" => spec.footprint = v.parse().map_err(|_| bad(k, v))?,
                "seed" => spec.seed = v.parse().map_err(|_| bad(k, v))?,
                "mispredict" => spec.mispredict_rate = v.parse().map_err(|_| bad(k, v))?,
                _ => return Err(GenError::BadParameter(format!("unknown key `{k}`"))),
            }
        }
        spec.pattern = match name {
            "indep-loads" | "indep" => Pattern::IndepLoads,
            "dep-chain" => Pattern::DepChain { depth },
            "mixed-slices" | "mixed" => Pattern::MixedSlices {
                dependent_fraction: frac,
            },
            "alias-mix" | "alias" => Pattern::AliasMix {
                alias_probability: alias,
            },
            "stream" => Pattern::Stream { stride },
            other => return Err(GenError::UnknownPattern(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Picks random line-aligned addresses inside the footprint.
struct AddrSource {
    lines: u64,
}

impl AddrSource {
    fn new(footprint: u64) -> AddrSource {
        AddrSource {
            lines: footprint / LINE_BYTES,
        }
    }

    fn line(&self, index: u64) -> u64 {
        DATA_BASE + (index % self.lines) * LINE_BYTES
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> u64 {
        self.line(rng.gen_range(0..self.lines))
    }

    fn random_except(&self, rng: &mut ChaCha8Rng, avoid: u64) -> u64 {
        if self.lines == 1 {
            // Only one line: stay in it but never overlap the avoided bytes.
            return avoid ^ 0x20;
        }
        loop {
            let a = self.random(rng);
            if a != avoid {
                return a;
            }
        }
    }
}

fn pc(slot: usize) -> u64 {
    CODE_BASE + 4 * slot as u64
}

fn r(id: u8) -> Reg {
    Reg::r(id)
}

fn regs<const N: usize>(ids: [u8; N]) -> RegSet {
    RegSet::from(ids)
}

/// Generates the trace for `spec`.
pub fn generate(spec: &WorkloadSpec) -> Result<Trace, GenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let addrs = AddrSource::new(spec.footprint);
    let iterations = spec.iterations as usize;
    let mut ops = Vec::new();
    let body_len;

    match spec.pattern {
        Pattern::IndepLoads => {
            body_len = 1;
            let mut order: Vec<u64> = (0..addrs.lines).collect();
            order.shuffle(&mut rng);
            for i in 0..iterations {
                let addr = addrs.line(order[i % order.len()]);
                ops.push(MicroOp::load(pc(0), r(LOAD_REG), RegSet::EMPTY, addr, 8));
            }
        }
        Pattern::DepChain { depth } => {
            let links = depth as usize + 1;
            body_len = links;
            for _ in 0..iterations {
                for link in 0..links {
                    let addr_src = if link == 0 {
                        RegSet::EMPTY
                    } else {
                        regs([LOAD_REG + link as u8 - 1])
                    };
                    let dst = r(LOAD_REG + link as u8);
                    ops.push(MicroOp::load(pc(link), dst, addr_src, addrs.random(&mut rng), 8));
                }
            }
        }
        Pattern::MixedSlices { dependent_fraction } => {
            let slices = MIXED_SLICES_PER_BODY;
            let dependent = ((dependent_fraction * slices as f64).round() as usize).min(slices - 1);
            let mut candidates: Vec<usize> = (1..slices).collect();
            candidates.shuffle(&mut rng);
            let mut producer = vec![None; slices];
            for &j in &candidates[..dependent] {
                producer[j] = Some(rng.gen_range(0..j));
            }
            body_len = slices * 3 + 2;
            for _ in 0..iterations {
                let mut slot = 0;
                let mut next_pc = || {
                    slot += 1;
                    pc(slot - 1)
                };
                for (j, prod) in producer.iter().enumerate() {
                    let j = j as u8;
                    let agen_src = match prod {
                        Some(p) => regs([LOAD_REG + *p as u8]),
                        None => regs([BASE_REG]),
                    };
                    ops.push(MicroOp::alu(next_pc(), r(ADDR_REG + j), agen_src));
                    let addr = addrs.random(&mut rng);
                    ops.push(MicroOp::load(next_pc(), r(LOAD_REG + j), regs([ADDR_REG + j]), addr, 8));
                    ops.push(MicroOp::alu(
                        next_pc(),
                        r(USE_REG + j),
                        regs([LOAD_REG + j, USE_REG + j]),
                    ));
                }
                push_loop_tail(&mut ops, &mut next_pc, &mut rng, spec.mispredict_rate);
            }
        }
        Pattern::AliasMix { alias_probability } => {
            body_len = 13;
            for _ in 0..iterations {
                let mut slot = 0;
                let mut next_pc = || {
                    slot += 1;
                    pc(slot - 1)
                };
                let store_addr = addrs.random(&mut rng);
                let aliased = rng.gen_bool(alias_probability);
                let paired_addr = if aliased {
                    store_addr
                } else {
                    addrs.random_except(&mut rng, store_addr)
                };
                // Independent load whose consumer produces the store data.
                ops.push(MicroOp::alu(next_pc(), r(ADDR_REG), regs([BASE_REG])));
                ops.push(MicroOp::load(
                    next_pc(),
                    r(LOAD_REG),
                    regs([ADDR_REG]),
                    addrs.random(&mut rng),
                    8,
                ));
                ops.push(MicroOp::alu(next_pc(), r(USE_REG), regs([LOAD_REG, USE_REG])));
                // Store / load pair.
                ops.push(MicroOp::alu(next_pc(), r(ADDR_REG + 1), regs([BASE_REG])));
                ops.push(MicroOp::store(
                    next_pc(),
                    regs([ADDR_REG + 1]),
                    regs([USE_REG]),
                    store_addr,
                    8,
                ));
                ops.push(MicroOp::alu(next_pc(), r(ADDR_REG + 2), regs([BASE_REG])));
                ops.push(MicroOp::load(
                    next_pc(),
                    r(LOAD_REG + 1),
                    regs([ADDR_REG + 2]),
                    paired_addr,
                    8,
                ));
                ops.push(MicroOp::alu(
                    next_pc(),
                    r(USE_REG + 1),
                    regs([LOAD_REG + 1, USE_REG + 1]),
                ));
                // Trailing independent slice that an aliased load can block.
                ops.push(MicroOp::alu(next_pc(), r(ADDR_REG + 3), regs([BASE_REG])));
                ops.push(MicroOp::load(
                    next_pc(),
                    r(LOAD_REG + 2),
                    regs([ADDR_REG + 3]),
                    addrs.random(&mut rng),
                    8,
                ));
                ops.push(MicroOp::alu(
                    next_pc(),
                    r(USE_REG + 2),
                    regs([LOAD_REG + 2, USE_REG + 2]),
                ));
                push_loop_tail(&mut ops, &mut next_pc, &mut rng, spec.mispredict_rate);
            }
        }
        Pattern::Stream { stride } => {
            body_len = 3;
            for i in 0..iterations as u64 {
                let addr = DATA_BASE + (i * stride) % spec.footprint;
                ops.push(MicroOp::alu(pc(0), r(ADDR_REG), regs([ADDR_REG])));
                ops.push(MicroOp::load(pc(1), r(LOAD_REG), regs([ADDR_REG]), addr, 8));
                ops.push(MicroOp::alu(pc(2), r(USE_REG), regs([LOAD_REG, USE_REG])));
            }
        }
    }

    for (i, op) in ops.iter_mut().enumerate() {
        op.seq = i as u64;
    }
    Ok(Trace {
        meta: TraceMeta {
            name: spec.name(),
            loop_body_len: body_len,
            iterations: spec.iterations,
        },
        ops,
    })
}

fn push_loop_tail(
    ops: &mut Vec<MicroOp>,
    next_pc: &mut impl FnMut() -> u64,
    rng: &mut ChaCha8Rng,
    mispredict_rate: f64,
) {
    ops.push(MicroOp::alu(next_pc(), r(COUNTER_REG), regs([COUNTER_REG])));
    let mispredict = mispredict_rate > 0.0 && rng.gen_bool(mispredict_rate);
    ops.push(MicroOp::branch(next_pc(), regs([COUNTER_REG]), mispredict));
}

/// The eleven-instruction overlap example I0..I10.
///
/// S0=(I0) and S1=(I2,I3) are independent, S2=(I4,I5) depends on S1's
/// load, S3=(I6,I7) is independent again and S4=(I10) depends on S3's
/// load. I1, I8 and I9 are non-slice consumers of I0's value. Every load
/// touches a distinct cache line.
pub fn canonical_fig1() -> Trace {
    let line = |i: u64| DATA_BASE + i * 0x1_0000;
    let ops = vec![
        MicroOp::load(pc(0), r(1), RegSet::EMPTY, line(1), 8),
        MicroOp::alu(pc(1), r(2), regs([1])),
        MicroOp::alu(pc(2), r(8), regs([30])),
        MicroOp::load(pc(3), r(3), regs([8]), line(2), 8),
        MicroOp::alu(pc(4), r(4), regs([3])),
        MicroOp::load(pc(5), r(5), regs([4]), line(3), 8),
        MicroOp::alu(pc(6), r(6), regs([31])),
        MicroOp::load(pc(7), r(7), regs([6]), line(4), 8),
        MicroOp::alu(pc(8), r(9), regs([2])),
        MicroOp::alu(pc(9), r(10), regs([9])),
        MicroOp::load(pc(10), r(11), regs([7]), line(5), 8),
    ];
    Trace::from_ops("fig1", ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::OpKind;

    fn loads(trace: &Trace) -> usize {
        trace.ops.iter().filter(|o| o.kind == OpKind::Load).count()
    }

    #[test]
    fn dep_chain_shape() {
        let t = generate(&WorkloadSpec::new(Pattern::DepChain { depth: 1 }, 4096, 4, 9)).unwrap();
        assert_eq!(t.len(), 8);
        assert_eq!(loads(&t), 8);
        for pair in t.ops.chunks(2) {
            assert!(pair[0].addr_src.is_empty());
            assert_eq!(pair[1].addr_src, RegSet::from([pair[0].dst.unwrap().index() as u8]));
        }
    }

    #[test]
    fn indep_loads_share_no_registers() {
        let t = generate(&WorkloadSpec::new(Pattern::IndepLoads, 1 << 20, 100, 3)).unwrap();
        assert_eq!(loads(&t), 100);
        assert!(t.ops.iter().all(|o| o.src.is_empty()));
        let mut lines: Vec<_> = t.ops.iter().map(|o| o.mem.unwrap().addr).collect();
        lines.sort();
        lines.dedup();
        assert_eq!(lines.len(), 100, "addresses are disjoint");
    }

    #[test]
    fn loop_meta_matches_length() {
        for pattern in [
            Pattern::IndepLoads,
            Pattern::DepChain { depth: 3 },
            Pattern::MixedSlices {
                dependent_fraction: 0.5,
            },
            Pattern::AliasMix { alias_probability: 0.5 },
            Pattern::Stream { stride: 64 },
        ] {
            let t = generate(&WorkloadSpec::new(pattern, 8192, 7, 1)).unwrap();
            assert_eq!(t.meta.loop_body_len * t.meta.iterations as usize, t.len());
            let body = t.meta.loop_body_len;
            for (i, op) in t.ops.iter().enumerate() {
                assert_eq!(op.pc, t.ops[i % body].pc, "PCs repeat per iteration");
                assert_eq!(op.seq, i as u64);
            }
        }
    }

    #[test]
    fn errors() {
        let spec = WorkloadSpec::new(Pattern::IndepLoads, 32, 1, 0);
        assert_eq!(generate(&spec).unwrap_err(), GenError::FootprintTooSmall(32));
        assert_eq!(
            "zigzag:iters=3".parse::<WorkloadSpec>().unwrap_err(),
            GenError::UnknownPattern("zigzag".into())
        );
        assert!(generate(&WorkloadSpec::new(Pattern::IndepLoads, 4096, 0, 0)).is_err());
    }

    #[test]
    fn spec_string_round_trips() {
        let spec: WorkloadSpec = "mixed-slices:frac=0.3,iters=50,footprint=8192,seed=4,mispredict=0.05"
            .parse()
            .unwrap();
        assert_eq!(spec.to_string().parse::<WorkloadSpec>().unwrap(), spec);
        assert_eq!(spec.iterations, 50);
        assert!(matches!(spec.pattern, Pattern::MixedSlices { dependent_fraction } if dependent_fraction == 0.3));
    }

    #[test]
    fn mixed_slices_dependent_count() {
        let t = generate(&WorkloadSpec::new(
            Pattern::MixedSlices {
                dependent_fraction: 0.5,
            },
            8192,
            1,
            11,
        ))
        .unwrap();
        // Address generators reading a load destination mark dependent slices.
        let dependent_agens = t
            .ops
            .iter()
            .filter(|o| o.kind == OpKind::AluInt && o.src.len() == 1)
            .filter(|o| {
                let reg = o.src.iter().next().unwrap().index() as u8;
                (LOAD_REG..USE_REG).contains(&reg)
            })
            .count();
        assert_eq!(dependent_agens, 4);
    }

    #[test]
    fn fig1_structure() {
        let t = canonical_fig1();
        assert_eq!(t.len(), 11);
        let kinds: Vec<_> = t.ops.iter().map(|o| o.kind).collect();
        use OpKind::*;
        assert_eq!(
            kinds,
            vec![Load, AluInt, AluInt, Load, AluInt, Load, AluInt, Load, AluInt, AluInt, Load]
        );
        // I5's address comes from I4, which reads I3's destination.
        assert_eq!(t.ops[5].addr_src, RegSet::from([t.ops[4].dst.unwrap().index() as u8]));
        assert!(t.ops[4].src.contains(t.ops[3].dst.unwrap()));
        // I10 reads I7's destination directly.
        assert!(t.ops[10].addr_src.contains(t.ops[7].dst.unwrap()));
    }
}
