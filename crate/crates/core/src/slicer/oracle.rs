//! Offline slice analysis over a complete trace.
//!
//! Walks true register dependences with full knowledge of the trace, so it
//! has no IST training lag. Used as ground truth for the online slicer and
//! for the dependence-depth statistics.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Ist, Slicer};
use crate::trace::{MicroOp, OpKind, NUM_REGS};

/// Exact per-op classification.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleClass {
    pub is_slice: bool,
    pub is_dependent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSlice {
    /// Index of this slice in [`SliceGraph::slices`].
    pub id: usize,
    pub terminator_seq: u64,
    pub is_store_addr: bool,
    pub depth: u32,
    /// Producer slice ids, ascending.
    pub producers: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct SliceGraph {
    pub slices: Vec<OracleSlice>,
    /// Classification of every op, indexed by seq.
    pub class: Vec<OracleClass>,
    by_terminator: HashMap<u64, usize>,
    /// For each op, the writer seq of each source register.
    src_writers: Vec<Vec<(u8, u64)>>,
    /// Slice-relevant source registers of each op.
    addr_regs: Vec<Vec<u8>>,
    kinds: Vec<OpKind>,
}

impl SliceGraph {
    pub fn slice_of(&self, terminator_seq: u64) -> Option<&OracleSlice> {
        self.by_terminator.get(&terminator_seq).map(|&i| &self.slices[i])
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for s in &self.slices {
            for &p in &s.producers {
                edges.push((p, s.id));
            }
        }
        edges
    }

    pub fn has_edges(&self) -> bool {
        self.slices.iter().any(|s| !s.producers.is_empty())
    }

    /// Histogram of slice depths: `hist[d]` slices at depth `d`.
    pub fn depth_histogram(&self) -> Vec<u64> {
        let max = self.slices.iter().map(|s| s.depth).max().unwrap_or(0) as usize;
        let mut hist = vec![0u64; if self.slices.is_empty() { 0 } else { max + 1 }];
        for s in &self.slices {
            hist[s.depth as usize] += 1;
        }
        hist
    }

    /// Seqs of the ops in the slice's backward address-generation closure,
    /// terminator included, ascending.
    pub fn members(&self, slice: &OracleSlice) -> Vec<u64> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![slice.terminator_seq];
        seen.insert(slice.terminator_seq);
        while let Some(seq) = stack.pop() {
            let seq = seq as usize;
            for &(reg, w) in &self.src_writers[seq] {
                if !self.addr_regs[seq].contains(&reg) {
                    continue;
                }
                if self.kinds[w as usize] != OpKind::Load && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// CSV: `slice_id,terminator_seq,depth,producer_slice,is_store_addr`.
    /// Multiple producers are `;`-separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slice_id,terminator_seq,depth,producer_slice,is_store_addr\n");
        for s in &self.slices {
            let producers: Vec<String> = s.producers.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.id,
                s.terminator_seq,
                s.depth,
                producers.join(";"),
                s.is_store_addr as u8
            );
        }
        out
    }
}

/// Builds the exact slice graph of `ops` (indexed by seq).
pub fn oracle_slice_graph(ops: &[MicroOp]) -> SliceGraph {
    let n = ops.len();
    let mut last_writer: [Option<u64>; NUM_REGS as usize] = [None; NUM_REGS as usize];
    let mut src_writers: Vec<Vec<(u8, u64)>> = Vec::with_capacity(n);
    for op in ops {
        let writers = op
            .src
            .iter()
            .filter_map(|r| last_writer[r.index()].map(|w| (r.index() as u8, w)))
            .collect();
        src_writers.push(writers);
        if let Some(dst) = op.dst {
            last_writer[dst.index()] = Some(op.seq);
        }
    }
    let addr_regs: Vec<Vec<u8>> = ops
        .iter()
        .map(|op| op.slice_src().iter().map(|r| r.index() as u8).collect())
        .collect();

    // Reverse pass: an op belongs to some slice if a memory op or an
    // already-marked member reads its result through a non-load chain.
    let mut member = vec![false; n];
    for i in (0..n).rev() {
        let op = &ops[i];
        if !(op.kind.is_mem() || member[i]) {
            continue;
        }
        for &(reg, w) in &src_writers[i] {
            if addr_regs[i].contains(&reg) && ops[w as usize].kind != OpKind::Load {
                member[w as usize] = true;
            }
        }
    }

    // Forward pass over members: which loads each value derives from.
    let mut loads_of: Vec<Vec<u64>> = vec![Vec::new(); n];
    let mut class = vec![OracleClass::default(); n];
    let mut slices: Vec<OracleSlice> = Vec::new();
    let mut by_terminator = HashMap::new();
    for i in 0..n {
        let op = &ops[i];
        if !(op.kind.is_mem() || member[i]) {
            continue;
        }
        let mut producers: BTreeSet<u64> = BTreeSet::new();
        for &(reg, w) in &src_writers[i] {
            if !addr_regs[i].contains(&reg) {
                continue;
            }
            if ops[w as usize].kind == OpKind::Load {
                producers.insert(w);
            } else {
                producers.extend(loads_of[w as usize].iter().copied());
            }
        }
        class[i] = OracleClass {
            is_slice: true,
            is_dependent: !producers.is_empty(),
        };
        if op.kind.is_mem() {
            let producer_ids: Vec<usize> = producers
                .iter()
                .map(|p| by_terminator[p])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let depth = producer_ids
                .iter()
                .map(|&p: &usize| slices[p].depth + 1)
                .max()
                .unwrap_or(0);
            let id = slices.len();
            by_terminator.insert(op.seq, id);
            slices.push(OracleSlice {
                id,
                terminator_seq: op.seq,
                is_store_addr: op.kind == OpKind::Store,
                depth,
                producers: producer_ids,
            });
        } else {
            loads_of[i] = producers.into_iter().collect();
        }
    }

    SliceGraph {
        slices,
        class,
        by_terminator,
        src_writers,
        kinds: ops.iter().map(|o| o.kind).collect(),
        addr_regs,
    }
}

/// Fraction of slice ops the online slicer misclassifies relative to the
/// oracle, over the whole trace. `ist_capacity == 0` is unbounded.
pub fn ist_warmup_error(ops: &[MicroOp], ist_capacity: usize) -> f64 {
    let graph = oracle_slice_graph(ops);
    let mut slicer = Slicer::new(Ist::bounded(ist_capacity));
    let mut mismatches = 0usize;
    let mut slice_ops = 0usize;
    for op in ops {
        let info = slicer.process(op);
        let truth = graph.class[op.seq as usize];
        if truth.is_slice {
            slice_ops += 1;
        }
        if (info.is_slice, info.is_dependent) != (truth.is_slice, truth.is_dependent) {
            mismatches += 1;
        }
    }
    if slice_ops == 0 {
        0.0
    } else {
        mismatches as f64 / slice_ops as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{canonical_fig1, generate, Pattern, WorkloadSpec};

    #[test]
    fn fig1_slices_and_edges() {
        let trace = canonical_fig1();
        let g = oracle_slice_graph(&trace.ops);
        let members: Vec<Vec<u64>> = g.slices.iter().map(|s| g.members(s)).collect();
        assert_eq!(members, vec![vec![0], vec![2, 3], vec![4, 5], vec![6, 7], vec![10]]);
        assert_eq!(g.edges(), vec![(1, 2), (3, 4)]);
        let depths: Vec<u32> = g.slices.iter().map(|s| s.depth).collect();
        assert_eq!(depths, vec![0, 0, 1, 0, 1]);
        // I7's slice contains no load other than its terminator.
        let s3 = g.slice_of(7).unwrap();
        assert!(g
            .members(s3)
            .iter()
            .all(|&m| m == 7 || trace.ops[m as usize].kind != OpKind::Load));
        assert!(g.class[4].is_dependent && g.class[5].is_dependent);
        assert!(!g.class[6].is_dependent && !g.class[7].is_dependent);
        assert!(!g.class[1].is_slice && !g.class[8].is_slice);
    }

    #[test]
    fn dep_chain_depths() {
        let t = generate(&WorkloadSpec::new(Pattern::DepChain { depth: 2 }, 4096, 1, 1)).unwrap();
        let g = oracle_slice_graph(&t.ops);
        let depths: Vec<u32> = g.slices.iter().map(|s| s.depth).collect();
        assert_eq!(depths, vec![0, 1, 2]);
    }

    #[test]
    fn indep_loads_have_no_edges() {
        let t = generate(&WorkloadSpec::new(Pattern::IndepLoads, 1 << 16, 50, 1)).unwrap();
        let g = oracle_slice_graph(&t.ops);
        assert!(!g.has_edges());
        assert_eq!(g.depth_histogram(), vec![50]);
    }

    #[test]
    fn csv_layout() {
        let g = oracle_slice_graph(&canonical_fig1().ops);
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "slice_id,terminator_seq,depth,producer_slice,is_store_addr");
        assert_eq!(lines[3], "2,5,1,1,0");
        assert_eq!(lines.len(), 6);
    }

    #[test]
    fn warmup_error_shrinks_with_iterations() {
        let mk = |iters| {
            generate(&WorkloadSpec::new(
                Pattern::MixedSlices {
                    dependent_fraction: 0.5,
                },
                8192,
                iters,
                5,
            ))
            .unwrap()
        };
        let e1 = ist_warmup_error(&mk(1).ops, 0);
        let e4 = ist_warmup_error(&mk(4).ops, 0);
        let e64 = ist_warmup_error(&mk(64).ops, 0);
        assert!(e1 > 0.0);
        assert!(e4 <= e1 && e64 <= e4);
        assert!(e64 < 0.05);
        let big = mk(8);
        assert_eq!(ist_warmup_error(&big.ops, 0), ist_warmup_error(&big.ops, 128));
    }
}
