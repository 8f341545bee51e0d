//! Slice identification and dependent-slice classification.
//!
//! Online, in hardware order: [`ibda_observe`] grows the Instruction Slice
//! Table one backward level per encounter, then [`classify`] consults the
//! IST and the Register Dependence Table at rename and propagates the slice
//! dependence bit. [`oracle`] computes the exact offline answer.

pub mod oracle;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::trace::{MicroOp, OpKind, NUM_REGS};

pub use oracle::{ist_warmup_error, oracle_slice_graph, OracleClass, OracleSlice, SliceGraph};

/// PC-indexed Instruction Slice Table.
///
/// `capacity == 0` means unbounded. A bounded table evicts the least
/// recently used PC.
#[derive(Debug, Clone, Default)]
pub struct Ist {
    capacity: usize,
    entries: HashMap<u64, u64>,
    clock: u64,
}

impl Ist {
    pub fn unbounded() -> Ist {
        Ist::default()
    }

    pub fn bounded(capacity: usize) -> Ist {
        Ist {
            capacity,
            ..Ist::default()
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, pc: u64) -> bool {
        self.entries.contains_key(&pc)
    }

    /// Lookup that refreshes the LRU position on a hit.
    pub fn lookup(&mut self, pc: u64) -> bool {
        self.clock += 1;
        match self.entries.get_mut(&pc) {
            Some(stamp) => {
                *stamp = self.clock;
                true
            }
            None => false,
        }
    }

    pub fn insert(&mut self, pc: u64) {
        self.clock += 1;
        if let Some(stamp) = self.entries.get_mut(&pc) {
            *stamp = self.clock;
            return;
        }
        if self.capacity > 0 && self.entries.len() >= self.capacity {
            let victim = self
                .entries
                .iter()
                .min_by_key(|(_, &stamp)| stamp)
                .map(|(&pc, _)| pc)
                .expect("bounded IST is non-empty when full");
            self.entries.remove(&victim);
        }
        self.entries.insert(pc, self.clock);
    }

    /// Resident PCs in ascending order.
    pub fn pcs(&self) -> Vec<u64> {
        let mut pcs: Vec<u64> = self.entries.keys().copied().collect();
        pcs.sort_unstable();
        pcs
    }
}

/// One Register Dependence Table entry.
///
/// `depth` is the dependence depth carried by the register's value: zero
/// for values that do not derive from any load, otherwise one more than the
/// depth of the slice whose load produced it. `dep_bit == (depth > 0)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RdtEntry {
    pub writer_pc: Option<u64>,
    pub writer_seq: Option<u64>,
    pub dep_bit: bool,
    pub depth: u32,
    pub producer_load: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Rdt {
    entries: [RdtEntry; NUM_REGS as usize],
}

impl Default for Rdt {
    fn default() -> Self {
        Rdt {
            entries: [RdtEntry::default(); NUM_REGS as usize],
        }
    }
}

impl Rdt {
    pub fn entry(&self, reg: crate::trace::Reg) -> &RdtEntry {
        &self.entries[reg.index()]
    }

    pub fn entries(&self) -> &[RdtEntry] {
        &self.entries
    }
}

/// Per dynamic op slice classification.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceInfo {
    pub is_slice: bool,
    pub is_dependent: bool,
    /// Slice dependence depth (0 for independent slices and non-slice ops).
    pub depth: u32,
    /// Seq of the terminating memory op; known only for memory ops themselves.
    pub slice_id: Option<u64>,
    /// Load of the producer slice, for dependent slice ops.
    pub producer_load_seq: Option<u64>,
}

/// One backward IBDA step: producers of slice ops join the IST.
pub fn ibda_observe(op: &MicroOp, ist: &mut Ist, rdt: &Rdt) {
    if !(op.kind.is_mem() || ist.lookup(op.pc)) {
        return;
    }
    for reg in op.slice_src().iter() {
        if let Some(pc) = rdt.entries[reg.index()].writer_pc {
            ist.insert(pc);
        }
    }
}

/// Deepest source value among `regs`: (depth, producing load).
fn deepest(rdt: &Rdt, regs: crate::trace::RegSet) -> (u32, Option<u64>) {
    let mut best = (0u32, None);
    for reg in regs.iter() {
        let e = &rdt.entries[reg.index()];
        if !e.dep_bit {
            continue;
        }
        let better = e.depth > best.0 || (e.depth == best.0 && e.producer_load > best.1);
        if better {
            best = (e.depth, e.producer_load);
        }
    }
    best
}

/// Rename-time classification; updates the destination's RDT entry.
pub fn classify(op: &MicroOp, ist: &Ist, rdt: &mut Rdt) -> SliceInfo {
    let is_slice = op.kind.is_mem() || ist.contains(op.pc);
    let (slice_depth, producer) = deepest(rdt, op.slice_src());
    let is_dependent = is_slice && slice_depth > 0;
    let info = SliceInfo {
        is_slice,
        is_dependent,
        depth: if is_dependent { slice_depth } else { 0 },
        slice_id: op.kind.is_mem().then_some(op.seq),
        producer_load_seq: if is_dependent { producer } else { None },
    };

    if let Some(dst) = op.dst {
        let (depth, producer_load) = if op.kind == OpKind::Load {
            (info.depth + 1, Some(op.seq))
        } else {
            deepest(rdt, op.src)
        };
        rdt.entries[dst.index()] = RdtEntry {
            writer_pc: Some(op.pc),
            writer_seq: Some(op.seq),
            dep_bit: depth > 0,
            depth,
            producer_load,
        };
    }
    info
}

/// IST and RDT of one core instance.
#[derive(Debug, Clone, Default)]
pub struct Slicer {
    pub ist: Ist,
    pub rdt: Rdt,
}

impl Slicer {
    pub fn new(ist: Ist) -> Slicer {
        Slicer {
            ist,
            rdt: Rdt::default(),
        }
    }

    /// Decode-time IBDA followed by rename-time classification.
    pub fn process(&mut self, op: &MicroOp) -> SliceInfo {
        ibda_observe(op, &mut self.ist, &self.rdt);
        classify(op, &self.ist, &mut self.rdt)
    }

    /// Runs the whole trace once to train the IST, then clears the RDT.
    pub fn train(&mut self, ops: &[MicroOp]) {
        for op in ops {
            self.process(op);
        }
        self.rdt = Rdt::default();
    }
}
