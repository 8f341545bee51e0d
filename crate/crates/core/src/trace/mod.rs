//! Dynamic micro-op traces.
//!
//! A trace is a program-ordered list of [`MicroOp`]s. Values are never
//! computed; only register dependences and memory addresses matter to the
//! timing model. Traces come from the line-oriented text format in
//! [`format`] or from the synthetic generators in [`generate`].

pub mod format;
pub mod generate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use format::{format_trace, parse_trace, parse_trace_with_meta, TraceError};
pub use generate::{canonical_fig1, generate, Pattern, WorkloadSpec};

/// Number of architectural registers.
pub const NUM_REGS: u8 = 64;

/// Architectural register id in `0..64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Reg(u8);

impl Reg {
    pub fn new(id: u8) -> Option<Reg> {
        (id < NUM_REGS).then_some(Reg(id))
    }

    /// Panics on an out-of-range id. Intended for generators and tests.
    pub fn r(id: u8) -> Reg {
        Reg::new(id).unwrap_or_else(|| panic!("register r{id} out of range"))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// Set of architectural registers as a 64-bit mask; iterates in ascending id order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegSet(u64);

impl RegSet {
    pub const EMPTY: RegSet = RegSet(0);

    pub fn insert(&mut self, reg: Reg) -> bool {
        let bit = 1u64 << reg.0;
        let fresh = self.0 & bit == 0;
        self.0 |= bit;
        fresh
    }

    pub fn contains(self, reg: Reg) -> bool {
        self.0 & (1u64 << reg.0) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: RegSet) -> RegSet {
        RegSet(self.0 | other.0)
    }

    pub fn difference(self, other: RegSet) -> RegSet {
        RegSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: RegSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Reg> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let id = bits.trailing_zeros() as u8;
            bits &= bits - 1;
            Some(Reg(id))
        })
    }
}

impl FromIterator<Reg> for RegSet {
    fn from_iter<I: IntoIterator<Item = Reg>>(iter: I) -> Self {
        let mut set = RegSet::EMPTY;
        for reg in iter {
            set.insert(reg);
        }
        set
    }
}

impl<const N: usize> From<[u8; N]> for RegSet {
    fn from(ids: [u8; N]) -> Self {
        ids.into_iter().map(Reg::r).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    Load,
    Store,
    AluInt,
    AluFp,
    Branch,
    Nop,
}

impl OpKind {
    pub fn is_mem(self) -> bool {
        matches!(self, OpKind::Load | OpKind::Store)
    }

    pub fn default_latency(self) -> u32 {
        match self {
            OpKind::AluFp => 3,
            _ => 1,
        }
    }
}

/// A memory reference: byte address and access size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MemRef {
    pub addr: u64,
    pub size: u8,
}

impl MemRef {
    pub fn end(self) -> u64 {
        self.addr + self.size as u64
    }

    pub fn overlaps(self, other: MemRef) -> bool {
        self.addr < other.end() && other.addr < self.end()
    }
}

/// One dynamic instruction.
///
/// For stores, `addr_src` are the address-generation sources and
/// `src \ addr_src` are the data sources. For loads `src == addr_src`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MicroOp {
    pub seq: u64,
    pub pc: u64,
    pub kind: OpKind,
    pub dst: Option<Reg>,
    pub src: RegSet,
    pub addr_src: RegSet,
    pub mem: Option<MemRef>,
    pub exec_latency: u32,
    pub mispredict: bool,
}

impl MicroOp {
    fn base(pc: u64, kind: OpKind) -> MicroOp {
        MicroOp {
            seq: 0,
            pc,
            kind,
            dst: None,
            src: RegSet::EMPTY,
            addr_src: RegSet::EMPTY,
            mem: None,
            exec_latency: kind.default_latency(),
            mispredict: false,
        }
    }

    pub fn load(pc: u64, dst: Reg, addr_src: RegSet, addr: u64, size: u8) -> MicroOp {
        MicroOp {
            dst: Some(dst),
            src: addr_src,
            addr_src,
            mem: Some(MemRef { addr, size }),
            ..MicroOp::base(pc, OpKind::Load)
        }
    }

    pub fn store(pc: u64, addr_src: RegSet, data_src: RegSet, addr: u64, size: u8) -> MicroOp {
        MicroOp {
            src: addr_src.union(data_src),
            addr_src,
            mem: Some(MemRef { addr, size }),
            ..MicroOp::base(pc, OpKind::Store)
        }
    }

    pub fn alu(pc: u64, dst: Reg, src: RegSet) -> MicroOp {
        MicroOp {
            dst: Some(dst),
            src,
            ..MicroOp::base(pc, OpKind::AluInt)
        }
    }

    pub fn fp(pc: u64, dst: Reg, src: RegSet) -> MicroOp {
        MicroOp {
            dst: Some(dst),
            src,
            ..MicroOp::base(pc, OpKind::AluFp)
        }
    }

    pub fn branch(pc: u64, src: RegSet, mispredict: bool) -> MicroOp {
        MicroOp {
            src,
            mispredict,
            ..MicroOp::base(pc, OpKind::Branch)
        }
    }

    pub fn nop(pc: u64) -> MicroOp {
        MicroOp::base(pc, OpKind::Nop)
    }

    pub fn with_latency(mut self, cycles: u32) -> MicroOp {
        self.exec_latency = cycles;
        self
    }

    pub fn data_src(&self) -> RegSet {
        self.src.difference(self.addr_src)
    }

    /// Registers that feed the slice this op belongs to: the address
    /// sources for memory ops, every source otherwise.
    pub fn slice_src(&self) -> RegSet {
        if self.kind.is_mem() {
            self.addr_src
        } else {
            self.src
        }
    }
}

/// Shape of a trace generated from a loop template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub name: String,
    pub loop_body_len: usize,
    pub iterations: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub ops: Vec<MicroOp>,
}

impl Trace {
    /// Wraps a program-ordered list of ops, renumbering `seq` from zero.
    pub fn from_ops(name: impl Into<String>, mut ops: Vec<MicroOp>) -> Trace {
        for (i, op) in ops.iter_mut().enumerate() {
            op.seq = i as u64;
        }
        let meta = TraceMeta {
            name: name.into(),
            loop_body_len: ops.len(),
            iterations: 1,
        };
        Trace { meta, ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Ops of the last loop iteration (the whole trace for non-loop traces).
    pub fn final_iteration(&self) -> &[MicroOp] {
        let body = self.meta.loop_body_len.min(self.ops.len());
        &self.ops[self.ops.len() - body..]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regset_iterates_ascending() {
        let set = RegSet::from([9, 2, 63, 2]);
        let ids: Vec<_> = set.iter().map(Reg::index).collect();
        assert_eq!(ids, vec![2, 9, 63]);
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn store_splits_address_and_data() {
        let st = MicroOp::store(0x14, RegSet::from([2]), RegSet::from([3]), 0x2000, 8);
        assert_eq!(st.src, RegSet::from([2, 3]));
        assert_eq!(st.data_src(), RegSet::from([3]));
        assert!(st.addr_src.is_subset(st.src));
    }

    #[test]
    fn mem_ref_overlap_is_half_open() {
        let a = MemRef { addr: 0x100, size: 8 };
        assert!(a.overlaps(MemRef { addr: 0x107, size: 1 }));
        assert!(!a.overlaps(MemRef { addr: 0x108, size: 8 }));
        assert!(!a.overlaps(MemRef { addr: 0xf8, size: 8 }));
    }
}
