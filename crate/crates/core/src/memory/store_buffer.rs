//! Sequence-numbered store buffer used for load disambiguation.
//!
//! Entries are allocated at dispatch in program order, receive their
//! address when the store-address µop executes, and leave when the store is
//! written to memory. There is no store-to-load forwarding: a load that
//! overlaps an older resolved store waits until that store has issued.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::MemError;
use crate::trace::{MemRef, MicroOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreBufferEntry {
    pub seq: u64,
    pub addr: Option<u64>,
    pub size: u8,
    pub resolved: bool,
}

impl StoreBufferEntry {
    fn range(&self) -> Option<MemRef> {
        self.addr.map(|addr| MemRef { addr, size: self.size })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LoadCheck {
    Proceed,
    StallUnresolved(u64),
    StallAlias(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleDep {
    Clear,
    Aliased(u64),
}

#[derive(Debug, Clone)]
pub struct StoreBuffer {
    capacity: usize,
    /// Largest allowed distance between the oldest and youngest in-flight
    /// sequence numbers, emulating a narrow hardware sequence field.
    seq_span: u64,
    entries: VecDeque<StoreBufferEntry>,
}

impl StoreBuffer {
    pub fn new(capacity: usize, seq_span: u64) -> StoreBuffer {
        StoreBuffer {
            capacity,
            seq_span,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    pub fn entries(&self) -> impl Iterator<Item = &StoreBufferEntry> {
        self.entries.iter()
    }

    pub fn allocate(&mut self, seq: u64) -> Result<(), MemError> {
        if self.is_full() {
            return Err(MemError::StoreBufferFull);
        }
        if let Some(last) = self.entries.back() {
            assert!(seq > last.seq, "store buffer allocation out of program order");
        }
        if let Some(first) = self.entries.front() {
            assert!(
                seq - first.seq < self.seq_span,
                "in-flight store sequence span exceeds {}",
                self.seq_span
            );
        }
        self.entries.push_back(StoreBufferEntry {
            seq,
            addr: None,
            size: 0,
            resolved: false,
        });
        Ok(())
    }

    pub fn resolve(&mut self, seq: u64, addr: u64, size: u8) {
        let e = self
            .entries
            .iter_mut()
            .find(|e| e.seq == seq)
            .unwrap_or_else(|| panic!("resolve of unknown store seq {seq}"));
        assert!(!e.resolved, "store seq {seq} resolved twice");
        e.addr = Some(addr);
        e.size = size;
        e.resolved = true;
    }

    pub fn release(&mut self, seq: u64) {
        let head = self.entries.front().map(|e| e.seq);
        assert_eq!(head, Some(seq), "store buffer release out of order");
        self.entries.pop_front();
    }

    /// Disambiguates a load against older stores only.
    pub fn load_check(&self, load_seq: u64, addr: u64, size: u8) -> LoadCheck {
        let load = MemRef { addr, size };
        let older = || self.entries.iter().take_while(|e| e.seq < load_seq);
        if let Some(e) = older().find(|e| !e.resolved) {
            return LoadCheck::StallUnresolved(e.seq);
        }
        match older().find(|e| e.range().is_some_and(|r| r.overlaps(load))) {
            Some(e) => LoadCheck::StallAlias(e.seq),
            None => LoadCheck::Proceed,
        }
    }

    /// Perfect memory dependence prediction: compares against the true
    /// addresses of every older in-flight store, resolved or not. `ops` is
    /// the trace indexed by seq.
    pub fn oracle_mem_dep(&self, load_seq: u64, load: MemRef, ops: &[MicroOp]) -> OracleDep {
        self.entries
            .iter()
            .take_while(|e| e.seq < load_seq)
            .find(|e| ops[e.seq as usize].mem.is_some_and(|m| m.overlaps(load)))
            .map_or(OracleDep::Clear, |e| OracleDep::Aliased(e.seq))
    }
}
