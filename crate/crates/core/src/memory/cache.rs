use serde::{Deserialize, Serialize};

use super::MemError;

pub const LINE_BYTES: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheConfig {
    pub size: u64,
    pub assoc: u32,
    pub line: u64,
    pub hit_latency: u32,
    /// Miss status holding registers; only meaningful for the L1.
    pub mshr_count: u32,
}

impl CacheConfig {
    /// 32 KB, 8-way, 4 cycles, 8 MSHRs.
    pub fn l1_default() -> CacheConfig {
        CacheConfig {
            size: 32 * 1024,
            assoc: 8,
            line: LINE_BYTES,
            hit_latency: 4,
            mshr_count: 8,
        }
    }

    /// 512 KB, 16-way, 30-cycle round trip.
    pub fn llc_default() -> CacheConfig {
        CacheConfig {
            size: 512 * 1024,
            assoc: 16,
            line: LINE_BYTES,
            hit_latency: 30,
            mshr_count: 0,
        }
    }

    pub fn sets(&self) -> u64 {
        self.size / (self.assoc as u64 * self.line)
    }

    pub fn validate(&self, name: &str) -> Result<(), MemError> {
        if self.assoc == 0 || self.line == 0 || !self.line.is_power_of_two() {
            return Err(MemError::Config(format!("{name}: bad associativity or line size")));
        }
        let way_bytes = self.assoc as u64 * self.line;
        if self.size == 0 || !self.size.is_multiple_of(way_bytes) {
            return Err(MemError::Config(format!(
                "{name}: size {} not divisible by assoc x line ({way_bytes})",
                self.size
            )));
        }
        if self.hit_latency == 0 {
            return Err(MemError::Config(format!("{name}: hit latency must be at least 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheLine {
    pub line_addr: u64,
    /// Cycle at which the fill data is present.
    pub ready: u64,
    pub prefetched: bool,
    stamp: u64,
}

/// Set-associative cache with true LRU replacement. Only tags and fill
/// times are tracked.
#[derive(Debug, Clone)]
pub struct Cache {
    cfg: CacheConfig,
    sets: Vec<Vec<CacheLine>>,
    clock: u64,
}

impl Cache {
    pub fn new(cfg: CacheConfig) -> Cache {
        Cache {
            cfg,
            sets: vec![Vec::with_capacity(cfg.assoc as usize); cfg.sets() as usize],
            clock: 0,
        }
    }

    pub fn config(&self) -> &CacheConfig {
        &self.cfg
    }

    pub fn line_addr(&self, addr: u64) -> u64 {
        addr & !(self.cfg.line - 1)
    }

    fn set_index(&self, line_addr: u64) -> usize {
        ((line_addr / self.cfg.line) % self.cfg.sets()) as usize
    }

    /// Looks a line up without touching replacement state.
    pub fn probe(&self, line_addr: u64) -> Option<&CacheLine> {
        self.sets[self.set_index(line_addr)]
            .iter()
            .find(|l| l.line_addr == line_addr)
    }

    /// Looks a line up and promotes it to MRU on a hit.
    pub fn touch(&mut self, line_addr: u64) -> Option<CacheLine> {
        self.clock += 1;
        let clock = self.clock;
        let set = self.set_index(line_addr);
        let line = self.sets[set].iter_mut().find(|l| l.line_addr == line_addr)?;
        line.stamp = clock;
        Some(*line)
    }

    /// Installs a line as MRU, returning the evicted line address if any.
    /// Re-installing a resident line only updates its fill time.
    pub fn install(&mut self, line_addr: u64, ready: u64, prefetched: bool) -> Option<u64> {
        self.clock += 1;
        let clock = self.clock;
        let assoc = self.cfg.assoc as usize;
        let set_idx = self.set_index(line_addr);
        let set = &mut self.sets[set_idx];
        if let Some(line) = set.iter_mut().find(|l| l.line_addr == line_addr) {
            line.stamp = clock;
            line.ready = ready;
            line.prefetched = prefetched;
            return None;
        }
        let fresh = CacheLine {
            line_addr,
            ready,
            prefetched,
            stamp: clock,
        };
        if set.len() < assoc {
            set.push(fresh);
            return None;
        }
        let victim = set.iter_mut().min_by_key(|l| l.stamp).expect("full set has lines");
        let evicted = victim.line_addr;
        *victim = fresh;
        Some(evicted)
    }

    /// Clears the prefetched mark after a demand use.
    pub fn mark_demand(&mut self, line_addr: u64) {
        let set = self.set_index(line_addr);
        if let Some(l) = self.sets[set].iter_mut().find(|l| l.line_addr == line_addr) {
            l.prefetched = false;
        }
    }

    pub fn resident_lines(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }
}
