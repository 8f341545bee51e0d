use serde::{Deserialize, Serialize};

use super::cache::{Cache, CacheConfig};
use super::prefetch::{StridePrefetcher, DEFAULT_STREAMS};
use super::MemError;

/// Core clock in GHz, used to convert nanosecond latencies to cycles.
pub const CLOCK_GHZ: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    pub l1: CacheConfig,
    /// `hit_latency` is the additional round trip beyond the L1.
    pub llc: CacheConfig,
    /// Additional cycles beyond the LLC round trip.
    pub dram_latency: u32,
    /// Bytes per cycle; `None` is unlimited.
    pub dram_bandwidth: Option<f64>,
    pub prefetcher_enabled: bool,
    pub prefetch_degree: u32,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            l1: CacheConfig::l1_default(),
            llc: CacheConfig::llc_default(),
            dram_latency: ns_to_cycles(45.0),
            dram_bandwidth: None,
            prefetcher_enabled: true,
            prefetch_degree: 1,
        }
    }
}

impl HierarchyConfig {
    pub fn validate(&self) -> Result<(), MemError> {
        self.l1.validate("l1")?;
        self.llc.validate("llc")?;
        if self.l1.mshr_count == 0 {
            return Err(MemError::Config("l1: at least one MSHR required".into()));
        }
        if self.l1.line != self.llc.line {
            return Err(MemError::Config("l1 and llc line sizes differ".into()));
        }
        let l1 = self.l1.hit_latency;
        let llc = l1 + self.llc.hit_latency;
        let mem = llc + self.dram_latency;
        if !(mem > llc && llc > l1) {
            return Err(MemError::Config(format!(
                "latencies must increase down the hierarchy (l1 {l1}, llc {llc}, dram {mem})"
            )));
        }
        if let Some(bw) = self.dram_bandwidth {
            if !(bw.is_finite() && bw > 0.0) {
                return Err(MemError::Config(format!("dram bandwidth {bw} must be positive")));
            }
        }
        if self.prefetcher_enabled && self.prefetch_degree == 0 {
            return Err(MemError::Config("prefetch degree must be at least 1".into()));
        }
        Ok(())
    }

    /// Load-to-use latency of a cold access.
    pub fn memory_latency(&self) -> u32 {
        self.l1.hit_latency + self.llc.hit_latency + self.dram_latency
    }
}

pub fn ns_to_cycles(ns: f64) -> u32 {
    (ns * CLOCK_GHZ).round() as u32
}

/// GB/s to bytes per cycle.
pub fn gbps_to_bytes_per_cycle(gbps: f64) -> f64 {
    gbps / CLOCK_GHZ
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HitLevel {
    L1,
    Llc,
    Mem,
    MshrMerge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemRequest {
    pub addr: u64,
    pub line_addr: u64,
    pub issue_cycle: u64,
    pub complete_cycle: u64,
    pub hit_level: HitLevel,
    /// Where the data came from; for merges, the parent's level.
    pub source_level: HitLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Mshr {
    line_addr: u64,
    complete: u64,
    level: HitLevel,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemCounters {
    pub l1_hits: u64,
    pub l1_misses: u64,
    pub mshr_merges: u64,
    /// Demand loads only.
    pub llc_accesses: u64,
    pub llc_misses: u64,
    pub prefetches_issued: u64,
    pub prefetches_dropped: u64,
    pub useful_prefetches: u64,
    pub writes: u64,
    pub max_mshr_occupancy: u32,
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    cfg: HierarchyConfig,
    l1: Cache,
    llc: Cache,
    mshrs: Vec<Mshr>,
    prefetcher: StridePrefetcher,
    dram_free_at: f64,
    counters: MemCounters,
    /// [issue, complete) of every allocated MSHR.
    miss_intervals: Vec<(u64, u64)>,
}

impl Hierarchy {
    pub fn new(cfg: HierarchyConfig) -> Result<Hierarchy, MemError> {
        cfg.validate()?;
        Ok(Hierarchy {
            l1: Cache::new(cfg.l1),
            llc: Cache::new(cfg.llc),
            mshrs: Vec::with_capacity(cfg.l1.mshr_count as usize),
            prefetcher: StridePrefetcher::new(DEFAULT_STREAMS, cfg.prefetch_degree),
            dram_free_at: 0.0,
            counters: MemCounters::default(),
            miss_intervals: Vec::new(),
            cfg,
        })
    }

    pub fn config(&self) -> &HierarchyConfig {
        &self.cfg
    }

    pub fn counters(&self) -> &MemCounters {
        &self.counters
    }

    pub fn miss_intervals(&self) -> &[(u64, u64)] {
        &self.miss_intervals
    }

    pub fn l1(&self) -> &Cache {
        &self.l1
    }

    pub fn llc(&self) -> &Cache {
        &self.llc
    }

    pub fn prefetcher(&self) -> &StridePrefetcher {
        &self.prefetcher
    }

    fn retire_mshrs(&mut self, cycle: u64) {
        self.mshrs.retain(|m| m.complete > cycle);
    }

    pub fn mshr_occupancy(&mut self, cycle: u64) -> usize {
        self.retire_mshrs(cycle);
        self.mshrs.len()
    }

    /// Whether a demand load to `addr` would be accepted at `cycle`.
    pub fn can_accept(&mut self, addr: u64, cycle: u64) -> bool {
        self.retire_mshrs(cycle);
        let line = self.l1.line_addr(addr);
        self.mshrs.iter().any(|m| m.line_addr == line)
            || self.l1.probe(line).is_some()
            || self.mshrs.len() < self.cfg.l1.mshr_count as usize
    }

    /// Reserves DRAM transfer time for one line arriving at `arrival`;
    /// returns the extra queueing delay.
    fn dram_delay(&mut self, arrival: u64) -> u64 {
        let Some(bw) = self.cfg.dram_bandwidth else {
            return 0;
        };
        let start = self.dram_free_at.max(arrival as f64);
        self.dram_free_at = start + self.cfg.l1.line as f64 / bw;
        (start - arrival as f64).ceil() as u64
    }

    /// Demand load access. Fails only when every MSHR is busy and the line
    /// is neither resident nor in flight.
    pub fn access(&mut self, pc: u64, addr: u64, cycle: u64) -> Result<MemRequest, MemError> {
        self.retire_mshrs(cycle);
        let line = self.l1.line_addr(addr);
        let l1_lat = self.cfg.l1.hit_latency as u64;
        let req = |complete_cycle, hit_level, source_level| MemRequest {
            addr,
            line_addr: line,
            issue_cycle: cycle,
            complete_cycle,
            hit_level,
            source_level,
        };

        if let Some(m) = self.mshrs.iter().find(|m| m.line_addr == line) {
            let r = req(m.complete, HitLevel::MshrMerge, m.level);
            self.l1.touch(line);
            self.counters.mshr_merges += 1;
            return Ok(r);
        }
        if let Some(hit) = self.l1.touch(line) {
            self.counters.l1_hits += 1;
            let done = (cycle + l1_lat).max(hit.ready);
            return Ok(req(done, HitLevel::L1, HitLevel::L1));
        }
        if self.mshrs.len() >= self.cfg.l1.mshr_count as usize {
            return Err(MemError::MshrFull);
        }

        self.counters.l1_misses += 1;
        self.counters.llc_accesses += 1;
        let llc_done = cycle + l1_lat + self.cfg.llc.hit_latency as u64;
        let (complete, level) = match self.llc.touch(line) {
            Some(hit) => {
                if hit.prefetched {
                    self.counters.useful_prefetches += 1;
                    self.llc.mark_demand(line);
                }
                (llc_done.max(hit.ready), HitLevel::Llc)
            }
            None => {
                self.counters.llc_misses += 1;
                let delay = self.dram_delay(llc_done);
                let done = llc_done + delay + self.cfg.dram_latency as u64;
                self.llc.install(line, done, false);
                (done, HitLevel::Mem)
            }
        };
        self.l1.install(line, complete, false);
        self.mshrs.push(Mshr {
            line_addr: line,
            complete,
            level,
        });
        self.counters.max_mshr_occupancy = self.counters.max_mshr_occupancy.max(self.mshrs.len() as u32);
        self.miss_intervals.push((cycle, complete));

        if self.cfg.prefetcher_enabled {
            for target in self.prefetcher.train(pc, line) {
                self.prefetch(target, llc_done);
            }
        }
        Ok(req(complete, level, level))
    }

    /// LLC prefetch fill. Dropped rather than queued when DRAM is busy so
    /// that it never delays demand traffic.
    fn prefetch(&mut self, line: u64, arrival: u64) {
        if self.llc.probe(line).is_some() {
            return;
        }
        if self.cfg.dram_bandwidth.is_some() && self.dram_free_at > arrival as f64 {
            self.counters.prefetches_dropped += 1;
            return;
        }
        self.dram_delay(arrival);
        let ready = arrival + self.cfg.dram_latency as u64;
        self.llc.install(line, ready, true);
        self.counters.prefetches_issued += 1;
    }

    /// Write-allocating store commit. Not counted as a demand access and
    /// holds no MSHR.
    pub fn write(&mut self, addr: u64, cycle: u64) {
        let line = self.l1.line_addr(addr);
        self.counters.writes += 1;
        if self.l1.touch(line).is_none() {
            let ready = match self.llc.touch(line) {
                Some(l) => l.ready.max(cycle),
                None => {
                    self.llc.install(line, cycle, false);
                    cycle
                }
            };
            self.l1.install(line, ready, false);
        }
    }

    /// Installs `addr`'s line in both levels as if long resident.
    pub fn warm(&mut self, addr: u64) {
        let line = self.l1.line_addr(addr);
        self.llc.install(line, 0, false);
        self.l1.install(line, 0, false);
    }
}
