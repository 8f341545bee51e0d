use serde::{Deserialize, Serialize};

pub const DEFAULT_STREAMS: usize = 16;
pub const CONFIDENCE_MAX: u8 = 3;
pub const CONFIDENCE_THRESHOLD: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrideStream {
    pub tag: u64,
    pub last_addr: u64,
    pub stride: i64,
    pub confidence: u8,
    stamp: u64,
}

/// PC-tagged stride prefetcher with LRU stream replacement.
#[derive(Debug, Clone)]
pub struct StridePrefetcher {
    streams: Vec<StrideStream>,
    capacity: usize,
    degree: u32,
    clock: u64,
}

impl StridePrefetcher {
    pub fn new(capacity: usize, degree: u32) -> StridePrefetcher {
        StridePrefetcher {
            streams: Vec::with_capacity(capacity),
            capacity,
            degree,
            clock: 0,
        }
    }

    pub fn streams(&self) -> &[StrideStream] {
        &self.streams
    }

    pub fn stream(&self, pc: u64) -> Option<&StrideStream> {
        self.streams.iter().find(|s| s.tag == pc)
    }

    /// Trains on one demand lookup and returns the lines to prefetch.
    ///
    /// A new stream starts with stride 0. A matching stride raises the
    /// confidence; a mismatch lowers it, and the new stride is adopted once
    /// confidence has drained to zero.
    pub fn train(&mut self, pc: u64, line_addr: u64) -> Vec<u64> {
        self.clock += 1;
        let clock = self.clock;
        let Some(s) = self.streams.iter_mut().find(|s| s.tag == pc) else {
            let fresh = StrideStream {
                tag: pc,
                last_addr: line_addr,
                stride: 0,
                confidence: 0,
                stamp: clock,
            };
            if self.streams.len() < self.capacity {
                self.streams.push(fresh);
            } else if let Some(victim) = self.streams.iter_mut().min_by_key(|s| s.stamp) {
                *victim = fresh;
            }
            return Vec::new();
        };
        s.stamp = clock;
        let stride = line_addr.wrapping_sub(s.last_addr) as i64;
        if stride == s.stride && stride != 0 {
            s.confidence = (s.confidence + 1).min(CONFIDENCE_MAX);
        } else if s.confidence > 0 {
            s.confidence -= 1;
        } else {
            s.stride = stride;
        }
        s.last_addr = line_addr;
        if s.confidence < CONFIDENCE_THRESHOLD || s.stride == 0 {
            return Vec::new();
        }
        (1..=self.degree as i64)
            .map(|k| line_addr.wrapping_add((s.stride * k) as u64))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_stride_prefetches_next_line_after_third_access() {
        let mut p = StridePrefetcher::new(DEFAULT_STREAMS, 1);
        assert!(p.train(0x40, 0).is_empty());
        assert!(p.train(0x40, 64).is_empty());
        assert!(p.train(0x40, 128).is_empty());
        assert_eq!(p.train(0x40, 192), vec![256]);
        assert_eq!(p.stream(0x40).unwrap().confidence, 2);
    }

    #[test]
    fn confidence_saturates() {
        let mut p = StridePrefetcher::new(DEFAULT_STREAMS, 1);
        for i in 0..20 {
            p.train(1, i * 128);
        }
        assert_eq!(p.stream(1).unwrap().confidence, CONFIDENCE_MAX);
    }

    #[test]
    fn random_addresses_never_prefetch() {
        let mut p = StridePrefetcher::new(DEFAULT_STREAMS, 1);
        let addrs = [0x9000u64, 0x100, 0x7740, 0x2000, 0x40, 0x8880, 0x3300, 0x10, 0x6000];
        for a in addrs {
            assert!(p.train(7, a & !63).is_empty());
        }
    }

    #[test]
    fn seventeenth_stream_evicts_lru_and_evicted_retrains() {
        let mut p = StridePrefetcher::new(DEFAULT_STREAMS, 1);
        for round in 0..4u64 {
            for pc in 0..16u64 {
                p.train(pc, pc * 0x10000 + round * 64);
            }
        }
        assert_eq!(p.stream(0).unwrap().confidence, 2);
        p.train(99, 0);
        assert_eq!(p.streams().len(), 16);
        assert!(p.stream(0).is_none(), "least recently used stream evicted");
        // Stream 0 comes back cold and needs to rebuild confidence.
        assert!(p.train(0, 4 * 64).is_empty());
        assert!(p.train(0, 5 * 64).is_empty());
        assert!(p.train(0, 6 * 64).is_empty());
        assert_eq!(p.train(0, 7 * 64), vec![8 * 64]);
    }

    #[test]
    fn degree_two_issues_two_lines() {
        let mut p = StridePrefetcher::new(DEFAULT_STREAMS, 2);
        for a in [0, 64, 128] {
            p.train(3, a);
        }
        assert_eq!(p.train(3, 192), vec![256, 320]);
    }
}
