use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::audit::audit_memory_order;
use super::config::{CoreConfig, Variant};
use super::SimError;
use crate::memory::{Hierarchy, HierarchyConfig, HitLevel, LoadCheck, OracleDep, StoreBuffer};
use crate::slicer::{Ist, SliceInfo, Slicer};
use crate::stats::{mlp_from_intervals, HitSite, RunStats, StallCategory, StallCounts};
use crate::trace::{MicroOp, OpKind, Trace, NUM_REGS};

pub const CYCLE_BUDGET: u64 = 1_000_000_000;

/// Stores crack into an address µop and a data/commit µop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UopPart {
    Whole,
    StoreAddr,
    StoreData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QueueTag {
    A,
    B,
    Y,
    Y2,
    /// Unified out-of-order window.
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fu {
    Int,
    Fp,
    Branch,
    Load,
    Store,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UopRecord {
    pub seq: u64,
    pub part: UopPart,
    pub kind: OpKind,
    pub queue: QueueTag,
    pub dispatch: u64,
    pub issue: Option<u64>,
    pub complete: Option<u64>,
    pub retire: Option<u64>,
    pub hit_level: Option<HitLevel>,
}

/// Per-µop timeline of a run, in dispatch (program) order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunDetail {
    pub uops: Vec<UopRecord>,
}

impl RunDetail {
    pub fn record(&self, seq: u64, part: UopPart) -> Option<&UopRecord> {
        self.uops.iter().find(|u| u.seq == seq && u.part == part)
    }

    pub fn issue_cycle(&self, seq: u64) -> Option<u64> {
        self.uops.iter().find(|u| u.seq == seq).and_then(|u| u.issue)
    }

    /// `(issue cycle, seq, part)` for every µop, sorted.
    pub fn issue_schedule(&self) -> Vec<(u64, u64, UopPart)> {
        let mut s: Vec<_> = self
            .uops
            .iter()
            .map(|u| (u.issue.expect("finished run"), u.seq, u.part))
            .collect();
        s.sort_unstable();
        s
    }

    /// Loads whose memory access overlaps in time with that of the first
    /// load to issue, the first included. Empty unless at least two
    /// overlap.
    pub fn overlapping_loads(&self) -> Vec<u64> {
        let loads: Vec<&UopRecord> = self
            .uops
            .iter()
            .filter(|u| u.kind == OpKind::Load && u.issue.is_some())
            .collect();
        let Some(first) = loads.iter().min_by_key(|u| (u.issue, u.seq)) else {
            return Vec::new();
        };
        let (fi, fc) = (first.issue.unwrap(), first.complete.unwrap());
        let set: Vec<u64> = loads
            .iter()
            .filter(|u| u.issue.unwrap() < fc && fi < u.complete.unwrap())
            .map(|u| u.seq)
            .collect();
        if set.len() < 2 {
            Vec::new()
        } else {
            set
        }
    }
}

#[derive(Debug, Clone)]
struct Uop {
    seq: u64,
    part: UopPart,
    kind: OpKind,
    fu: Fu,
    queue: QueueTag,
    srcs: Vec<usize>,
    info: SliceInfo,
    producer_load: Option<usize>,
    dispatch: u64,
    issue: Option<u64>,
    complete: Option<u64>,
    retire: Option<u64>,
    hit_level: Option<HitLevel>,
    source_level: Option<HitLevel>,
}

#[derive(Debug, Clone)]
struct IssueQueue {
    tag: QueueTag,
    capacity: usize,
    out_of_order: bool,
    entries: VecDeque<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Operands,
    Unresolved,
    Alias,
    Fu,
    Mshr,
    NotOldest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DispatchBlock {
    None,
    Structural,
    Branch,
    Done,
}

#[derive(Debug, Clone, Copy, Default)]
struct FuUse {
    int: u32,
    fp: u32,
    branch: u32,
    load: u32,
    store: u32,
}

struct Sim<'a> {
    ops: &'a [MicroOp],
    cfg: &'a CoreConfig,
    hier: Hierarchy,
    sb: StoreBuffer,
    slicer: Slicer,
    uops: Vec<Uop>,
    uop_of_seq: Vec<usize>,
    last_writer: [Option<usize>; NUM_REGS as usize],
    queues: Vec<IssueQueue>,
    window: VecDeque<usize>,
    events: BinaryHeap<Reverse<(u64, usize)>>,
    next_op: usize,
    staged: Option<SliceInfo>,
    branch_wait: Option<usize>,
    resume_at: u64,
    issue_stall: StallCounts,
    zero_issue_cycles: u64,
    dispatch_stall_cycles: u64,
    frontend_stall_cycles: u64,
    mispredicts: u64,
    retired_uops: u64,
    retired_instrs: u64,
    depth_histogram: BTreeMap<u32, u64>,
    mem_timing: Vec<Option<(u64, u64)>>,
}

/// Runs `trace` to completion and returns its statistics.
pub fn simulate(trace: &Trace, core: &CoreConfig, mem: &HierarchyConfig) -> Result<RunStats, SimError> {
    simulate_detailed(trace, core, mem).map(|(s, _)| s)
}

/// Like [`simulate`], also returning the per-µop timeline.
pub fn simulate_detailed(
    trace: &Trace,
    core: &CoreConfig,
    mem: &HierarchyConfig,
) -> Result<(RunStats, RunDetail), SimError> {
    core.validate()?;
    if trace.is_empty() {
        return Err(SimError::EmptyTrace);
    }
    if trace.ops.iter().enumerate().any(|(i, op)| op.seq != i as u64) {
        return Err(SimError::Config("trace seq numbers must be 0..N-1".into()));
    }
    let mut sim = Sim::new(&trace.ops, core, mem.clone())?;
    let cycles = sim.run()?;
    Ok(sim.finish(&trace.meta.name, cycles))
}

impl<'a> Sim<'a> {
    fn new(ops: &'a [MicroOp], cfg: &'a CoreConfig, mem: HierarchyConfig) -> Result<Sim<'a>, SimError> {
        let mut hier = Hierarchy::new(mem)?;
        if cfg.options.warm_caches {
            for op in ops {
                if let Some(m) = op.mem {
                    hier.warm(m.addr);
                }
            }
        }
        let mut slicer = Slicer::new(Ist::bounded(cfg.ist_capacity as usize));
        if cfg.options.warm_ist {
            slicer.train(ops);
        }
        let queue = |tag, capacity: u32, out_of_order| IssueQueue {
            tag,
            capacity: capacity as usize,
            out_of_order,
            entries: VecDeque::new(),
        };
        let queues = match cfg.variant {
            Variant::Ino => vec![queue(QueueTag::A, cfg.q_a, false)],
            Variant::Lsc => vec![queue(QueueTag::A, cfg.q_a, false), queue(QueueTag::B, cfg.q_b, false)],
            Variant::IdealSooo => vec![queue(QueueTag::A, cfg.q_a, false), queue(QueueTag::B, cfg.q_b, true)],
            Variant::Freeway => {
                let mut q = vec![
                    queue(QueueTag::A, cfg.q_a, false),
                    queue(QueueTag::B, cfg.q_b, false),
                    queue(QueueTag::Y, cfg.q_y, false),
                ];
                if cfg.options.second_yiq {
                    q.push(queue(QueueTag::Y2, cfg.q_y2, false));
                }
                q
            }
            Variant::Ooo => vec![queue(QueueTag::Window, cfg.window, true)],
        };
        Ok(Sim {
            ops,
            cfg,
            hier,
            sb: StoreBuffer::new(cfg.store_buffer_entries(), cfg.seq_span()),
            slicer,
            uops: Vec::with_capacity(ops.len() + ops.len() / 4),
            uop_of_seq: vec![usize::MAX; ops.len()],
            last_writer: [None; NUM_REGS as usize],
            queues,
            window: VecDeque::with_capacity(cfg.window as usize),
            events: BinaryHeap::new(),
            next_op: 0,
            staged: None,
            branch_wait: None,
            resume_at: 0,
            issue_stall: StallCounts::default(),
            zero_issue_cycles: 0,
            dispatch_stall_cycles: 0,
            frontend_stall_cycles: 0,
            mispredicts: 0,
            retired_uops: 0,
            retired_instrs: 0,
            depth_histogram: BTreeMap::new(),
            mem_timing: vec![None; ops.len()],
        })
    }

    fn done(&self) -> bool {
        self.next_op == self.ops.len() && self.window.is_empty()
    }

    fn run(&mut self) -> Result<u64, SimError> {
        let mut c = 0u64;
        loop {
            if c >= CYCLE_BUDGET {
                return Err(SimError::CycleBudget {
                    budget: CYCLE_BUDGET,
                    dump: self.dump(c),
                });
            }
            self.process_events(c);
            let retired = self.retire(c);
            if self.done() {
                return Ok(c + 1);
            }
            let issued = self.issue(c);
            let stall = if issued == 0 {
                self.attribute(c)
            } else {
                StallCategory::None
            };
            let (dispatched, block) = self.dispatch(c);
            self.account(stall, block, 1);
            if retired + issued + dispatched > 0 {
                c += 1;
                continue;
            }
            // Nothing moved: the state is frozen until the next event.
            let Some(next) = self.next_wakeup(c) else {
                return Err(SimError::Deadlock {
                    cycle: c,
                    dump: self.dump(c),
                });
            };
            self.account(stall, block, next - c - 1);
            c = next;
        }
    }

    fn account(&mut self, stall: StallCategory, block: DispatchBlock, cycles: u64) {
        if stall != StallCategory::None {
            self.zero_issue_cycles += cycles;
            self.issue_stall.add(stall, cycles);
        }
        match block {
            DispatchBlock::Structural => self.dispatch_stall_cycles += cycles,
            DispatchBlock::Branch => self.frontend_stall_cycles += cycles,
            DispatchBlock::None | DispatchBlock::Done => {}
        }
    }

    fn next_wakeup(&self, c: u64) -> Option<u64> {
        let event = self.events.peek().map(|Reverse((t, _))| *t).filter(|&t| t > c);
        let resume = (self.resume_at > c && self.next_op < self.ops.len()).then_some(self.resume_at);
        match (event, resume) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }

    fn done_by(&self, id: usize, c: u64) -> bool {
        self.uops[id].complete.is_some_and(|t| t <= c)
    }

    fn process_events(&mut self, c: u64) {
        while let Some(&Reverse((t, id))) = self.events.peek() {
            if t > c {
                break;
            }
            self.events.pop();
            let u = &self.uops[id];
            match u.part {
                UopPart::StoreAddr => {
                    let m = self.ops[u.seq as usize].mem.expect("store has an address");
                    self.sb.resolve(u.seq, m.addr, m.size);
                }
                UopPart::Whole if self.branch_wait == Some(id) => {
                    self.branch_wait = None;
                    self.resume_at = t + self.cfg.branch_penalty as u64;
                }
                _ => {}
            }
        }
    }

    fn retire(&mut self, c: u64) -> usize {
        let mut n = 0;
        while n < self.cfg.issue_width as usize {
            let Some(&id) = self.window.front() else { break };
            if !self.done_by(id, c) {
                break;
            }
            self.window.pop_front();
            let u = &mut self.uops[id];
            u.retire = Some(c);
            self.retired_uops += 1;
            if u.part != UopPart::StoreAddr {
                self.retired_instrs += 1;
            }
            n += 1;
        }
        n
    }

    fn mem_verdict(&self, id: usize) -> LoadCheck {
        let u = &self.uops[id];
        let m = self.ops[u.seq as usize].mem.expect("load has an address");
        if self.cfg.options.oracle_load_spec {
            match self.sb.oracle_mem_dep(u.seq, m, self.ops) {
                OracleDep::Clear => LoadCheck::Proceed,
                OracleDep::Aliased(s) => LoadCheck::StallAlias(s),
            }
        } else {
            self.sb.load_check(u.seq, m.addr, m.size)
        }
    }

    fn fu_free(&self, fu: Fu, used: &FuUse) -> bool {
        let f = &self.cfg.fu;
        match fu {
            Fu::Int => used.int < f.int,
            Fu::Fp => used.fp < f.fp,
            Fu::Branch => used.branch < f.branch,
            Fu::Load => used.load < f.load,
            Fu::Store => used.store < f.store,
            Fu::None => true,
        }
    }

    fn check(&mut self, id: usize, c: u64, used: &FuUse) -> Result<(), Block> {
        let u = &self.uops[id];
        if !u.srcs.iter().all(|&s| self.done_by(s, c)) {
            return Err(Block::Operands);
        }
        let (kind, part, fu, seq) = (u.kind, u.part, u.fu, u.seq);
        if kind == OpKind::Load {
            match self.mem_verdict(id) {
                LoadCheck::Proceed => {}
                LoadCheck::StallUnresolved(_) => return Err(Block::Unresolved),
                LoadCheck::StallAlias(_) => return Err(Block::Alias),
            }
        }
        if part == UopPart::StoreData && self.window.front() != Some(&id) {
            return Err(Block::NotOldest);
        }
        if !self.fu_free(fu, used) {
            return Err(Block::Fu);
        }
        if kind == OpKind::Load {
            let addr = self.ops[seq as usize].mem.expect("load has an address").addr;
            if !self.hier.can_accept(addr, c) {
                return Err(Block::Mshr);
            }
        }
        Ok(())
    }

    /// Oldest-first selection across queue heads (any entry of an
    /// out-of-order queue), repeated until the width or the candidates run
    /// out.
    fn issue(&mut self, c: u64) -> usize {
        let mut used = FuUse::default();
        let mut issued = 0;
        let skip_aliased = self.cfg.options.skip_aliased_loads;
        while issued < self.cfg.issue_width as usize {
            let mut best: Option<(usize, usize, usize)> = None;
            for qi in 0..self.queues.len() {
                let len = self.queues[qi].entries.len();
                for pos in 0..len {
                    let id = self.queues[qi].entries[pos];
                    if best.is_some_and(|(b, _, _)| b < id) {
                        break;
                    }
                    match self.check(id, c, &used) {
                        Ok(()) => {
                            best = Some((id, qi, pos));
                            break;
                        }
                        Err(block) => {
                            let ooo = self.queues[qi].out_of_order;
                            if !(ooo || (skip_aliased && block == Block::Alias)) {
                                break;
                            }
                        }
                    }
                }
            }
            let Some((id, qi, pos)) = best else { break };
            self.queues[qi].entries.remove(pos);
            self.execute(id, c, &mut used);
            issued += 1;
        }
        issued
    }

    fn execute(&mut self, id: usize, c: u64, used: &mut FuUse) {
        let (seq, part, kind, fu) = {
            let u = &self.uops[id];
            (u.seq, u.part, u.kind, u.fu)
        };
        match fu {
            Fu::Int => used.int += 1,
            Fu::Fp => used.fp += 1,
            Fu::Branch => used.branch += 1,
            Fu::Load => used.load += 1,
            Fu::Store => used.store += 1,
            Fu::None => {}
        }
        let ops = self.ops;
        let op = &ops[seq as usize];
        let complete = match (kind, part) {
            (OpKind::Load, _) => {
                let m = op.mem.expect("load has an address");
                let req = self
                    .hier
                    .access(op.pc, m.addr, c)
                    .expect("load issued only when the hierarchy accepts it");
                let u = &mut self.uops[id];
                u.hit_level = Some(req.hit_level);
                u.source_level = Some(req.source_level);
                self.mem_timing[seq as usize] = Some((c, req.complete_cycle));
                req.complete_cycle
            }
            (_, UopPart::StoreAddr) => c + 1,
            (_, UopPart::StoreData) => {
                let m = op.mem.expect("store has an address");
                self.sb.release(seq);
                self.hier.write(m.addr, c);
                self.mem_timing[seq as usize] = Some((c, c + 1));
                c + 1
            }
            _ => c + op.exec_latency.max(1) as u64,
        };
        let u = &mut self.uops[id];
        u.issue = Some(c);
        u.complete = Some(complete);
        self.events.push(Reverse((complete, id)));
    }

    fn is_slice_queue(&self, tag: QueueTag) -> bool {
        match self.cfg.variant {
            Variant::Ino | Variant::Ooo => true,
            _ => tag != QueueTag::A,
        }
    }

    /// Classifies a zero-issue cycle by the oldest slice-queue head.
    fn attribute(&self, c: u64) -> StallCategory {
        let head = self
            .queues
            .iter()
            .filter(|q| self.is_slice_queue(q.tag))
            .filter_map(|q| q.entries.front().copied())
            .min();
        let Some(head) = head else {
            return StallCategory::EmptyBiq;
        };
        let u = &self.uops[head];
        if u.info.is_dependent && u.producer_load.is_some_and(|p| !self.done_by(p, c)) {
            return StallCategory::SliceDep;
        }
        if u.kind == OpKind::Load && matches!(self.mem_verdict(head), LoadCheck::StallAlias(_)) {
            return StallCategory::LsAlias;
        }
        StallCategory::Other
    }

    fn steer(&self, info: &SliceInfo, part: UopPart) -> QueueTag {
        match self.cfg.variant {
            Variant::Ino => QueueTag::A,
            Variant::Ooo => QueueTag::Window,
            _ if part == UopPart::StoreData || !info.is_slice => QueueTag::A,
            Variant::Lsc | Variant::IdealSooo => QueueTag::B,
            Variant::Freeway if !info.is_dependent => QueueTag::B,
            Variant::Freeway if self.cfg.options.second_yiq && info.depth >= 2 => QueueTag::Y2,
            Variant::Freeway => QueueTag::Y,
        }
    }

    fn queue_index(&self, tag: QueueTag) -> usize {
        self.queues
            .iter()
            .position(|q| q.tag == tag)
            .expect("steering targets an existing queue")
    }

    fn dispatch(&mut self, c: u64) -> (usize, DispatchBlock) {
        let mut slots = self.cfg.issue_width as usize;
        let mut dispatched = 0;
        loop {
            if self.next_op == self.ops.len() {
                return (dispatched, DispatchBlock::Done);
            }
            if self.branch_wait.is_some() || c < self.resume_at {
                return (dispatched, DispatchBlock::Branch);
            }
            let ops = self.ops;
            let op = &ops[self.next_op];
            let info = match self.staged {
                Some(info) => info,
                None => {
                    let info = self.slicer.process(op);
                    self.staged = Some(info);
                    info
                }
            };
            let parts: &[UopPart] = if op.kind == OpKind::Store {
                &[UopPart::StoreAddr, UopPart::StoreData]
            } else {
                &[UopPart::Whole]
            };
            // A cracked store may exceed a width of one when it leads the group.
            if parts.len() > slots && dispatched > 0 {
                return (dispatched, DispatchBlock::None);
            }
            if self.window.len() + parts.len() > self.cfg.window as usize {
                return (dispatched, DispatchBlock::Structural);
            }
            let targets: Vec<usize> = parts.iter().map(|&p| self.queue_index(self.steer(&info, p))).collect();
            let mut demand = vec![0usize; self.queues.len()];
            for &q in &targets {
                demand[q] += 1;
            }
            let queue_full = self
                .queues
                .iter()
                .zip(&demand)
                .any(|(q, &d)| q.entries.len() + d > q.capacity);
            if queue_full || (op.kind == OpKind::Store && self.sb.is_full()) {
                return (dispatched, DispatchBlock::Structural);
            }

            if op.kind == OpKind::Store {
                self.sb.allocate(op.seq).expect("store buffer space checked");
            }
            if op.kind.is_mem() {
                *self.depth_histogram.entry(info.depth).or_insert(0) += 1;
            }
            let producer_load = info.producer_load_seq.map(|s| self.uop_of_seq[s as usize]);
            let writers = |regs: crate::trace::RegSet, lw: &[Option<usize>]| -> Vec<usize> {
                regs.iter().filter_map(|r| lw[r.index()]).collect()
            };
            for (&part, &qi) in parts.iter().zip(&targets) {
                let id = self.uops.len();
                let (srcs, fu) = match part {
                    UopPart::StoreAddr => (writers(op.addr_src, &self.last_writer), Fu::Store),
                    UopPart::StoreData => {
                        let mut s = writers(op.data_src(), &self.last_writer);
                        s.push(id - 1);
                        (s, Fu::Store)
                    }
                    UopPart::Whole => {
                        let fu = match op.kind {
                            OpKind::Load => Fu::Load,
                            OpKind::AluInt => Fu::Int,
                            OpKind::AluFp => Fu::Fp,
                            OpKind::Branch => Fu::Branch,
                            OpKind::Nop => Fu::None,
                            OpKind::Store => unreachable!("stores are cracked"),
                        };
                        (writers(op.src, &self.last_writer), fu)
                    }
                };
                if part != UopPart::StoreData {
                    self.uop_of_seq[op.seq as usize] = id;
                }
                self.uops.push(Uop {
                    seq: op.seq,
                    part,
                    kind: op.kind,
                    fu,
                    queue: self.queues[qi].tag,
                    srcs,
                    info,
                    producer_load,
                    dispatch: c,
                    issue: None,
                    complete: None,
                    retire: None,
                    hit_level: None,
                    source_level: None,
                });
                self.queues[qi].entries.push_back(id);
                self.window.push_back(id);
            }
            if let Some(dst) = op.dst {
                self.last_writer[dst.index()] = Some(self.uops.len() - 1);
            }
            dispatched += parts.len();
            slots = slots.saturating_sub(parts.len());
            self.next_op += 1;
            self.staged = None;
            if op.kind == OpKind::Branch && op.mispredict && !self.cfg.options.perfect_frontend {
                self.mispredicts += 1;
                self.branch_wait = Some(self.uops.len() - 1);
                return (dispatched, DispatchBlock::None);
            }
        }
    }

    fn dump(&self, c: u64) -> String {
        let mut out = format!("cycle {c}: ");
        let Some(&head) = self.window.front() else {
            let _ = write!(out, "window empty, next op {} of {}", self.next_op, self.ops.len());
            return out;
        };
        let u = &self.uops[head];
        let _ = write!(
            out,
            "oldest unretired seq {} {:?} {:?} in {:?} (issued {:?}, complete {:?})",
            u.seq, u.kind, u.part, u.queue, u.issue, u.complete
        );
        for &s in &u.srcs {
            let p = &self.uops[s];
            let _ = write!(
                out,
                "; waits on seq {} {:?} (issued {:?}, complete {:?})",
                p.seq, p.part, p.issue, p.complete
            );
        }
        if u.kind == OpKind::Load {
            let _ = write!(out, "; memory check {:?}", self.mem_verdict(head));
        }
        out
    }

    fn finish(self, name: &str, cycles: u64) -> (RunStats, RunDetail) {
        let mut producers: BTreeSet<usize> = BTreeSet::new();
        for u in &self.uops {
            if u.kind.is_mem() && u.part != UopPart::StoreData && u.info.is_dependent {
                if let Some(p) = u.producer_load {
                    producers.insert(p);
                }
            }
        }
        let mut hit_site = HitSite::default();
        for p in producers {
            let u = &self.uops[p];
            if u.info.depth == 0 {
                hit_site.add(u.source_level.expect("producer load executed"));
            }
        }
        let audit = audit_memory_order(self.ops, &self.mem_timing);
        let counters = self.hier.counters().clone();
        let stats = RunStats {
            trace: name.to_string(),
            variant: self.cfg.variant,
            cycles,
            retired_uops: self.retired_uops,
            retired_instrs: self.retired_instrs,
            zero_issue_cycles: self.zero_issue_cycles,
            issue_stall: self.issue_stall,
            dispatch_stall_cycles: self.dispatch_stall_cycles,
            frontend_stall_cycles: self.frontend_stall_cycles,
            mispredicts: self.mispredicts,
            depth_histogram: self.depth_histogram,
            producer_hit_site: hit_site,
            llc_accesses: counters.llc_accesses,
            llc_misses: counters.llc_misses,
            mlp_avg: mlp_from_intervals(self.hier.miss_intervals()),
            mem: counters,
            audit,
        };
        let detail = RunDetail {
            uops: self
                .uops
                .into_iter()
                .map(|u| UopRecord {
                    seq: u.seq,
                    part: u.part,
                    kind: u.kind,
                    queue: u.queue,
                    dispatch: u.dispatch,
                    issue: u.issue,
                    complete: u.complete,
                    retire: u.retire,
                    hit_level: u.hit_level,
                })
                .collect(),
        };
        (stats, detail)
    }
}
