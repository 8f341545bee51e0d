//! Post-hoc memory-order check over a finished run.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::trace::{MicroOp, OpKind};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub loads_checked: u64,
    /// Loads that completed before an older overlapping store issued.
    pub early_completions: u64,
    /// Loads that issued before an older overlapping store issued. Implies
    /// nothing about completion, but is the stricter ordering property.
    pub early_accesses: u64,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.early_completions == 0 && self.early_accesses == 0
    }
}

/// Per-op timing, indexed by trace seq: `(issue, complete)` of the load or
/// of the store's memory write.
pub fn audit_memory_order(ops: &[MicroOp], mem_timing: &[Option<(u64, u64)>]) -> AuditReport {
    // Latest store issue cycle per byte among program-order-older stores.
    let mut last_store: HashMap<u64, u64> = HashMap::new();
    let mut report = AuditReport::default();
    for op in ops {
        let Some(m) = op.mem else { continue };
        let (issue, complete) = mem_timing[op.seq as usize].expect("every memory op was timed");
        match op.kind {
            OpKind::Store => {
                for b in m.addr..m.end() {
                    let e = last_store.entry(b).or_insert(issue);
                    *e = (*e).max(issue);
                }
            }
            OpKind::Load => {
                report.loads_checked += 1;
                let newest = (m.addr..m.end()).filter_map(|b| last_store.get(&b)).max();
                if let Some(&store_issue) = newest {
                    if complete < store_issue {
                        report.early_completions += 1;
                    }
                    if issue < store_issue {
                        report.early_accesses += 1;
                    }
                }
            }
            _ => {}
        }
    }
    report
}
