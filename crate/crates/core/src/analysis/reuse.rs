use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::grid::BlockKey;
use crate::mapper::AccessTrace;

/// Bucket `i` covers gaps in `[edges[i], edges[i + 1])`; the last bucket is
/// unbounded above.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapHistogram {
    pub edges: Vec<u64>,
    pub counts: Vec<u64>,
}

impl GapHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Inclusive upper bound of bucket `i`, `None` for the overflow bucket.
    pub fn bucket_hi(&self, i: usize) -> Option<u64> {
        self.edges.get(i + 1).map(|e| e - 1)
    }
}

/// 1, 2, 4, …, 2^20; everything at or above 2^20 lands in the last bucket.
pub fn default_gap_edges() -> Vec<u64> {
    (0..=20).map(|i| 1u64 << i).collect()
}

/// Sequence-number distance between consecutive lookups of the same key,
/// in trace order.
pub fn reuse_gaps(trace: &AccessTrace) -> Vec<u64> {
    let mut last: HashMap<BlockKey, u64> = HashMap::new();
    let mut gaps = Vec::new();
    for ev in trace.lookups() {
        if let Some(prev) = last.insert(ev.key, ev.seq) {
            gaps.push(ev.seq - prev);
        }
    }
    gaps
}

/// `edges` must be strictly increasing and start at 1 or below.
pub fn reuse_gap_histogram(trace: &AccessTrace, edges: &[u64]) -> GapHistogram {
    assert!(!edges.is_empty() && edges[0] <= 1, "gap edges must start at or below 1");
    assert!(edges.windows(2).all(|w| w[0] < w[1]), "gap edges must increase");
    let mut counts = vec![0u64; edges.len()];
    for gap in reuse_gaps(trace) {
        let bucket = edges.partition_point(|&e| e <= gap) - 1;
        counts[bucket] += 1;
    }
    GapHistogram {
        edges: edges.to_vec(),
        counts,
    }
}

pub fn distinct_blocks(trace: &AccessTrace) -> usize {
    trace.lookups().map(|e| e.key).collect::<HashSet<_>>().len()
}

/// `(frame, distinct keys looked up in that frame)` in frame order.
pub fn distinct_blocks_per_frame(trace: &AccessTrace) -> Vec<(u32, usize)> {
    let mut out: Vec<(u32, HashSet<BlockKey>)> = Vec::new();
    for ev in trace.lookups() {
        match out.last_mut() {
            Some((f, set)) if *f == ev.frame => {
                set.insert(ev.key);
            }
            _ => out.push((ev.frame, HashSet::from([ev.key]))),
        }
    }
    out.into_iter().map(|(f, s)| (f, s.len())).collect()
}
