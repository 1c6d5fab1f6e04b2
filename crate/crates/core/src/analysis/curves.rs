use serde::{Deserialize, Serialize};

use crate::cachesim::FaBuffer;
use crate::exec::{map_ordered, Execution};
use crate::mapper::{AccessOp, AccessTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitRatePoint {
    pub capacity: usize,
    pub hits: u64,
    pub accesses: u64,
    pub hit_rate: f64,
}

/// 64, 128, …, 16384.
pub fn default_capacities() -> Vec<usize> {
    (6..=14).map(|i| 1usize << i).collect()
}

/// Replays the lookups (and removals) of `trace` through one fully
/// associative LRU buffer per capacity.
pub fn hit_rate_curve(trace: &AccessTrace, capacities: &[usize], exec: Execution) -> Vec<HitRatePoint> {
    map_ordered(exec, capacities, |&capacity| {
        let mut fa = FaBuffer::new(capacity);
        let mut accesses = 0u64;
        for ev in trace.events() {
            match ev.op {
                AccessOp::Lookup => {
                    accesses += 1;
                    fa.access(ev.key);
                }
                AccessOp::Remove => fa.remove(ev.key),
                AccessOp::Insert => {}
            }
        }
        HitRatePoint {
            capacity,
            hits: fa.hits(),
            accesses,
            hit_rate: if accesses == 0 { 0.0 } else { fa.hits() as f64 / accesses as f64 },
        }
    })
}

/// Smallest capacity whose hit rate is within `tolerance` of the curve's
/// best.
pub fn plateau_onset(curve: &[HitRatePoint], tolerance: f64) -> Option<usize> {
    let best = curve.iter().map(|p| p.hit_rate).fold(f64::NEG_INFINITY, f64::max);
    curve
        .iter()
        .find(|p| p.hit_rate >= best - tolerance)
        .map(|p| p.capacity)
}
