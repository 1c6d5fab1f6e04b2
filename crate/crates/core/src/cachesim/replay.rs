use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::cost::{CostInputs, CostModelConfig, CostReport};
use super::hierarchy::{KvCacheHierarchy, SimStats};
use super::profile::CacheProfile;
use super::SimError;
use crate::grid::BlockKey;
use crate::mapper::{AccessOp, AccessTrace};
use crate::store::{BlockHandle, StoreStats};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayStats {
    pub lookup_events: u64,
    pub insert_events: u64,
    pub remove_events: u64,
    pub hits: u64,
    pub misses: u64,
    /// Cached handles that disagreed with the authoritative map; always 0
    /// for a correct model.
    pub stale_handles: u64,
    pub traversal_cycles: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub profile: String,
    pub sim: SimStats,
    pub replay: ReplayStats,
    pub cost: CostReport,
}

/// Replays `trace` on a fresh hierarchy built from `profile`.
pub fn run_trace(
    trace: &AccessTrace,
    profile: &CacheProfile,
    cost: &CostModelConfig,
    store_stats: &StoreStats,
) -> Result<RunReport, SimError> {
    let mut cache = KvCacheHierarchy::from_profile(profile)?;
    run_trace_on(&mut cache, &profile.name, trace, cost, store_stats)
}

/// Replays `trace` through the lookup wrapper: a cache lookup, and on a miss
/// a store lookup followed by a cache insert. Removes invalidate the cached
/// pair. Handles are synthesized per key and change when a key is re-created
/// after a removal.
pub fn run_trace_on(
    cache: &mut KvCacheHierarchy,
    profile_name: &str,
    trace: &AccessTrace,
    cost: &CostModelConfig,
    store_stats: &StoreStats,
) -> Result<RunReport, SimError> {
    cost.validate()?;
    let mut handles: HashMap<BlockKey, BlockHandle> = HashMap::new();
    let mut next_handle = 0u64;
    let mut handle_for = |key: BlockKey, handles: &mut HashMap<BlockKey, BlockHandle>| {
        *handles.entry(key).or_insert_with(|| {
            next_handle += 1;
            BlockHandle(next_handle - 1)
        })
    };
    let mut stats = ReplayStats::default();
    let mut level_energy = 0.0;
    let positions: Vec<usize> = cache
        .level_configs()
        .enumerate()
        .filter(|(_, l)| l.reserved_ways > 0)
        .map(|(i, _)| i)
        .collect();
    let reserved_levels = positions.len().max(1);

    for ev in trace.events() {
        match ev.op {
            AccessOp::Lookup => {
                stats.lookup_events += 1;
                let truth = handle_for(ev.key, &mut handles);
                let out = cache.kv_lookup(ev.key)?;
                stats.traversal_cycles += out.latency_cycles;
                level_energy += (0..out.levels_visited).map(|p| cost.level_energy(p)).sum::<f64>();
                match out.handle {
                    Some(h) => {
                        stats.hits += 1;
                        if h != truth {
                            stats.stale_handles += 1;
                        }
                    }
                    None => {
                        stats.misses += 1;
                        cache.kv_insert(ev.key, truth)?;
                        level_energy += (0..reserved_levels).map(|p| cost.level_energy(p)).sum::<f64>();
                    }
                }
            }
            AccessOp::Insert => {
                stats.insert_events += 1;
                handle_for(ev.key, &mut handles);
            }
            AccessOp::Remove => {
                stats.remove_events += 1;
                handles.remove(&ev.key);
                cache.kv_remove(ev.key)?;
            }
        }
    }

    let cost_report = CostReport::compute(
        cost,
        CostInputs {
            lookups: stats.lookup_events,
            hits: stats.hits,
            traversal_cycles: stats.traversal_cycles,
            level_energy_pj: level_energy,
            avg_probe_steps: store_stats.avg_probe_steps(),
        },
    );
    Ok(RunReport {
        profile: profile_name.to_string(),
        sim: cache.stats(),
        replay: stats,
        cost: cost_report,
    })
}
