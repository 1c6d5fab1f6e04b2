//! Randomized kv workloads checked against [`ReferenceCache`].
#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voxkv_core::cachesim::{pseudoaddress, CacheProfile, KvCacheHierarchy};
use voxkv_core::grid::BlockKey;
use voxkv_core::store::BlockHandle;

use super::reference_cache::ReferenceCache;

/// Keys grouped by pseudoaddress, searched from a deterministic stream.
pub fn keys_by_pa(nr: u64, want_classes: usize, per_class: usize, seed: u64) -> Vec<Vec<BlockKey>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: HashMap<u64, Vec<BlockKey>> = HashMap::new();
    let mut order = Vec::new();
    while order.len() < want_classes || order.iter().take(want_classes).any(|pa| groups[pa].len() < per_class) {
        let k = BlockKey::new(rng.gen_range(-400..400), rng.gen_range(-400..400), rng.gen_range(-40..40));
        let pa = pseudoaddress(k, nr);
        let g = groups.entry(pa).or_default();
        if g.is_empty() {
            if order.len() >= want_classes {
                continue;
            }
            order.push(pa);
        }
        if g.len() < per_class {
            g.push(k);
        }
    }
    order.into_iter().map(|pa| groups.remove(&pa).unwrap()).collect()
}

#[derive(Debug, Default)]
pub struct OracleRun {
    pub ops: usize,
    pub classes: usize,
    pub lookups: usize,
    pub hits: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<String>,
    pub violations: u64,
}

/// Mixed lookup/insert/remove workload over `min(40, NR)` pseudoaddress
/// classes, five keys each, comparing every lookup with the reference.
pub fn oracle_run(profile: &CacheProfile, ops: usize, seed: u64, sweeps: bool) -> OracleRun {
    let mut h = KvCacheHierarchy::from_profile(profile).unwrap();
    h.set_debug_sweeps(sweeps);
    let mut r = ReferenceCache::new(profile);
    assert_eq!(r.nr(), h.nr());
    let classes = (h.nr() as usize).min(40);
    let keys: Vec<BlockKey> = keys_by_pa(h.nr(), classes, 5, seed).into_iter().flatten().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let mut out = OracleRun {
        ops,
        classes,
        ..Default::default()
    };
    for i in 0..ops {
        let k = keys[rng.gen_range(0..keys.len())];
        match rng.gen_range(0..20) {
            0..=9 => {
                let got = h.kv_lookup(k).unwrap();
                let want = r.lookup(k);
                out.lookups += 1;
                out.hits += usize::from(got.handle.is_some());
                if (got.handle, got.hit_level) != want {
                    out.mismatches += 1;
                    out.first_mismatch
                        .get_or_insert_with(|| format!("op {i} key {k}: got {:?}, want {want:?}", (got.handle, got.hit_level)));
                }
            }
            10..=17 => {
                let hd = BlockHandle(rng.gen_range(0..1000));
                h.kv_insert(k, hd).unwrap();
                r.insert(k, hd);
            }
            _ => {
                h.kv_remove(k).unwrap();
                r.remove(k);
            }
        }
    }
    out.violations = h.stats().invariant_violations;
    out
}
