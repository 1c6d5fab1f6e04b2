use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::grid::BlockKey;
use crate::store::{BlockHandle, StoreConfig, StoreKind, VOXEL_BYTES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintRow {
    pub store: StoreKind,
    pub target_load_factor: f64,
    pub bucket_count_or_depth: u64,
    pub entries: u64,
    pub load_factor: f64,
    pub index_bytes: u64,
    pub payload_bytes: u64,
    pub overflow_entries: u64,
    pub total_bytes: u64,
    /// Index bytes over the chained-hash index bytes at the same target.
    pub index_ratio_vs_chained: f64,
    pub total_ratio_vs_chained: f64,
}

/// `n` distinct keys filling a cube around the origin in x-fastest order.
pub fn footprint_keys(n: usize) -> Vec<BlockKey> {
    let side = (n as f64).cbrt().ceil().max(1.0) as i32;
    let half = side / 2;
    (0..n as i32)
        .map(|i| {
            BlockKey::new(
                i % side - half,
                (i / side) % side - half,
                i / (side * side) - half,
            )
        })
        .collect()
}

fn sized_config(kind: StoreKind, target: f64, entries: usize, hta_pairs: usize, hta_line_bytes: u64) -> StoreConfig {
    let n = entries.max(1) as f64;
    match kind {
        StoreKind::ChainedHash => StoreConfig::ChainedHash {
            bucket_count: (n / target).ceil() as u64,
            block_budget: None,
        },
        StoreKind::FlatHta => StoreConfig::FlatHta {
            bucket_count: (n / (target * hta_pairs as f64)).ceil() as u64,
            pairs_per_bucket: hta_pairs,
            line_bytes: hta_line_bytes,
            block_budget: None,
        },
        StoreKind::Octree => {
            let side = (n.cbrt().ceil() as u32 + 2).next_power_of_two().max(2) * 2;
            StoreConfig::Octree {
                root_extent_blocks: side,
                block_budget: None,
            }
        }
    }
}

/// Builds each index at each target load factor, fills it with
/// [`footprint_keys`], and reports the model bytes. Hash tables are sized so
/// that `entries / slots` equals the target; the octree ignores the target.
/// Payload is `entries × voxels_per_block × VOXEL_BYTES` for every store.
pub fn footprint_report(
    stores: &[StoreKind],
    load_factors: &[f64],
    entries: usize,
    voxels_per_block: usize,
) -> Result<Vec<FootprintRow>, AnalysisError> {
    if let Some(bad) = load_factors.iter().find(|&&lf| !(lf > 0.0 && lf.is_finite())) {
        return Err(AnalysisError::InvalidInput(format!("load factor must be > 0, got {bad}")));
    }
    let keys = footprint_keys(entries);
    let payload = entries as u64 * voxels_per_block as u64 * VOXEL_BYTES;
    let mut rows = Vec::new();
    for &target in load_factors {
        let mut measured = Vec::new();
        let mut kinds: Vec<StoreKind> = stores.to_vec();
        if !kinds.contains(&StoreKind::ChainedHash) {
            kinds.insert(0, StoreKind::ChainedHash);
        }
        for &kind in &kinds {
            let mut index = sized_config(kind, target, entries, 3, 64).build_index()?;
            for (i, &k) in keys.iter().enumerate() {
                index.insert(k, BlockHandle(i as u64))?;
            }
            measured.push((kind, index.bucket_count_or_depth(), index.load_factor(), index.model_bytes_index(), index.overflow_entries()));
        }
        let chained = measured
            .iter()
            .find(|m| m.0 == StoreKind::ChainedHash)
            .map(|m| m.3)
            .expect("chained baseline measured");
        for (kind, buckets, lf, index_bytes, overflow) in measured {
            if !stores.contains(&kind) {
                continue;
            }
            let total = index_bytes + payload;
            rows.push(FootprintRow {
                store: kind,
                target_load_factor: target,
                bucket_count_or_depth: buckets,
                entries: entries as u64,
                load_factor: lf,
                index_bytes,
                payload_bytes: payload,
                overflow_entries: overflow,
                total_bytes: total,
                index_ratio_vs_chained: ratio(index_bytes, chained),
                total_ratio_vs_chained: ratio(total, chained + payload),
            });
        }
    }
    Ok(rows)
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn keys_are_distinct() {
        let k = footprint_keys(10_000);
        assert_eq!(k.iter().collect::<HashSet<_>>().len(), 10_000);
    }

    #[test]
    fn zero_entries_have_zero_payload() {
        let rows = footprint_report(
            &[StoreKind::ChainedHash, StoreKind::FlatHta, StoreKind::Octree],
            &[0.5],
            0,
            512,
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.payload_bytes == 0 && r.entries == 0));
    }

    #[test]
    fn rejects_bad_load_factor() {
        assert!(footprint_report(&[StoreKind::FlatHta], &[0.0], 10, 512).is_err());
    }
}
