use std::collections::BTreeMap;

use super::{BlockHandle, KeyIndex, Probe, StoreError, StoreKind};
use crate::grid::{spatial_hash, BlockKey};

/// Overflow map entry, modeled like a chained node.
pub const HTA_OVERFLOW_NODE_BYTES: u64 = 32;

/// Flat table of cache-line-sized buckets, each holding up to
/// `pairs_per_bucket` key/handle pairs. Inserts into a full bucket spill into
/// an overflow map and bump `overflow_inserts`.
#[derive(Debug, Clone)]
pub struct FlatHtaStore {
    slots: Vec<Option<(BlockKey, BlockHandle)>>,
    bucket_count: u64,
    pairs_per_bucket: usize,
    line_bytes: u64,
    overflow: BTreeMap<BlockKey, BlockHandle>,
    overflow_inserts: u64,
    len: usize,
}

impl FlatHtaStore {
    pub fn new(bucket_count: u64, pairs_per_bucket: usize, line_bytes: u64) -> Result<Self, StoreError> {
        if bucket_count == 0 || pairs_per_bucket == 0 {
            return Err(StoreError::InvalidConfig(
                "flat HTA needs bucket_count >= 1 and pairs_per_bucket >= 1".into(),
            ));
        }
        if (pairs_per_bucket as u64) * 20 > line_bytes {
            return Err(StoreError::InvalidConfig(format!(
                "{pairs_per_bucket} pairs of 20 bytes do not fit a {line_bytes}-byte line"
            )));
        }
        Ok(Self {
            slots: vec![None; bucket_count as usize * pairs_per_bucket],
            bucket_count,
            pairs_per_bucket,
            line_bytes,
            overflow: BTreeMap::new(),
            overflow_inserts: 0,
            len: 0,
        })
    }

    pub fn capacity(&self) -> u64 {
        self.bucket_count * self.pairs_per_bucket as u64
    }

    pub fn overflow_inserts(&self) -> u64 {
        self.overflow_inserts
    }

    fn bucket_range(&self, key: BlockKey) -> std::ops::Range<usize> {
        let b = (spatial_hash(key) % self.bucket_count) as usize;
        b * self.pairs_per_bucket..(b + 1) * self.pairs_per_bucket
    }

    pub fn model_bytes(bucket_count: u64, line_bytes: u64, overflow_entries: u64) -> u64 {
        bucket_count * line_bytes + overflow_entries * HTA_OVERFLOW_NODE_BYTES
    }
}

impl KeyIndex for FlatHtaStore {
    fn kind(&self) -> StoreKind {
        StoreKind::FlatHta
    }

    fn probe(&self, key: BlockKey) -> Probe {
        let mut comparisons = 0;
        for (k, h) in self.slots[self.bucket_range(key)].iter().flatten() {
            comparisons += 1;
            if *k == key {
                return Probe {
                    handle: Some(*h),
                    steps: 1,
                    comparisons,
                };
            }
        }
        if self.overflow.is_empty() {
            return Probe {
                handle: None,
                steps: 1,
                comparisons,
            };
        }
        Probe {
            handle: self.overflow.get(&key).copied(),
            steps: 2,
            comparisons: comparisons + 1,
        }
    }

    fn insert(&mut self, key: BlockKey, handle: BlockHandle) -> Result<(), StoreError> {
        let range = self.bucket_range(key);
        match self.slots[range].iter_mut().find(|s| s.is_none()) {
            Some(slot) => *slot = Some((key, handle)),
            None => {
                self.overflow.insert(key, handle);
                self.overflow_inserts += 1;
            }
        }
        self.len += 1;
        Ok(())
    }

    fn remove(&mut self, key: BlockKey) -> Option<BlockHandle> {
        let range = self.bucket_range(key);
        let removed = match self.slots[range].iter_mut().find(|s| matches!(s, Some((k, _)) if *k == key)) {
            Some(slot) => slot.take().map(|(_, h)| h),
            None => self.overflow.remove(&key),
        };
        if removed.is_some() {
            self.len -= 1;
        }
        removed
    }

    fn len(&self) -> usize {
        self.len
    }

    fn bucket_count_or_depth(&self) -> u64 {
        self.bucket_count
    }

    /// Occupancy of the pair slots (overflow entries included).
    fn load_factor(&self) -> f64 {
        self.len as f64 / self.capacity() as f64
    }

    fn model_bytes_index(&self) -> u64 {
        Self::model_bytes(self.bucket_count, self.line_bytes, self.overflow.len() as u64)
    }

    fn overflow_entries(&self) -> u64 {
        self.overflow.len() as u64
    }

    fn keys(&self) -> Vec<BlockKey> {
        self.slots
            .iter()
            .flatten()
            .map(|&(k, _)| k)
            .chain(self.overflow.keys().copied())
            .collect()
    }
}
