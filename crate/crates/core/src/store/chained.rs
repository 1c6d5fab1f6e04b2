use super::{BlockHandle, KeyIndex, Probe, StoreError, StoreKind};
use crate::grid::{spatial_hash, BlockKey};

/// Bucket head pointer.
pub const CHAINED_BUCKET_BYTES: u64 = 8;
/// Chain node: next pointer (8) + key (12) + padding (4) + handle (8).
pub const CHAINED_NODE_BYTES: u64 = 32;

/// Separate-chaining hash table over block keys. The bucket array is fixed
/// at construction; chains grow.
#[derive(Debug, Clone)]
pub struct ChainedHashStore {
    buckets: Vec<Vec<(BlockKey, BlockHandle)>>,
    len: usize,
}

impl ChainedHashStore {
    pub fn new(bucket_count: u64) -> Result<Self, StoreError> {
        if bucket_count == 0 {
            return Err(StoreError::InvalidConfig("bucket_count must be >= 1".into()));
        }
        Ok(Self {
            buckets: vec![Vec::new(); bucket_count as usize],
            len: 0,
        })
    }

    fn bucket_of(&self, key: BlockKey) -> usize {
        (spatial_hash(key) % self.buckets.len() as u64) as usize
    }

    /// Index bytes for a table of this shape.
    pub fn model_bytes(bucket_count: u64, entries: u64) -> u64 {
        bucket_count * CHAINED_BUCKET_BYTES + entries * CHAINED_NODE_BYTES
    }
}

impl KeyIndex for ChainedHashStore {
    fn kind(&self) -> StoreKind {
        StoreKind::ChainedHash
    }

    fn probe(&self, key: BlockKey) -> Probe {
        let chain = &self.buckets[self.bucket_of(key)];
        let mut comparisons = 0;
        for &(k, h) in chain {
            comparisons += 1;
            if k == key {
                return Probe {
                    handle: Some(h),
                    steps: comparisons,
                    comparisons,
                };
            }
        }
        Probe {
            handle: None,
            steps: comparisons.max(1),
            comparisons,
        }
    }

    fn insert(&mut self, key: BlockKey, handle: BlockHandle) -> Result<(), StoreError> {
        let b = self.bucket_of(key);
        self.buckets[b].push((key, handle));
        self.len += 1;
        Ok(())
    }

    fn remove(&mut self, key: BlockKey) -> Option<BlockHandle> {
        let b = self.bucket_of(key);
        let chain = &mut self.buckets[b];
        let pos = chain.iter().position(|&(k, _)| k == key)?;
        self.len -= 1;
        Some(chain.remove(pos).1)
    }

    fn len(&self) -> usize {
        self.len
    }

    fn bucket_count_or_depth(&self) -> u64 {
        self.buckets.len() as u64
    }

    fn load_factor(&self) -> f64 {
        self.len as f64 / self.buckets.len() as f64
    }

    fn model_bytes_index(&self) -> u64 {
        Self::model_bytes(self.buckets.len() as u64, self.len as u64)
    }

    fn keys(&self) -> Vec<BlockKey> {
        self.buckets.iter().flatten().map(|&(k, _)| k).collect()
    }
}
