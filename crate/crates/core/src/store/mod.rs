//! Block stores: key → handle indexes over a shared block arena.
//!
//! Three indexes sit behind [`KeyIndex`]: a chained spatial hash, a flat
//! cache-line-packed table (the HTA baseline) and an octree whose leaves are
//! whole blocks. [`VoxelStore`] pairs an index with a [`BlockArena`] and
//! keeps the access counters.

mod arena;
mod chained;
mod flat_hta;
mod octree;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::BlockKey;

pub use arena::{BlockArena, Voxel, VoxelBlock, VOXEL_BYTES};
pub use chained::{ChainedHashStore, CHAINED_BUCKET_BYTES, CHAINED_NODE_BYTES};
pub use flat_hta::{FlatHtaStore, HTA_OVERFLOW_NODE_BYTES};
pub use octree::{OctreeStore, OCTREE_LEAF_BYTES, OCTREE_NODE_BYTES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StoreError {
    #[error("block budget of {budget} live blocks exhausted")]
    CapacityExhausted { budget: usize },
    #[error("block key {key} lies outside the octree root extent of {extent} blocks")]
    OutOfBounds { key: BlockKey, extent: u32 },
    #[error("invalid store config: {0}")]
    InvalidConfig(String),
}

/// Opaque, stable identifier of an allocated block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockHandle(pub u64);

impl BlockHandle {
    pub const INVALID: BlockHandle = BlockHandle(u64::MAX);

    pub fn is_invalid(self) -> bool {
        self == Self::INVALID
    }
}

/// Cost of one index probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Probe {
    pub handle: Option<BlockHandle>,
    /// Bucket-chain hops or tree-node visits.
    pub steps: u64,
    pub comparisons: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoreKind {
    ChainedHash,
    FlatHta,
    Octree,
}

impl StoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StoreKind::ChainedHash => "chained_hash",
            StoreKind::FlatHta => "flat_hta",
            StoreKind::Octree => "octree",
        }
    }
}

/// A key → handle map with instrumented probes.
pub trait KeyIndex: Send + Sync {
    fn kind(&self) -> StoreKind;
    fn probe(&self, key: BlockKey) -> Probe;
    /// Inserts a key known to be absent.
    fn insert(&mut self, key: BlockKey, handle: BlockHandle) -> Result<(), StoreError>;
    fn remove(&mut self, key: BlockKey) -> Option<BlockHandle>;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Bucket count for hash indexes, tree depth for the octree.
    fn bucket_count_or_depth(&self) -> u64;
    fn load_factor(&self) -> f64;
    /// Modeled index bytes (see each index's constants).
    fn model_bytes_index(&self) -> u64;
    fn overflow_entries(&self) -> u64 {
        0
    }
    fn keys(&self) -> Vec<BlockKey>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StoreStats {
    pub lookups: u64,
    pub probe_steps: u64,
    pub key_comparisons: u64,
    pub allocations: u64,
    pub removals: u64,
}

impl StoreStats {
    pub fn avg_probe_steps(&self) -> f64 {
        if self.lookups == 0 {
            0.0
        } else {
            self.probe_steps as f64 / self.lookups as f64
        }
    }

    pub fn avg_key_comparisons(&self) -> f64 {
        if self.lookups == 0 {
            0.0
        } else {
            self.key_comparisons as f64 / self.lookups as f64
        }
    }
}

#[derive(Debug, Default)]
struct Counters {
    lookups: AtomicU64,
    probe_steps: AtomicU64,
    key_comparisons: AtomicU64,
    allocations: AtomicU64,
    removals: AtomicU64,
}

impl Counters {
    fn record(&self, p: &Probe) {
        self.lookups.fetch_add(1, Ordering::Relaxed);
        self.probe_steps.fetch_add(p.steps, Ordering::Relaxed);
        self.key_comparisons.fetch_add(p.comparisons, Ordering::Relaxed);
    }

    fn snapshot(&self) -> StoreStats {
        StoreStats {
            lookups: self.lookups.load(Ordering::Relaxed),
            probe_steps: self.probe_steps.load(Ordering::Relaxed),
            key_comparisons: self.key_comparisons.load(Ordering::Relaxed),
            allocations: self.allocations.load(Ordering::Relaxed),
            removals: self.removals.load(Ordering::Relaxed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintReport {
    pub store_kind: StoreKind,
    pub bucket_count_or_depth: u64,
    pub entries: u64,
    pub load_factor: f64,
    pub model_bytes_index: u64,
    pub model_bytes_payload: u64,
    pub overflow_entries: u64,
}

impl FootprintReport {
    pub fn total_bytes(&self) -> u64 {
        self.model_bytes_index + self.model_bytes_payload
    }
}

/// Store selection as it appears in run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StoreConfig {
    ChainedHash {
        #[serde(default = "default_buckets")]
        bucket_count: u64,
        #[serde(default)]
        block_budget: Option<usize>,
    },
    FlatHta {
        #[serde(default = "default_buckets")]
        bucket_count: u64,
        #[serde(default = "default_pairs_per_bucket")]
        pairs_per_bucket: usize,
        #[serde(default = "default_line_bytes")]
        line_bytes: u64,
        #[serde(default)]
        block_budget: Option<usize>,
    },
    Octree {
        #[serde(default = "default_root_extent")]
        root_extent_blocks: u32,
        #[serde(default)]
        block_budget: Option<usize>,
    },
}

fn default_buckets() -> u64 {
    4096
}
fn default_pairs_per_bucket() -> usize {
    3
}
fn default_line_bytes() -> u64 {
    64
}
fn default_root_extent() -> u32 {
    1024
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig::ChainedHash {
            bucket_count: default_buckets(),
            block_budget: None,
        }
    }
}

impl StoreConfig {
    pub fn kind(&self) -> StoreKind {
        match self {
            StoreConfig::ChainedHash { .. } => StoreKind::ChainedHash,
            StoreConfig::FlatHta { .. } => StoreKind::FlatHta,
            StoreConfig::Octree { .. } => StoreKind::Octree,
        }
    }

    pub fn block_budget(&self) -> Option<usize> {
        match *self {
            StoreConfig::ChainedHash { block_budget, .. }
            | StoreConfig::FlatHta { block_budget, .. }
            | StoreConfig::Octree { block_budget, .. } => block_budget,
        }
    }

    pub fn build_index(&self) -> Result<Box<dyn KeyIndex>, StoreError> {
        Ok(match *self {
            StoreConfig::ChainedHash { bucket_count, .. } => {
                Box::new(ChainedHashStore::new(bucket_count)?)
            }
            StoreConfig::FlatHta {
                bucket_count,
                pairs_per_bucket,
                line_bytes,
                ..
            } => Box::new(FlatHtaStore::new(bucket_count, pairs_per_bucket, line_bytes)?),
            StoreConfig::Octree {
                root_extent_blocks, ..
            } => Box::new(OctreeStore::new(root_extent_blocks)?),
        })
    }
}

/// An index plus the block arena it points into.
///
/// Single writer; `get_block` and block reads take `&self` and may run
/// concurrently between mutations.
pub struct VoxelStore {
    index: Box<dyn KeyIndex>,
    arena: BlockArena,
    counters: Counters,
}

impl VoxelStore {
    pub fn new(index: Box<dyn KeyIndex>, voxels_per_block: usize, budget: Option<usize>) -> Self {
        Self {
            index,
            arena: BlockArena::new(voxels_per_block, budget),
            counters: Counters::default(),
        }
    }

    pub fn from_config(cfg: &StoreConfig, voxels_per_block: usize) -> Result<Self, StoreError> {
        Ok(Self::new(cfg.build_index()?, voxels_per_block, cfg.block_budget()))
    }

    pub fn kind(&self) -> StoreKind {
        self.index.kind()
    }

    pub fn index(&self) -> &dyn KeyIndex {
        self.index.as_ref()
    }

    pub fn get_block(&self, key: BlockKey) -> Option<BlockHandle> {
        let p = self.index.probe(key);
        self.counters.record(&p);
        p.handle
    }

    /// Returns the existing handle, or allocates a zeroed block. The flag is
    /// true when a block was allocated.
    pub fn get_or_allocate(&mut self, key: BlockKey) -> Result<(BlockHandle, bool), StoreError> {
        if let Some(h) = self.get_block(key) {
            return Ok((h, false));
        }
        let handle = self.arena.allocate()?;
        if let Err(e) = self.index.insert(key, handle) {
            self.arena.release(handle);
            return Err(e);
        }
        self.counters.allocations.fetch_add(1, Ordering::Relaxed);
        Ok((handle, true))
    }

    pub fn remove_block(&mut self, key: BlockKey) -> bool {
        match self.index.remove(key) {
            Some(h) => {
                self.arena.release(h);
                self.counters.removals.fetch_add(1, Ordering::Relaxed);
                true
            }
            None => false,
        }
    }

    pub fn block(&self, h: BlockHandle) -> Option<&VoxelBlock> {
        self.arena.get(h)
    }

    pub fn block_mut(&mut self, h: BlockHandle) -> Option<&mut VoxelBlock> {
        self.arena.get_mut(h)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn keys(&self) -> Vec<BlockKey> {
        self.index.keys()
    }

    pub fn stats(&self) -> StoreStats {
        self.counters.snapshot()
    }

    pub fn reset_stats(&mut self) {
        self.counters = Counters::default();
    }

    /// Payload: live blocks × voxels per block × [`VOXEL_BYTES`].
    pub fn memory_footprint(&self) -> FootprintReport {
        FootprintReport {
            store_kind: self.index.kind(),
            bucket_count_or_depth: self.index.bucket_count_or_depth(),
            entries: self.index.len() as u64,
            load_factor: self.index.load_factor(),
            model_bytes_index: self.index.model_bytes_index(),
            model_bytes_payload: self.arena.live() as u64
                * self.arena.voxels_per_block() as u64
                * VOXEL_BYTES,
            overflow_entries: self.index.overflow_entries(),
        }
    }
}
