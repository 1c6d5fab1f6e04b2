use super::{BlockHandle, KeyIndex, Probe, StoreError, StoreKind};
use crate::grid::BlockKey;

/// Internal node: eight 8-byte child pointers.
pub const OCTREE_NODE_BYTES: u64 = 64;
/// Leaf: key (12) + padding (4) + handle (8).
pub const OCTREE_LEAF_BYTES: u64 = 24;

const EMPTY: u32 = u32::MAX;

/// Fixed-depth octree whose leaves are whole blocks. The root covers
/// `[-extent/2, extent/2)` blocks on each axis.
#[derive(Debug, Clone)]
pub struct OctreeStore {
    extent: u32,
    depth: u32,
    /// Internal nodes; node 0 is the root. At the last level children index
    /// into `leaves`.
    nodes: Vec<[u32; 8]>,
    free_nodes: Vec<u32>,
    leaves: Vec<Option<(BlockKey, BlockHandle)>>,
    free_leaves: Vec<u32>,
    live_nodes: usize,
    len: usize,
}

impl OctreeStore {
    pub fn new(root_extent_blocks: u32) -> Result<Self, StoreError> {
        if root_extent_blocks < 2 || !root_extent_blocks.is_power_of_two() {
            return Err(StoreError::InvalidConfig(format!(
                "root_extent_blocks must be a power of two >= 2, got {root_extent_blocks}"
            )));
        }
        Ok(Self {
            extent: root_extent_blocks,
            depth: root_extent_blocks.trailing_zeros(),
            nodes: vec![[EMPTY; 8]],
            free_nodes: Vec::new(),
            leaves: Vec::new(),
            free_leaves: Vec::new(),
            live_nodes: 1,
            len: 0,
        })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    fn shifted(&self, key: BlockKey) -> Option<[u32; 3]> {
        let half = (self.extent / 2) as i64;
        let mut out = [0u32; 3];
        for (o, c) in out.iter_mut().zip([key.x, key.y, key.z]) {
            let u = c as i64 + half;
            if u < 0 || u >= self.extent as i64 {
                return None;
            }
            *o = u as u32;
        }
        Some(out)
    }

    fn octant(u: [u32; 3], level: u32, depth: u32) -> usize {
        let bit = depth - 1 - level;
        (((u[0] >> bit) & 1) | (((u[1] >> bit) & 1) << 1) | (((u[2] >> bit) & 1) << 2)) as usize
    }

    fn alloc_node(&mut self) -> u32 {
        self.live_nodes += 1;
        match self.free_nodes.pop() {
            Some(i) => {
                self.nodes[i as usize] = [EMPTY; 8];
                i
            }
            None => {
                self.nodes.push([EMPTY; 8]);
                (self.nodes.len() - 1) as u32
            }
        }
    }

    fn alloc_leaf(&mut self, entry: (BlockKey, BlockHandle)) -> u32 {
        match self.free_leaves.pop() {
            Some(i) => {
                self.leaves[i as usize] = Some(entry);
                i
            }
            None => {
                self.leaves.push(Some(entry));
                (self.leaves.len() - 1) as u32
            }
        }
    }

    pub fn model_bytes(internal_nodes: u64, leaves: u64) -> u64 {
        internal_nodes * OCTREE_NODE_BYTES + leaves * OCTREE_LEAF_BYTES
    }
}

impl KeyIndex for OctreeStore {
    fn kind(&self) -> StoreKind {
        StoreKind::Octree
    }

    /// One step per child-slot read, so present keys cost exactly `depth`.
    fn probe(&self, key: BlockKey) -> Probe {
        let Some(u) = self.shifted(key) else {
            return Probe {
                handle: None,
                steps: 1,
                comparisons: 0,
            };
        };
        let mut node = 0u32;
        for level in 0..self.depth {
            let child = self.nodes[node as usize][Self::octant(u, level, self.depth)];
            if child == EMPTY {
                return Probe {
                    handle: None,
                    steps: level as u64 + 1,
                    comparisons: 0,
                };
            }
            node = child;
        }
        let hit = self.leaves[node as usize].filter(|&(k, _)| k == key);
        Probe {
            handle: hit.map(|(_, h)| h),
            steps: self.depth as u64,
            comparisons: 1,
        }
    }

    fn insert(&mut self, key: BlockKey, handle: BlockHandle) -> Result<(), StoreError> {
        let u = self.shifted(key).ok_or(StoreError::OutOfBounds {
            key,
            extent: self.extent,
        })?;
        let mut node = 0u32;
        for level in 0..self.depth - 1 {
            let oct = Self::octant(u, level, self.depth);
            let mut child = self.nodes[node as usize][oct];
            if child == EMPTY {
                child = self.alloc_node();
                self.nodes[node as usize][oct] = child;
            }
            node = child;
        }
        let oct = Self::octant(u, self.depth - 1, self.depth);
        debug_assert_eq!(self.nodes[node as usize][oct], EMPTY);
        let leaf = self.alloc_leaf((key, handle));
        self.nodes[node as usize][oct] = leaf;
        self.len += 1;
        Ok(())
    }

    fn remove(&mut self, key: BlockKey) -> Option<BlockHandle> {
        let u = self.shifted(key)?;
        let mut path = Vec::with_capacity(self.depth as usize);
        let mut node = 0u32;
        for level in 0..self.depth {
            let oct = Self::octant(u, level, self.depth);
            path.push((node, oct));
            let child = self.nodes[node as usize][oct];
            if child == EMPTY {
                return None;
            }
            node = child;
        }
        let (k, h) = self.leaves[node as usize]?;
        if k != key {
            return None;
        }
        self.leaves[node as usize] = None;
        self.free_leaves.push(node);
        self.len -= 1;
        // Clear the leaf link, then prune internal nodes left without children.
        let (parent, oct) = path.pop().expect("depth >= 1");
        self.nodes[parent as usize][oct] = EMPTY;
        let mut child = parent;
        while let Some((parent, oct)) = path.pop() {
            if self.nodes[child as usize].iter().any(|&c| c != EMPTY) {
                break;
            }
            self.nodes[parent as usize][oct] = EMPTY;
            self.free_nodes.push(child);
            self.live_nodes -= 1;
            child = parent;
        }
        Some(h)
    }

    fn len(&self) -> usize {
        self.len
    }

    fn bucket_count_or_depth(&self) -> u64 {
        self.depth as u64
    }

    fn load_factor(&self) -> f64 {
        self.len as f64 / (self.extent as f64).powi(3)
    }

    fn model_bytes_index(&self) -> u64 {
        Self::model_bytes(self.live_nodes as u64, self.len as u64)
    }

    fn keys(&self) -> Vec<BlockKey> {
        self.leaves.iter().flatten().map(|&(k, _)| k).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn present_lookups_cost_depth_steps() {
        let mut t = OctreeStore::new(64).unwrap();
        assert_eq!(t.depth(), 6);
        for (i, k) in [(-32, -32, -32), (31, 31, 31), (0, 0, 0), (5, -7, 2)].into_iter().enumerate() {
            let key = BlockKey::new(k.0, k.1, k.2);
            t.insert(key, BlockHandle(i as u64)).unwrap();
            let p = t.probe(key);
            assert_eq!(p.handle, Some(BlockHandle(i as u64)));
            assert_eq!(p.steps, 6);
        }
        let miss = t.probe(BlockKey::new(1, 1, 1));
        assert!(miss.handle.is_none() && miss.steps >= 1);
    }

    #[test]
    fn removal_prunes_back_to_root() {
        let mut t = OctreeStore::new(16).unwrap();
        let empty_bytes = t.model_bytes_index();
        t.insert(BlockKey::new(3, 3, 3), BlockHandle(1)).unwrap();
        assert_eq!(t.model_bytes_index(), 4 * OCTREE_NODE_BYTES + OCTREE_LEAF_BYTES);
        assert_eq!(t.remove(BlockKey::new(3, 3, 3)), Some(BlockHandle(1)));
        assert_eq!(t.model_bytes_index(), empty_bytes);
        assert_eq!(t.remove(BlockKey::new(3, 3, 3)), None);
    }

    #[test]
    fn rejects_bad_extent() {
        assert!(OctreeStore::new(1).is_err());
        assert!(OctreeStore::new(12).is_err());
    }
}
