use super::{BlockHandle, StoreError};

/// One voxel's TSDF and ESDF payload.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Voxel {
    /// Fused signed distance, positive toward the camera.
    pub sdf: f64,
    /// Euclidean distance to the nearest occupied voxel center.
    pub distance: f64,
    pub weight: f32,
    /// ESDF distance has been written at least once.
    pub observed: bool,
    pub occupied: bool,
}

/// Modeled bytes per voxel; equals `size_of::<Voxel>()`.
pub const VOXEL_BYTES: u64 = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelBlock {
    pub voxels: Vec<Voxel>,
}

impl VoxelBlock {
    pub fn zeroed(voxels_per_block: usize) -> Self {
        Self {
            voxels: vec![Voxel::default(); voxels_per_block],
        }
    }
}

/// Append-only slot arena. Released slots are dropped but never reused, so a
/// handle is never reissued within a run.
#[derive(Debug)]
pub struct BlockArena {
    slots: Vec<Option<VoxelBlock>>,
    live: usize,
    budget: Option<usize>,
    voxels_per_block: usize,
}

impl BlockArena {
    pub fn new(voxels_per_block: usize, budget: Option<usize>) -> Self {
        Self {
            slots: Vec::new(),
            live: 0,
            budget,
            voxels_per_block,
        }
    }

    pub fn allocate(&mut self) -> Result<BlockHandle, StoreError> {
        if let Some(budget) = self.budget {
            if self.live >= budget {
                return Err(StoreError::CapacityExhausted { budget });
            }
        }
        let h = BlockHandle(self.slots.len() as u64);
        debug_assert!(!h.is_invalid());
        self.slots.push(Some(VoxelBlock::zeroed(self.voxels_per_block)));
        self.live += 1;
        Ok(h)
    }

    pub fn release(&mut self, h: BlockHandle) {
        if let Some(slot) = self.slots.get_mut(h.0 as usize) {
            if slot.take().is_some() {
                self.live -= 1;
            }
        }
    }

    pub fn get(&self, h: BlockHandle) -> Option<&VoxelBlock> {
        self.slots.get(h.0 as usize).and_then(Option::as_ref)
    }

    pub fn get_mut(&mut self, h: BlockHandle) -> Option<&mut VoxelBlock> {
        self.slots.get_mut(h.0 as usize).and_then(Option::as_mut)
    }

    pub fn live(&self) -> usize {
        self.live
    }

    pub fn voxels_per_block(&self) -> usize {
        self.voxels_per_block
    }
}
