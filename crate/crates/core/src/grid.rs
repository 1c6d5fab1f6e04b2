//! World, voxel and block coordinates plus the spatial hash over block keys.
//!
//! Every transform here is a pure function of a [`WorldConfig`]. Negative
//! coordinates use floor semantics throughout so blocks stay contiguous
//! across the origin.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point or vector in world space, meters.
pub type Point3 = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid world config: {0}")]
    InvalidConfig(String),
    #[error("point {point:?} maps outside the 32-bit voxel index range")]
    IndexOverflow { point: Point3 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    /// Voxel edge length in meters.
    pub voxel_size: f64,
    /// Voxels per block edge.
    #[serde(default = "default_block_side")]
    pub block_side: u32,
    /// Half-width of the TSDF band along each ray, meters.
    pub truncation_dist: f64,
    /// ESDF propagation radius around occupied voxels, meters.
    #[serde(default)]
    pub clear_radius: f64,
}

fn default_block_side() -> u32 {
    8
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            voxel_size: 0.05,
            block_side: 8,
            truncation_dist: 0.15,
            clear_radius: 0.1,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.voxel_size.is_finite() && self.voxel_size > 0.0) {
            return Err(GridError::InvalidConfig(format!(
                "voxel_size must be > 0, got {}",
                self.voxel_size
            )));
        }
        if self.block_side == 0 {
            return Err(GridError::InvalidConfig("block_side must be >= 1".into()));
        }
        if !(self.truncation_dist.is_finite() && self.truncation_dist >= self.voxel_size) {
            return Err(GridError::InvalidConfig(format!(
                "truncation_dist ({}) must be >= voxel_size ({})",
                self.truncation_dist, self.voxel_size
            )));
        }
        if !(self.clear_radius.is_finite() && self.clear_radius >= 0.0) {
            return Err(GridError::InvalidConfig(format!(
                "clear_radius must be >= 0, got {}",
                self.clear_radius
            )));
        }
        Ok(())
    }

    /// Number of voxels in one block (B³).
    pub fn voxels_per_block(&self) -> usize {
        let b = self.block_side as usize;
        b * b * b
    }
}

/// Integer coordinate of a voxel block. Ordered lexicographically (x, y, z).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct BlockKey {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl BlockKey {
    pub const BYTES: usize = 12;

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    /// Little-endian x, y, z as i32, 12 bytes.
    pub fn to_le_bytes(self) -> [u8; Self::BYTES] {
        let mut out = [0u8; Self::BYTES];
        out[0..4].copy_from_slice(&self.x.to_le_bytes());
        out[4..8].copy_from_slice(&self.y.to_le_bytes());
        out[8..12].copy_from_slice(&self.z.to_le_bytes());
        out
    }

    pub fn from_le_bytes(bytes: [u8; Self::BYTES]) -> Self {
        let word = |i: usize| i32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
        Self::new(word(0), word(4), word(8))
    }
}

impl std::fmt::Display for BlockKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Global voxel index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VoxelCoord {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl VoxelCoord {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    pub fn offset(self, dx: i32, dy: i32, dz: i32) -> Self {
        Self::new(self.x + dx, self.y + dy, self.z + dz)
    }
}

pub fn world_to_voxel(p: Point3, cfg: &WorldConfig) -> Result<VoxelCoord, GridError> {
    let mut out = [0i32; 3];
    for (o, &c) in out.iter_mut().zip(p.iter()) {
        let f = (c / cfg.voxel_size).floor();
        if !f.is_finite() || f < i32::MIN as f64 || f > i32::MAX as f64 {
            return Err(GridError::IndexOverflow { point: p });
        }
        *o = f as i32;
    }
    Ok(VoxelCoord::new(out[0], out[1], out[2]))
}

/// Splits a voxel index into its block key and the linear index inside the
/// block (`lz·B² + ly·B + lx`).
pub fn voxel_to_block(v: VoxelCoord, block_side: u32) -> (BlockKey, usize) {
    debug_assert!(block_side >= 1);
    let b = block_side as i32;
    let key = BlockKey::new(v.x.div_euclid(b), v.y.div_euclid(b), v.z.div_euclid(b));
    let (lx, ly, lz) = (
        v.x.rem_euclid(b) as usize,
        v.y.rem_euclid(b) as usize,
        v.z.rem_euclid(b) as usize,
    );
    let bs = block_side as usize;
    (key, lz * bs * bs + ly * bs + lx)
}

/// Inverse of the local index computed by [`voxel_to_block`].
pub fn local_coords(local_index: usize, block_side: u32) -> (usize, usize, usize) {
    let b = block_side as usize;
    (local_index % b, (local_index / b) % b, local_index / (b * b))
}

pub fn voxel_center(v: VoxelCoord, cfg: &WorldConfig) -> Point3 {
    [
        (v.x as f64 + 0.5) * cfg.voxel_size,
        (v.y as f64 + 0.5) * cfg.voxel_size,
        (v.z as f64 + 0.5) * cfg.voxel_size,
    ]
}

const HASH_P1: u64 = 73_856_093;
const HASH_P2: u64 = 19_349_663;
const HASH_P3: u64 = 83_492_791;

/// SplitMix64 finalizer. `mix64(0)` is a fixed non-zero constant.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// XOR of prime multiples before finalization.
pub fn spatial_hash_premix(k: BlockKey) -> u64 {
    (k.x as i64 as u64).wrapping_mul(HASH_P1)
        ^ (k.y as i64 as u64).wrapping_mul(HASH_P2)
        ^ (k.z as i64 as u64).wrapping_mul(HASH_P3)
}

pub fn spatial_hash(k: BlockKey) -> u64 {
    mix64(spatial_hash_premix(k))
}
