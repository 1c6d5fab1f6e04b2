use std::collections::{HashMap, HashSet};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{AccessOp, AccessTrace, CameraIntrinsics, DepthFrame, MapperError, Pose};
use crate::grid::{voxel_center, voxel_to_block, world_to_voxel, BlockKey, Point3, VoxelCoord, WorldConfig};
use crate::store::{BlockHandle, Voxel, VoxelStore};

pub const DEFAULT_MAX_WEIGHT: f32 = 100.0;

/// How back-projected points become TSDF rays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RayGrouping {
    /// One ray per valid pixel.
    PerPixel,
    /// One ray per distinct surface voxel, aimed at the mean of the points
    /// that fell into it (first-seen order).
    #[default]
    PerSurfaceVoxel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default = "default_max_weight")]
    pub max_weight: f32,
    #[serde(default)]
    pub ray_grouping: RayGrouping,
}

fn default_max_weight() -> f32 {
    DEFAULT_MAX_WEIGHT
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            max_weight: DEFAULT_MAX_WEIGHT,
            ray_grouping: RayGrouping::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UpdateStats {
    pub rays: u64,
    pub voxel_updates: u64,
    pub block_accesses: u64,
    pub distinct_blocks: u64,
    pub allocations: u64,
}

impl UpdateStats {
    pub fn accumulate(&mut self, o: &UpdateStats) {
        self.rays += o.rays;
        self.voxel_updates += o.voxel_updates;
        self.block_accesses += o.block_accesses;
        self.distinct_blocks += o.distinct_blocks;
        self.allocations += o.allocations;
    }
}

/// Per-call bookkeeping for [`UpdateStats`].
#[derive(Default)]
struct Tally {
    stats: UpdateStats,
    touched: HashSet<BlockKey>,
}

impl Tally {
    fn finish(mut self) -> UpdateStats {
        self.stats.distinct_blocks = self.touched.len() as u64;
        self.stats
    }
}

/// Integrates frames into a [`VoxelStore`], appending one lookup event to the
/// trace for every block fetch.
pub struct Mapper {
    world: WorldConfig,
    params: IntegratorConfig,
    store: VoxelStore,
    trace: AccessTrace,
}

impl Mapper {
    pub fn new(world: WorldConfig, params: IntegratorConfig, store: VoxelStore) -> Result<Self, MapperError> {
        world.validate()?;
        if params.max_weight.is_nan() || params.max_weight < 1.0 {
            return Err(MapperError::InvalidInput("max_weight must be >= 1".into()));
        }
        Ok(Self {
            world,
            params,
            store,
            trace: AccessTrace::new(),
        })
    }

    pub fn world(&self) -> &WorldConfig {
        &self.world
    }

    pub fn store(&self) -> &VoxelStore {
        &self.store
    }

    pub fn trace(&self) -> &AccessTrace {
        &self.trace
    }

    pub fn into_parts(self) -> (VoxelStore, AccessTrace) {
        (self.store, self.trace)
    }

    /// Reads a voxel without touching the trace or the store counters.
    pub fn voxel(&self, v: VoxelCoord) -> Option<Voxel> {
        let (key, local) = voxel_to_block(v, self.world.block_side);
        let h = self.store.index().probe(key).handle?;
        self.store.block(h).map(|b| b.voxels[local])
    }

    fn check_frame(&self, frame_id: u32) -> Result<(), MapperError> {
        match self.trace.last_frame() {
            Some(last) if frame_id < last => Err(MapperError::InvalidInput(format!(
                "frame id {frame_id} precedes already traced frame {last}"
            ))),
            _ => Ok(()),
        }
    }

    fn fetch(&mut self, v: VoxelCoord, frame_id: u32, tally: &mut Tally) -> Result<(BlockHandle, usize), MapperError> {
        let (key, local) = voxel_to_block(v, self.world.block_side);
        let (h, allocated) = self.store.get_or_allocate(key)?;
        self.trace.push(AccessOp::Lookup, frame_id, key);
        tally.stats.block_accesses += 1;
        tally.stats.allocations += allocated as u64;
        tally.touched.insert(key);
        Ok((h, local))
    }

    fn voxel_mut(&mut self, h: BlockHandle, local: usize) -> &mut Voxel {
        &mut self
            .store
            .block_mut(h)
            .expect("handle returned by the store is live")
            .voxels[local]
    }

    pub fn integrate_tsdf(
        &mut self,
        frame_id: u32,
        frame: &DepthFrame,
        pose: &Pose,
        intr: &CameraIntrinsics,
    ) -> Result<UpdateStats, MapperError> {
        let points = back_project(frame, pose, intr)?;
        self.integrate_tsdf_points(frame_id, pose.origin(), &points)
    }

    /// Casts rays from `origin` toward the given surface points and updates
    /// every voxel whose center lies within the truncation band along a ray.
    pub fn integrate_tsdf_points(
        &mut self,
        frame_id: u32,
        origin: Point3,
        points: &[Point3],
    ) -> Result<UpdateStats, MapperError> {
        self.check_frame(frame_id)?;
        let targets = match self.params.ray_grouping {
            RayGrouping::PerPixel => points.to_vec(),
            RayGrouping::PerSurfaceVoxel => group_by_voxel(points, &self.world)?,
        };
        let mut tally = Tally::default();
        let o = Vector3::from(origin);
        let trunc = self.world.truncation_dist;
        let step = 0.5 * self.world.voxel_size;
        let half_samples = (trunc / step + 1e-9).floor() as i64;
        let max_weight = self.params.max_weight;
        let mut visited: Vec<VoxelCoord> = Vec::with_capacity(2 * half_samples as usize + 1);

        for target in targets {
            let p = Vector3::from(target);
            let dist = (p - o).norm();
            if dist < 1e-9 {
                continue;
            }
            let dir = (p - o) / dist;
            tally.stats.rays += 1;
            visited.clear();
            for j in -half_samples..=half_samples {
                let s = dist + j as f64 * step;
                if s <= 0.0 {
                    continue;
                }
                let q = o + dir * s;
                let v = world_to_voxel([q.x, q.y, q.z], &self.world)?;
                if visited.contains(&v) {
                    continue;
                }
                visited.push(v);
                let c = Vector3::from(voxel_center(v, &self.world));
                let d = dist - (c - o).dot(&dir);
                if d.abs() > trunc {
                    continue;
                }
                let (h, local) = self.fetch(v, frame_id, &mut tally)?;
                let vox = self.voxel_mut(h, local);
                let w = vox.weight as f64;
                vox.sdf = (w * vox.sdf + d) / (w + 1.0);
                vox.weight = (vox.weight + 1.0).min(max_weight);
                tally.stats.voxel_updates += 1;
            }
        }
        Ok(tally.finish())
    }

    pub fn integrate_esdf(
        &mut self,
        frame_id: u32,
        frame: &DepthFrame,
        pose: &Pose,
        intr: &CameraIntrinsics,
    ) -> Result<UpdateStats, MapperError> {
        let points = back_project(frame, pose, intr)?;
        self.integrate_esdf_points(frame_id, &points)
    }

    /// Marks the voxel under each point occupied and lowers the distance of
    /// every voxel within `clear_radius` (center to center) of it.
    pub fn integrate_esdf_points(&mut self, frame_id: u32, points: &[Point3]) -> Result<UpdateStats, MapperError> {
        self.check_frame(frame_id)?;
        let mut occupied: Vec<VoxelCoord> = Vec::new();
        let mut seen = HashSet::new();
        for &p in points {
            let v = world_to_voxel(p, &self.world)?;
            if seen.insert(v) {
                occupied.push(v);
            }
        }
        let offsets = neighborhood_offsets(self.world.clear_radius, self.world.voxel_size);
        let mut tally = Tally::default();
        for occ in occupied {
            tally.stats.rays += 1;
            let oc = voxel_center(occ, &self.world);
            for &(dx, dy, dz) in &offsets {
                let v = occ.offset(dx, dy, dz);
                let c = voxel_center(v, &self.world);
                let d = ((c[0] - oc[0]).powi(2) + (c[1] - oc[1]).powi(2) + (c[2] - oc[2]).powi(2)).sqrt();
                let (h, local) = self.fetch(v, frame_id, &mut tally)?;
                let vox = self.voxel_mut(h, local);
                if !vox.observed || d < vox.distance {
                    vox.distance = d;
                }
                vox.observed = true;
                if (dx, dy, dz) == (0, 0, 0) {
                    vox.occupied = true;
                }
                tally.stats.voxel_updates += 1;
            }
        }
        Ok(tally.finish())
    }
}

/// World-space points of all valid pixels, row-major.
pub fn back_project(frame: &DepthFrame, pose: &Pose, intr: &CameraIntrinsics) -> Result<Vec<Point3>, MapperError> {
    intr.validate()?;
    if frame.width != intr.width || frame.height != intr.height {
        return Err(MapperError::InvalidInput(format!(
            "frame is {}x{} but intrinsics are {}x{}",
            frame.width, frame.height, intr.width, intr.height
        )));
    }
    let mut out = Vec::with_capacity(frame.valid_pixels());
    for v in 0..frame.height {
        for u in 0..frame.width {
            let z = frame.depth(u, v);
            if !z.is_finite() || z < 0.0 {
                return Err(MapperError::InvalidInput(format!("bad depth {z} at ({u}, {v})")));
            }
            if z == 0.0 {
                continue;
            }
            let p = pose.transform(intr.ray(u, v) * z as f64);
            out.push([p.x, p.y, p.z]);
        }
    }
    Ok(out)
}

fn group_by_voxel(points: &[Point3], world: &WorldConfig) -> Result<Vec<Point3>, MapperError> {
    let mut slot: HashMap<VoxelCoord, usize> = HashMap::new();
    let mut sums: Vec<([f64; 3], u32)> = Vec::new();
    for &p in points {
        let v = world_to_voxel(p, world)?;
        let i = *slot.entry(v).or_insert_with(|| {
            sums.push(([0.0; 3], 0));
            sums.len() - 1
        });
        let (s, n) = &mut sums[i];
        for k in 0..3 {
            s[k] += p[k];
        }
        *n += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(s, n)| [s[0] / n as f64, s[1] / n as f64, s[2] / n as f64])
        .collect())
}

/// Integer offsets whose center distance is within `radius`, in z, y, x order.
pub(crate) fn neighborhood_offsets(radius: f64, voxel_size: f64) -> Vec<(i32, i32, i32)> {
    let r = radius / voxel_size;
    let bound = (r + 1e-9).floor() as i32;
    let limit = r * r + 1e-9;
    let mut out = Vec::new();
    for dz in -bound..=bound {
        for dy in -bound..=bound {
            for dx in -bound..=bound {
                if ((dx * dx + dy * dy + dz * dz) as f64) <= limit {
                    out.push((dx, dy, dz));
                }
            }
        }
    }
    out
}
