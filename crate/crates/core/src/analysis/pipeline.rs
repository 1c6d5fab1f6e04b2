use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::reuse::distinct_blocks;
use super::AnalysisError;
use crate::cachesim::{run_trace, CacheProfile, CostModelConfig};
use crate::exec::{map_ordered, Execution};
use crate::grid::{mix64, WorldConfig};
use crate::mapper::{
    make_trajectory, render_depth_with, AccessTrace, CameraIntrinsics, DepthFrame, IntegratorConfig, Mapper,
    Pose, SceneSpec, TrajectorySpec, UpdateStats,
};
use crate::store::{StoreConfig, VoxelStore};

/// Everything needed to map a synthetic sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingSpec {
    pub scene: SceneSpec,
    pub intrinsics: CameraIntrinsics,
    pub trajectory: TrajectorySpec,
    pub world: WorldConfig,
    pub integrator: IntegratorConfig,
    pub store: StoreConfig,
    /// Also run the ESDF update after each TSDF update.
    pub esdf: bool,
    /// Standard deviation of additive Gaussian depth noise, meters.
    pub depth_noise_std: f64,
    pub seed: u64,
}

impl Default for MappingSpec {
    fn default() -> Self {
        Self {
            scene: SceneSpec::default_room(),
            intrinsics: CameraIntrinsics::default(),
            trajectory: TrajectorySpec::default_orbit(),
            world: WorldConfig::default(),
            integrator: IntegratorConfig::default(),
            store: StoreConfig::default(),
            esdf: false,
            depth_noise_std: 0.0,
            seed: 0,
        }
    }
}

pub struct MappingRun {
    pub store: VoxelStore,
    pub trace: AccessTrace,
    pub per_frame: Vec<UpdateStats>,
    pub totals: UpdateStats,
}

/// Renders every pose of the trajectory; frames are independent. Noise for
/// frame `i` comes from its own stream seeded by `(seed, i)`, so the output
/// does not depend on scheduling.
pub fn render_frames(spec: &MappingSpec, exec: Execution) -> Result<Vec<(Pose, DepthFrame)>, AnalysisError> {
    spec.scene.validate()?;
    spec.intrinsics.validate()?;
    if !(spec.depth_noise_std.is_finite() && spec.depth_noise_std >= 0.0) {
        return Err(AnalysisError::InvalidInput(format!(
            "depth_noise_std must be >= 0, got {}",
            spec.depth_noise_std
        )));
    }
    let poses: Vec<(usize, Pose)> = make_trajectory(&spec.trajectory)?.into_iter().enumerate().collect();
    Ok(map_ordered(exec, &poses, |(i, pose)| {
        let mut frame = render_depth_with(&spec.scene, pose, &spec.intrinsics, Execution::Sequential);
        if spec.depth_noise_std > 0.0 {
            add_noise(&mut frame, spec.depth_noise_std, spec.seed ^ mix64(*i as u64));
        }
        (*pose, frame)
    }))
}

fn add_noise(frame: &mut DepthFrame, std: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std).expect("finite std");
    for d in frame.depths.iter_mut().filter(|d| **d > 0.0) {
        *d = (*d as f64 + normal.sample(&mut rng)).max(0.0) as f32;
    }
}

fn integrate_frames(spec: &MappingSpec, world: WorldConfig, frames: &[(Pose, DepthFrame)]) -> Result<MappingRun, AnalysisError> {
    let store = VoxelStore::from_config(&spec.store, world.voxels_per_block())?;
    let mut mapper = Mapper::new(world, spec.integrator, store)?;
    let mut per_frame = Vec::with_capacity(frames.len());
    let mut totals = UpdateStats::default();
    for (i, (pose, frame)) in frames.iter().enumerate() {
        let id = i as u32;
        let mut stats = mapper.integrate_tsdf(id, frame, pose, &spec.intrinsics)?;
        if spec.esdf {
            let esdf = mapper.integrate_esdf(id, frame, pose, &spec.intrinsics)?;
            stats.accumulate(&esdf);
        }
        totals.accumulate(&stats);
        per_frame.push(stats);
    }
    let (store, trace) = mapper.into_parts();
    Ok(MappingRun {
        store,
        trace,
        per_frame,
        totals,
    })
}

/// Renders and integrates the whole sequence. Integration is serial, so the
/// trace is identical for either execution mode.
pub fn run_mapping(spec: &MappingSpec, exec: Execution) -> Result<MappingRun, AnalysisError> {
    let frames = render_frames(spec, exec)?;
    integrate_frames(spec, spec.world, &frames)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub voxel_size: f64,
    pub frames: usize,
    pub accesses: u64,
    pub distinct: u64,
    pub updates: u64,
    pub updates_per_frame: f64,
    pub hit_rate: f64,
    pub modeled_cycles: f64,
    pub baseline_cycles: f64,
    pub access_speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Updates per frame at `fine` divided by updates per frame at `coarse`.
    pub fn update_ratio(&self, fine: f64, coarse: f64) -> Option<f64> {
        let find = |v: f64| self.rows.iter().find(|r| (r.voxel_size - v).abs() < 1e-12);
        let (f, c) = (find(fine)?, find(coarse)?);
        (c.updates_per_frame > 0.0).then(|| f.updates_per_frame / c.updates_per_frame)
    }
}

/// Maps the same rendered frames at each voxel size (truncation and clear
/// radius stay fixed in meters) and replays each trace through the cache
/// model. Rows follow `voxel_sizes` order.
pub fn resolution_sweep(
    spec: &MappingSpec,
    voxel_sizes: &[f64],
    profile: &CacheProfile,
    cost: &CostModelConfig,
    exec: Execution,
) -> Result<SweepResult, AnalysisError> {
    if voxel_sizes.is_empty() {
        return Err(AnalysisError::InvalidInput("resolution sweep needs at least one voxel size".into()));
    }
    let frames = render_frames(spec, exec)?;
    let rows = map_ordered(exec, voxel_sizes, |&vs| -> Result<SweepRow, AnalysisError> {
        let world = WorldConfig {
            voxel_size: vs,
            ..spec.world
        };
        world.validate().map_err(crate::mapper::MapperError::from)?;
        let run = integrate_frames(spec, world, &frames)?;
        let report = run_trace(&run.trace, profile, cost, &run.store.stats())?;
        Ok(SweepRow {
            voxel_size: vs,
            frames: frames.len(),
            accesses: run.totals.block_accesses,
            distinct: distinct_blocks(&run.trace) as u64,
            updates: run.totals.voxel_updates,
            updates_per_frame: run.totals.voxel_updates as f64 / frames.len() as f64,
            hit_rate: report.cost.hit_rate,
            modeled_cycles: report.cost.mechanism_cycles,
            baseline_cycles: report.cost.baseline_cycles,
            access_speedup: report.cost.access_speedup,
        })
    });
    Ok(SweepResult {
        rows: rows.into_iter().collect::<Result<_, _>>()?,
    })
}
