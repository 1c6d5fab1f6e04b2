//! Workloads with independently computable answers, shared by the core
//! integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voxkv_core::analysis::{run_mapping, MappingSpec};
use voxkv_core::exec::Execution;
use voxkv_core::grid::{local_coords, voxel_center, BlockKey, VoxelCoord, WorldConfig};
use voxkv_core::mapper::{
    CameraIntrinsics, IntegratorConfig, Mapper, Primitive, SceneSpec, TrajectorySpec,
};
use voxkv_core::store::{StoreConfig, Voxel, VoxelStore};

/// Every voxel with a non-zero TSDF weight.
pub fn observed_voxels(store: &VoxelStore, world: &WorldConfig) -> Vec<(VoxelCoord, Voxel)> {
    let side = world.block_side as i32;
    let mut out = Vec::new();
    for key in store.keys() {
        let h = store.get_block(key).expect("listed key");
        for (i, v) in store.block(h).expect("live block").voxels.iter().enumerate() {
            if v.weight > 0.0 || v.observed {
                let (lx, ly, lz) = local_coords(i, world.block_side);
                let c = VoxelCoord::new(
                    key.x * side + lx as i32,
                    key.y * side + ly as i32,
                    key.z * side + lz as i32,
                );
                out.push((c, *v));
            }
        }
    }
    out
}

pub struct PlaneCheck {
    pub checked: usize,
    pub max_error: f64,
}

/// Ground plane seen from a high, narrow-field orbit; compares each in-band
/// voxel's fused distance with its center's height above the plane.
pub fn plane_tsdf_check() -> PlaneCheck {
    let spec = MappingSpec {
        scene: SceneSpec {
            primitives: vec![Primitive::Plane {
                normal: [0.0, 0.0, 1.0],
                offset: 0.0,
            }],
            max_range: 6.0,
        },
        intrinsics: CameraIntrinsics {
            fx: 100.0,
            fy: 100.0,
            cx: 32.0,
            cy: 24.0,
            width: 64,
            height: 48,
        },
        trajectory: TrajectorySpec::Orbit {
            center: [0.0, 0.0, 0.0],
            radius: 0.3,
            height: 2.0,
            frames: 16,
        },
        world: WorldConfig {
            voxel_size: 0.05,
            truncation_dist: 0.15,
            ..WorldConfig::default()
        },
        ..MappingSpec::default()
    };
    let run = run_mapping(&spec, Execution::default()).expect("plane mapping");
    let mut checked = 0;
    let mut max_error: f64 = 0.0;
    for (v, vox) in observed_voxels(&run.store, &spec.world) {
        let z = voxel_center(v, &spec.world)[2];
        if vox.weight > 0.0 && z.abs() <= spec.world.truncation_dist {
            checked += 1;
            max_error = max_error.max((vox.sdf - z).abs());
        }
    }
    PlaneCheck { checked, max_error }
}

pub struct EsdfCheck {
    pub occupied: usize,
    pub checked: usize,
    pub max_diff: f64,
    pub observed_mismatches: usize,
}

/// Random occupied voxels inside a 32³ window, split over a few frames,
/// compared against a brute-force minimum over every voxel of the window
/// plus a clear-radius margin.
pub fn esdf_bruteforce_check(seed: u64, clear_voxels: f64) -> EsdfCheck {
    let world = WorldConfig {
        voxel_size: 0.05,
        clear_radius: 0.05 * clear_voxels,
        ..WorldConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(20..=50);
    let mut occ: Vec<VoxelCoord> = Vec::new();
    while occ.len() < n {
        let v = VoxelCoord::new(rng.gen_range(-16..16), rng.gen_range(-16..16), rng.gen_range(-16..16));
        if !occ.contains(&v) {
            occ.push(v);
        }
    }
    let store = VoxelStore::from_config(&StoreConfig::default(), world.voxels_per_block()).unwrap();
    let mut mapper = Mapper::new(world, IntegratorConfig::default(), store).unwrap();
    for (frame, chunk) in occ.chunks(12).enumerate() {
        let pts: Vec<_> = chunk.iter().map(|&v| voxel_center(v, &world)).collect();
        mapper.integrate_esdf_points(frame as u32, &pts).unwrap();
    }
    let radius_vox = clear_voxels;
    let margin = radius_vox.ceil() as i32 + 1;
    let mut checked = 0;
    let mut max_diff: f64 = 0.0;
    let mut observed_mismatches = 0;
    for x in -16 - margin..16 + margin {
        for y in -16 - margin..16 + margin {
            for z in -16 - margin..16 + margin {
                let v = VoxelCoord::new(x, y, z);
                let expect = occ
                    .iter()
                    .filter_map(|o| {
                        let d2 = ((o.x - x).pow(2) + (o.y - y).pow(2) + (o.z - z).pow(2)) as f64;
                        (d2 <= radius_vox * radius_vox + 1e-9).then(|| d2.sqrt() * world.voxel_size)
                    })
                    .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.min(d))));
                let got = mapper.voxel(v).filter(|vx| vx.observed).map(|vx| vx.distance);
                match (expect, got) {
                    (Some(e), Some(g)) => {
                        checked += 1;
                        max_diff = max_diff.max((e - g).abs());
                    }
                    (None, None) => {}
                    _ => observed_mismatches += 1,
                }
            }
        }
    }
    EsdfCheck {
        occupied: occ.len(),
        checked,
        max_diff,
        observed_mismatches,
    }
}

pub struct OctreeCheck {
    pub ops: usize,
    pub mismatches: usize,
    pub depth: u64,
    pub present_probes: usize,
    pub wrong_depth_probes: usize,
}

/// Random allocate/lookup/remove workload on a chained hash store and an
/// octree store in lockstep.
pub fn octree_equivalence_check(seed: u64, ops: usize) -> OctreeCheck {
    let extent = 64u32;
    let mut hash = VoxelStore::from_config(&StoreConfig::default(), 8).unwrap();
    let mut oct = VoxelStore::from_config(
        &StoreConfig::Octree {
            root_extent_blocks: extent,
            block_budget: None,
        },
        8,
    )
    .unwrap();
    let depth = oct.index().bucket_count_or_depth();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut truth: BTreeMap<BlockKey, ()> = BTreeMap::new();
    let (mut mismatches, mut present_probes, mut wrong_depth_probes) = (0, 0, 0);
    for _ in 0..ops {
        let k = BlockKey::new(rng.gen_range(-16..16), rng.gen_range(-16..16), rng.gen_range(-4..4));
        match rng.gen_range(0..10) {
            0..=3 => {
                let a = hash.get_or_allocate(k).unwrap().1;
                let b = oct.get_or_allocate(k).unwrap().1;
                truth.insert(k, ());
                mismatches += usize::from(a != b);
            }
            4..=8 => {
                let a = hash.get_block(k).is_some();
                let b = oct.get_block(k).is_some();
                mismatches += usize::from(a != b || a != truth.contains_key(&k));
                if b {
                    present_probes += 1;
                    wrong_depth_probes += usize::from(oct.index().probe(k).steps != depth);
                }
            }
            _ => {
                let a = hash.remove_block(k);
                let b = oct.remove_block(k);
                truth.remove(&k);
                mismatches += usize::from(a != b);
            }
        }
    }
    let hk: HashSet<BlockKey> = hash.keys().into_iter().collect();
    let ok: HashSet<BlockKey> = oct.keys().into_iter().collect();
    mismatches += usize::from(hk != ok);
    OctreeCheck {
        ops,
        mismatches,
        depth,
        present_probes,
        wrong_depth_probes,
    }
}

pub struct OctreeReplayCheck {
    pub events: usize,
    pub swept_events: usize,
    pub violations: u64,
    pub stale_handles: u64,
}

/// Maps a short orbit into an octree store and replays the trace through
/// the CPU profile: per-operation sweeps on a prefix, then the whole trace
/// with a final full-state check.
pub fn octree_replay_check(frames: usize, swept_events: usize) -> OctreeReplayCheck {
    use voxkv_core::cachesim::{run_trace_on, CacheProfile, CostModelConfig, KvCacheHierarchy};
    use voxkv_core::mapper::AccessTrace;
    let spec = MappingSpec {
        store: StoreConfig::Octree {
            root_extent_blocks: 256,
            block_budget: None,
        },
        trajectory: TrajectorySpec::Orbit {
            center: [0.0, 0.0, 0.2],
            radius: 1.6,
            height: 1.2,
            frames,
        },
        ..MappingSpec::default()
    };
    let run = run_mapping(&spec, Execution::default()).expect("octree mapping");
    let profile = CacheProfile::cpu_table5();
    let cost = CostModelConfig::default();
    let prefix = AccessTrace::from_events(run.trace.events()[..swept_events.min(run.trace.len())].to_vec()).unwrap();
    let mut swept = KvCacheHierarchy::from_profile(&profile).unwrap();
    swept.set_debug_sweeps(true);
    let a = run_trace_on(&mut swept, &profile.name, &prefix, &cost, &run.store.stats()).unwrap();
    let mut full = KvCacheHierarchy::from_profile(&profile).unwrap();
    let b = run_trace_on(&mut full, &profile.name, &run.trace, &cost, &run.store.stats()).unwrap();
    OctreeReplayCheck {
        events: b.replay.lookup_events as usize,
        swept_events: prefix.len(),
        violations: a.sim.invariant_violations + full.check_invariants().len() as u64,
        stale_handles: a.replay.stale_handles + b.replay.stale_handles,
    }
}
