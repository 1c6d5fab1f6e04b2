//! The run configuration: one JSON document, every field defaulted, unknown
//! keys rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use voxkv_core::analysis::{default_capacities, default_gap_edges, MappingSpec};
use voxkv_core::cachesim::{CacheProfile, CostModelConfig, LevelOverride};
use voxkv_core::grid::WorldConfig;
use voxkv_core::mapper::{make_trajectory, CameraIntrinsics, IntegratorConfig, RayGrouping, SceneSpec, TrajectorySpec};
use voxkv_core::store::StoreConfig;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub scene: SceneSpec,
    pub camera: CameraIntrinsics,
    pub trajectory: TrajectorySpec,
    pub world: WorldConfig,
    pub integration: IntegrationSection,
    pub store: StoreConfig,
    pub cache: CacheSection,
    pub cost: CostModelConfig,
    pub sweep: SweepSection,
    pub analysis: AnalysisSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            scene: SceneSpec::default_room(),
            camera: CameraIntrinsics::default(),
            trajectory: TrajectorySpec::default_orbit(),
            world: WorldConfig::default(),
            integration: IntegrationSection::default(),
            store: StoreConfig::default(),
            cache: CacheSection::default(),
            cost: CostModelConfig::default(),
            sweep: SweepSection::default(),
            analysis: AnalysisSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationSection {
    pub esdf: bool,
    pub ray_grouping: RayGrouping,
    pub max_weight: f32,
    pub depth_noise_std: f64,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self {
            esdf: false,
            ray_grouping: d.ray_grouping,
            max_weight: d.max_weight,
            depth_noise_std: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheSection {
    pub profile: String,
    /// Per-level overrides, innermost first.
    pub levels: Vec<LevelOverride>,
}

impl Default for CacheSection {
    fn default() -> Self {
        Self {
            profile: CacheProfile::CPU.into(),
            levels: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub voxel_sizes: Vec<f64>,
    pub footprint_load_factors: Vec<f64>,
    pub footprint_entries: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            voxel_sizes: vec![0.15, 0.10, 0.05],
            footprint_load_factors: vec![0.25, 0.5, 0.75],
            footprint_entries: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub capacities: Vec<usize>,
    pub gap_edges: Vec<u64>,
    pub gap_threshold: u64,
    pub plateau_tolerance: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            capacities: default_capacities(),
            gap_edges: default_gap_edges(),
            gap_threshold: 150,
            plateau_tolerance: 0.01,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    /// Reads `path` (or starts from defaults), applies command-line
    /// overrides and validates the result.
    pub fn load(path: Option<&Path>, seed: Option<u64>, profile: Option<&str>) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(p) = profile {
            cfg.cache.profile = p.to_string();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.scene.validate().map_err(config_err)?;
        self.camera.validate().map_err(config_err)?;
        self.world.validate().map_err(config_err)?;
        make_trajectory(&self.trajectory).map_err(config_err)?;
        self.store.build_index().map_err(config_err)?;
        self.cache_profile()?;
        self.cost.validate().map_err(config_err)?;
        let i = &self.integration;
        if !(i.max_weight.is_finite() && i.max_weight >= 1.0) {
            return Err(config_err("integration.max_weight must be >= 1"));
        }
        if !(i.depth_noise_std.is_finite() && i.depth_noise_std >= 0.0) {
            return Err(config_err("integration.depth_noise_std must be >= 0"));
        }
        let s = &self.sweep;
        if s.voxel_sizes.is_empty() {
            return Err(config_err("sweep.voxel_sizes must not be empty"));
        }
        for &vs in &s.voxel_sizes {
            WorldConfig {
                voxel_size: vs,
                ..self.world
            }
            .validate()
            .map_err(|e| config_err(format!("sweep.voxel_sizes: {e}")))?;
        }
        if s.footprint_load_factors.is_empty() || s.footprint_load_factors.iter().any(|&lf| !(lf > 0.0 && lf.is_finite())) {
            return Err(config_err("sweep.footprint_load_factors must be non-empty and > 0"));
        }
        let a = &self.analysis;
        if a.capacities.is_empty() || a.capacities[0] == 0 || a.capacities.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("analysis.capacities must be >= 1 and strictly ascending"));
        }
        if a.gap_edges.is_empty() || a.gap_edges[0] > 1 || a.gap_edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("analysis.gap_edges must start at 0 or 1 and be strictly ascending"));
        }
        if !(a.plateau_tolerance.is_finite() && a.plateau_tolerance >= 0.0) {
            return Err(config_err("analysis.plateau_tolerance must be >= 0"));
        }
        Ok(())
    }

    pub fn cache_profile(&self) -> Result<CacheProfile, CliError> {
        Ok(CacheProfile::by_name(&self.cache.profile)?.with_overrides(&self.cache.levels)?)
    }

    pub fn mapping_spec(&self) -> MappingSpec {
        MappingSpec {
            scene: self.scene.clone(),
            intrinsics: self.camera,
            trajectory: self.trajectory.clone(),
            world: self.world,
            integrator: IntegratorConfig {
                max_weight: self.integration.max_weight,
                ray_grouping: self.integration.ray_grouping,
            },
            store: self.store.clone(),
            esdf: self.integration.esdf,
            depth_noise_std: self.integration.depth_noise_std,
            seed: self.seed,
        }
    }

    /// Canonical form: compact JSON with object keys sorted.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// Hex SHA-256 of [`RunConfig::canonical_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}
