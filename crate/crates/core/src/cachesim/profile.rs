use serde::{Deserialize, Serialize};

use super::{line::PAIR_BYTES, SimError};

/// One cache level. Reserved ways are the first `reserved_ways` of each set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelConfig {
    pub name: String,
    pub sets: u32,
    pub ways: u32,
    pub reserved_ways: u32,
    pub line_bytes: u32,
    pub hit_latency_cycles: u64,
}

impl LevelConfig {
    /// 3 pairs for 64-byte lines, 6 for 128-byte lines.
    pub fn pairs_per_line(&self) -> usize {
        (self.line_bytes / PAIR_BYTES) as usize
    }

    pub fn reserved_lines(&self) -> u64 {
        self.sets as u64 * self.reserved_ways as u64
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.sets as u64 * self.ways as u64 * self.line_bytes as u64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.sets == 0 || !self.sets.is_power_of_two() {
            return Err(SimError::Config(format!("{}: sets must be a power of two", self.name)));
        }
        if self.ways == 0 || self.reserved_ways > self.ways {
            return Err(SimError::Config(format!(
                "{}: reserved_ways {} must be <= ways {} (ways >= 1)",
                self.name, self.reserved_ways, self.ways
            )));
        }
        if self.line_bytes != 64 && self.line_bytes != 128 {
            return Err(SimError::Config(format!(
                "{}: line_bytes must be 64 or 128, got {}",
                self.name, self.line_bytes
            )));
        }
        Ok(())
    }
}

/// Optional per-level overrides applied on top of a preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelOverride {
    pub sets: Option<u32>,
    pub ways: Option<u32>,
    pub reserved_ways: Option<u32>,
    pub line_bytes: Option<u32>,
    pub hit_latency_cycles: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheProfile {
    pub name: String,
    /// Innermost first.
    pub levels: Vec<LevelConfig>,
}

impl CacheProfile {
    pub const CPU: &'static str = "cpu-table5";
    pub const GPU: &'static str = "gpu-table6";

    /// L1D 16 KiB of a split 32 KiB L1 (64 sets × 4 ways × 64 B, 1 way
    /// reserved, 1 cycle); L2 256 KiB (512 sets × 8 ways × 64 B, 2 ways
    /// reserved, 4 cycles).
    pub fn cpu_table5() -> Self {
        Self {
            name: Self::CPU.into(),
            levels: vec![
                LevelConfig {
                    name: "L1".into(),
                    sets: 64,
                    ways: 4,
                    reserved_ways: 1,
                    line_bytes: 64,
                    hit_latency_cycles: 1,
                },
                LevelConfig {
                    name: "L2".into(),
                    sets: 512,
                    ways: 8,
                    reserved_ways: 2,
                    line_bytes: 64,
                    hit_latency_cycles: 4,
                },
            ],
        }
    }

    /// 128 KiB L1D, 4 ways, 128-byte lines (256 sets), 1 way reserved.
    pub fn gpu_table6() -> Self {
        Self {
            name: Self::GPU.into(),
            levels: vec![LevelConfig {
                name: "L1".into(),
                sets: 256,
                ways: 4,
                reserved_ways: 1,
                line_bytes: 128,
                hit_latency_cycles: 1,
            }],
        }
    }

    pub fn by_name(name: &str) -> Result<Self, SimError> {
        match name {
            Self::CPU => Ok(Self::cpu_table5()),
            Self::GPU => Ok(Self::gpu_table6()),
            other => Err(SimError::Config(format!(
                "unknown cache profile `{other}` (expected `{}` or `{}`)",
                Self::CPU,
                Self::GPU
            ))),
        }
    }

    pub fn with_overrides(mut self, overrides: &[LevelOverride]) -> Result<Self, SimError> {
        if overrides.len() > self.levels.len() {
            return Err(SimError::Config(format!(
                "{} level overrides for a {}-level profile",
                overrides.len(),
                self.levels.len()
            )));
        }
        for (lvl, o) in self.levels.iter_mut().zip(overrides) {
            if let Some(v) = o.sets {
                lvl.sets = v;
            }
            if let Some(v) = o.ways {
                lvl.ways = v;
            }
            if let Some(v) = o.reserved_ways {
                lvl.reserved_ways = v;
            }
            if let Some(v) = o.line_bytes {
                lvl.line_bytes = v;
            }
            if let Some(v) = o.hit_latency_cycles {
                lvl.hit_latency_cycles = v;
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.levels.is_empty() {
            return Err(SimError::Config("profile has no levels".into()));
        }
        self.levels.iter().try_for_each(LevelConfig::validate)
    }

    /// Pair slots in the reserved lines of the outermost reserved level.
    pub fn outer_pair_slots(&self) -> u64 {
        self.levels
            .iter()
            .rev()
            .find(|l| l.reserved_ways > 0)
            .map_or(0, |l| l.reserved_lines() * l.pairs_per_line() as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_documented_geometry() {
        let cpu = CacheProfile::cpu_table5();
        assert_eq!(cpu.levels[1].capacity_bytes(), 256 * 1024);
        assert_eq!(cpu.levels[0].capacity_bytes(), 16 * 1024);
        assert_eq!(cpu.levels[0].pairs_per_line(), 3);
        assert_eq!(cpu.outer_pair_slots(), 1024 * 3);
        let gpu = CacheProfile::gpu_table6();
        assert_eq!(gpu.levels[0].capacity_bytes(), 128 * 1024);
        assert_eq!(gpu.levels[0].pairs_per_line(), 6);
        assert_eq!(gpu.outer_pair_slots(), 256 * 6);
        assert!(CacheProfile::by_name("tpu").is_err());
    }

    #[test]
    fn overrides_apply_and_validate() {
        let p = CacheProfile::cpu_table5()
            .with_overrides(&[LevelOverride {
                reserved_ways: Some(2),
                ..Default::default()
            }])
            .unwrap();
        assert_eq!(p.levels[0].reserved_ways, 2);
        let bad = CacheProfile::cpu_table5().with_overrides(&[LevelOverride {
            reserved_ways: Some(5),
            ..Default::default()
        }]);
        assert!(bad.is_err());
        let bad_line = CacheProfile::gpu_table6().with_overrides(&[LevelOverride {
            line_bytes: Some(32),
            ..Default::default()
        }]);
        assert!(bad_line.is_err());
    }
}
