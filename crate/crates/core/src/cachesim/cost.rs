use serde::{Deserialize, Serialize};

use super::SimError;

/// Cycle and energy constants for the store and the reserved levels.
/// Level latencies come from the cache profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModelConfig {
    pub hash_cycles: f64,
    pub probe_cycles: f64,
    pub insert_cycles: f64,
    /// Share of runtime spent in block lookups.
    pub access_fraction: f64,
    /// Per reserved-level access energy; the last entry repeats for deeper levels.
    pub level_access_energy_pj: Vec<f64>,
    pub hash_energy_pj: f64,
    pub probe_energy_pj: f64,
    pub insert_energy_pj: f64,
}

impl Default for CostModelConfig {
    fn default() -> Self {
        Self {
            hash_cycles: 12.0,
            probe_cycles: 25.0,
            insert_cycles: 2.0,
            access_fraction: 0.5,
            level_access_energy_pj: vec![10.0, 60.0],
            hash_energy_pj: 40.0,
            probe_energy_pj: 640.0,
            insert_energy_pj: 20.0,
        }
    }
}

impl CostModelConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let scalars = [
            ("hash_cycles", self.hash_cycles),
            ("probe_cycles", self.probe_cycles),
            ("insert_cycles", self.insert_cycles),
            ("access_fraction", self.access_fraction),
            ("hash_energy_pj", self.hash_energy_pj),
            ("probe_energy_pj", self.probe_energy_pj),
            ("insert_energy_pj", self.insert_energy_pj),
        ];
        for (name, v) in scalars {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SimError::Config(format!("cost.{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.access_fraction > 1.0 {
            return Err(SimError::Config(format!(
                "cost.access_fraction must be <= 1, got {}",
                self.access_fraction
            )));
        }
        if self.level_access_energy_pj.is_empty()
            || self.level_access_energy_pj.iter().any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(SimError::Config(
                "cost.level_access_energy_pj needs at least one finite value >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn level_energy(&self, position: usize) -> f64 {
        let e = &self.level_access_energy_pj;
        e[position.min(e.len() - 1)]
    }

    pub fn store_lookup_cycles(&self, avg_probe_steps: f64) -> f64 {
        self.hash_cycles + avg_probe_steps * self.probe_cycles
    }

    pub fn store_lookup_energy(&self, avg_probe_steps: f64) -> f64 {
        self.hash_energy_pj + avg_probe_steps * self.probe_energy_pj
    }
}

/// Inputs gathered during replay.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct CostInputs {
    pub lookups: u64,
    pub hits: u64,
    pub traversal_cycles: u64,
    pub level_energy_pj: f64,
    pub avg_probe_steps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub accesses: u64,
    pub hits: u64,
    pub misses: u64,
    pub hit_rate: f64,
    pub avg_probe_steps: f64,
    pub store_lookup_cycles: f64,
    pub baseline_cycles: f64,
    pub mechanism_cycles: f64,
    pub access_speedup: f64,
    pub access_fraction: f64,
    pub overall_speedup: f64,
    pub baseline_energy_pj: f64,
    pub mechanism_energy_pj: f64,
    /// 1 - mechanism/baseline energy.
    pub energy_savings: f64,
}

/// Runtime speedup when `fraction` of the runtime is sped up by `speedup`.
pub fn amdahl(fraction: f64, speedup: f64) -> f64 {
    if fraction == 0.0 {
        return 1.0;
    }
    1.0 / ((1.0 - fraction) + fraction / speedup)
}

impl CostReport {
    pub(crate) fn compute(cfg: &CostModelConfig, inp: CostInputs) -> Self {
        let misses = inp.lookups - inp.hits;
        let store_cycles = cfg.store_lookup_cycles(inp.avg_probe_steps);
        let store_energy = cfg.store_lookup_energy(inp.avg_probe_steps);
        let baseline_cycles = inp.lookups as f64 * store_cycles;
        let mechanism_cycles =
            inp.traversal_cycles as f64 + misses as f64 * (store_cycles + cfg.insert_cycles);
        let access_speedup = if mechanism_cycles == 0.0 {
            1.0
        } else {
            baseline_cycles / mechanism_cycles
        };
        let baseline_energy = inp.lookups as f64 * store_energy;
        let mechanism_energy =
            inp.level_energy_pj + misses as f64 * (store_energy + cfg.insert_energy_pj);
        Self {
            accesses: inp.lookups,
            hits: inp.hits,
            misses,
            hit_rate: if inp.lookups == 0 {
                0.0
            } else {
                inp.hits as f64 / inp.lookups as f64
            },
            avg_probe_steps: inp.avg_probe_steps,
            store_lookup_cycles: store_cycles,
            baseline_cycles,
            mechanism_cycles,
            access_speedup,
            access_fraction: cfg.access_fraction,
            overall_speedup: amdahl(cfg.access_fraction, access_speedup),
            baseline_energy_pj: baseline_energy,
            mechanism_energy_pj: mechanism_energy,
            energy_savings: if baseline_energy == 0.0 {
                0.0
            } else {
                1.0 - mechanism_energy / baseline_energy
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amdahl_edges() {
        assert_eq!(amdahl(0.0, 1e9), 1.0);
        assert!((amdahl(1.0, 3.0) - 3.0).abs() < 1e-12);
        assert!((amdahl(0.5, 2.0) - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(CostModelConfig::default().validate().is_ok());
        let mut c = CostModelConfig::default();
        c.access_fraction = 1.5;
        assert!(c.validate().is_err());
        c.access_fraction = 0.2;
        c.probe_cycles = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn report_arithmetic() {
        let cfg = CostModelConfig::default();
        let r = CostReport::compute(
            &cfg,
            CostInputs {
                lookups: 10,
                hits: 9,
                traversal_cycles: 9 + 5,
                level_energy_pj: 0.0,
                avg_probe_steps: 2.0,
            },
        );
        let store = 12.0 + 2.0 * 25.0;
        assert_eq!(r.baseline_cycles, 10.0 * store);
        assert_eq!(r.mechanism_cycles, 14.0 + store + 2.0);
        assert!((r.access_speedup - 620.0 / 78.0).abs() < 1e-12);
    }
}
