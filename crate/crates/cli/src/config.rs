//! JSON scenario files.

use std::fs;
use std::path::Path;

use cosserat_core::energy::ModelSelector;
use cosserat_core::{Grid, MaterialParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub material: MaterialParams,
    pub model: ModelSelector,
    pub grid: Grid,
    pub sim: SimConfig,
    #[serde(default)]
    pub wave: WaveSweep,
    #[serde(default)]
    pub initial: InitialCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub steps: usize,
    pub output_every: usize,
    #[serde(default = "default_eps_reg")]
    pub eps_reg: f64,
}

fn default_eps_reg() -> f64 {
    1e-8
}

/// Wavenumbers `k_min..=k_max` in `k_steps` equal steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSweep {
    pub k_min: f64,
    pub k_max: f64,
    pub k_steps: usize,
    #[serde(default = "default_ratio_samples")]
    pub ratio_samples: usize,
}

fn default_ratio_samples() -> usize {
    200
}

impl Default for WaveSweep {
    fn default() -> Self {
        Self {
            k_min: 1.0,
            k_max: 50.0,
            k_steps: 50,
            ratio_samples: default_ratio_samples(),
        }
    }
}

impl WaveSweep {
    pub fn wavenumbers(&self) -> Vec<f64> {
        if self.k_steps == 1 {
            return vec![self.k_min];
        }
        let d = (self.k_max - self.k_min) / (self.k_steps - 1) as f64;
        (0..self.k_steps)
            .map(|i| self.k_min + d * i as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    #[default]
    Zero,
    RandomSmooth {
        seed: u64,
        amplitude: f64,
        modes: u32,
    },
    /// Dispersion branch `branch` (ascending ω) at angular wavenumber `k`
    /// along x; `k·lx/2π` must be an integer.
    PlaneWave {
        k: f64,
        branch: usize,
        #[serde(default = "default_plane_amplitude")]
        amplitude: f64,
    },
}

fn default_plane_amplitude() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Replaces the tolerance of every check when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance_override: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Material constants with the simulation regularisation applied.
    pub fn params(&self) -> MaterialParams {
        MaterialParams {
            eps_reg: self.sim.eps_reg,
            ..self.material
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if let Err(e) = self.params().validate() {
            return invalid(e.to_string());
        }
        if let Err(e) = self.grid.validate() {
            return invalid(e.to_string());
        }
        let s = &self.sim;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            return invalid("sim.dt must be positive".into());
        }
        if s.output_every == 0 {
            return invalid("sim.output_every must be at least 1".into());
        }
        let w = &self.wave;
        if !(w.k_min.is_finite() && w.k_max.is_finite() && w.k_min > 0.0 && w.k_max >= w.k_min) {
            return invalid("wave needs 0 < k_min <= k_max".into());
        }
        if w.k_steps == 0 {
            return invalid("wave.k_steps must be at least 1".into());
        }
        match self.initial {
            InitialCondition::Zero => {}
            InitialCondition::RandomSmooth {
                amplitude, modes, ..
            } => {
                if !amplitude.is_finite() || modes == 0 {
                    return invalid("random_smooth needs a finite amplitude and modes >= 1".into());
                }
            }
            InitialCondition::PlaneWave { k, amplitude, .. } => {
                let m = k * self.grid.lx / std::f64::consts::TAU;
                if !(k > 0.0 && amplitude.is_finite()) || (m - m.round()).abs() > 1e-9 {
                    return invalid("plane_wave.k must be a positive multiple of 2*pi/lx".into());
                }
            }
        }
        if let Some(VerifyConfig {
            tolerance_override: Some(t),
            ..
        }) = self.verify
        {
            if t.is_nan() || t < 0.0 {
                return invalid("verify.tolerance_override must be non-negative".into());
            }
        }
        Ok(())
    }
}
