//! Experiment configurations: one JSON document per run, schema-checked
//! (unknown keys rejected) and fully determining the outputs together with
//! the seed.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            min: -20.0,
            max: 20.0,
            points: 512,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwirlConfig {
    pub strength: f64,
    pub width: f64,
    pub center: [f64; 2],
    pub exclusion_radius: f64,
}

impl Default for SwirlConfig {
    fn default() -> Self {
        Self {
            strength: 0.012,
            width: 0.25,
            center: [0.4, 4.0],
            exclusion_radius: 0.04,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoubleSlitConfig {
    pub grid: GridConfig,
    pub separation: f64,
    pub sigma0: f64,
    /// Uniform longitudinal drift used for the (x, z) trajectory plane.
    pub drift_velocity: f64,
    pub t_final: f64,
    pub dt: f64,
    pub n_ensemble: usize,
    pub n_plot_paths: usize,
    pub stochastic_diffusion: f64,
    pub swirl: SwirlConfig,
    pub seed: u64,
}

impl Default for DoubleSlitConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            separation: 4.0,
            sigma0: 0.7,
            drift_velocity: 4.0,
            t_final: 2.0,
            dt: 1e-3,
            n_ensemble: 4000,
            n_plot_paths: 24,
            stochastic_diffusion: 0.5,
            swirl: SwirlConfig::default(),
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeakProtocolConfig {
    pub grid: GridConfig,
    pub separation: f64,
    pub sigma0: f64,
    /// Free-flight time from the slits to the weak screen.
    pub develop_time: f64,
    pub tau: f64,
    pub pointer_sigma: f64,
    pub richardson: bool,
    pub density_floor: f64,
    /// Streamline-fan reconstruction window and resolution.
    pub fan_t_start: f64,
    pub fan_t_end: f64,
    pub fan_times: usize,
    pub fan_lines: usize,
    pub seed: u64,
}

impl Default for WeakProtocolConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            separation: 4.0,
            sigma0: 0.7,
            develop_time: 1.0,
            tau: 0.02,
            pointer_sigma: 8.0,
            richardson: true,
            density_floor: 1e-3,
            fan_t_start: 0.3,
            fan_t_end: 2.0,
            fan_times: 12,
            fan_lines: 14,
            seed: 11,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorTestConfig {
    pub grid: GridConfig,
    pub separation: f64,
    pub sigma0: f64,
    pub develop_time: f64,
    pub tau: f64,
    pub pointer_sigma: f64,
    /// Constant offset field strength for the modified law.
    pub offset_c: f64,
    /// Post-selection points are taken on the outward flank beyond this x.
    pub flank_min: f64,
    pub density_floor: f64,
    /// Tolerance calibration: tol = headroom (C1 tau^2 + C2 / sigma^2) + floor.
    pub headroom: f64,
    pub tolerance_floor: f64,
    pub seed: u64,
}

impl Default for CorTestConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            separation: 4.0,
            sigma0: 0.7,
            develop_time: 1.0,
            tau: 0.05,
            pointer_sigma: 8.0,
            offset_c: 0.5,
            flank_min: 2.0,
            density_floor: 1e-2,
            headroom: 3.0,
            tolerance_floor: 1e-5,
            seed: 13,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquivarianceConfig {
    pub laws: Vec<String>,
    pub n: usize,
    pub grid: GridConfig,
    pub separation: f64,
    pub sigma0: f64,
    pub t_final: f64,
    pub dt: f64,
    pub stochastic_dt: f64,
    pub stochastic_diffusion: f64,
    pub swirl_strength: f64,
    pub swirl_center: [f64; 2],
    pub swirl_width: f64,
    pub swirl_exclusion: f64,
    pub export_ensembles: bool,
    pub seed: u64,
}

impl Default for EquivarianceConfig {
    fn default() -> Self {
        Self {
            laws: vec![
                "standard".into(),
                "modified".into(),
                "stochastic".into(),
                "broken".into(),
            ],
            n: 10_000,
            grid: GridConfig::default(),
            separation: 4.0,
            sigma0: 0.7,
            t_final: 1.5,
            dt: 1e-3,
            stochastic_dt: 5e-4,
            stochastic_diffusion: 0.5,
            swirl_strength: 0.05,
            swirl_center: [1.5, 0.0],
            swirl_width: 0.5,
            swirl_exclusion: 0.2,
            export_ensembles: true,
            seed: 17,
        }
    }
}

/// Three-box runs have no tunable physics; the seed only feeds the manifest.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThreeBoxConfig {
    pub seed: u64,
}

pub fn validate_grid(g: &GridConfig) -> Result<pilotwave::Grid, String> {
    pilotwave::Grid::new_1d(g.min, g.max, g.points).map_err(|e| e.to_string())
}
