//! Experiment configuration, read from TOML.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mcmc::{ChainOptions, GibbsParams};
use crate::torus::TorusGrid;

/// Which driver a configuration feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Sample,
    PhaseScan,
    Concentration,
    Ou,
    Logz,
    Tail,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sample => "sample",
            Self::PhaseScan => "phase_scan",
            Self::Concentration => "concentration",
            Self::Ou => "ou",
            Self::Logz => "logz",
            Self::Tail => "tail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Master seed; every cell and chain seed is derived from it.
    #[serde(default)]
    pub seed: u64,
    /// Output directory, overridden on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub model: ModelConfig,
    #[serde(default)]
    pub mcmc: McmcConfig,
    #[serde(default)]
    pub observables: ObservableConfig,
    #[serde(default)]
    pub thermo: ThermoConfig,
    #[serde(default)]
    pub tail: TailConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_density: Option<f64>,
    #[serde(default = "zero_list")]
    pub beta: Vec<f64>,
    pub length: Vec<f64>,
    #[serde(default = "zero_list")]
    pub gamma: Vec<f64>,
    /// Fixed grid size for every length.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Grid points per unit length when `points` is absent.
    #[serde(default = "default_resolution")]
    pub points_per_unit: f64,
}

/// Where the chains of a cell start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStart {
    /// A free-field draw inside the mass ball.
    #[default]
    FreeField,
    /// A centred soliton holding 90% of the mass cutoff. Escapes the
    /// dispersed metastable state that free-field starts can stay stuck in
    /// at strong coupling; at weak coupling the soliton melts during burn-in.
    Condensed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub step_size: f64,
    pub adapt: bool,
    /// Independent chains per cell, pooled.
    pub chains: usize,
    pub init_attempts: usize,
    pub start: ChainStart,
}

impl Default for McmcConfig {
    fn default() -> Self {
        let o = ChainOptions::default();
        Self {
            steps: o.steps,
            burn_in: o.burn_in,
            thin: o.thin,
            step_size: o.step_size,
            adapt: o.adapt,
            chains: 1,
            init_attempts: o.init_attempts,
            start: ChainStart::FreeField,
        }
    }
}

impl McmcConfig {
    pub fn chain_options(&self) -> ChainOptions {
        ChainOptions {
            steps: self.steps,
            burn_in: self.burn_in,
            thin: self.thin,
            step_size: self.step_size,
            adapt: self.adapt,
            init_attempts: self.init_attempts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservableConfig {
    /// `M` in the local mass `\int_{-M}^{M} |u|`.
    pub local_mass_half_width: f64,
    /// `K` in the covariance window `[-K, K]`; defaults to `L/8`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ou_window: Option<f64>,
    pub lags: Vec<f64>,
    /// Exponent of the `L^q` part of the soliton distance; defaults to `p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance_q: Option<f64>,
    pub strip_deltas: Vec<f64>,
    /// Coupling of the reference ground state; defaults to the largest scanned `beta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_beta: Option<f64>,
}

impl Default for ObservableConfig {
    fn default() -> Self {
        Self {
            local_mass_half_width: 2.0,
            ou_window: None,
            lags: vec![0.0, 0.5, 1.0, 2.0],
            distance_q: None,
            strip_deltas: vec![0.1, 0.2, 0.4],
            reference_beta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermoConfig {
    /// Build a geometric grid up to this value; otherwise `model.beta` is the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_max: Option<f64>,
    pub intervals: usize,
    pub ratio: f64,
    pub anchor_samples: usize,
    pub drift_samples: usize,
    /// Multiples of the soliton drift whose lower bounds are reported.
    pub drift_scales: Vec<f64>,
}

impl Default for ThermoConfig {
    fn default() -> Self {
        Self {
            beta_max: None,
            intervals: 8,
            ratio: 0.85,
            anchor_samples: 20_000,
            drift_samples: 4_000,
            drift_scales: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TailConfig {
    pub interval_lengths: Vec<f64>,
    /// Deviations `M` of the window mass from its mean `|I| / (2 sqrt(alpha))`.
    pub deviations: Vec<f64>,
    pub samples: usize,
    pub min_exceedances: usize,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self {
            interval_lengths: vec![16.0],
            deviations: vec![2.0, 4.0, 6.0, 8.0, 10.0],
            samples: 10_000,
            min_exceedances: 20,
        }
    }
}

fn default_p() -> f64 {
    4.0
}

fn one() -> f64 {
    1.0
}

fn zero_list() -> Vec<f64> {
    vec![0.0]
}

fn default_resolution() -> f64 {
    32.0
}

fn config_error(path: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        reason: reason.into(),
    }
}

impl ExperimentConfig {
    /// Parses and validates; errors name the offending key.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| config_error("<document>", e.to_string().trim()))?;
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(&path, e.into_inner().to_string().trim())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        for (key, list) in [("model.beta", &m.beta), ("model.length", &m.length), ("model.gamma", &m.gamma)] {
            if list.is_empty() {
                return Err(config_error(key, "list must not be empty"));
            }
            if list.iter().any(|v| !v.is_finite()) {
                return Err(config_error(key, "entries must be finite"));
            }
        }
        if !(m.points_per_unit > 0.0 && m.points_per_unit.is_finite()) {
            return Err(config_error("model.points_per_unit", "must be positive"));
        }
        let needs_chains = !matches!(self.experiment, ExperimentKind::Tail);
        if needs_chains {
            if self.mcmc.steps == 0 {
                return Err(config_error("mcmc.steps", "budget must be positive"));
            }
            if self.mcmc.chains == 0 {
                return Err(config_error("mcmc.chains", "need at least one chain"));
            }
            self.mcmc
                .chain_options()
                .validate()
                .map_err(|e| config_error("mcmc", e.to_string()))?;
            if self.mcmc.start == ChainStart::Condensed {
                if self.experiment == ExperimentKind::Logz {
                    return Err(config_error("mcmc.start", "thermodynamic integration always starts from the free field"));
                }
                if m.mass_density.is_none() {
                    return Err(config_error("mcmc.start", "a condensed start needs a mass cutoff"));
                }
            }
        }
        for (i, params) in self.cell_params().into_iter().enumerate() {
            params.validate().map_err(|e| config_error("model", format!("cell {i}: {e}")))?;
        }
        let critical = 0.5 * m.p - 1.0;
        let o = &self.observables;
        match self.experiment {
            ExperimentKind::PhaseScan => {
                if m.gamma.iter().any(|g| (g - critical).abs() > 1e-12) {
                    return Err(config_error("model.gamma", format!("a phase scan runs on the critical line gamma = {critical}")));
                }
                self.require_cutoff()?;
            }
            ExperimentKind::Concentration => {
                if m.gamma.iter().any(|&g| g >= critical) {
                    return Err(config_error("model.gamma", format!("concentration needs gamma < {critical}")));
                }
                self.require_cutoff()?;
                if o.strip_deltas.is_empty() || o.strip_deltas.iter().any(|&d| !(d > 0.0)) {
                    return Err(config_error("observables.strip_deltas", "need positive strip widths"));
                }
            }
            ExperimentKind::Ou => {
                if m.gamma.iter().any(|&g| g < critical - 1e-12) {
                    return Err(config_error("model.gamma", format!("the free-field limit needs gamma >= {critical}")));
                }
                let n = self.require_cutoff()?;
                if n <= 0.5 / m.alpha.sqrt() {
                    return Err(config_error("model.mass_density", format!("need N > 1/(2 sqrt(alpha)) = {}", 0.5 / m.alpha.sqrt())));
                }
                if o.lags.is_empty() || o.lags.iter().any(|&z| !(z >= 0.0 && z.is_finite())) {
                    return Err(config_error("observables.lags", "need a nonempty list of nonnegative lags"));
                }
                if let Some(k) = o.ou_window {
                    if !(k > 0.0) {
                        return Err(config_error("observables.ou_window", "must be positive"));
                    }
                }
            }
            ExperimentKind::Logz => {
                let t = &self.thermo;
                if t.beta_max.is_none() && m.beta.first() != Some(&0.0) {
                    return Err(config_error("model.beta", "the integration grid must start at 0"));
                }
                if t.anchor_samples == 0 {
                    return Err(config_error("thermo.anchor_samples", "must be positive"));
                }
                if t.drift_samples < 2 {
                    return Err(config_error("thermo.drift_samples", "need at least two samples"));
                }
                self.require_cutoff()?;
            }
            ExperimentKind::Tail => {
                let t = &self.tail;
                if t.deviations.len() < 2 {
                    return Err(config_error("tail.deviations", "a slope fit needs at least two deviations"));
                }
                if t.interval_lengths.is_empty() || t.interval_lengths.iter().any(|&l| !(l > 0.0)) {
                    return Err(config_error("tail.interval_lengths", "need positive interval lengths"));
                }
                if t.samples == 0 {
                    return Err(config_error("tail.samples", "budget must be positive"));
                }
                for &l in &m.length {
                    if t.interval_lengths.iter().any(|&i| i > l) {
                        return Err(config_error("tail.interval_lengths", format!("intervals must fit in the torus of length {l}")));
                    }
                }
            }
            ExperimentKind::Sample => {}
        }
        if !(o.local_mass_half_width > 0.0) {
            return Err(config_error("observables.local_mass_half_width", "must be positive"));
        }
        if m.length.iter().any(|&l| o.local_mass_half_width > 0.5 * l) && !matches!(self.experiment, ExperimentKind::Tail) {
            return Err(config_error("observables.local_mass_half_width", "window exceeds half the torus"));
        }
        Ok(())
    }

    fn require_cutoff(&self) -> Result<f64> {
        self.model
            .mass_density
            .ok_or_else(|| config_error("model.mass_density", "this experiment needs a mass cutoff"))
    }

    /// Grid size used for a torus of length `l`.
    pub fn points_for(&self, l: f64) -> usize {
        self.model.points.unwrap_or_else(|| {
            let n = (l * self.model.points_per_unit).ceil() as usize;
            (n + n % 2).max(4)
        })
    }

    /// Cells in row-major order over `gamma`, `length`, `beta`.
    pub fn cell_params(&self) -> Vec<GibbsParams> {
        let m = &self.model;
        let mut cells = Vec::new();
        for &gamma in &m.gamma {
            for &length in &m.length {
                for &beta in &m.beta {
                    cells.push(GibbsParams {
                        p: m.p,
                        beta,
                        alpha: m.alpha,
                        mass_density: m.mass_density,
                        gamma,
                        length,
                        points: self.points_for(length),
                    });
                }
            }
        }
        cells
    }

    pub fn grid_for(&self, l: f64) -> Result<TorusGrid> {
        TorusGrid::new(l, self.points_for(l))
    }
}
