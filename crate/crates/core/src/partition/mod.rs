//! Log-partition-function estimates: thermodynamic integration from
//! `beta = 0` and lower bounds from deterministic drifts.

mod drift;
mod thermo;

pub use drift::{
    asymptotic_exponent, bd_lower_bound, default_drift_scale, drift_energy, drift_penalty, drift_profile,
    soliton_drift, soliton_drift_from, Centering, DriftBoundResult, DriftEnergy, MIN_CORE_POINTS,
};
pub use thermo::{log_mass_probability, log_z_thermo, thermo_beta_grid, QuadratureRule, ThermoPoint, ThermoResult};
