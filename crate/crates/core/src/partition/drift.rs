//! Deterministic-drift lower bounds on the log-partition function.
//!
//! For a fixed shift `w` of the free field, the change-of-measure
//! inequality gives `log E[exp F(phi)] >= E[F(phi + w)] - H(w)`, where `H(w)`
//! is the relative entropy of the shifted field. With complex modes of unit
//! variance (`E|g|^2 = 1`) that entropy is the full Cameron-Martin norm
//! `||w||^2_{H^1_alpha} = \int |w'|^2 + alpha \int |w|^2`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::mcmc::{Estimate, GibbsParams};
use crate::torus::{Field, SpectralWeights};
use crate::variational::{ground_state_energy, ClosedForm, SolitonProfile};

/// Points required across the core of the rescaled soliton.
pub const MIN_CORE_POINTS: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftBoundResult {
    /// `expectation - penalty`.
    pub bound: f64,
    pub std_error: f64,
    /// Entropy cost `||w||^2_{H^1_alpha}` of the shift.
    pub penalty: f64,
    /// Monte Carlo mean of `1{M(phi + w) <= N L} Phi(phi + w)`.
    pub expectation: f64,
    /// Fraction of shifted samples that satisfied the mass cutoff.
    pub admissible_fraction: f64,
    pub samples: usize,
}

/// `||w||^2_{H^1_alpha}` on the torus.
pub fn drift_penalty(w: &Field, alpha: f64) -> f64 {
    w.sobolev_norm_sq(1.0, alpha)
}

/// Monte Carlo estimate of `E[F(phi + w)] - ||w||^2_{H^1_alpha}` with
/// `F = 1{M <= N L} Phi`, a lower bound on the log of
/// `E[exp(1{M <= N L} Phi)]`, which lies between `Z` and `Z + 1`.
pub fn bd_lower_bound<R: Rng + ?Sized>(
    params: &GibbsParams,
    w: &Field,
    samples: usize,
    rng: &mut R,
) -> Result<DriftBoundResult> {
    params.validate()?;
    if *w.grid() != params.grid() {
        return Err(Error::GridMismatch(format!(
            "drift lives on {:?}, parameters on {:?}",
            w.grid(),
            params.grid()
        )));
    }
    if samples < 2 {
        return Err(invalid("samples", "need at least two samples for an error bar"));
    }
    let weights = SpectralWeights::new(params.grid(), params.alpha)?;
    let cutoff = params.mass_cutoff();
    let mut admissible = 0usize;
    let values: Vec<f64> = (0..samples)
        .map(|_| {
            let shifted = weights.sample(rng).combine(1.0, w, 1.0).expect("same grid");
            if shifted.mass() <= cutoff {
                admissible += 1;
                params.potential(&shifted)
            } else {
                0.0
            }
        })
        .collect();
    let e = Estimate::iid(&values);
    let penalty = drift_penalty(w, params.alpha);
    Ok(DriftBoundResult {
        bound: e.mean - penalty,
        std_error: e.std_error,
        penalty,
        expectation: e.mean,
        admissible_fraction: admissible as f64 / samples as f64,
        samples,
    })
}

/// Whether the torus mean of the rescaled soliton is removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    MeanZero,
    Raw,
}

/// Default drift scale `L^{-(p-2-2 gamma)/(6-p)}`.
pub fn default_drift_scale(params: &GibbsParams) -> f64 {
    params.concentration_scale()
}

/// `w(x) = L^{1/2} delta^{-1/2} Q(x / delta)` on the torus of `params`,
/// optionally minus its mean, for a line profile `Q`.
pub fn soliton_drift_from(
    profile: &SolitonProfile,
    params: &GibbsParams,
    delta: Option<f64>,
    centering: Centering,
) -> Result<Field> {
    params.validate()?;
    let delta = delta.unwrap_or_else(|| default_drift_scale(params));
    require_positive("delta", delta)?;
    if profile.is_zero() {
        return Err(invalid("profile", "the zero profile has no soliton drift"));
    }
    let grid = params.grid();
    let across = profile.core_width() * delta / grid.spacing();
    if across < MIN_CORE_POINTS {
        return Err(Error::UnderResolved(format!(
            "soliton core spans {across:.1} grid points at delta = {delta:.4e}; need {MIN_CORE_POINTS}"
        )));
    }
    let amp = (params.length / delta).sqrt();
    let raw = Field::from_real(
        grid,
        &grid.positions().map(|x| amp * profile.eval(x / delta)).collect::<Vec<_>>(),
    )?;
    Ok(match centering {
        Centering::MeanZero => raw.centered(),
        Centering::Raw => raw,
    })
}

/// Mean-zero soliton drift built from the explicit ground state at `(beta, N)`.
pub fn soliton_drift(params: &GibbsParams, delta: Option<f64>) -> Result<Field> {
    let profile = drift_profile(params)?;
    soliton_drift_from(&profile, params, delta, Centering::MeanZero)
}

/// The explicit line ground state for `params`, on a line grid wide enough
/// that its tails are negligible.
pub fn drift_profile(params: &GibbsParams) -> Result<SolitonProfile> {
    params.validate()?;
    let n = params
        .mass_density
        .ok_or_else(|| invalid("mass_density", "the soliton drift needs a mass cutoff"))?;
    let cf = ClosedForm::with_mass(params.p, params.beta, n)?;
    let half = 40.0 / cf.decay();
    let grid = crate::variational::LineGrid::new(half, 4097)?;
    crate::variational::soliton_closed_form(params.p, params.beta, cf.lambda, grid)
}

/// Energy of a drift against the prediction `-L^{e} A(beta, N)`,
/// `e = (p + 2 - 4 gamma)/(6 - p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftEnergy {
    /// `(beta / (p L^gamma)) \int |w|^p`.
    pub potential: f64,
    /// `(1/2) \int |w'|^2`.
    pub kinetic: f64,
    /// `potential - kinetic`.
    pub energy: f64,
    pub predicted: f64,
    pub relative_error: f64,
}

pub fn drift_energy(params: &GibbsParams, w: &Field) -> Result<DriftEnergy> {
    params.validate()?;
    let n = params
        .mass_density
        .ok_or_else(|| invalid("mass_density", "the drift energy needs a mass cutoff"))?;
    let potential = params.potential(w);
    let kinetic = 0.5 * w.gradient_energy();
    let energy = potential - kinetic;
    let predicted = -params.length.powf(asymptotic_exponent(params.p, params.gamma)?)
        * ground_state_energy(params.p, params.beta, n)?;
    Ok(DriftEnergy {
        potential,
        kinetic,
        energy,
        predicted,
        relative_error: (energy - predicted).abs() / predicted.abs(),
    })
}

/// Growth exponent `(p + 2 - 4 gamma)/(6 - p)` of `log Z` in `L`.
pub fn asymptotic_exponent(p: f64, gamma: f64) -> Result<f64> {
    if !(p > 2.0 && p < 6.0) {
        return Err(invalid("p", format!("need 2 < p < 6, got {p}")));
    }
    Ok((p + 2.0 - 4.0 * gamma) / (6.0 - p))
}
