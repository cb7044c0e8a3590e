//! Thermodynamic integration of `log Z` across `beta`.
//!
//! `d log Z / d beta = E_beta[(1/(p L^gamma)) \int |u|^p]`, integrated by the
//! trapezoid rule from the anchor `log Z(0) = log P(M(phi) <= N L)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mcmc::{batch_means, run_chain_with, ChainOptions, Estimate, GibbsParams, MIN_ESS};
use crate::seed;
use crate::torus::SpectralWeights;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    Trapezoid,
}

/// Per-`beta` chain summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub beta: f64,
    /// `E_beta[(1/(p L^gamma)) \int |u|^p]`; absent when only the anchor was requested.
    pub derivative: Option<Estimate>,
    pub acceptance_rate: f64,
    pub tainted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoResult {
    pub points: Vec<ThermoPoint>,
    /// `log P(M(phi) <= N L)` under the free field.
    pub anchor: Estimate,
    /// Cumulative `log Z(beta_i)`, with the indicator outside the exponential.
    pub log_z: Vec<f64>,
    /// Standard error of each `log_z` entry, from the anchor and every chain so far.
    pub log_z_error: Vec<f64>,
    /// `log(Z + 1 - P(M <= N L))`, the indicator inside the exponential;
    /// always between `log Z` and `log(Z + 1)`.
    pub log_z_tilde: Vec<f64>,
    pub rule: QuadratureRule,
    /// Some chain had fewer than 50 effective samples.
    pub tainted: bool,
}

impl ThermoResult {
    pub fn betas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.beta).collect()
    }

    /// `log Z~` at the last grid point with its error.
    pub fn final_log_z_tilde(&self) -> Estimate {
        let i = self.log_z.len() - 1;
        let z = self.log_z[i].exp();
        let p0 = self.anchor.mean.exp();
        // d log(Z + 1 - p0) = (Z dlogZ - p0 dlogp0) / (Z + 1 - p0), bounded by the log Z error
        let scale = z / (z + 1.0 - p0);
        Estimate {
            mean: self.log_z_tilde[i],
            std_error: scale * self.log_z_error[i],
            ess: f64::NAN,
            samples: 0,
        }
    }
}

fn mean_of(point: &ThermoPoint) -> Estimate {
    point.derivative.expect("chains ran at every grid point")
}

/// `log P(M(phi) <= N L)` from independent free-field draws, with a
/// delta-method error bar.
pub fn log_mass_probability(params: &GibbsParams, samples: usize, seed: u64) -> Result<Estimate> {
    params.validate()?;
    if samples == 0 {
        return Err(invalid("samples", "need at least one anchor sample"));
    }
    let cutoff = params.mass_cutoff();
    let weights = SpectralWeights::new(params.grid(), params.alpha)?;
    let mut rng = seed::stream(seed);
    let hits = (0..samples).filter(|_| weights.sample(&mut rng).mass() <= cutoff).count();
    if hits == 0 {
        return Err(Error::NoAdmissibleSample(format!(
            "none of {samples} free-field draws met the mass cutoff {cutoff:.4}"
        )));
    }
    let q = hits as f64 / samples as f64;
    Ok(Estimate {
        mean: q.ln(),
        std_error: ((1.0 - q) / (samples as f64 * q)).sqrt(),
        ess: samples as f64,
        samples,
    })
}

/// `0 = beta_0 < ... < beta_m = beta_max` with increments shrinking by
/// `ratio` toward the upper end.
pub fn thermo_beta_grid(beta_max: f64, intervals: usize, ratio: f64) -> Result<Vec<f64>> {
    if !(beta_max > 0.0 && beta_max.is_finite()) {
        return Err(invalid("beta_max", format!("need a positive value, got {beta_max}")));
    }
    if intervals == 0 {
        return Err(invalid("intervals", "need at least one interval"));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(invalid("ratio", format!("need 0 < ratio <= 1, got {ratio}")));
    }
    let steps: Vec<f64> = (0..intervals).map(|i| ratio.powi(i as i32)).collect();
    let total: f64 = steps.iter().sum();
    let mut grid = Vec::with_capacity(intervals + 1);
    grid.push(0.0);
    let mut acc = 0.0;
    for s in &steps {
        acc += s;
        grid.push(beta_max * acc / total);
    }
    *grid.last_mut().expect("nonempty") = beta_max;
    Ok(grid)
}

/// Runs one chain per grid point in parallel and integrates the mean
/// potential derivative.
///
/// Chain `i` is seeded with `derive(seed, i + 1)`, the anchor with
/// `derive(seed, 0)`, so results do not depend on the thread count.
pub fn log_z_thermo(
    params: &GibbsParams,
    beta_grid: &[f64],
    chain: &ChainOptions,
    anchor_samples: usize,
    seed: u64,
) -> Result<ThermoResult> {
    if beta_grid.first() != Some(&0.0) {
        return Err(invalid("beta_grid", "must start at 0"));
    }
    if beta_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("beta_grid", "must be strictly increasing"));
    }
    if beta_grid.iter().any(|b| !b.is_finite()) {
        return Err(invalid("beta_grid", "must be finite"));
    }
    params.with_beta(*beta_grid.last().expect("nonempty")).validate()?;
    chain.validate()?;

    let anchor = log_mass_probability(params, anchor_samples, seed::derive(seed, 0))?;
    let scale = 1.0 / (params.p * params.length.powf(params.gamma));

    let points = if beta_grid.len() == 1 {
        // the anchor alone fixes log Z(0)
        vec![ThermoPoint {
            beta: 0.0,
            derivative: None,
            acceptance_rate: 0.0,
            tainted: false,
        }]
    } else {
        beta_grid
            .par_iter()
            .enumerate()
            .map(|(i, &beta)| {
                let at = params.with_beta(beta);
                let p = at.p;
                let run = run_chain_with(&at, chain, seed::derive(seed, i as u64 + 1), |f| scale * f.lp_total(p))?;
                if run.records.is_empty() {
                    return Err(invalid("chain", "no samples recorded after burn-in"));
                }
                let derivative = batch_means(&run.records);
                Ok(ThermoPoint {
                    beta,
                    derivative: Some(derivative),
                    acceptance_rate: run.stats.acceptance_rate,
                    tainted: run.stats.tainted || derivative.ess < MIN_ESS,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };

    let p0 = anchor.mean.exp();
    let mut log_z = vec![anchor.mean];
    let mut log_z_error = vec![anchor.std_error];
    // each chain's mean enters the trapezoid sum with weight (h_left + h_right)/2;
    // accumulate exactly the weights used up to the current point
    for i in 1..points.len() {
        let h = points[i].beta - points[i - 1].beta;
        let (a, b) = (mean_of(&points[i - 1]), mean_of(&points[i]));
        log_z.push(log_z[i - 1] + 0.5 * h * (a.mean + b.mean));
        let mut v = anchor.std_error.powi(2);
        for j in 0..=i {
            let left = if j > 0 { points[j].beta - points[j - 1].beta } else { 0.0 };
            let right = if j < i { points[j + 1].beta - points[j].beta } else { 0.0 };
            v += (0.5 * (left + right) * mean_of(&points[j]).std_error).powi(2);
        }
        log_z_error.push(v.sqrt());
    }
    let log_z_tilde = log_z.iter().map(|&lz| (lz.exp() + 1.0 - p0).ln()).collect();
    let tainted = points.iter().any(|p| p.tainted);
    Ok(ThermoResult {
        points,
        anchor,
        log_z,
        log_z_error,
        log_z_tilde,
        rule: QuadratureRule::Trapezoid,
        tainted,
    })
}
