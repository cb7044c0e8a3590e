//! Gaussian free field with covariance `(alpha - d^2/dx^2)^{-1}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::field::Field;
use super::grid::{TorusGrid, Window};
use crate::error::{require_positive, Result};

/// Per-mode standard deviations `sigma_k = (alpha + 4 pi^2 k^2 / L^2)^{-1/2}`
/// in FFT slot order, with the unpaired slot `k = -n/2` set to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWeights {
    grid: TorusGrid,
    alpha: f64,
    sigma: Vec<f64>,
}

impl SpectralWeights {
    pub fn new(grid: TorusGrid, alpha: f64) -> Result<Self> {
        require_positive("alpha", alpha)?;
        let nyquist = grid.points() / 2;
        let sigma = (0..grid.points())
            .map(|s| {
                if s == nyquist {
                    0.0
                } else {
                    let w = grid.frequency(grid.wavenumber(s));
                    (alpha + w * w).sqrt().recip()
                }
            })
            .collect();
        Ok(Self { grid, alpha, sigma })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `E M(u) = sum_k sigma_k^2`.
    pub fn expected_mass(&self) -> f64 {
        self.sigma.iter().map(|s| s * s).sum()
    }

    /// White noise coloured by `sigma`, in FFT slot order.
    pub fn sample_spectrum<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        self.sigma
            .iter()
            .map(|&s| complex_normal(rng) * s)
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Field {
        let spec = self.sample_spectrum(rng);
        Field::from_spectrum(self.grid, &spec).expect("spectrum matches grid")
    }
}

/// Complex normal with `E|g|^2 = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// One exact draw of the truncated free field.
pub fn sample_gff<R: Rng + ?Sized>(grid: TorusGrid, alpha: f64, rng: &mut R) -> Result<Field> {
    Ok(SpectralWeights::new(grid, alpha)?.sample(rng))
}

/// Truncated torus covariance `E u(x) conj(u(y))` at separation `z = x - y`.
pub fn covariance_function(grid: &TorusGrid, alpha: f64, z: f64) -> Result<f64> {
    require_positive("alpha", alpha)?;
    let half = (grid.points() / 2) as i64;
    let l = grid.length();
    Ok((-half + 1..half)
        .map(|k| {
            let w = 2.0 * PI * k as f64 / l;
            (w * z).cos() / (alpha + w * w)
        })
        .sum::<f64>()
        / l)
}

/// `\int_I |u|^2` for `count` independent free-field draws.
pub fn mass_tail_samples<R: Rng + ?Sized>(
    grid: TorusGrid,
    alpha: f64,
    window: Window,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let weights = SpectralWeights::new(grid, alpha)?;
    window.mask(&grid)?;
    (0..count)
        .map(|_| weights.sample(rng).lp_integral(2.0, window))
        .collect()
}
