use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::line::{LineGrid, LineQuadrature};
use crate::error::{invalid, Result};
use crate::torus::{fft_forward, fft_inverse, pow_abs, TorusGrid};

/// Where a real profile lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// Truncated line. With `tail_decay = Some(kappa)` the field is continued
    /// past both ends as `e^{-kappa |x|}`; with `None` it vanishes there.
    Line { grid: LineGrid, tail_decay: Option<f64> },
    /// Periodic grid, optionally restricted to mean-zero fields.
    Torus { grid: TorusGrid, mean_zero: bool },
}

impl Domain {
    pub fn points(&self) -> usize {
        match self {
            Domain::Line { grid, .. } => grid.points(),
            Domain::Torus { grid, .. } => grid.points(),
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        match self {
            Domain::Line { grid, .. } => grid.positions().collect(),
            Domain::Torus { grid, .. } => grid.positions().collect(),
        }
    }
}

/// `E[u] = (1/2) \int |u'|^2 - (beta/p) \int |u|^p` on a discretized domain.
///
/// Line derivatives are first differences; torus derivatives are spectral.
/// `gradient` is the exact derivative of the discrete energy with respect to
/// the nodal values.
#[derive(Debug, Clone)]
pub struct EnergyFunctional {
    p: f64,
    beta: f64,
    domain: Domain,
    line: Option<LineQuadrature>,
}

impl EnergyFunctional {
    pub fn new(p: f64, beta: f64, domain: Domain) -> Result<Self> {
        if !(p > 2.0 && p <= 6.0) {
            return Err(invalid("p", format!("need 2 < p <= 6, got {p}")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(invalid("beta", format!("need beta >= 0, got {beta}")));
        }
        let line = match domain {
            Domain::Line { grid, tail_decay } => {
                if let Some(k) = tail_decay {
                    if !(k.is_finite() && k > 0.0) {
                        return Err(invalid("tail_decay", format!("need a positive rate, got {k}")));
                    }
                }
                Some(LineQuadrature::new(grid, tail_decay, p))
            }
            Domain::Torus { .. } => None,
        };
        Ok(Self { p, beta, domain, line })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.points()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn mean_zero(&self) -> bool {
        matches!(self.domain, Domain::Torus { mean_zero: true, .. })
    }

    /// Mass weight of node `i`.
    pub(crate) fn weight(&self, i: usize) -> f64 {
        match (&self.line, &self.domain) {
            (Some(q), _) => q.mass[i],
            (None, Domain::Torus { grid, .. }) => grid.spacing(),
            _ => unreachable!(),
        }
    }

    fn p_weight(&self, i: usize) -> f64 {
        match (&self.line, &self.domain) {
            (Some(q), _) => q.p_weight(i),
            (None, Domain::Torus { grid, .. }) => grid.spacing(),
            _ => unreachable!(),
        }
    }

    /// Weighted inner product `\int a b`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (x, y))| self.weight(i) * x * y)
            .sum()
    }

    pub fn mass(&self, u: &[f64]) -> f64 {
        self.inner(u, u)
    }

    /// `\int |u|^p`.
    pub fn potential(&self, u: &[f64]) -> f64 {
        u.iter()
            .enumerate()
            .map(|(i, &v)| self.p_weight(i) * pow_abs(v, self.p))
            .sum()
    }

    /// `\int |u|^q` for any `q > 0`, with tails where the domain has them.
    pub fn lq_integral(&self, u: &[f64], q: f64) -> f64 {
        if q == self.p {
            return self.potential(u);
        }
        let n = u.len();
        u.iter()
            .enumerate()
            .map(|(i, &v)| {
                let w = match &self.line {
                    Some(l) if i == 0 || i + 1 == n => l.boundary_weight(q),
                    _ => self.weight(i),
                };
                w * v.abs().powf(q)
            })
            .sum()
    }

    /// `\int |u'|^2`.
    pub fn kinetic(&self, u: &[f64]) -> f64 {
        match &self.line {
            Some(q) => q.kinetic(u),
            None => {
                let k = self.stiffness(u);
                u.iter().zip(k).map(|(a, b)| a * b).sum()
            }
        }
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        0.5 * self.kinetic(u) - self.beta / self.p * self.potential(u)
    }

    /// Euclidean gradient of the kinetic half, `K u`.
    fn stiffness(&self, u: &[f64]) -> Vec<f64> {
        match (&self.line, &self.domain) {
            (Some(q), _) => q.stiffness(u),
            (None, Domain::Torus { grid, .. }) => {
                let dx = grid.spacing();
                spectral_multiply(grid, u, |w2| dx * w2)
            }
            _ => unreachable!(),
        }
    }

    /// `dE/du_i`.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = self.stiffness(u);
        for (i, (gi, &v)) in g.iter_mut().zip(u).enumerate() {
            *gi -= self.beta * self.p_weight(i) * pow_abs(v, self.p - 2.0) * v;
        }
        g
    }

    /// Solves `(sigma W + K) d = r`.
    pub(crate) fn precondition(&self, sigma: f64, r: &[f64]) -> Vec<f64> {
        match (&self.line, &self.domain) {
            (Some(q), _) => q.solve_shifted(sigma, r),
            (None, Domain::Torus { grid, mean_zero }) => {
                let dx = grid.spacing();
                let mut d = spectral_multiply(grid, r, |w2| 1.0 / (dx * (sigma + w2)));
                if *mean_zero {
                    remove_mean(&mut d);
                }
                d
            }
            _ => unreachable!(),
        }
    }
}

pub(crate) fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// Applies the Fourier multiplier `f((2 pi k / L)^2)` to a real vector.
fn spectral_multiply(grid: &TorusGrid, u: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = u.len();
    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut buf);
    for (s, c) in buf.iter_mut().enumerate() {
        let w = grid.frequency(grid.wavenumber(s));
        *c *= f(w * w) / n as f64;
    }
    fft_inverse(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;

    fn check_gradient(e: &EnergyFunctional, u: &[f64]) {
        let g = e.gradient(u);
        let mut v = u.to_vec();
        for i in (0..u.len()).step_by(u.len() / 7 + 1) {
            let h = 1e-5 * (1.0 + u[i].abs());
            v[i] = u[i] + h;
            let up = e.energy(&v);
            v[i] = u[i] - h;
            let dn = e.energy(&v);
            v[i] = u[i];
            let fd = (up - dn) / (2.0 * h);
            let scale = g[i].abs().max(1e-6);
            assert!((fd - g[i]).abs() <= 1e-5 * scale, "node {i}: fd {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = seed::stream(11);
        let line = Domain::Line {
            grid: LineGrid::new(6.0, 64).unwrap(),
            tail_decay: Some(0.8),
        };
        let torus = Domain::Torus {
            grid: TorusGrid::new(7.0, 64).unwrap(),
            mean_zero: true,
        };
        for trial in 0..20 {
            let domain = if trial % 2 == 0 { line } else { torus };
            let p = rng.random_range(2.5..6.0);
            let e = EnergyFunctional::new(p, rng.random_range(0.1..3.0), domain).unwrap();
            let u: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
            check_gradient(&e, &u);
        }
    }

    #[test]
    fn torus_kinetic_of_a_sine() {
        let grid = TorusGrid::new(5.0, 32).unwrap();
        let e = EnergyFunctional::new(4.0, 0.0, Domain::Torus { grid, mean_zero: true }).unwrap();
        let w = 2.0 * std::f64::consts::PI * 2.0 / 5.0;
        let u: Vec<f64> = grid.positions().map(|x| (w * x).sin()).collect();
        // \int cos^2 = L/2
        assert!((e.kinetic(&u) - w * w * 2.5).abs() < 1e-10);
    }

    #[test]
    fn rejects_out_of_range_exponent() {
        let grid = TorusGrid::new(5.0, 32).unwrap();
        let d = Domain::Torus { grid, mean_zero: false };
        assert!(EnergyFunctional::new(2.0, 1.0, d).is_err());
        assert!(EnergyFunctional::new(6.5, 1.0, d).is_err());
        assert!(EnergyFunctional::new(4.0, -1.0, d).is_err());
    }
}
