use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Result};

/// Uniform grid on `[-R, R]` with both endpoints, `x_i = -R + i h`, `h = 2R/(n-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineGrid {
    half_width: f64,
    points: usize,
}

impl LineGrid {
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        require_positive("half_width", half_width)?;
        if points < 8 {
            return Err(invalid("points", format!("need at least 8 points, got {points}")));
        }
        Ok(Self { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.x(i))
    }
}

/// Quadrature weights for a line grid whose field continues past each end
/// as a geometric sequence `u_b r^m`, `r = e^{-kappa h}`.
///
/// The tail contributions are summed in closed form and folded into the
/// boundary weights. `kappa = None` means the field vanishes outside.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LineQuadrature {
    pub grid: LineGrid,
    pub decay: Option<f64>,
    /// `\int u^2 = sum_i mass[i] u_i^2`
    pub mass: Vec<f64>,
    /// Geometric tail ratio `e^{-kappa h}`, zero without a tail.
    pub ratio: f64,
    /// Boundary weight for `|u|^p` given the exponent.
    pub boundary_p: f64,
    /// Boundary coefficient of the kinetic term, `(1/2) kt u_b^2`.
    pub kinetic_tail: f64,
}

impl LineQuadrature {
    pub fn new(grid: LineGrid, decay: Option<f64>, p: f64) -> Self {
        let h = grid.spacing();
        let r = decay.map_or(0.0, |k| (-k * h).exp());
        let mut mass = vec![h; grid.points()];
        let n = mass.len();
        mass[0] = h / (1.0 - r * r);
        mass[n - 1] = mass[0];
        Self {
            grid,
            decay,
            mass,
            ratio: r,
            boundary_p: h / (1.0 - r.powf(p)),
            kinetic_tail: (1.0 - r) / (h * (1.0 + r)),
        }
    }

    pub fn p_weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.mass.len() {
            self.boundary_p
        } else {
            self.grid.spacing()
        }
    }

    /// Boundary weight of `|u|^q`.
    pub fn boundary_weight(&self, q: f64) -> f64 {
        self.grid.spacing() / (1.0 - self.ratio.powf(q))
    }

    /// `K u`, the Euclidean gradient of `(1/2) \int |u'|^2`.
    pub fn stiffness(&self, u: &[f64]) -> Vec<f64> {
        let h = self.grid.spacing();
        let n = u.len();
        let mut k = vec![0.0; n];
        for i in 0..n - 1 {
            let d = (u[i + 1] - u[i]) / h;
            k[i] -= d;
            k[i + 1] += d;
        }
        k[0] += self.kinetic_tail * u[0];
        k[n - 1] += self.kinetic_tail * u[n - 1];
        k
    }

    pub fn kinetic(&self, u: &[f64]) -> f64 {
        let h = self.grid.spacing();
        let n = u.len();
        let bulk: f64 = u.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / h;
        bulk + self.kinetic_tail * (u[0] * u[0] + u[n - 1] * u[n - 1])
    }

    /// Solves `(sigma W + K) d = r` with the Thomas algorithm.
    pub fn solve_shifted(&self, sigma: f64, r: &[f64]) -> Vec<f64> {
        let h = self.grid.spacing();
        let n = r.len();
        let off = -1.0 / h;
        let diag = |i: usize| {
            let edge = i == 0 || i == n - 1;
            sigma * self.mass[i] + if edge { 1.0 / h + self.kinetic_tail } else { 2.0 / h }
        };
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut b = diag(0);
        c[0] = off / b;
        d[0] = r[0] / b;
        for i in 1..n {
            b = diag(i) - off * c[i - 1];
            c[i] = off / b;
            d[i] = (r[i] - off * d[i - 1]) / b;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    }
}
