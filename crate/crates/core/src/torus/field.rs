use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft;
use super::grid::{TorusGrid, Window};
use crate::error::{invalid, Error, Result};

/// Complex field sampled on a [`TorusGrid`].
///
/// Fourier coefficients follow `u_hat(k) = L^{-1/2} \int u(x) e^{-2 pi i k x / L} dx`,
/// so `sum_k |u_hat(k)|^2` is the mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

/// `(-1)^k` for the grid offset `x_0 = -L/2`.
fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Field {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.points()],
        }
    }

    pub fn from_values(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.points()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: TorusGrid, values: &[f64]) -> Result<Self> {
        Self::from_values(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.positions().map(f).collect();
        Self { grid, values }
    }

    /// Builds a field from coefficients stored in FFT slot order.
    pub fn from_spectrum(grid: TorusGrid, spectrum: &[Complex64]) -> Result<Self> {
        if spectrum.len() != grid.points() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a {}-point grid",
                spectrum.len(),
                grid.points()
            )));
        }
        let scale = grid.length().sqrt().recip();
        let mut buf: Vec<Complex64> = spectrum
            .iter()
            .enumerate()
            .map(|(s, &c)| c * (parity(grid.wavenumber(s)) * scale))
            .collect();
        fft::inverse(&mut buf);
        Ok(Self { grid, values: buf })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Fourier coefficients in FFT slot order.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let g = &self.grid;
        let scale = g.spacing() / g.length().sqrt();
        let mut buf = self.values.clone();
        fft::forward(&mut buf);
        for (s, c) in buf.iter_mut().enumerate() {
            *c *= parity(g.wavenumber(s)) * scale;
        }
        buf
    }

    fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&u, &v)| u * a + v * b)
            .collect();
        Ok(Field { grid: self.grid, values })
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&u| u * c).collect(),
        }
    }

    /// `L^{-1} \int u`.
    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.grid.points() as f64
    }

    /// Copy with the spatial mean removed.
    pub fn centered(&self) -> Field {
        let m = self.mean();
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&u| u - m).collect(),
        }
    }

    pub fn mass(&self) -> f64 {
        self.grid.spacing() * self.values.iter().map(|u| u.norm_sqr()).sum::<f64>()
    }

    /// `\int_W |u|^p` by the rectangle rule on the snapped window.
    pub fn lp_integral(&self, p: f64, window: Window) -> Result<f64> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(invalid("p", format!("need p >= 1, got {p}")));
        }
        let mask = window.mask(&self.grid)?;
        let sum: f64 = self
            .values
            .iter()
            .zip(mask)
            .filter(|(_, inside)| *inside)
            .map(|(u, _)| pow_abs(u.norm(), p))
            .sum();
        Ok(self.grid.spacing() * sum)
    }

    /// `\int |u|^p` over the whole torus.
    pub fn lp_total(&self, p: f64) -> f64 {
        self.grid.spacing() * self.values.iter().map(|u| pow_abs(u.norm(), p)).sum::<f64>()
    }

    /// `sum_k (alpha + (2 pi k / L)^2)^s |u_hat(k)|^2`.
    pub fn sobolev_norm_sq(&self, s: f64, alpha: f64) -> f64 {
        let g = self.grid;
        self.spectrum()
            .iter()
            .enumerate()
            .map(|(slot, c)| {
                let w = g.frequency(g.wavenumber(slot));
                (alpha + w * w).powf(s) * c.norm_sqr()
            })
            .sum()
    }

    pub fn sobolev_norm(&self, s: f64, alpha: f64) -> f64 {
        self.sobolev_norm_sq(s, alpha).sqrt()
    }

    /// Spectral `\int |u'|^2`.
    pub fn gradient_energy(&self) -> f64 {
        let g = self.grid;
        self.spectrum()
            .iter()
            .enumerate()
            .map(|(slot, c)| g.frequency(g.wavenumber(slot)).powi(2) * c.norm_sqr())
            .sum()
    }

    /// Cyclic shift by `shift` grid points: `v_j = u_{j - shift}`.
    pub fn rolled(&self, shift: isize) -> Field {
        let n = self.values.len() as isize;
        let values = (0..n)
            .map(|j| self.values[(j - shift).rem_euclid(n) as usize])
            .collect();
        Field { grid: self.grid, values }
    }

    /// Largest imaginary part relative to the largest modulus.
    pub fn imaginary_fraction(&self) -> f64 {
        let top = self.values.iter().map(|u| u.norm()).fold(0.0, f64::max);
        if top == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|u| u.im.abs()).fold(0.0, f64::max) / top
    }
}

/// `|x|^p` with the cheap integer cases unrolled.
#[inline]
pub(crate) fn pow_abs(x: f64, p: f64) -> f64 {
    let x = x.abs();
    if p == 2.0 {
        x * x
    } else if p == 4.0 {
        let x2 = x * x;
        x2 * x2
    } else if p == 6.0 {
        let x2 = x * x;
        x2 * x2 * x2
    } else {
        x.powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> TorusGrid {
        TorusGrid::new(6.0, 64).unwrap()
    }

    #[test]
    fn single_mode_coefficients() {
        let g = grid();
        let l = g.length();
        // e^{2 pi i 3 x / L} / sqrt(L) has u_hat(3) = 1 and nothing else
        let f = Field::from_fn(g, |x| Complex64::from_polar(l.sqrt().recip(), 2.0 * PI * 3.0 * x / l));
        let spec = f.spectrum();
        for (s, c) in spec.iter().enumerate() {
            let want = if g.wavenumber(s) == 3 { 1.0 } else { 0.0 };
            assert!((c - Complex64::new(want, 0.0)).norm() < 1e-12, "slot {s}: {c}");
        }
        assert!((f.mass() - 1.0).abs() < 1e-12);
        assert!((f.gradient_energy() - (2.0 * PI * 3.0 / l).powi(2)).abs() < 1e-10);
    }

    #[test]
    fn spectrum_roundtrip() {
        let g = grid();
        let f = Field::from_fn(g, |x| Complex64::new((x * 1.3).sin() + 0.2, x.cos() * 0.5));
        let back = Field::from_spectrum(g, &f.spectrum()).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn window_and_complement_add_up() {
        let f = Field::from_fn(grid(), |x| Complex64::new((x * x).exp().recip(), 0.3));
        let w = Window::Interval { start: -1.23, end: 2.2 };
        let a = f.lp_integral(3.0, w).unwrap();
        let b = f.lp_integral(3.0, w.complement()).unwrap();
        assert!((a + b - f.lp_total(3.0)).abs() < 1e-13);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = Field::zeros(grid());
        let b = Field::zeros(TorusGrid::new(6.0, 32).unwrap());
        assert!(matches!(a.combine(1.0, &b, 1.0), Err(Error::GridMismatch(_))));
    }
}
