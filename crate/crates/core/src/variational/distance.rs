//! Distance from a torus field to the orbit of a rescaled ground state.
//!
//! With `Q_L(y) = L^{1/2} lambda^{-1/2} Q(y / lambda)` and a shift `s`, the
//! distance is the larger of
//!
//! * `L^{-1/2} || u - e^{i theta} Q_L(. + s) ||_2`
//! * `L^{-1/2} lambda^{1/2 - 1/q} || u - e^{i theta} Q_L(. + s) ||_q`
//!
//! at the `(s, theta)` minimizing the first. These are the `L^2` and `L^q`
//! norms of `L^{-1/2} lambda^{1/2} u(lambda x)` against the unit-scale profile.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::soliton::SolitonProfile;
use crate::error::{invalid, require_positive, Result};
use crate::numeric::brent_minimize;
use crate::torus::{fft_inverse, Field, TorusGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonDistance {
    pub distance: f64,
    pub l2: f64,
    pub lq: f64,
    /// Physical position of the fitted soliton peak.
    pub center: f64,
    pub phase: f64,
}

/// Embedded soliton on a fixed torus grid, reusable across many fields.
#[derive(Debug, Clone)]
pub struct SolitonManifold {
    grid: TorusGrid,
    lambda: f64,
    q: f64,
    spectrum: Vec<Complex64>,
    embedded_mass: f64,
}

impl SolitonManifold {
    pub fn new(profile: &SolitonProfile, grid: TorusGrid, lambda: f64, q: f64) -> Result<Self> {
        require_positive("lambda", lambda)?;
        if !(q.is_finite() && q >= 2.0) {
            return Err(invalid("q", format!("need a finite exponent q >= 2, got {q}")));
        }
        let l = grid.length();
        let amp = (l / lambda).sqrt();
        let embedded = Field::from_fn(grid, |x| Complex64::new(amp * profile.eval(x / lambda), 0.0));
        Ok(Self {
            grid,
            lambda,
            q,
            embedded_mass: embedded.mass(),
            spectrum: embedded.spectrum(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The embedded profile translated so its peak sits at `center`.
    pub fn embedded(&self, center: f64) -> Field {
        let shifted = self.shifted_spectrum(-center);
        Field::from_spectrum(self.grid, &shifted).expect("same grid")
    }

    /// Coefficients of `Q_L(. + s)`.
    fn shifted_spectrum(&self, s: f64) -> Vec<Complex64> {
        let g = self.grid;
        self.spectrum
            .iter()
            .enumerate()
            .map(|(slot, c)| c * Complex64::from_polar(1.0, g.frequency(g.wavenumber(slot)) * s))
            .collect()
    }

    pub fn distance(&self, field: &Field) -> Result<SolitonDistance> {
        if field.grid() != &self.grid {
            return Err(crate::Error::GridMismatch("field and embedded soliton grids differ".into()));
        }
        let g = self.grid;
        let n = g.points();
        let l = g.length();
        let dx = g.spacing();
        // products u_hat(k) conj(Q_hat(k)); c(s) = sum_k prod_k e^{-i w_k s}
        let prod: Vec<Complex64> = field
            .spectrum()
            .iter()
            .zip(&self.spectrum)
            .map(|(u, q)| u * q.conj())
            .collect();
        let corr = |s: f64| -> Complex64 {
            prod.iter()
                .enumerate()
                .map(|(slot, c)| c * Complex64::from_polar(1.0, -g.frequency(g.wavenumber(slot)) * s))
                .sum()
        };
        // all grid shifts s_m = m dx at once: sum_k prod_k e^{-2 pi i k m / n}
        let mut scan: Vec<Complex64> = prod.iter().map(|c| c.conj()).collect();
        fft_inverse(&mut scan);
        let best = (0..n)
            .max_by(|&a, &b| scan[a].norm_sqr().total_cmp(&scan[b].norm_sqr()))
            .expect("nonempty grid");
        let s0 = best as f64 * dx;
        let (s, neg) = brent_minimize(|s| -corr(s).norm(), s0 - dx, s0 + dx, 1e-10);
        let (s, top) = if -neg >= scan[best].norm() {
            (s, corr(s))
        } else {
            (s0, corr(s0))
        };

        let mass = field.mass();
        let l2 = ((mass + self.embedded_mass - 2.0 * top.norm()).max(0.0) / l).sqrt();
        let phase = top.arg();
        let rot = Complex64::from_polar(1.0, phase);
        let fitted = Field::from_spectrum(g, &self.shifted_spectrum(s))?;
        let diff: f64 = field
            .values()
            .iter()
            .zip(fitted.values())
            .map(|(u, q)| (u - q * rot).norm().powf(self.q))
            .sum::<f64>()
            * dx;
        let lq = l.powf(-0.5) * self.lambda.powf(0.5 - 1.0 / self.q) * diff.powf(1.0 / self.q);
        let center = wrap(-s, l);
        Ok(SolitonDistance {
            distance: l2.max(lq),
            l2,
            lq,
            center,
            phase,
        })
    }
}

fn wrap(x: f64, l: f64) -> f64 {
    (x + 0.5 * l).rem_euclid(l) - 0.5 * l
}

/// One-shot [`SolitonManifold::distance`].
pub fn soliton_distance(field: &Field, profile: &SolitonProfile, lambda: f64, q: f64) -> Result<SolitonDistance> {
    SolitonManifold::new(profile, *field.grid(), lambda, q)?.distance(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::{soliton_closed_form, LineGrid};

    fn setup() -> (SolitonProfile, TorusGrid) {
        let q = soliton_closed_form(4.0, 1.0, 1.0 / 16.0, LineGrid::new(40.0, 1024).unwrap()).unwrap();
        (q, TorusGrid::new(16.0, 512).unwrap())
    }

    #[test]
    fn embedded_soliton_has_zero_distance() {
        let (q, g) = setup();
        let m = SolitonManifold::new(&q, g, 1.0 / 16.0, 4.0).unwrap();
        let d = m.distance(&m.embedded(0.0)).unwrap();
        assert!(d.distance < 1e-6, "{d:?}");
        assert!(d.center.abs() < 1e-6);
    }

    #[test]
    fn grid_shift_and_phase_do_not_matter() {
        let (q, g) = setup();
        let m = SolitonManifold::new(&q, g, 1.0 / 16.0, 4.0).unwrap();
        let base = m.embedded(0.0);
        let reference = m.distance(&base).unwrap();
        let moved = base.rolled(37).scaled(Complex64::from_polar(1.0, 2.1));
        let d = m.distance(&moved).unwrap();
        assert!((d.distance - reference.distance).abs() < 1e-8);
        assert!((d.center - 37.0 * g.spacing()).abs() < 1e-6, "{}", d.center);
        assert!((d.phase - 2.1).abs() < 1e-8);
    }

    #[test]
    fn off_grid_shift_is_recovered() {
        let (q, g) = setup();
        let m = SolitonManifold::new(&q, g, 1.0 / 16.0, 4.0).unwrap();
        let d = m.distance(&m.embedded(1.2345)).unwrap();
        assert!((d.center - 1.2345).abs() < 1e-6, "{d:?}");
        assert!(d.distance < 1e-5, "{d:?}");
    }

    #[test]
    fn zero_field_distance_is_profile_norm() {
        let (q, g) = setup();
        let lam = 1.0 / 16.0;
        let d = soliton_distance(&Field::zeros(g), &q, lam, 4.0).unwrap();
        let cf = q.closed_form.unwrap();
        let want = cf.mass().sqrt().max(cf.power_integral(4.0).powf(0.25));
        assert!((d.distance - want).abs() < 1e-6, "{} vs {want}", d.distance);
    }
}
