use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Result};
use crate::torus::{Field, TorusGrid};
use crate::variational::{critical_mass_n0, GNS6_CRITICAL};

/// Parameters of `rho_L ∝ exp((beta / (p L^gamma)) \int |u|^p) 1{M(u) <= N L} mu_L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsParams {
    pub p: f64,
    pub beta: f64,
    pub alpha: f64,
    /// Mass density bound `N`; `None` removes the cutoff.
    pub mass_density: Option<f64>,
    pub gamma: f64,
    pub length: f64,
    /// Grid points used to discretize the torus.
    pub points: usize,
}

/// Position of `gamma` relative to the critical value `p/2 - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Supercritical,
    Critical,
    Subcritical,
}

impl GibbsParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 2.0 && self.p <= 6.0) {
            return Err(invalid("p", format!("need 2 < p <= 6, got {}", self.p)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(invalid("beta", format!("need beta >= 0, got {}", self.beta)));
        }
        require_positive("alpha", self.alpha)?;
        require_positive("length", self.length)?;
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(invalid("gamma", format!("need gamma >= 0, got {}", self.gamma)));
        }
        if let Some(n) = self.mass_density {
            require_positive("mass_density", n)?;
        }
        if self.p == 6.0 && self.beta > 0.0 {
            let n0 = critical_mass_n0(self.beta, GNS6_CRITICAL)?;
            match self.mass_density {
                Some(n) if n <= n0 => {}
                other => {
                    return Err(invalid(
                        "mass_density",
                        format!("p = 6 needs N <= N0 = {n0:.6} for a finite partition function, got {other:?}"),
                    ))
                }
            }
        }
        TorusGrid::new(self.length, self.points)?;
        Ok(())
    }

    pub fn grid(&self) -> TorusGrid {
        TorusGrid::new(self.length, self.points).expect("validated grid")
    }

    /// `N L`, or infinity without a cutoff.
    pub fn mass_cutoff(&self) -> f64 {
        self.mass_density.map_or(f64::INFINITY, |n| n * self.length)
    }

    /// `beta / (p L^gamma)`.
    pub fn coupling(&self) -> f64 {
        self.beta / (self.p * self.length.powf(self.gamma))
    }

    /// `Phi(u) = (beta / (p L^gamma)) \int |u|^p`.
    pub fn potential(&self, field: &Field) -> f64 {
        if self.beta == 0.0 {
            0.0
        } else {
            self.coupling() * field.lp_total(self.p)
        }
    }

    pub fn regime(&self) -> Regime {
        let critical = 0.5 * self.p - 1.0;
        if (self.gamma - critical).abs() <= 1e-12 {
            Regime::Critical
        } else if self.gamma < critical {
            Regime::Supercritical
        } else {
            Regime::Subcritical
        }
    }

    /// Width `L^{-(p-2-2 gamma)/(6-p)}` of the soliton that dominates at
    /// large `L`; exactly 1 on the critical line.
    pub fn concentration_scale(&self) -> f64 {
        self.length.powf(-(self.p - 2.0 - 2.0 * self.gamma) / (6.0 - self.p))
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        Self { beta, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> GibbsParams {
        GibbsParams {
            p: 4.0,
            beta: 1.0,
            alpha: 1.0,
            mass_density: Some(1.0),
            gamma: 0.0,
            length: 16.0,
            points: 256,
        }
    }

    #[test]
    fn regimes_and_scales() {
        let p = base();
        assert_eq!(p.regime(), Regime::Supercritical);
        assert!((p.concentration_scale() - 1.0 / 16.0).abs() < 1e-15);
        let c = GibbsParams { gamma: 1.0, ..p };
        assert_eq!(c.regime(), Regime::Critical);
        assert_eq!(c.concentration_scale(), 1.0);
        assert_eq!(GibbsParams { gamma: 2.0, ..p }.regime(), Regime::Subcritical);
        assert_eq!(p.mass_cutoff(), 16.0);
    }

    #[test]
    fn sextic_gate() {
        let n0 = critical_mass_n0(1.0, GNS6_CRITICAL).unwrap();
        let ok = GibbsParams { p: 6.0, mass_density: Some(0.99 * n0), ..base() };
        assert!(ok.validate().is_ok());
        let bad = GibbsParams { p: 6.0, mass_density: Some(1.01 * n0), ..base() };
        assert!(bad.validate().is_err());
        let uncut = GibbsParams { p: 6.0, mass_density: None, ..base() };
        assert!(uncut.validate().is_err());
        assert!(GibbsParams { p: 6.5, ..base() }.validate().is_err());
        assert!(GibbsParams { alpha: 0.0, ..base() }.validate().is_err());
    }
}
