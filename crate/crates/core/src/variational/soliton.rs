use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::energy::{Domain, EnergyFunctional};
use super::line::LineGrid;
use crate::error::{invalid, require_positive, Result};

/// Explicit positive solution of `-Q'' + lambda Q = beta Q^{p-1}` on the line,
/// `Q(x) = a sech(b x)^{2/(p-2)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub p: f64,
    pub beta: f64,
    pub lambda: f64,
    pub amplitude: f64,
    pub rate: f64,
}

/// `\int_R sech(y)^m dy`.
fn sech_power_integral(m: f64) -> f64 {
    PI.sqrt() * (libm::lgamma(0.5 * m) - libm::lgamma(0.5 * (m + 1.0))).exp()
}

impl ClosedForm {
    pub fn new(p: f64, beta: f64, lambda: f64) -> Result<Self> {
        if !(p > 2.0 && p < 6.0) {
            return Err(invalid("p", format!("need 2 < p < 6, got {p}")));
        }
        require_positive("beta", beta)?;
        require_positive("lambda", lambda)?;
        Ok(Self {
            p,
            beta,
            lambda,
            amplitude: (p * lambda / (2.0 * beta)).powf(1.0 / (p - 2.0)),
            rate: 0.5 * (p - 2.0) * lambda.sqrt(),
        })
    }

    /// The solution whose mass is `mass`; it minimizes the line energy at that mass.
    pub fn with_mass(p: f64, beta: f64, mass: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        let unit = Self::new(p, beta, 1.0)?.mass();
        // mass scales as lambda^{(6-p)/(2(p-2))}
        let lambda = (mass / unit).powf(2.0 * (p - 2.0) / (6.0 - p));
        Self::new(p, beta, lambda)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = (self.rate * x).cosh().recip();
        self.amplitude * s.powf(2.0 / (self.p - 2.0))
    }

    /// `\int Q^q` in closed form.
    pub fn power_integral(&self, q: f64) -> f64 {
        self.amplitude.powf(q) / self.rate * sech_power_integral(2.0 * q / (self.p - 2.0))
    }

    pub fn mass(&self) -> f64 {
        self.power_integral(2.0)
    }

    /// Energy `(1/2)\int Q'^2 - (beta/p)\int Q^p`, from the Pohozaev identities.
    pub fn energy(&self) -> f64 {
        -self.lambda * self.mass() * (6.0 - self.p) / (2.0 * (self.p + 2.0))
    }

    /// Asymptotic decay rate `sqrt(lambda)` of the tails.
    pub fn decay(&self) -> f64 {
        self.lambda.sqrt()
    }

    /// Full width at half maximum.
    pub fn core_width(&self) -> f64 {
        let half = 0.5f64.powf(0.5 * (self.p - 2.0));
        2.0 * (1.0 / half).acosh() / self.rate
    }
}

/// Exact line ground-state energy `A(beta, N)` for `2 < p < 6`.
pub fn ground_state_energy(p: f64, beta: f64, mass: f64) -> Result<f64> {
    if beta == 0.0 {
        require_positive("mass", mass)?;
        return Ok(0.0);
    }
    Ok(ClosedForm::with_mass(p, beta, mass)?.energy())
}

/// Real nonnegative profile on a line or torus grid with its constraint data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonProfile {
    pub domain: Domain,
    pub values: Vec<f64>,
    pub p: f64,
    pub beta: f64,
    pub mass: f64,
    pub energy: f64,
    /// `lambda` in `-Q'' + lambda Q = beta Q^{p-1}`.
    pub multiplier: f64,
    /// Present when the profile is the explicit solution.
    pub closed_form: Option<ClosedForm>,
}

impl SolitonProfile {
    pub(crate) fn from_values(
        functional: &EnergyFunctional,
        values: Vec<f64>,
        multiplier: f64,
        closed_form: Option<ClosedForm>,
    ) -> Self {
        Self {
            domain: *functional.domain(),
            mass: functional.mass(&values),
            energy: functional.energy(&values),
            p: functional.p(),
            beta: functional.beta(),
            multiplier,
            closed_form,
            values,
        }
    }

    pub fn functional(&self) -> EnergyFunctional {
        EnergyFunctional::new(self.p, self.beta, self.domain).expect("profile parameters were validated")
    }

    pub fn positions(&self) -> Vec<f64> {
        self.domain.positions()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Multipliers from `lambda N = beta \int Q^p - \int Q'^2` and from
    /// `lambda N = (2 beta / p) \int Q^p + \int Q'^2`.
    pub fn multiplier_identities(&self) -> (f64, f64) {
        let e = self.functional();
        let pot = self.beta * e.potential(&self.values);
        let kin = e.kinetic(&self.values);
        (
            (pot - kin) / self.mass,
            (2.0 * pot / self.p + kin) / self.mass,
        )
    }

    /// `L^2` norm of `-Q'' - beta Q^{p-1} + lambda Q` (mean removed on a mean-zero torus).
    pub fn euler_lagrange_residual(&self) -> f64 {
        let e = self.functional();
        let g = e.gradient(&self.values);
        let mut r: Vec<f64> = g
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(i, (gi, u))| gi / e.weight(i) + self.multiplier * u)
            .collect();
        if e.mean_zero() {
            super::energy::remove_mean(&mut r);
        }
        e.mass(&r).sqrt()
    }

    /// Profile value at `x`: the closed form if known, otherwise cubic
    /// interpolation, continued by the exponential tail or periodically.
    pub fn eval(&self, x: f64) -> f64 {
        if let Some(cf) = &self.closed_form {
            return cf.eval(x);
        }
        let v = &self.values;
        let n = v.len();
        match self.domain {
            Domain::Line { grid, tail_decay } => {
                let r = grid.half_width();
                if x.abs() >= r {
                    let edge = if x < 0.0 { v[0] } else { v[n - 1] };
                    return tail_decay.map_or(0.0, |k| edge * (-k * (x.abs() - r)).exp());
                }
                let t = (x + r) / grid.spacing();
                cubic(|i| v[i.clamp(0, n as isize - 1) as usize], t)
            }
            Domain::Torus { grid, .. } => {
                let t = (x + 0.5 * grid.length()) / grid.spacing();
                cubic(|i| v[i.rem_euclid(n as isize) as usize], t)
            }
        }
    }

    /// `\int |Q|^q` with the domain quadrature.
    pub fn power_integral(&self, q: f64) -> f64 {
        self.functional().lq_integral(&self.values, q)
    }

    /// Full width at half maximum, measured on the profile.
    pub fn core_width(&self) -> f64 {
        if let Some(cf) = &self.closed_form {
            return cf.core_width();
        }
        let (imax, &top) = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty profile");
        if top <= 0.0 {
            return 0.0;
        }
        let xs = self.positions();
        let crossing = |range: &mut dyn Iterator<Item = usize>| {
            let mut prev = imax;
            for i in range {
                if self.values[i] < 0.5 * top {
                    let (a, b) = (self.values[prev], self.values[i]);
                    let t = (a - 0.5 * top) / (a - b);
                    return xs[prev] + t * (xs[i] - xs[prev]);
                }
                prev = i;
            }
            xs[prev]
        };
        let right = crossing(&mut (imax + 1..self.values.len()));
        let left = crossing(&mut (0..imax).rev());
        right - left
    }
}

/// Catmull-Rom interpolation of `f` at fractional index `t`.
fn cubic(f: impl Fn(isize) -> f64, t: f64) -> f64 {
    let i = t.floor() as isize;
    let s = t - i as f64;
    let (p0, p1, p2, p3) = (f(i - 1), f(i), f(i + 1), f(i + 2));
    p1 + 0.5
        * s
        * (p2 - p0 + s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + s * (3.0 * (p1 - p2) + p3 - p0)))
}

/// The explicit ground state with multiplier `lambda`, sampled on a line grid.
pub fn soliton_closed_form(p: f64, beta: f64, lambda: f64, grid: LineGrid) -> Result<SolitonProfile> {
    let cf = ClosedForm::new(p, beta, lambda)?;
    let functional = EnergyFunctional::new(
        p,
        beta,
        Domain::Line {
            grid,
            tail_decay: Some(cf.decay()),
        },
    )?;
    let values = grid.positions().map(|x| cf.eval(x)).collect();
    Ok(SolitonProfile::from_values(&functional, values, lambda, Some(cf)))
}
