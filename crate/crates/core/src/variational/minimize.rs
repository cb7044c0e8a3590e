//! Ground states by projected, preconditioned gradient descent on the sphere
//! `\int u^2 = N`.
//!
//! Each step moves along the tangential part of `(sigma W + K)^{-1} dE`,
//! where `K` is the discrete stiffness and `sigma` tracks the current
//! multiplier, then rescales back to mass `N`. The step length is a
//! Barzilai-Borwein guess halved until the energy does not increase.

use serde::{Deserialize, Serialize};

use super::energy::{remove_mean, Domain, EnergyFunctional};
use super::line::LineGrid;
use super::soliton::{ClosedForm, SolitonProfile};
use crate::error::{invalid, require_positive, Error, Iterate, Result};
use crate::torus::TorusGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once the `L^2` norm of the projected gradient drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Move the maximum back to the origin every this many steps (0 = never).
    pub recenter_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 100_000,
            recenter_every: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizationResult {
    pub profile: SolitonProfile,
    pub energy: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Energy after every accepted step, starting with the initial guess.
    pub energy_trace: Vec<f64>,
}

const SIGMA_FLOOR: f64 = 1e-3;
const MAX_HALVINGS: usize = 80;

struct Descent {
    u: Vec<f64>,
    energy: f64,
    multiplier: f64,
    residual: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn rescale(e: &EnergyFunctional, u: &mut [f64], mass: f64) {
    if e.mean_zero() {
        remove_mean(u);
    }
    let m = e.mass(u);
    let c = (mass / m).sqrt();
    u.iter_mut().for_each(|v| *v *= c);
}

/// Shifts the peak of `u` to the centre of the grid, or `None` if already there.
fn recentred(e: &EnergyFunctional, u: &[f64]) -> Option<Vec<f64>> {
    let n = u.len();
    let peak = u
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)?;
    let centre = match e.domain() {
        Domain::Line { .. } => (n - 1) / 2,
        Domain::Torus { .. } => n / 2,
    };
    let shift = centre as isize - peak as isize;
    if shift.abs() < 2 {
        return None;
    }
    let periodic = matches!(e.domain(), Domain::Torus { .. });
    Some(
        (0..n as isize)
            .map(|i| {
                let j = i - shift;
                if periodic {
                    u[j.rem_euclid(n as isize) as usize]
                } else if (0..n as isize).contains(&j) {
                    u[j as usize]
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

fn descend(e: &EnergyFunctional, mut u: Vec<f64>, mass: f64, opts: &SolverOptions) -> Descent {
    let n = u.len();
    let w: Vec<f64> = (0..n).map(|i| e.weight(i)).collect();
    rescale(e, &mut u, mass);
    let mut energy = e.energy(&u);
    let mut trace = vec![energy];
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut tau = 1.0;
    let mut multiplier = 0.0;
    let mut residual = f64::INFINITY;

    for it in 0..opts.max_iterations {
        if opts.recenter_every > 0 && it > 0 && it % opts.recenter_every == 0 {
            if let Some(mut v) = recentred(e, &u) {
                rescale(e, &mut v, mass);
                let ev = e.energy(&v);
                if ev <= energy {
                    u = v;
                    energy = ev;
                    previous = None;
                }
            }
        }

        let de = e.gradient(&u);
        let el: f64 = de.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() / mass;
        multiplier = -el;
        let mut r: Vec<f64> = (0..n).map(|i| de[i] / w[i] - el * u[i]).collect();
        if e.mean_zero() {
            remove_mean(&mut r);
        }
        residual = e.mass(&r).sqrt();
        if residual < opts.tolerance {
            return Descent { u, energy, multiplier, residual, iterations: it, converged: true, trace };
        }

        let sigma = (-el).max(SIGMA_FLOOR);
        let wu: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a * b).collect();
        let pg = e.precondition(sigma, &de);
        let pu = e.precondition(sigma, &wu);
        let c = dot(&wu, &pg) / dot(&wu, &pu);
        let d: Vec<f64> = pg.iter().zip(&pu).map(|(a, b)| a - c * b).collect();

        if let Some((u_old, d_old)) = &previous {
            let s: Vec<f64> = u.iter().zip(u_old).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = d.iter().zip(d_old).map(|(a, b)| a - b).collect();
            let den = e.inner(&s, &y);
            if den > 0.0 {
                tau = e.inner(&s, &s) / den;
            }
        }

        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut un: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - tau * b).collect();
            rescale(e, &mut un, mass);
            let en = e.energy(&un);
            if en <= energy + 1e-14 * energy.abs() {
                accepted = Some((un, en));
                break;
            }
            tau *= 0.5;
        }
        let Some((un, en)) = accepted else {
            // no descent possible in floating point
            return Descent { u, energy, multiplier, residual, iterations: it, converged: false, trace };
        };
        previous = Some((std::mem::replace(&mut u, un), d));
        energy = en;
        trace.push(energy);
    }
    Descent {
        u,
        energy,
        multiplier,
        residual,
        iterations: opts.max_iterations,
        converged: false,
        trace,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_inputs(p: f64, beta: f64, mass: f64) -> Result<()> {
    if !(p > 2.0 && p < 6.0) {
        return Err(invalid(
            "p",
            format!("need 2 < p < 6, got {p}; for p >= 6 the line energy is unbounded below above the critical mass"),
        ));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(invalid("beta", format!("need beta >= 0, got {beta}")));
    }
    require_positive("mass", mass)
}

fn finish(
    e: &EnergyFunctional,
    run: Descent,
    closed_form: Option<ClosedForm>,
) -> Result<MinimizationResult> {
    if !run.converged {
        return Err(Error::NotConverged {
            iterations: run.iterations,
            residual: run.residual,
            energy: run.energy,
            last: Iterate(run.u),
        });
    }
    let mut values = run.u;
    if values.iter().sum::<f64>() < 0.0 {
        values.iter_mut().for_each(|v| *v = -*v);
    }
    if run.energy >= 0.0 {
        // the infimum over the ball is attained at zero
        return Ok(zero_result(e, run.iterations, run.trace));
    }
    let profile = SolitonProfile::from_values(e, values, run.multiplier, closed_form);
    Ok(MinimizationResult {
        energy: profile.energy,
        profile,
        iterations: run.iterations,
        gradient_norm: run.residual,
        converged: true,
        energy_trace: run.trace,
    })
}

fn zero_result(e: &EnergyFunctional, iterations: usize, energy_trace: Vec<f64>) -> MinimizationResult {
    let profile = SolitonProfile::from_values(e, vec![0.0; e.len()], 0.0, None);
    MinimizationResult {
        profile,
        energy: 0.0,
        iterations,
        gradient_norm: 0.0,
        converged: true,
        energy_trace,
    }
}

fn bump(xs: impl Iterator<Item = f64>, width: f64) -> Vec<f64> {
    xs.map(|x| (-0.5 * (x / width).powi(2)).exp()).collect()
}

/// `A(beta, N)`: minimal line energy over `\int u^2 <= N`.
///
/// Past the ends of `[-R, R]` the field is continued with the decay rate of
/// the exact ground state, which removes the truncation error of a hard wall.
/// `R` should be at least `20 / sqrt(lambda)`.
pub fn minimize_a(
    p: f64,
    beta: f64,
    mass: f64,
    grid: LineGrid,
    opts: &SolverOptions,
) -> Result<MinimizationResult> {
    check_inputs(p, beta, mass)?;
    if beta == 0.0 {
        let e = EnergyFunctional::new(p, beta, Domain::Line { grid, tail_decay: None })?;
        return Ok(zero_result(&e, 0, vec![0.0]));
    }
    let exact = ClosedForm::with_mass(p, beta, mass)?;
    let e = EnergyFunctional::new(
        p,
        beta,
        Domain::Line {
            grid,
            tail_decay: Some(exact.decay()),
        },
    )?;
    let width = (1.0 / exact.decay()).min(0.25 * grid.half_width());
    let start = bump(grid.positions(), width);
    let result = finish(&e, descend(&e, start, mass, opts), None)?;
    if result.energy >= 0.0 {
        // the line energy is strictly negative for beta > 0
        return Err(Error::UnderResolved(format!(
            "no negative-energy state found on [-{r}, {r}]; the ground state has decay length {:.3e}, increase the half-width",
            1.0 / exact.decay(),
            r = grid.half_width()
        )));
    }
    Ok(result)
}

/// `B(beta, N)`: minimal torus energy over mean-zero `u` with `\int u^2 <= N`.
pub fn minimize_b(
    p: f64,
    beta: f64,
    mass: f64,
    grid: TorusGrid,
    opts: &SolverOptions,
) -> Result<MinimizationResult> {
    check_inputs(p, beta, mass)?;
    let e = EnergyFunctional::new(p, beta, Domain::Torus { grid, mean_zero: true })?;
    if beta == 0.0 {
        return Ok(zero_result(&e, 0, vec![0.0]));
    }
    let exact = ClosedForm::with_mass(p, beta, mass)?;
    let width = (1.0 / exact.decay()).min(grid.length() / 8.0);
    let start = bump(grid.positions(), width);
    finish(&e, descend(&e, start, mass, opts), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> LineGrid {
        LineGrid::new(20.0, 2048).unwrap()
    }

    #[test]
    fn quartic_ground_state_energy() {
        let r = minimize_a(4.0, 1.0, 1.0, line(), &SolverOptions::default()).unwrap();
        assert!((r.energy + 1.0 / 96.0).abs() < 1e-5, "{}", r.energy);
        let r = minimize_a(4.0, 2.0, 1.0, LineGrid::new(10.0, 2048).unwrap(), &SolverOptions::default()).unwrap();
        assert!((r.energy + 1.0 / 24.0).abs() < 1e-5, "{}", r.energy);
    }

    #[test]
    fn energy_is_monotone_and_mass_is_kept() {
        let r = minimize_a(3.0, 1.0, 1.5, LineGrid::new(30.0, 1024).unwrap(), &SolverOptions::default()).unwrap();
        for w in r.energy_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs());
        }
        assert!((r.profile.mass - 1.5).abs() < 1e-10 * 1.5);
        assert!(r.energy < 0.0);
        assert!(r.profile.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn zero_coupling_gives_zero() {
        let r = minimize_a(4.0, 0.0, 1.0, line(), &SolverOptions::default()).unwrap();
        assert_eq!(r.energy, 0.0);
        let g = TorusGrid::new(20.0, 128).unwrap();
        let r = minimize_b(4.0, 0.0, 1.0, g, &SolverOptions::default()).unwrap();
        assert_eq!(r.energy, 0.0);
    }

    #[test]
    fn rejects_critical_and_beyond() {
        assert!(minimize_a(6.0, 1.0, 1.0, line(), &SolverOptions::default()).is_err());
        assert!(minimize_a(4.0, 1.0, 0.0, line(), &SolverOptions::default()).is_err());
    }

    #[test]
    fn iteration_cap_reports_last_iterate() {
        let opts = SolverOptions {
            max_iterations: 2,
            ..SolverOptions::default()
        };
        match minimize_a(4.0, 1.0, 1.0, line(), &opts) {
            Err(Error::NotConverged { last, iterations, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(last.0.len(), 2048);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
