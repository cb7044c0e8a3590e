//! Windowed two-point functions against the free-field limit.

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::pool::run_pooled;
use super::record::{label, CellRecord, ResultRecord};
use crate::error::{invalid, require_positive, Result};
use crate::seed;
use crate::torus::{covariance_function, Field, TorusGrid, Window};

/// `e^{-sqrt(alpha) |z|} / (2 sqrt(alpha))`, the Green's function of
/// `alpha - d^2/dx^2` on the line.
pub fn ou_covariance(alpha: f64, z: f64) -> Result<f64> {
    require_positive("alpha", alpha)?;
    let r = alpha.sqrt();
    Ok((-r * z.abs()).exp() / (2.0 * r))
}

/// Grid points in `[-K, K)` and the lags snapped to whole grid shifts.
#[derive(Debug, Clone)]
pub struct CovarianceWindow {
    points: Vec<usize>,
    shifts: Vec<usize>,
    lags: Vec<f64>,
    n: usize,
}

impl CovarianceWindow {
    pub fn new(grid: &TorusGrid, half_width: f64, lags: &[f64]) -> Result<Self> {
        require_positive("half_width", half_width)?;
        let mask = Window::centered(half_width).mask(grid)?;
        let points: Vec<usize> = mask.iter().enumerate().filter(|(_, &m)| m).map(|(j, _)| j).collect();
        if points.is_empty() {
            return Err(invalid("half_width", "window contains no grid points"));
        }
        let dx = grid.spacing();
        let n = grid.points();
        let shifts: Vec<usize> = lags
            .iter()
            .map(|&z| ((z / dx).round() as i64).rem_euclid(n as i64) as usize)
            .collect();
        let lags = shifts
            .iter()
            .map(|&m| if m <= n / 2 { m as f64 * dx } else { (m as f64 - n as f64) * dx })
            .collect();
        Ok(Self { points, shifts, lags, n })
    }

    /// Lags actually used, after snapping to the grid.
    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    /// Window averages of `u(x + z) conj(u(x))` and `u(x + z) u(x)` per lag.
    pub fn evaluate(&self, field: &Field) -> Vec<(Complex64, Complex64)> {
        let u = field.values();
        let count = self.points.len() as f64;
        self.shifts
            .iter()
            .map(|&m| {
                let (mut cov, mut pseudo) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for &j in &self.points {
                    let a = u[(j + m) % self.n];
                    cov += a * u[j].conj();
                    pseudo += a * u[j];
                }
                (cov / count, pseudo / count)
            })
            .collect()
    }
}

/// Compares windowed covariances of the Gibbs measure with the free-field limit.
pub fn ou_limit_test(config: &ExperimentConfig) -> Result<ResultRecord> {
    let o = &config.observables;
    let cells: Vec<CellRecord> = config
        .cell_params()
        .par_iter()
        .enumerate()
        .map(|(i, params)| {
            let cell_seed = seed::derive(config.seed, i as u64);
            let mut cell = CellRecord::new(i, cell_seed, params);
            let grid = params.grid();
            let k = o.ou_window.unwrap_or(params.length / 8.0);
            let window = match CovarianceWindow::new(&grid, k, &o.lags) {
                Ok(w) => w,
                Err(e) => return cell.failed(e),
            };
            cell.set("window", k);
            let width = 4 * o.lags.len();
            let pooled = run_pooled(params, &config.mcmc, cell_seed, width, |f| {
                window
                    .evaluate(f)
                    .into_iter()
                    .flat_map(|(c, p)| [c.re, c.im, p.re, p.im])
                    .collect()
            });
            let pooled = match pooled {
                Ok(p) => p,
                Err(e) => return cell.failed(e),
            };
            pooled.annotate(&mut cell);
            let mut worst_rel: f64 = 0.0;
            let mut worst_z: f64 = 0.0;
            for (j, (&z, &z_used)) in o.lags.iter().zip(window.lags()).enumerate() {
                let tag = label(z);
                let e = &pooled.estimates[4 * j..4 * j + 4];
                cell.set_estimate(&format!("cov_re_z{tag}"), &e[0]);
                cell.set_estimate(&format!("cov_im_z{tag}"), &e[1]);
                cell.set_estimate(&format!("pseudo_re_z{tag}"), &e[2]);
                cell.set_estimate(&format!("pseudo_im_z{tag}"), &e[3]);
                cell.set(format!("lag_used_z{tag}"), z_used);
                let target = ou_covariance(params.alpha, z_used).expect("validated alpha");
                cell.set(format!("target_z{tag}"), target);
                if let Ok(t) = covariance_function(&grid, params.alpha, z_used) {
                    cell.set(format!("target_truncated_z{tag}"), t);
                }
                let rel = (e[0].mean - target).abs() / target;
                cell.set(format!("rel_error_z{tag}"), rel);
                worst_rel = worst_rel.max(rel);
                for p in &e[2..4] {
                    worst_z = worst_z.max((p.mean / p.std_error).abs());
                }
            }
            cell.set("max_rel_error", worst_rel);
            cell.set("max_pseudo_z", worst_z);
            cell
        })
        .collect();
    let mut record = ResultRecord::new(config, cells);
    let ok = record.cells.iter().filter(|c| c.error.is_none());
    let (rel, z) = ok.fold((0.0f64, 0.0f64), |(r, z), c| {
        (r.max(c.get("max_rel_error").unwrap_or(f64::NAN)), z.max(c.get("max_pseudo_z").unwrap_or(f64::NAN)))
    });
    record.add_summary("max_rel_error", rel);
    record.add_summary("max_pseudo_z", z);
    Ok(record)
}
