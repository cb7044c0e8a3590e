//! Soliton-distance studies: the critical-line phase scan and the
//! supercritical concentration trend.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::ou::{ou_covariance, CovarianceWindow};
use super::pool::{quantile, run_pooled};
use super::record::{label, CellRecord, ResultRecord};
use crate::error::{Error, Result};
use crate::mcmc::{concentration_manifold, observable_local_mass, Estimate};
use crate::partition::drift_profile;
use crate::seed;
use crate::torus::{covariance_function, Window};
use crate::variational::SolitonProfile;

/// Ground state shared by every cell: the minimizer at the reference
/// coupling (default: the largest scanned `beta`) and the cutoff `N`.
fn reference_profile(config: &ExperimentConfig) -> Result<(f64, SolitonProfile)> {
    let beta = config
        .observables
        .reference_beta
        .unwrap_or_else(|| config.model.beta.iter().copied().fold(0.0, f64::max));
    if !(beta > 0.0) {
        return Err(Error::Config {
            path: "observables.reference_beta".into(),
            reason: "need a positive reference coupling (or a positive beta in the scan)".into(),
        });
    }
    let base = config.cell_params()[0].with_beta(beta);
    Ok((beta, drift_profile(&base)?))
}

/// `E_mu \int_{-M}^{M} |u|` under the truncated free field: each grid value
/// is complex Gaussian with `E|u|^2 = K(0)`, so `E|u| = sqrt(pi K(0)) / 2`.
fn local_mass_baseline(grid: &crate::torus::TorusGrid, alpha: f64, half_width: f64) -> Result<f64> {
    let inside = Window::centered(half_width).mask(grid)?.iter().filter(|&&m| m).count();
    let k0 = covariance_function(grid, alpha, 0.0)?;
    Ok(inside as f64 * grid.spacing() * 0.5 * (std::f64::consts::PI * k0).sqrt())
}

/// Groups cell indices by `(gamma, length)`, keeping `beta` order.
fn by_line(cells: &[CellRecord]) -> BTreeMap<(String, String), Vec<usize>> {
    let mut groups: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        groups
            .entry((label(c.param("gamma")), label(c.param("length"))))
            .or_default()
            .push(i);
    }
    groups
}

/// Order parameter `1 - d / sqrt(2N)` across `beta` on the critical line,
/// with the local mass, the mass density and the lag-0 windowed covariance
/// as a second witness.
pub fn phase_scan(config: &ExperimentConfig) -> Result<ResultRecord> {
    let (beta_ref, profile) = reference_profile(config)?;
    let o = &config.observables;
    let q = o.distance_q.unwrap_or(config.model.p);
    let n = config.model.mass_density.expect("validated cutoff");
    let norm = (2.0 * n).sqrt();
    let cells: Vec<CellRecord> = config
        .cell_params()
        .par_iter()
        .enumerate()
        .map(|(i, params)| {
            let cell_seed = seed::derive(config.seed, i as u64);
            let mut cell = CellRecord::new(i, cell_seed, params);
            let grid = params.grid();
            let k = o.ou_window.unwrap_or(params.length / 8.0);
            let setup = concentration_manifold(params, &profile, q)
                .and_then(|m| Ok((m, CovarianceWindow::new(&grid, k, &[0.0])?)));
            let (manifold, window) = match setup {
                Ok(s) => s,
                Err(e) => return cell.failed(e),
            };
            let m_half = o.local_mass_half_width;
            let pooled = run_pooled(params, &config.mcmc, cell_seed, 5, |f| {
                let d = manifold.distance(f).expect("grids agree").distance;
                vec![
                    d,
                    1.0 - d / norm,
                    observable_local_mass(f, m_half).expect("validated window"),
                    f.mass() / params.length,
                    window.evaluate(f)[0].0.re,
                ]
            });
            let pooled = match pooled {
                Ok(p) => p,
                Err(e) => return cell.failed(e),
            };
            pooled.annotate(&mut cell);
            let e = &pooled.estimates;
            cell.set_estimate("distance", &e[0]);
            cell.set_estimate("order_parameter", &e[1]);
            cell.set_estimate("local_mass", &e[2]);
            cell.set_estimate("mass_density", &e[3]);
            let target = ou_covariance(params.alpha, 0.0).expect("validated alpha");
            cell.set_estimate(
                "ou_discrepancy",
                &Estimate { mean: e[4].mean - target, ..e[4] },
            );
            if let Ok(b) = local_mass_baseline(&grid, params.alpha, m_half) {
                cell.set("local_mass_gff", b);
            }
            cell.set("reference_beta", beta_ref);
            cell
        })
        .collect();

    let mut record = ResultRecord::new(config, cells);
    let mut summary = Vec::new();
    for ((g, l), idx) in by_line(&record.cells) {
        let est = |i: usize| record.cells[i].estimate("order_parameter");
        let beta = |i: usize| record.cells[i].param("beta");
        let Some(&zero) = idx.iter().find(|&&i| beta(i) == 0.0) else { continue };
        let Some(e0) = est(zero) else { continue };
        let tag = format!("[gamma={g},L={l}]");
        let nonzero: Vec<usize> = idx.iter().copied().filter(|&i| beta(i) > 0.0).collect();
        let top = nonzero.iter().copied().max_by(|&a, &b| beta(a).total_cmp(&beta(b)));
        let low = nonzero.iter().copied().min_by(|&a, &b| beta(a).total_cmp(&beta(b)));
        if let Some(e) = top.and_then(est) {
            summary.push((format!("order_gain_z{tag}"), e.z_score(&e0)));
        }
        if let Some(e) = low.and_then(est) {
            summary.push((format!("smallest_beta_z{tag}"), e.z_score(&e0)));
        }
        let mut sorted = idx.clone();
        sorted.sort_by(|&a, &b| beta(a).total_cmp(&beta(b)));
        let series: Option<Vec<Estimate>> = sorted.iter().map(|&i| est(i)).collect();
        if let Some(series) = series {
            let monotone = series.windows(2).all(|w| w[1].z_score(&w[0]) >= -2.0);
            summary.push((format!("order_monotone_2sigma{tag}"), monotone as u8 as f64));
        }
    }
    for (k, v) in summary {
        record.add_summary(k, v);
    }
    Ok(record)
}

/// Distribution of the soliton distance at the supercritical scale
/// `L^{-(p-2-2 gamma)/(6-p)}`, with strip occupation fractions.
pub fn supercritical_concentration(config: &ExperimentConfig) -> Result<ResultRecord> {
    let (beta_ref, profile) = reference_profile(config)?;
    let o = &config.observables;
    let q = o.distance_q.unwrap_or(config.model.p);
    let deltas = o.strip_deltas.clone();
    let cells: Vec<CellRecord> = config
        .cell_params()
        .par_iter()
        .enumerate()
        .map(|(i, params)| {
            let cell_seed = seed::derive(config.seed, i as u64);
            let mut cell = CellRecord::new(i, cell_seed, params);
            let manifold = match concentration_manifold(params, &profile, q) {
                Ok(m) => m,
                Err(e) => return cell.failed(e),
            };
            let width = 4 + deltas.len();
            let pooled = run_pooled(params, &config.mcmc, cell_seed, width, |f| {
                let d = manifold.distance(f).expect("grids agree");
                let mut v = vec![d.distance, d.l2, d.lq, f.mass() / params.length];
                v.extend(deltas.iter().map(|&delta| (d.distance < delta) as u8 as f64));
                v
            });
            let pooled = match pooled {
                Ok(p) => p,
                Err(e) => return cell.failed(e),
            };
            pooled.annotate(&mut cell);
            let e = &pooled.estimates;
            cell.set_estimate("distance", &e[0]);
            cell.set_estimate("distance_l2", &e[1]);
            cell.set_estimate("distance_lq", &e[2]);
            cell.set_estimate("mass_density", &e[3]);
            for (j, &delta) in deltas.iter().enumerate() {
                cell.set_estimate(&format!("inside_{}", label(delta)), &e[4 + j]);
            }
            let mut sorted = pooled.traces[0].clone();
            sorted.sort_by(f64::total_cmp);
            for (name, p) in [("distance_q10", 0.1), ("distance_q50", 0.5), ("distance_q90", 0.9)] {
                cell.set(name, quantile(&sorted, p));
            }
            cell.set("scale", params.concentration_scale());
            cell.set("reference_beta", beta_ref);
            cell
        })
        .collect();

    let mut record = ResultRecord::new(config, cells);
    // consecutive lengths at fixed (beta, gamma)
    let mut groups: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, c) in record.cells.iter().enumerate() {
        groups
            .entry((label(c.param("beta")), label(c.param("gamma"))))
            .or_default()
            .push(i);
    }
    for ((b, g), mut idx) in groups {
        idx.sort_by(|&x, &y| record.cells[x].param("length").total_cmp(&record.cells[y].param("length")));
        let series: Option<Vec<(f64, Estimate)>> = idx
            .iter()
            .map(|&i| Some((record.cells[i].param("length"), record.cells[i].estimate("distance")?)))
            .collect();
        let Some(series) = series else { continue };
        let mut decreasing = series.len() > 1;
        for w in series.windows(2) {
            let z = w[0].1.z_score(&w[1].1);
            decreasing &= z >= 2.0;
            record.add_summary(format!("decrease_z[beta={b},gamma={g},L={}->{}]", label(w[0].0), label(w[1].0)), z);
        }
        record.add_summary(format!("strictly_decreasing_2sigma[beta={b},gamma={g}]"), decreasing as u8 as f64);
    }
    Ok(record)
}
