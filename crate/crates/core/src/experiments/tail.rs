//! Large-deviation tail of the free-field mass in a window.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::record::{label, CellRecord, ResultRecord};
use crate::error::{invalid, Result};
use crate::mcmc::GibbsParams;
use crate::seed;
use crate::torus::{mass_tail_samples, Window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub deviation: f64,
    /// `M / |I|^{1/2}`.
    pub scaled: f64,
    pub exceedances: usize,
    pub log_tail: f64,
}

/// Weighted least-squares line through `log P(|M_I - |I|/(2 sqrt(alpha))| > M)`
/// against `M / |I|^{1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    /// Reduced chi-square of the fit; 0 with only two points.
    pub residual: f64,
    pub points: Vec<TailPoint>,
    /// Deviations dropped for having too few exceedances.
    pub dropped: Vec<f64>,
}

/// Fits the tail of `deviations` (absolute deviations of the window mass
/// from its mean). Each point's variance is the binomial delta-method
/// value `(1 - q)/(n q)`; points share samples, so the slope error is
/// optimistic.
pub fn fit_log_tail(
    abs_deviations: &[f64],
    thresholds: &[f64],
    interval: f64,
    min_exceedances: usize,
) -> Result<TailFit> {
    if thresholds.len() < 2 {
        return Err(invalid("thresholds", "a slope fit needs at least two thresholds"));
    }
    let n = abs_deviations.len() as f64;
    let root = interval.sqrt();
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for &m in thresholds {
        let k = abs_deviations.iter().filter(|&&d| d > m).count();
        if k < min_exceedances.max(1) {
            dropped.push(m);
            continue;
        }
        points.push(TailPoint {
            deviation: m,
            scaled: m / root,
            exceedances: k,
            log_tail: (k as f64 / n).ln(),
        });
    }
    if points.len() < 2 {
        return Err(invalid(
            "thresholds",
            format!("only {} threshold(s) have enough exceedances for a fit", points.len()),
        ));
    }
    let w: Vec<f64> = points
        .iter()
        .map(|p| {
            let q = p.exceedances as f64 / n;
            n * q / (1.0 - q).max(1.0 / n)
        })
        .collect();
    let sw: f64 = w.iter().sum();
    let tbar = points.iter().zip(&w).map(|(p, w)| w * p.scaled).sum::<f64>() / sw;
    let ybar = points.iter().zip(&w).map(|(p, w)| w * p.log_tail).sum::<f64>() / sw;
    let stt: f64 = points.iter().zip(&w).map(|(p, w)| w * (p.scaled - tbar).powi(2)).sum();
    let sty: f64 = points
        .iter()
        .zip(&w)
        .map(|(p, w)| w * (p.scaled - tbar) * (p.log_tail - ybar))
        .sum();
    let slope = sty / stt;
    let intercept = ybar - slope * tbar;
    let chi2: f64 = points
        .iter()
        .zip(&w)
        .map(|(p, w)| w * (p.log_tail - intercept - slope * p.scaled).powi(2))
        .sum();
    let dof = points.len() - 2;
    Ok(TailFit {
        slope,
        slope_se: stt.recip().sqrt(),
        intercept,
        residual: if dof > 0 { chi2 / dof as f64 } else { 0.0 },
        points,
        dropped,
    })
}

/// One cell per (torus length, interval length); no chains involved.
pub fn ld_tail_experiment(config: &ExperimentConfig) -> Result<ResultRecord> {
    let t = &config.tail;
    let alpha = config.model.alpha;
    let jobs: Vec<(f64, f64)> = config
        .model
        .length
        .iter()
        .flat_map(|&l| t.interval_lengths.iter().map(move |&i| (l, i)))
        .collect();
    let cells: Vec<CellRecord> = jobs
        .par_iter()
        .enumerate()
        .map(|(idx, &(l, interval))| {
            let cell_seed = seed::derive(config.seed, idx as u64);
            let params = GibbsParams {
                p: config.model.p,
                beta: 0.0,
                alpha,
                mass_density: None,
                gamma: 0.0,
                length: l,
                points: config.points_for(l),
            };
            let mut cell = CellRecord::new(idx, cell_seed, &params);
            cell.params.insert("interval".into(), interval);
            let mut rng = seed::stream(cell_seed);
            let samples = match mass_tail_samples(params.grid(), alpha, Window::centered(0.5 * interval), t.samples, &mut rng) {
                Ok(s) => s,
                Err(e) => return cell.failed(e),
            };
            let mean = interval / (2.0 * alpha.sqrt());
            let dev: Vec<f64> = samples.iter().map(|m| (m - mean).abs()).collect();
            let fit = match fit_log_tail(&dev, &t.deviations, interval, t.min_exceedances) {
                Ok(f) => f,
                Err(e) => return cell.failed(e),
            };
            for m in &fit.dropped {
                cell.warnings.push(format!(
                    "deviation {m} dropped: fewer than {} exceedances",
                    t.min_exceedances
                ));
            }
            cell.set("slope", fit.slope);
            cell.set("slope_se", fit.slope_se);
            cell.set("slope_z", fit.slope / fit.slope_se);
            cell.set("intercept", fit.intercept);
            cell.set("residual", fit.residual);
            cell.set("points_used", fit.points.len() as f64);
            cell.set("window_mass_mean", samples.iter().sum::<f64>() / samples.len() as f64);
            for p in &fit.points {
                cell.set(format!("log_tail_m{}", label(p.deviation)), p.log_tail);
            }
            cell
        })
        .collect();

    let mut record = ResultRecord::new(config, cells);
    for &l in &config.model.length {
        let slopes: Vec<(f64, f64)> = record
            .cells
            .iter()
            .filter(|c| c.param("length") == l)
            .filter_map(|c| Some((c.param("interval"), c.get("slope")?)))
            .collect();
        if let Some(&(i0, s0)) = slopes.first() {
            for &(i, s) in &slopes[1..] {
                record.add_summary(format!("collapse_ratio[L={},I={}/{}]", label(l), label(i), label(i0)), s / s0);
            }
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_tail_is_recovered() {
        // P(X > m) = e^{-m} on a deterministic quantile grid
        let n = 100_000;
        let x: Vec<f64> = (0..n).map(|i| -((i as f64 + 0.5) / n as f64).ln()).collect();
        let fit = fit_log_tail(&x, &[1.0, 2.0, 3.0, 4.0], 16.0, 20).unwrap();
        // t = m / 4, so the slope is -4
        assert!((fit.slope + 4.0).abs() < 1e-3, "{fit:?}");
        assert!(fit.residual < 1.0);
    }

    #[test]
    fn degenerate_fits_are_rejected() {
        let x = vec![1.0; 100];
        assert!(fit_log_tail(&x, &[0.5], 16.0, 20).is_err());
        // only one threshold with enough exceedances
        let fit = fit_log_tail(&x, &[0.5, 2.0], 16.0, 20);
        assert!(fit.is_err());
    }

    #[test]
    fn sparse_thresholds_are_dropped() {
        let n = 10_000;
        let x: Vec<f64> = (0..n).map(|i| -((i as f64 + 0.5) / n as f64).ln()).collect();
        let fit = fit_log_tail(&x, &[1.0, 2.0, 3.0, 9.0], 1.0, 20).unwrap();
        assert_eq!(fit.dropped, vec![9.0]);
        assert_eq!(fit.points.len(), 3);
    }
}
