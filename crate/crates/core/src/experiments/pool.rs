//! Independent chains per cell, pooled.

use rayon::prelude::*;

use super::config::{ChainStart, McmcConfig};
use super::record::CellRecord;
use crate::error::{invalid, Result};
use crate::mcmc::{batch_means, run_chain_from, run_chain_with, Estimate, GibbsParams, MIN_ESS};
use crate::seed;
use crate::torus::Field;
use crate::variational::ClosedForm;

/// Share of the mass cutoff carried by a condensed start.
const CONDENSED_FILL: f64 = 0.9;

pub(crate) struct Pooled {
    /// One pooled estimate per observable component.
    pub estimates: Vec<Estimate>,
    /// Concatenated traces, chain after chain.
    pub traces: Vec<Vec<f64>>,
    pub acceptance: f64,
    pub step_size: f64,
    pub min_ess: f64,
    pub max_cache_drift: f64,
    pub started_from_zero: bool,
    pub tainted: bool,
}

impl Pooled {
    /// Writes acceptance and mixing diagnostics into a cell.
    pub fn annotate(&self, cell: &mut CellRecord) {
        cell.set("acceptance", self.acceptance);
        cell.set("step_size", self.step_size);
        cell.set("min_ess", self.min_ess);
        cell.set("max_cache_drift", self.max_cache_drift);
        cell.tainted |= self.tainted;
        if self.started_from_zero {
            cell.warnings.push("no free-field draw met the cutoff; chain started from the zero field".into());
        }
        if self.tainted {
            cell.warnings.push(format!("poor mixing: effective sample size {:.1} < {MIN_ESS}", self.min_ess));
        }
    }
}

/// Runs `config.chains` chains with seeds `derive(cell_seed, c)`, applying
/// `observe` (returning `width` numbers) at every recorded state. The
/// first component is the headline observable used for the mixing flag.
pub(crate) fn run_pooled(
    params: &GibbsParams,
    config: &McmcConfig,
    cell_seed: u64,
    width: usize,
    observe: impl Fn(&Field) -> Vec<f64> + Sync,
) -> Result<Pooled> {
    let opts = config.chain_options();
    let initial = match config.start {
        ChainStart::FreeField => None,
        ChainStart::Condensed => condensed_field(params)?,
    };
    let runs = (0..config.chains as u64)
        .into_par_iter()
        .map(|c| {
            let s = seed::derive(cell_seed, c);
            match &initial {
                Some(f) => run_chain_from(params, &opts, s, f.clone(), &observe),
                None => run_chain_with(params, &opts, s, &observe),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut traces = vec![Vec::new(); width];
    let mut parts = vec![Vec::new(); width];
    let mut min_ess = f64::INFINITY;
    let mut tainted = false;
    for run in &runs {
        let mut chain_traces = vec![Vec::with_capacity(run.records.len()); width];
        for rec in &run.records {
            debug_assert_eq!(rec.len(), width);
            for (t, v) in chain_traces.iter_mut().zip(rec) {
                t.push(*v);
            }
        }
        for (k, t) in chain_traces.into_iter().enumerate() {
            if !t.is_empty() {
                parts[k].push(batch_means(&t));
            }
            traces[k].extend(t);
        }
        tainted |= run.stats.tainted;
        min_ess = min_ess.min(run.stats.min_ess());
    }
    let estimates: Vec<Estimate> = parts.iter().map(|p| Estimate::pool_chains(p)).collect();
    if let Some(head) = estimates.first() {
        if head.samples > 0 {
            min_ess = min_ess.min(head.ess);
            tainted |= head.ess < MIN_ESS;
        }
    }
    let n = runs.len() as f64;
    Ok(Pooled {
        estimates,
        traces,
        acceptance: runs.iter().map(|r| r.stats.acceptance_rate).sum::<f64>() / n,
        step_size: runs.iter().map(|r| r.stats.step_size).sum::<f64>() / n,
        min_ess,
        max_cache_drift: runs.iter().map(|r| r.stats.max_cache_drift).fold(0.0, f64::max),
        started_from_zero: runs.iter().any(|r| r.stats.started_from_zero),
        tainted,
    })
}

/// Line ground state at the effective coupling `beta / L^gamma`, centred
/// on the torus and holding [`CONDENSED_FILL`] of the cutoff mass. `None`
/// at `beta = 0`, where there is nothing to condense onto.
pub(crate) fn condensed_field(params: &GibbsParams) -> Result<Option<Field>> {
    if params.beta == 0.0 {
        return Ok(None);
    }
    let cutoff = params.mass_density.ok_or_else(|| invalid("mass_density", "a condensed start needs a mass cutoff"))?;
    let q = ClosedForm::with_mass(
        params.p,
        params.beta * params.length.powf(-params.gamma),
        CONDENSED_FILL * cutoff * params.length,
    )?;
    let grid = params.grid();
    let values: Vec<f64> = grid.positions().map(|x| q.eval(x)).collect();
    let mut field = Field::from_real(grid, &values)?;
    // the discrete mass differs slightly from the continuum one
    let scale = (CONDENSED_FILL * params.mass_cutoff() / field.mass()).sqrt();
    field = field.scaled(scale.into());
    Ok(Some(field))
}

/// Empirical quantile by linear interpolation of the sorted sample.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - i as f64) * (sorted[j] - sorted[i])
}
