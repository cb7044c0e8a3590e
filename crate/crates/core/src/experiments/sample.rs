use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::pool::run_pooled;
use super::record::{CellRecord, ResultRecord};
use crate::error::Result;
use crate::mcmc::observable_local_mass;
use crate::seed;

/// Plain sampling runs: mass density, potential and local mass per cell.
pub fn sample_experiment(config: &ExperimentConfig) -> Result<ResultRecord> {
    let half = config.observables.local_mass_half_width;
    let cells: Vec<CellRecord> = config
        .cell_params()
        .par_iter()
        .enumerate()
        .map(|(i, params)| {
            let cell_seed = seed::derive(config.seed, i as u64);
            let mut cell = CellRecord::new(i, cell_seed, params);
            let pooled = run_pooled(params, &config.mcmc, cell_seed, 3, |f| {
                vec![
                    f.mass() / params.length,
                    params.potential(f),
                    observable_local_mass(f, half).expect("validated window"),
                ]
            });
            match pooled {
                Ok(p) => {
                    p.annotate(&mut cell);
                    cell.set_estimate("mass_density", &p.estimates[0]);
                    cell.set_estimate("potential", &p.estimates[1]);
                    cell.set_estimate("local_mass", &p.estimates[2]);
                    cell
                }
                Err(e) => cell.failed(e),
            }
        })
        .collect();
    Ok(ResultRecord::new(config, cells))
}
