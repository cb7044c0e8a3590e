//! Configured parameter studies. Cells run in parallel on the current
//! rayon pool; every cell seed is `derive(master, cell index)`, so output
//! does not depend on the thread count.

mod config;
mod logz;
mod ou;
mod pool;
mod record;
mod sample;
mod scan;
mod tail;

pub use config::{ChainStart, ExperimentConfig, ExperimentKind, McmcConfig, ModelConfig, ObservableConfig, TailConfig, ThermoConfig};
pub use logz::logz_experiment;
pub use ou::{ou_covariance, ou_limit_test, CovarianceWindow};
pub use record::{fmt_float, CellRecord, ResultRecord, VERSION};
pub use sample::sample_experiment;
pub use scan::{phase_scan, supercritical_concentration};
pub use tail::{fit_log_tail, ld_tail_experiment, TailFit, TailPoint};

use crate::error::Result;

/// Validates `config` and runs the driver it names.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultRecord> {
    config.validate()?;
    match config.experiment {
        ExperimentKind::Sample => sample_experiment(config),
        ExperimentKind::PhaseScan => phase_scan(config),
        ExperimentKind::Concentration => supercritical_concentration(config),
        ExperimentKind::Ou => ou_limit_test(config),
        ExperimentKind::Logz => logz_experiment(config),
        ExperimentKind::Tail => ld_tail_experiment(config),
    }
}
