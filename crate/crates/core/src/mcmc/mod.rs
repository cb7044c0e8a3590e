//! Function-space MCMC for the mass-cutoff Gibbs measure and its observables.

mod chain;
mod diagnostics;
mod observables;
mod params;

pub use chain::{
    pcn_step, run_chain, run_chain_from, run_chain_with, ChainOptions, ChainRun, ChainState, ChainStats, PcnKernel, MIN_ESS,
};
pub use diagnostics::{batch_count, batch_means, ratio_batch_means, Estimate, MIN_BATCHES};
pub use observables::{concentration_manifold, observable_concentration, observable_local_mass};
pub use params::{GibbsParams, Regime};
