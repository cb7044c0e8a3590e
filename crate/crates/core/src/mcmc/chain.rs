//! Preconditioned Crank-Nicolson chains.
//!
//! The proposal `u' = sqrt(1 - s^2) u + s xi`, `xi ~ mu_L`, leaves the free
//! field invariant, so the Metropolis ratio only involves the potential:
//! accept with probability `min(1, exp(Phi(u') - Phi(u)))`, and reject any
//! proposal above the mass cutoff outright.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::diagnostics::batch_means;
use super::params::GibbsParams;
use crate::error::{invalid, Error, Result};
use crate::seed::{self, Stream};
use crate::torus::{Field, SpectralWeights};

/// Chains with a smaller effective sample size than this are flagged.
pub const MIN_ESS: f64 = 50.0;
const CACHE_CHECK_EVERY: u64 = 1000;
const ADAPT_WINDOW: u64 = 50;
const TARGET_ACCEPTANCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    /// Total number of steps, burn-in included.
    pub steps: usize,
    pub burn_in: usize,
    /// Record every `thin`-th state after burn-in.
    pub thin: usize,
    pub step_size: f64,
    /// Tune the step size toward 25% acceptance during burn-in.
    pub adapt: bool,
    pub init_attempts: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            steps: 20_000,
            burn_in: 2_000,
            thin: 10,
            step_size: 0.3,
            adapt: true,
            init_attempts: 10_000,
        }
    }
}

impl ChainOptions {
    pub fn validate(&self) -> Result<()> {
        if self.steps < self.burn_in {
            return Err(invalid("steps", format!("{} steps do not cover {} burn-in steps", self.steps, self.burn_in)));
        }
        if self.thin == 0 {
            return Err(invalid("thin", "must be at least 1"));
        }
        if !(self.step_size >= 0.0 && self.step_size <= 1.0) {
            return Err(invalid("step_size", format!("need 0 <= s <= 1, got {}", self.step_size)));
        }
        Ok(())
    }

    pub fn recorded(&self) -> usize {
        (self.steps - self.burn_in) / self.thin
    }
}

/// Current field with cached potential and mass.
#[derive(Debug, Clone)]
pub struct ChainState {
    field: Field,
    potential: f64,
    mass: f64,
    step_size: f64,
    rng: Stream,
    step: u64,
}

impl ChainState {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn potential(&self) -> f64 {
        self.potential
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn set_step_size(&mut self, s: f64) {
        self.step_size = s.clamp(0.0, 1.0);
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Recomputes the caches; returns the larger relative discrepancy.
    pub fn resync(&mut self, params: &GibbsParams) -> f64 {
        let pot = params.potential(&self.field);
        let mass = self.field.mass();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        let drift = rel(pot, self.potential).max(rel(mass, self.mass));
        self.potential = pot;
        self.mass = mass;
        drift
    }
}

/// Proposal machinery for one parameter set.
#[derive(Debug, Clone)]
pub struct PcnKernel {
    params: GibbsParams,
    weights: SpectralWeights,
}

impl PcnKernel {
    pub fn new(params: GibbsParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            weights: SpectralWeights::new(params.grid(), params.alpha)?,
            params,
        })
    }

    pub fn params(&self) -> &GibbsParams {
        &self.params
    }

    pub fn weights(&self) -> &SpectralWeights {
        &self.weights
    }

    /// Draws from `mu_L` until the cutoff holds. When every attempt fails
    /// and `N < 1/(2 sqrt(alpha))`, where typical free-field masses exceed
    /// the cutoff, the chain starts from the zero field instead.
    pub fn initial_state(&self, seed: u64, step_size: f64, attempts: usize) -> Result<(ChainState, bool)> {
        let mut rng = seed::stream(seed);
        let cutoff = self.params.mass_cutoff();
        for _ in 0..attempts {
            let field = self.weights.sample(&mut rng);
            let mass = field.mass();
            if mass <= cutoff {
                let potential = self.params.potential(&field);
                return Ok((ChainState { field, potential, mass, step_size, rng, step: 0 }, false));
            }
        }
        let n = self.params.mass_density.unwrap_or(f64::INFINITY);
        if n < 0.5 / self.params.alpha.sqrt() {
            let field = Field::zeros(self.params.grid());
            return Ok((ChainState { field, potential: 0.0, mass: 0.0, step_size, rng, step: 0 }, true));
        }
        Err(Error::NoAdmissibleSample(format!(
            "{attempts} free-field draws all exceeded the mass cutoff {cutoff:.4}; increase N or decrease L"
        )))
    }

    /// Starts a chain at a given admissible field.
    pub fn state_from(&self, field: Field, seed: u64, step_size: f64) -> Result<ChainState> {
        if *field.grid() != self.params.grid() {
            return Err(Error::GridMismatch(format!("initial field on {:?}", field.grid())));
        }
        let mass = field.mass();
        if mass > self.params.mass_cutoff() {
            return Err(invalid("initial", format!("mass {mass:.4} exceeds the cutoff {:.4}", self.params.mass_cutoff())));
        }
        let potential = self.params.potential(&field);
        Ok(ChainState { field, potential, mass, step_size, rng: seed::stream(seed), step: 0 })
    }

    /// One pCN transition. Returns whether the proposal was accepted.
    pub fn step(&self, state: &mut ChainState) -> bool {
        state.step += 1;
        let s = state.step_size;
        let xi = self.weights.sample(&mut state.rng);
        let keep = (1.0 - s * s).sqrt();
        let proposal = state.field.combine(keep, &xi, s).expect("same grid");
        let mass = proposal.mass();
        // draw the uniform unconditionally so streams do not depend on the branch
        let u: f64 = state.rng.random();
        if mass > self.params.mass_cutoff() {
            return false;
        }
        let potential = self.params.potential(&proposal);
        if u.ln() < potential - state.potential {
            state.field = proposal;
            state.potential = potential;
            state.mass = mass;
            true
        } else {
            false
        }
    }
}

/// One pCN transition of `state` under `kernel`.
pub fn pcn_step(state: &mut ChainState, kernel: &PcnKernel) -> bool {
    kernel.step(state)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStats {
    /// Acceptance after burn-in.
    pub acceptance_rate: f64,
    pub burn_in_acceptance: f64,
    /// Step size in force after burn-in.
    pub step_size: f64,
    pub steps: usize,
    pub samples: usize,
    /// `mass` and `potential` at every recorded state.
    pub traces: BTreeMap<String, Vec<f64>>,
    pub ess: BTreeMap<String, f64>,
    pub max_cache_drift: f64,
    pub started_from_zero: bool,
    /// Set when some traced quantity has fewer than 50 effective samples.
    pub tainted: bool,
    #[serde(skip)]
    pub seconds_per_step: f64,
}

impl ChainStats {
    pub fn min_ess(&self) -> f64 {
        self.ess.values().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone)]
pub struct ChainRun<T> {
    pub records: Vec<T>,
    pub stats: ChainStats,
}

/// Runs a chain and applies `observe` to every recorded state.
pub fn run_chain_with<T>(
    params: &GibbsParams,
    opts: &ChainOptions,
    seed: u64,
    observe: impl FnMut(&Field) -> T,
) -> Result<ChainRun<T>> {
    opts.validate()?;
    let kernel = PcnKernel::new(*params)?;
    let (state, started_from_zero) = kernel.initial_state(seed, opts.step_size, opts.init_attempts)?;
    drive(&kernel, state, started_from_zero, opts, observe)
}

/// Like [`run_chain_with`], started at `initial` instead of a free-field draw.
pub fn run_chain_from<T>(
    params: &GibbsParams,
    opts: &ChainOptions,
    seed: u64,
    initial: Field,
    observe: impl FnMut(&Field) -> T,
) -> Result<ChainRun<T>> {
    opts.validate()?;
    let kernel = PcnKernel::new(*params)?;
    let state = kernel.state_from(initial, seed, opts.step_size)?;
    drive(&kernel, state, false, opts, observe)
}

fn drive<T>(
    kernel: &PcnKernel,
    mut state: ChainState,
    started_from_zero: bool,
    opts: &ChainOptions,
    mut observe: impl FnMut(&Field) -> T,
) -> Result<ChainRun<T>> {
    let params = kernel.params();
    let clock = Instant::now();
    let cutoff = params.mass_cutoff();

    let mut window = 0u64;
    let mut burn_accepted = 0u64;
    let mut accepted = 0u64;
    let mut max_cache_drift: f64 = 0.0;
    let mut records = Vec::with_capacity(opts.recorded());
    let mut mass_trace = Vec::with_capacity(opts.recorded());
    let mut potential_trace = Vec::with_capacity(opts.recorded());

    for step in 1..=opts.steps as u64 {
        let ok = kernel.step(&mut state);
        if step <= opts.burn_in as u64 {
            burn_accepted += ok as u64;
            window += ok as u64;
            if opts.adapt && step % ADAPT_WINDOW == 0 {
                let rate = window as f64 / ADAPT_WINDOW as f64;
                let s = (state.step_size * (rate - TARGET_ACCEPTANCE).exp()).clamp(1e-3, 1.0);
                state.set_step_size(s);
                window = 0;
            }
        } else {
            accepted += ok as u64;
            if (step - opts.burn_in as u64).is_multiple_of(opts.thin as u64) {
                assert!(state.mass <= cutoff, "recorded state violates the mass cutoff");
                mass_trace.push(state.mass);
                potential_trace.push(state.potential);
                records.push(observe(&state.field));
            }
        }
        if step % CACHE_CHECK_EVERY == 0 {
            max_cache_drift = max_cache_drift.max(state.resync(params));
        }
    }

    let post = (opts.steps - opts.burn_in) as f64;
    let samples = records.len();
    let mut ess = BTreeMap::new();
    if samples > 0 {
        ess.insert("mass".to_string(), batch_means(&mass_trace).ess);
        ess.insert("potential".to_string(), batch_means(&potential_trace).ess);
    }
    let mut traces = BTreeMap::new();
    traces.insert("mass".to_string(), mass_trace);
    traces.insert("potential".to_string(), potential_trace);
    let tainted = samples > 0 && ess.values().any(|&e| e < MIN_ESS);
    let stats = ChainStats {
        acceptance_rate: if post > 0.0 { accepted as f64 / post } else { 0.0 },
        burn_in_acceptance: if opts.burn_in > 0 { burn_accepted as f64 / opts.burn_in as f64 } else { 0.0 },
        step_size: state.step_size,
        steps: opts.steps,
        samples,
        traces,
        ess,
        max_cache_drift,
        started_from_zero,
        tainted,
        seconds_per_step: clock.elapsed().as_secs_f64() / opts.steps.max(1) as f64,
    };
    Ok(ChainRun { records, stats })
}

/// Runs a chain and keeps the recorded fields.
pub fn run_chain(params: &GibbsParams, opts: &ChainOptions, seed: u64) -> Result<ChainRun<Field>> {
    run_chain_with(params, opts, seed, Field::clone)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64, n: Option<f64>) -> GibbsParams {
        GibbsParams {
            p: 4.0,
            beta,
            alpha: 1.0,
            mass_density: n,
            gamma: 0.0,
            length: 8.0,
            points: 64,
        }
    }

    fn opts(steps: usize, burn_in: usize) -> ChainOptions {
        ChainOptions { steps, burn_in, thin: 1, step_size: 0.3, adapt: false, init_attempts: 100 }
    }

    #[test]
    fn free_uncut_chain_accepts_everything() {
        let run = run_chain_with(&params(0.0, None), &opts(500, 0), 1, |_| ()).unwrap();
        assert_eq!(run.stats.acceptance_rate, 1.0);
    }

    #[test]
    fn zero_step_size_freezes_the_chain() {
        let o = ChainOptions { step_size: 0.0, ..opts(50, 0) };
        let run = run_chain(&params(1.0, Some(1.0)), &o, 4).unwrap();
        assert!(run.records.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn empty_after_burn_in() {
        let run = run_chain(&params(1.0, Some(1.0)), &opts(100, 100), 2).unwrap();
        assert!(run.records.is_empty());
        assert_eq!(run.stats.samples, 0);
        assert!(!run.stats.tainted);
    }

    #[test]
    fn same_seed_same_stream() {
        let a = run_chain(&params(1.0, Some(1.0)), &opts(300, 50), 9).unwrap();
        let b = run_chain(&params(1.0, Some(1.0)), &opts(300, 50), 9).unwrap();
        assert_eq!(a.records, b.records);
        let c = run_chain(&params(1.0, Some(1.0)), &opts(300, 50), 10).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn cutoff_and_caches_hold() {
        let p = params(2.0, Some(0.6));
        let run = run_chain_with(&p, &ChainOptions { steps: 5000, burn_in: 1000, ..opts(0, 0) }, 3, |f| f.mass()).unwrap();
        assert!(run.records.iter().all(|&m| m <= p.mass_cutoff()));
        assert!(run.stats.max_cache_drift < 1e-8);
    }

    #[test]
    fn adaptation_moves_toward_target() {
        let p = GibbsParams { beta: 3.0, length: 16.0, points: 128, ..params(3.0, Some(2.0)) };
        let o = ChainOptions { steps: 6000, burn_in: 4000, thin: 10, step_size: 1.0, adapt: true, init_attempts: 100 };
        let run = run_chain_with(&p, &o, 5, |_| ()).unwrap();
        assert!(run.stats.step_size < 1.0);
        assert!(run.stats.acceptance_rate > 0.05 && run.stats.acceptance_rate < 0.6, "{}", run.stats.acceptance_rate);
    }

    #[test]
    fn hopeless_cutoff_is_reported_or_falls_back() {
        // N below 1/(2 sqrt(alpha)): zero-field start
        let tiny = GibbsParams { length: 64.0, points: 256, ..params(1.0, Some(0.05)) };
        let (state, zero) = PcnKernel::new(tiny).unwrap().initial_state(1, 0.1, 20).unwrap();
        assert!(zero);
        assert_eq!(state.mass(), 0.0);
    }
}
