//! Batch-means error bars and effective sample sizes.

use serde::{Deserialize, Serialize};

/// Minimum number of batches used for an error bar.
pub const MIN_BATCHES: usize = 20;

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub ess: f64,
    pub samples: usize,
}

impl Estimate {
    /// Independent samples.
    pub fn iid(values: &[f64]) -> Self {
        let n = values.len();
        let (mean, var) = mean_var(values);
        Self {
            mean,
            std_error: (var / n as f64).sqrt(),
            ess: n as f64,
            samples: n,
        }
    }

    /// Exact value with no uncertainty.
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            std_error: 0.0,
            ess: f64::INFINITY,
            samples: 0,
        }
    }

    /// Pools estimates of the same quantity from independent chains,
    /// weighting by sample count.
    pub fn pool(parts: &[Estimate]) -> Self {
        let total: usize = parts.iter().map(|e| e.samples).sum();
        if total == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                ess: 0.0,
                samples: 0,
            };
        }
        let w = |e: &Estimate| e.samples as f64 / total as f64;
        Self {
            mean: parts.iter().map(|e| w(e) * e.mean).sum(),
            std_error: parts.iter().map(|e| (w(e) * e.std_error).powi(2)).sum::<f64>().sqrt(),
            ess: parts.iter().map(|e| e.ess).sum(),
            samples: total,
        }
    }

    /// [`Estimate::pool`] for chains of equal length, with the standard
    /// error floored by the spread of the chain means. Chains stuck in
    /// different metastable states then widen the error bar instead of
    /// hiding behind small within-chain errors.
    pub fn pool_chains(parts: &[Estimate]) -> Self {
        let pooled = Self::pool(parts);
        if parts.len() < 2 {
            return pooled;
        }
        let means: Vec<f64> = parts.iter().map(|e| e.mean).collect();
        let (_, var) = mean_var(&means);
        Self {
            std_error: pooled.std_error.max((var / parts.len() as f64).sqrt()),
            ..pooled
        }
    }

    /// `(self - other) / sqrt(se_1^2 + se_2^2)` for independent estimates.
    pub fn z_score(&self, other: &Estimate) -> f64 {
        (self.mean - other.mean) / self.std_error.hypot(other.std_error)
    }
}

pub(crate) fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

/// Number of batches for a trace of length `n`: about `sqrt(n)`, at least 20.
pub fn batch_count(n: usize) -> usize {
    ((n as f64).sqrt() as usize).max(MIN_BATCHES)
}

/// Batch-means estimate of the mean of a correlated trace.
///
/// Leading samples that do not fill a whole batch are dropped from the
/// error bar but kept in the mean. Traces too short for 20 batches of two
/// fall back to the independent-sample formula.
pub fn batch_means(trace: &[f64]) -> Estimate {
    let n = trace.len();
    if n < 2 * MIN_BATCHES {
        return Estimate::iid(trace);
    }
    let batches = batch_count(n);
    let size = n / batches;
    let skip = n - batches * size;
    let means: Vec<f64> = trace[skip..]
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let (_, batch_var) = mean_var(&means);
    let (mean, var) = mean_var(trace);
    let std_error = (batch_var / batches as f64).sqrt();
    let ess = if batch_var > 0.0 {
        n as f64 * var / (size as f64 * batch_var)
    } else {
        n as f64
    };
    Estimate {
        mean,
        std_error,
        ess,
        samples: n,
    }
}

/// Batch-means estimate of `E[num] / E[den]` from paired traces.
pub fn ratio_batch_means(num: &[f64], den: &[f64]) -> Estimate {
    let n = num.len().min(den.len());
    let batches = batch_count(n).min(n.max(1));
    let size = (n / batches).max(1);
    let skip = n - batches * size;
    let ratio = num.iter().sum::<f64>() / den.iter().take(n).sum::<f64>();
    let parts: Vec<f64> = num[skip..n]
        .chunks_exact(size)
        .zip(den[skip..n].chunks_exact(size))
        .map(|(a, b)| a.iter().sum::<f64>() / b.iter().sum::<f64>())
        .collect();
    let (_, var) = mean_var(&parts);
    Estimate {
        mean: ratio,
        std_error: (var / parts.len() as f64).sqrt(),
        ess: parts.len() as f64,
        samples: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn iid_trace_has_full_ess() {
        let mut rng = seed::stream(2);
        let trace: Vec<f64> = (0..40_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let e = batch_means(&trace);
        assert!(e.mean.abs() < 5.0 * e.std_error);
        assert!((e.std_error - 0.005).abs() < 0.0015, "{}", e.std_error);
        assert!(e.ess > 20_000.0 && e.ess < 80_000.0, "{}", e.ess);
    }

    #[test]
    fn ar1_trace_shrinks_ess() {
        let mut rng = seed::stream(3);
        let rho: f64 = 0.9;
        let mut x = 0.0;
        let trace: Vec<f64> = (0..100_000)
            .map(|_| {
                x = rho * x + (1.0 - rho * rho).sqrt() * rng.sample::<f64, _>(StandardNormal);
                x
            })
            .collect();
        let e = batch_means(&trace);
        // integrated autocorrelation time (1 + rho)/(1 - rho) = 19
        let expected = 100_000.0 / 19.0;
        assert!(e.ess > 0.6 * expected && e.ess < 1.5 * expected, "{}", e.ess);
    }

    #[test]
    fn pooling_two_halves() {
        let a = Estimate { mean: 1.0, std_error: 0.1, ess: 10.0, samples: 100 };
        let b = Estimate { mean: 3.0, std_error: 0.1, ess: 10.0, samples: 100 };
        let p = Estimate::pool(&[a, b]);
        assert_eq!(p.mean, 2.0);
        assert!((p.std_error - 0.1 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.samples, 200);
        // chain means 1 and 3: between-chain error sqrt(2 / 2) = 1
        let q = Estimate::pool_chains(&[a, b]);
        assert_eq!(q.mean, 2.0);
        assert!((q.std_error - 1.0).abs() < 1e-15);
        let c = Estimate { mean: 1.0, ..a };
        assert_eq!(Estimate::pool_chains(&[a, c]).std_error, Estimate::pool(&[a, c]).std_error);
    }
}
