use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("minimizer did not converge after {iterations} iterations (residual {residual:.3e}, energy {energy:.12e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        energy: f64,
        /// Last iterate, kept for inspection.
        last: Iterate,
    },

    #[error("profile is under-resolved: {0}")]
    UnderResolved(String),

    #[error("no admissible sample: {0}")]
    NoAdmissibleSample(String),

    #[error("invalid configuration at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

/// Final iterate of a failed solve; `Debug` prints only its length.
#[derive(Clone, PartialEq)]
pub struct Iterate(pub Vec<f64>);

impl std::fmt::Debug for Iterate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Iterate(<{} values>)", self.0.len())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Fails unless `value` is finite and strictly positive.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and positive, got {value}")))
    }
}
