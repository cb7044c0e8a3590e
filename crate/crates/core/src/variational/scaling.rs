//! Exact scaling covariance of the line ground-state energy.
//!
//! For `lambda, mu > 0`,
//! `A(beta, N) = mu^2 lambda^2 A(lambda^{-(6-p)/2} mu^{p-2} beta, N / mu^2)`.
//! Transports form a group under pointwise multiplication of `(lambda, mu)`.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transport {
    pub lambda: f64,
    pub mu: f64,
}

impl Transport {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        require_positive("lambda", lambda)?;
        require_positive("mu", mu)?;
        Ok(Self { lambda, mu })
    }

    pub fn identity() -> Self {
        Self { lambda: 1.0, mu: 1.0 }
    }

    /// The `(beta, N)` at which the transported energy is evaluated.
    pub fn parameters(&self, p: f64, beta: f64, mass: f64) -> (f64, f64) {
        (
            self.lambda.powf(-0.5 * (6.0 - p)) * self.mu.powf(p - 2.0) * beta,
            mass / (self.mu * self.mu),
        )
    }

    /// Multiplier `mu^2 lambda^2` applied to the transported energy.
    pub fn factor(&self) -> f64 {
        (self.mu * self.lambda).powi(2)
    }

    /// Applying `self` and then `next`.
    pub fn then(self, next: Transport) -> Transport {
        Transport {
            lambda: self.lambda * next.lambda,
            mu: self.mu * next.mu,
        }
    }
}

/// `mu^2 lambda^2 a_in`, where `a_in` is the energy at the transported parameters.
pub fn scaling_transport(a_in: f64, lambda: f64, mu: f64) -> Result<f64> {
    Ok(Transport::new(lambda, mu)?.factor() * a_in)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::ground_state_energy;

    #[test]
    fn identity_transport() {
        let t = Transport::identity();
        assert_eq!(t.parameters(4.0, 1.3, 0.7), (1.3, 0.7));
        assert_eq!(scaling_transport(-2.0, 1.0, 1.0).unwrap(), -2.0);
    }

    #[test]
    fn quartic_law_is_reproduced() {
        let t = Transport::new(1.7, 0.6).unwrap();
        let (b, n) = t.parameters(4.0, 1.0, 1.0);
        let moved = ground_state_energy(4.0, b, n).unwrap();
        let back = t.factor() * moved;
        assert!((back + 1.0 / 96.0).abs() < 1e-15);
    }
}
