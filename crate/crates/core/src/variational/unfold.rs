//! Unfolding a mean-zero periodic function onto the line.
//!
//! A real mean-zero `f` vanishes somewhere; cutting the period there and
//! extending by zero gives a line function with the same `L^p` norms and
//! gradient energy.

use serde::{Deserialize, Serialize};

use super::line::LineGrid;
use crate::error::{invalid, Result};
use crate::torus::Field;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineField {
    pub grid: LineGrid,
    pub values: Vec<f64>,
}

/// Lays one period of `f`, starting just after a sign change, on a line grid
/// with the same spacing and a period of zeros on either side.
pub fn unfold_periodic(f: &Field) -> Result<LineField> {
    let grid = f.grid();
    let n = grid.points();
    let top = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    if f.imaginary_fraction() > 1e-12 {
        return Err(invalid("field", "unfolding needs a real-valued field"));
    }
    if f.mean().norm() > 1e-10 * top.max(f64::MIN_POSITIVE) {
        return Err(invalid("field", "unfolding needs a mean-zero field"));
    }
    let re: Vec<f64> = f.values().iter().map(|v| v.re).collect();
    let line = LineGrid::new(n as f64 * grid.spacing(), 2 * n + 1)?;
    let mut values = vec![0.0; 2 * n + 1];
    if top > 0.0 {
        // a sign change (or exact zero) at j, j+1 exists because the mean is zero
        let j = (0..n)
            .find(|&j| re[j] * re[(j + 1) % n] <= 0.0)
            .ok_or_else(|| invalid("field", "no sign change found"))?;
        let start = n / 2 + 1;
        for m in 0..n {
            values[start + m] = re[(j + 1 + m) % n];
        }
    }
    Ok(LineField { grid: line, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusGrid;
    use crate::variational::{Domain, EnergyFunctional};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn sine_unfolds_with_same_norms() {
        let g = TorusGrid::new(10.0, 2048).unwrap();
        let f = Field::from_fn(g, |x| Complex64::new((2.0 * PI * x / 10.0 + 0.3).sin(), 0.0));
        let line = unfold_periodic(&f).unwrap();
        let e = EnergyFunctional::new(4.0, 1.0, Domain::Line { grid: line.grid, tail_decay: None }).unwrap();
        assert!((e.mass(&line.values) - f.mass()).abs() < 1e-12);
        assert!((e.potential(&line.values) - f.lp_total(4.0)).abs() < 1e-12);
        // the cut between two nodes costs O(h) in the first-difference energy
        let k = (2.0 * PI / 10.0).powi(2) * 5.0;
        assert!((e.kinetic(&line.values) - k).abs() < 5e-3 * k);
        // support is one period
        let support = line.values.iter().filter(|v| **v != 0.0).count();
        assert!(support <= 2048);
    }

    #[test]
    fn zero_and_invalid_inputs() {
        let g = TorusGrid::new(4.0, 64).unwrap();
        let zero = unfold_periodic(&Field::zeros(g)).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
        let shifted = Field::from_fn(g, |x| Complex64::new(1.0 + x.sin(), 0.0));
        assert!(unfold_periodic(&shifted).is_err());
        let complex = Field::from_fn(g, |x| Complex64::new(0.0, (PI * x / 2.0).sin()));
        assert!(unfold_periodic(&complex).is_err());
    }
}
