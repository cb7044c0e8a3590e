use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Result};

/// Uniform grid on the torus `[-L/2, L/2)` with `n` points `x_j = -L/2 + j dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    length: f64,
    points: usize,
}

impl TorusGrid {
    pub fn new(length: f64, points: usize) -> Result<Self> {
        require_positive("length", length)?;
        if points < 4 || !points.is_multiple_of(2) {
            return Err(invalid("points", format!("need an even count >= 4, got {points}")));
        }
        Ok(Self { length, points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |j| self.x(j))
    }

    /// Integer wavenumber stored at FFT slot `slot`; slot `n/2` holds `k = -n/2`.
    pub fn wavenumber(&self, slot: usize) -> i64 {
        let n = self.points as i64;
        let m = slot as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// FFT slot of wavenumber `k`, if it is representable.
    pub fn slot(&self, k: i64) -> Option<usize> {
        let half = (self.points / 2) as i64;
        (-half..half)
            .contains(&k)
            .then(|| k.rem_euclid(self.points as i64) as usize)
    }

    /// Angular frequency `2 pi k / L`.
    pub fn frequency(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.length
    }

    /// Nearest grid index to `x`, clamped to `0..=n`.
    pub fn snap(&self, x: f64) -> usize {
        let j = ((x + 0.5 * self.length) / self.spacing()).round();
        j.clamp(0.0, self.points as f64) as usize
    }
}

/// Region of the torus over which an integral is taken.
///
/// Interval endpoints snap to the nearest grid node and the half-open index
/// range `[j(a), j(b))` is used, so an interval and its complement always
/// partition the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Window {
    Whole,
    Interval { start: f64, end: f64 },
    Complement { start: f64, end: f64 },
}

impl Window {
    /// Centered interval `[-half, half]`.
    pub fn centered(half_width: f64) -> Self {
        Window::Interval {
            start: -half_width,
            end: half_width,
        }
    }

    pub fn complement(self) -> Self {
        match self {
            Window::Whole => Window::Interval { start: 0.0, end: 0.0 },
            Window::Interval { start, end } => Window::Complement { start, end },
            Window::Complement { start, end } => Window::Interval { start, end },
        }
    }

    /// Membership mask over the grid.
    pub fn mask(&self, grid: &TorusGrid) -> Result<Vec<bool>> {
        let n = grid.points();
        match *self {
            Window::Whole => Ok(vec![true; n]),
            Window::Interval { start, end } | Window::Complement { start, end } => {
                let half = 0.5 * grid.length();
                if !(start.is_finite() && end.is_finite()) || start > end || start < -half - 1e-12 || end > half + 1e-12 {
                    return Err(invalid(
                        "window",
                        format!("interval [{start}, {end}] is not inside [-{half}, {half}]"),
                    ));
                }
                let (a, b) = (grid.snap(start), grid.snap(end));
                let inside = matches!(self, Window::Interval { .. });
                Ok((0..n).map(|j| ((a..b).contains(&j)) == inside).collect())
            }
        }
    }
}
