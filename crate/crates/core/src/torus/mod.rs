//! Periodic grids, complex fields and the Gaussian free field on a torus.

mod fft;
mod field;
mod gff;
mod grid;

pub use field::Field;
pub use gff::{complex_normal, covariance_function, mass_tail_samples, sample_gff, SpectralWeights};
pub use grid::{TorusGrid, Window};

pub(crate) use field::pow_abs;
pub(crate) use fft::{forward as fft_forward, inverse as fft_inverse};
