//! Periodic-grid fields and the spectral operators used by every model.

mod fft;
mod field;
mod grid;
mod ops;

pub use field::{SpectralField, TensorField, VectorField};
pub use grid::Grid;
pub use ops::{
    dealias, div, grad, helmholtz, helmholtz_inverse, laplacian, partial, product, quartic,
    sobolev_norm, sobolev_norm_tuple, Sobolev, MAX_SOBOLEV_INDEX,
};
