//! Pseudo-spectral solvers for the compressible Navier–Stokes–Fourier–P1
//! radiation hydrodynamics system and its non-relativistic limit on the
//! periodic torus, with a discrete-ordinates gray transport module and the
//! error diagnostics used to measure the `O(ε)` convergence.

pub mod error;
pub mod error_analysis;
pub mod fluid;
pub mod kinetic;
pub mod radiation;
pub mod spectral;
pub mod timestepper;

pub use error::{Error, Result};
