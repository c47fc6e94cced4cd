//! Differential, nonlocal and diagnostic operators acting mode by mode.
//!
//! Derivative symbols use [`Grid::derivative_wavenumber`] (Nyquist zeroed), and
//! the Laplacian and Helmholtz symbols are built from the same wavenumbers, so
//! `div ∘ grad = Δ` and `(I − Δ)⁻¹ (I − Δ) = I` hold to round-off on every
//! grid field.

use num_complex::Complex64;

use super::field::{SpectralField, VectorField};
use super::grid::Grid;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest Sobolev index supported by [`sobolev_norm`].
pub const MAX_SOBOLEV_INDEX: u32 = 6;

fn apply_symbol(f: &SpectralField, symbol: impl Fn(usize) -> Complex64) -> SpectralField {
    let grid = f.grid();
    let coeffs: Vec<Complex64> = f
        .coefficients()
        .iter()
        .enumerate()
        .map(|(idx, c)| c * symbol(idx))
        .collect();
    SpectralField::from_coefficients(grid, &coeffs)
}

fn laplacian_symbol(grid: &Grid, idx: usize) -> f64 {
    let k = grid.derivative_wavenumber(idx);
    -(k[0] * k[0] + k[1] * k[1])
}

/// Partial derivative along axis `axis`.
pub fn partial(f: &SpectralField, axis: usize) -> SpectralField {
    let grid = f.grid();
    assert!(axis < grid.n_dims());
    apply_symbol(f, |idx| I * grid.derivative_wavenumber(idx)[axis])
}

pub fn grad(f: &SpectralField) -> VectorField {
    let grid = f.grid();
    let coeffs = f.coefficients();
    let components = (0..grid.n_dims())
        .map(|axis| {
            let c: Vec<Complex64> = coeffs
                .iter()
                .enumerate()
                .map(|(idx, c)| c * I * grid.derivative_wavenumber(idx)[axis])
                .collect();
            SpectralField::from_coefficients(grid, &c)
        })
        .collect();
    VectorField::from_components(components)
}

pub fn div(v: &VectorField) -> SpectralField {
    let grid = v.grid();
    let mut acc = vec![Complex64::default(); grid.len()];
    for (axis, comp) in v.components().iter().enumerate() {
        for (idx, (a, c)) in acc.iter_mut().zip(comp.coefficients()).enumerate() {
            *a += c * I * grid.derivative_wavenumber(idx)[axis];
        }
    }
    SpectralField::from_coefficients(grid, &acc)
}

pub fn laplacian(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    apply_symbol(f, |idx| Complex64::from(laplacian_symbol(&grid, idx)))
}

/// `(I − Δ) f`.
pub fn helmholtz(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    apply_symbol(f, |idx| Complex64::from(1.0 - laplacian_symbol(&grid, idx)))
}

/// `(I − Δ)⁻¹ f`, symbol `1 / (1 + |k|²)`.
pub fn helmholtz_inverse(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    apply_symbol(f, |idx| {
        Complex64::from(1.0 / (1.0 - laplacian_symbol(&grid, idx)))
    })
}

/// Zeroes every mode with some `|k_j| > N/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    apply_symbol(f, |idx| {
        if grid.is_resolved_mode(idx) {
            Complex64::from(1.0)
        } else {
            Complex64::default()
        }
    })
}

/// Dealiased pointwise product.
pub fn product(a: &SpectralField, b: &SpectralField) -> SpectralField {
    dealias(&a.pointwise_mul(b))
}

/// `θ⁴` built as two dealiased squarings.
pub fn quartic(theta: &SpectralField) -> SpectralField {
    let sq = product(theta, theta);
    product(&sq, &sq)
}

/// Fields that carry an `Hˢ(Ω)` norm.
pub trait Sobolev {
    /// `Σ_k (1 + |k|²)ˢ |f̂(k)|² (2π)ⁿ`.
    fn sobolev_norm_sq(&self, s: u32) -> f64;
}

impl Sobolev for SpectralField {
    fn sobolev_norm_sq(&self, s: u32) -> f64 {
        assert!(
            s <= MAX_SOBOLEV_INDEX,
            "Sobolev index {s} exceeds {MAX_SOBOLEV_INDEX}"
        );
        let grid = self.grid();
        let sum: f64 = self
            .coefficients()
            .iter()
            .enumerate()
            .map(|(idx, c)| (1.0 + grid.wavenumber_sq(idx)).powi(s as i32) * c.norm_sqr())
            .sum();
        sum * grid.volume()
    }
}

impl Sobolev for VectorField {
    fn sobolev_norm_sq(&self, s: u32) -> f64 {
        self.components().iter().map(|c| c.sobolev_norm_sq(s)).sum()
    }
}

pub fn sobolev_norm<F: Sobolev + ?Sized>(f: &F, s: u32) -> f64 {
    f.sobolev_norm_sq(s).sqrt()
}

/// Norm of a tuple of fields: square root of the summed squared norms.
pub fn sobolev_norm_tuple(parts: &[&dyn Sobolev], s: u32) -> f64 {
    parts.iter().map(|p| p.sobolev_norm_sq(s)).sum::<f64>().sqrt()
}
