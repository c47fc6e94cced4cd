use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use super::fft;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Real scalar field sampled on a [`Grid`].
///
/// Fourier coefficients are computed on first request and cached; the field
/// is immutable once built, so the cache never goes stale.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl SpectralField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self::from_values(grid, values))
    }

    pub(crate) fn from_values(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            coeffs: OnceLock::new(),
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_values(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at every node; `f` receives the first `n_dims` coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = grid.n_dims();
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.coords(i);
                f(&x[..d])
            })
            .collect();
        Self::from_values(grid, values)
    }

    /// Builds a field from Fourier coefficients (mean-normalized convention).
    /// Any imaginary residue from non-symmetric input is dropped.
    pub fn from_coefficients(grid: Grid, coeffs: &[Complex64]) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count mismatch");
        Self::from_values(grid, fft::inverse(&grid, coeffs))
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn coefficients(&self) -> &[Complex64] {
        self.coeffs
            .get_or_init(|| fft::forward(&self.grid, &self.values))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Integral over the torus (trapezoid rule, exact for resolved modes).
    pub fn integral(&self) -> f64 {
        self.mean() * self.grid.volume()
    }

    /// `L²(Ω)` inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        self.check_grid(other);
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        s / self.values.len() as f64 * self.grid.volume()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        self.check_grid(other);
        Self::from_values(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise product, no dealiasing.
    pub fn pointwise_mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    /// Pointwise quotient, no dealiasing.
    pub fn pointwise_div(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a / b)
    }

    /// Maximum nodal difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.check_grid(other);
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Circular shift by whole grid cells along each axis.
    pub fn shifted(&self, cells: [usize; 2]) -> Self {
        let g = self.grid;
        let n = g.points_per_dim();
        let mut out = vec![0.0; g.len()];
        for (flat, v) in self.values.iter().enumerate() {
            let idx = g.multi_index(flat);
            let moved = [(idx[0] + cells[0]) % n, (idx[1] + cells[1]) % n];
            let moved = if g.n_dims() == 1 { [moved[0], 0] } else { moved };
            out[g.flat_index(moved)] = *v;
        }
        Self::from_values(g, out)
    }

    fn check_grid(&self, other: &Self) {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, c: f64) -> SpectralField {
        self.scale(c)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

/// `n_dims` scalar components on one grid.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidGrid("vector field needs components".into()))?;
        let grid = first.grid();
        if components.len() != grid.n_dims() {
            return Err(Error::InvalidGrid(format!(
                "expected {} components, got {}",
                grid.n_dims(),
                components.len()
            )));
        }
        if components.iter().any(|c| c.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { components })
    }

    pub(crate) fn from_components(components: Vec<SpectralField>) -> Self {
        debug_assert_eq!(components.len(), components[0].grid().n_dims());
        Self { components }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, &[0.0; 2][..grid.n_dims()])
    }

    pub fn constant(grid: Grid, c: &[f64]) -> Self {
        assert_eq!(c.len(), grid.n_dims());
        Self::from_components(c.iter().map(|&cj| SpectralField::constant(grid, cj)).collect())
    }

    /// `f(x, j)` gives component `j` at `x`.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64], usize) -> f64) -> Self {
        Self::from_components(
            (0..grid.n_dims())
                .map(|j| SpectralField::from_fn(grid, |x| f(x, j)))
                .collect(),
        )
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, j: usize) -> &SpectralField {
        &self.components[j]
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn map_components(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        Self::from_components(self.components.iter().map(f).collect())
    }

    pub fn zip_components(
        &self,
        other: &Self,
        f: impl Fn(&SpectralField, &SpectralField) -> SpectralField,
    ) -> Self {
        assert_eq!(self.grid(), other.grid(), "fields live on different grids");
        Self::from_components(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_components(|f| f.scale(c))
    }

    /// Pointwise `Σ_j a_j b_j`, no dealiasing.
    pub fn dot(&self, other: &Self) -> SpectralField {
        let mut acc = self.components[0].pointwise_mul(&other.components[0]);
        for (a, b) in self.components.iter().zip(&other.components).skip(1) {
            acc = &acc + &a.pointwise_mul(b);
        }
        acc
    }

    /// `L²(Ω)` inner product summed over components.
    pub fn inner(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(SpectralField::is_finite)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max(a.max_diff(b)))
    }

    pub fn shifted(&self, cells: [usize; 2]) -> Self {
        self.map_components(|c| c.shifted(cells))
    }
}

impl Add for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: Self) -> VectorField {
        self.zip_components(rhs, |a, b| a + b)
    }
}

impl Sub for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: Self) -> VectorField {
        self.zip_components(rhs, |a, b| a - b)
    }
}

impl Neg for &VectorField {
    type Output = VectorField;
    fn neg(self) -> VectorField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &VectorField {
    type Output = VectorField;
    fn mul(self, c: f64) -> VectorField {
        self.scale(c)
    }
}

/// `n × n` tensor of scalar fields, row-major.
#[derive(Clone, Debug)]
pub struct TensorField {
    n: usize,
    entries: Vec<SpectralField>,
}

impl TensorField {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> SpectralField) -> Self {
        let entries = (0..n * n).map(|idx| f(idx / n, idx % n)).collect();
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &SpectralField {
        &self.entries[i * self.n + j]
    }

    pub fn trace(&self) -> SpectralField {
        let mut acc = self.get(0, 0).clone();
        for i in 1..self.n {
            acc = &acc + self.get(i, i);
        }
        acc
    }

    /// Pointwise `A : B = Σ_ij A_ij B_ij`, no dealiasing.
    pub fn contract(&self, other: &Self) -> SpectralField {
        assert_eq!(self.n, other.n);
        let mut acc = self.entries[0].pointwise_mul(&other.entries[0]);
        for (a, b) in self.entries.iter().zip(&other.entries).skip(1) {
            acc = &acc + &a.pointwise_mul(b);
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }
}
