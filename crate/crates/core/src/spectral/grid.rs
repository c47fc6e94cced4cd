use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform grid on the periodic box `[0, 2π)^n`, `n ∈ {1, 2}`.
///
/// Nodes are stored with the first coordinate varying fastest:
/// flat index `i0 + N * i1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    n_dims: usize,
    points: usize,
}

impl Grid {
    pub fn new(n_dims: usize, points_per_dim: usize) -> Result<Self> {
        if !(1..=2).contains(&n_dims) {
            return Err(Error::InvalidGrid(format!(
                "n_dims must be 1 or 2, got {n_dims}"
            )));
        }
        if points_per_dim < 8 || !points_per_dim.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points_per_dim must be a power of two >= 8, got {points_per_dim}"
            )));
        }
        Ok(Self {
            n_dims,
            points: points_per_dim,
        })
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn points_per_dim(&self) -> usize {
        self.points
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.points.pow(self.n_dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node spacing `h = 2π / N`.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points as f64
    }

    /// Measure of the torus, `(2π)^n`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.n_dims as i32)
    }

    /// Per-dimension integer indices of a flat index.
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        match self.n_dims {
            1 => [flat, 0],
            _ => [flat % self.points, flat / self.points],
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        match self.n_dims {
            1 => idx[0],
            _ => idx[0] + self.points * idx[1],
        }
    }

    /// Physical coordinates of a node; unused trailing entries are zero.
    pub fn coords(&self, flat: usize) -> [f64; 2] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        [idx[0] as f64 * h, idx[1] as f64 * h]
    }

    fn signed(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Integer wavenumber of a coefficient slot. The Nyquist slot maps to `-N/2`.
    pub fn wavenumber(&self, flat: usize) -> [i64; 2] {
        let idx = self.multi_index(flat);
        match self.n_dims {
            1 => [self.signed(idx[0]), 0],
            _ => [self.signed(idx[0]), self.signed(idx[1])],
        }
    }

    /// `|k|²` with the true integer wavenumbers (Nyquist included).
    pub fn wavenumber_sq(&self, flat: usize) -> f64 {
        let k = self.wavenumber(flat);
        (k[0] * k[0] + k[1] * k[1]) as f64
    }

    /// Wavenumber used by differential operators: the Nyquist component is
    /// zeroed so that derivatives of real fields stay real.
    pub fn derivative_wavenumber(&self, flat: usize) -> [f64; 2] {
        let k = self.wavenumber(flat);
        let nyq = -(self.points as i64) / 2;
        let fix = |kj: i64| if kj == nyq { 0.0 } else { kj as f64 };
        [fix(k[0]), fix(k[1])]
    }

    /// True when every component satisfies `|k_j| <= N/3`.
    pub fn is_resolved_mode(&self, flat: usize) -> bool {
        let cutoff = self.points as f64 / 3.0;
        let k = self.wavenumber(flat);
        k.iter().all(|kj| (kj.abs() as f64) <= cutoff)
    }
}
