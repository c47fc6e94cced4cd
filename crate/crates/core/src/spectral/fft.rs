//! Forward/inverse transforms on a [`Grid`].
//!
//! Forward transforms divide by the node count, so the `k = 0` coefficient is
//! the field mean. Plans are cached process-wide behind a mutex; the plans
//! themselves are `Send + Sync`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> PlanPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

fn transform_in_place(grid: &Grid, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
    let n = grid.points_per_dim();
    let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(n) {
        plan.process_with_scratch(row, &mut scratch);
    }
    if grid.n_dims() == 2 {
        let mut column = vec![Complex64::default(); n];
        for i0 in 0..n {
            for (i1, c) in column.iter_mut().enumerate() {
                *c = data[i0 + n * i1];
            }
            plan.process_with_scratch(&mut column, &mut scratch);
            for (i1, c) in column.iter().enumerate() {
                data[i0 + n * i1] = *c;
            }
        }
    }
}

pub(crate) fn forward(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let (fwd, _) = plans(grid.points_per_dim());
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform_in_place(grid, &mut data, &fwd);
    let scale = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    data
}

/// Inverse transform; the imaginary part is discarded.
pub(crate) fn inverse(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let (_, inv) = plans(grid.points_per_dim());
    let mut data = coeffs.to_vec();
    transform_in_place(grid, &mut data, &inv);
    data.into_iter().map(|c| c.re).collect()
}
