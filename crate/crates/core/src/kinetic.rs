//! Discrete-ordinates gray transport and its P1 moment machinery.
//!
//! The transport equation is
//! `ε∂ₜI + ω·∇I = C̄θ⁴ − σ_a I + σ_s|Sⁿ⁻¹|(⟨⟨I⟩⟩ − I)` with `C̄ = 1`.
//!
//! Moments follow the ansatz `I = I₀ + I₁·ω`:
//! `I₀ = ⟨⟨I⟩⟩` and `I₁ = (n/|Sⁿ⁻¹|) ∫ ω I dω`. Integrating the transport
//! equation against `1` and `ω` gives, for P1 data,
//!
//! ```text
//! ε∂ₜI₀ + (1/n) div I₁ = θ⁴ − σ_a I₀
//! ε∂ₜI₁ + ∇I₀          = −(σ_a + σ_s|Sⁿ⁻¹|) I₁
//! ```
//!
//! Rescaling `I₁ → I₁/n` and dropping `σ_a`, `σ_s`, `|Sⁿ⁻¹|` turns this into
//! the normalized system used by [`crate::radiation`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::radiation::RadiationMoments;
use crate::spectral::{div, grad, quartic, Grid, SpectralField, VectorField};

/// Projection residual above which [`moment_system_check`] refuses the data.
pub const P1_MANIFOLD_TOLERANCE: f64 = 1e-8;

/// Quadrature on the unit sphere `Sⁿ⁻¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrdinateSet {
    n_dims: usize,
    directions: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl OrdinateSet {
    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn directions(&self) -> &[[f64; 2]] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `|Sⁿ⁻¹|` as integrated by the rule.
    pub fn sphere_measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Equal-weight equispaced directions on `S¹` for `n = 2`; the two-point set
/// `{−1, +1}` with unit weights for `n = 1` (the count is then ignored).
pub fn make_ordinates(n_dims: usize, count: usize) -> Result<OrdinateSet> {
    if count % 2 == 1 {
        return Err(Error::InvalidOrdinates(format!(
            "ordinate count must be even, got {count}"
        )));
    }
    match n_dims {
        1 => Ok(OrdinateSet {
            n_dims,
            directions: vec![[-1.0, 0.0], [1.0, 0.0]],
            weights: vec![1.0, 1.0],
        }),
        2 => {
            if count < 4 {
                return Err(Error::InvalidOrdinates(format!(
                    "need at least 4 ordinates on S¹, got {count}"
                )));
            }
            // Second half is the exact antipode of the first; snap round-off
            // at multiples of π/2 so axis-aligned directions are exact.
            let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
            let half: Vec<[f64; 2]> = (0..count / 2)
                .map(|m| {
                    let phi = 2.0 * PI * m as f64 / count as f64;
                    [snap(phi.cos()), snap(phi.sin())]
                })
                .collect();
            let directions = half
                .iter()
                .copied()
                .chain(half.iter().map(|d| [-d[0], -d[1]]))
                .collect();
            Ok(OrdinateSet {
                n_dims,
                directions,
                weights: vec![2.0 * PI / count as f64; count],
            })
        }
        _ => Err(Error::InvalidOrdinates(format!(
            "n_dims must be 1 or 2, got {n_dims}"
        ))),
    }
}

/// Intensity sampled on grid × ordinates, one field per direction.
#[derive(Clone, Debug)]
pub struct KineticField {
    ordinates: OrdinateSet,
    intensity: Vec<SpectralField>,
}

impl KineticField {
    pub fn new(ordinates: OrdinateSet, intensity: Vec<SpectralField>) -> Result<Self> {
        if intensity.len() != ordinates.len() {
            return Err(Error::InvalidOrdinates(format!(
                "{} intensity fields for {} ordinates",
                intensity.len(),
                ordinates.len()
            )));
        }
        let grid = intensity[0].grid();
        if grid.n_dims() != ordinates.n_dims() {
            return Err(Error::InvalidOrdinates(
                "ordinate dimension differs from grid dimension".into(),
            ));
        }
        if intensity.iter().any(|f| f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            ordinates,
            intensity,
        })
    }

    /// `f(x, ω)` sampled at every node and direction.
    pub fn from_fn(grid: Grid, ordinates: OrdinateSet, f: impl Fn(&[f64], &[f64]) -> f64) -> Result<Self> {
        let d = grid.n_dims();
        let intensity = ordinates
            .directions
            .iter()
            .map(|w| SpectralField::from_fn(grid, |x| f(x, &w[..d])))
            .collect();
        Self::new(ordinates, intensity)
    }

    /// The P1 field `I₀ + I₁·ω`.
    pub fn from_moments(rad: &RadiationMoments, ordinates: OrdinateSet) -> Result<Self> {
        let intensity = ordinates
            .directions
            .iter()
            .map(|w| {
                let mut acc = rad.i0.clone();
                for (j, c) in rad.i1.components().iter().enumerate() {
                    acc = acc.zip_with(c, |a, b| a + w[j] * b);
                }
                acc
            })
            .collect();
        Self::new(ordinates, intensity)
    }

    pub fn grid(&self) -> Grid {
        self.intensity[0].grid()
    }

    pub fn ordinates(&self) -> &OrdinateSet {
        &self.ordinates
    }

    pub fn intensity(&self) -> &[SpectralField] {
        &self.intensity
    }

    pub fn min(&self) -> f64 {
        self.intensity.iter().map(SpectralField::min).fold(f64::INFINITY, f64::min)
    }

    fn zip(&self, other: &Self, f: impl Fn(&SpectralField, &SpectralField) -> SpectralField) -> Self {
        Self {
            ordinates: self.ordinates.clone(),
            intensity: self.intensity.iter().zip(&other.intensity).map(|(a, b)| f(a, b)).collect(),
        }
    }

    fn axpy(&self, dt: f64, t: &Self) -> Self {
        self.zip(t, |a, b| a.zip_with(b, |x, y| x + dt * y))
    }

    /// Weighted angular average `⟨⟨I⟩⟩`.
    pub fn angular_average(&self) -> SpectralField {
        weighted_sum(&self.intensity, self.ordinates.weights(), |_| 1.0)
            .scale(1.0 / self.ordinates.sphere_measure())
    }
}

fn weighted_sum(fields: &[SpectralField], weights: &[f64], factor: impl Fn(usize) -> f64) -> SpectralField {
    let mut acc = vec![0.0; fields[0].grid().len()];
    for (m, (f, w)) in fields.iter().zip(weights).enumerate() {
        let c = w * factor(m);
        for (a, v) in acc.iter_mut().zip(f.values()) {
            *a += c * v;
        }
    }
    SpectralField::new(fields[0].grid(), acc).expect("length matches grid")
}

/// Per-ordinate tendency
/// `[−ω·∇I + θ⁴ − σ_a I + σ_s|Sⁿ⁻¹|(⟨⟨I⟩⟩ − I)] / ε`.
pub fn kinetic_rhs(
    field: &KineticField,
    theta: &SpectralField,
    eps: f64,
    sigma_a: f64,
    sigma_s: f64,
) -> KineticField {
    assert!(eps > 0.0 && sigma_a > 0.0 && sigma_s >= 0.0);
    let emission = quartic(theta);
    let avg = field.angular_average();
    let scatter = sigma_s * field.ordinates.sphere_measure();
    let inv = 1.0 / eps;
    let d = field.grid().n_dims();
    let intensity = field
        .intensity
        .iter()
        .zip(&field.ordinates.directions)
        .map(|(i, w)| {
            let g = grad(i);
            let mut streaming = g.component(0).scale(w[0]);
            for j in 1..d {
                streaming = &streaming + &g.component(j).scale(w[j]);
            }
            let mut out = Vec::with_capacity(i.values().len());
            for (idx, &v) in i.values().iter().enumerate() {
                let s = -streaming.values()[idx] + emission.values()[idx] - sigma_a * v
                    + scatter * (avg.values()[idx] - v);
                out.push(inv * s);
            }
            SpectralField::new(i.grid(), out).expect("length matches grid")
        })
        .collect();
    KineticField {
        ordinates: field.ordinates.clone(),
        intensity,
    }
}

/// Coefficients of the `L²(dω)` projection onto `span{1, ω}`.
pub fn moments(field: &KineticField) -> RadiationMoments {
    let ords = &field.ordinates;
    let measure = ords.sphere_measure();
    let n = ords.n_dims();
    let i0 = weighted_sum(&field.intensity, ords.weights(), |_| 1.0).scale(1.0 / measure);
    let i1 = VectorField::new(
        (0..n)
            .map(|j| {
                weighted_sum(&field.intensity, ords.weights(), |m| ords.directions[m][j])
                    .scale(n as f64 / measure)
            })
            .collect(),
    )
    .expect("components share a grid");
    RadiationMoments { i0, i1 }
}

/// Weighted `L²(Ω × Sⁿ⁻¹)` norm of `I − (I₀ + I₁·ω)`.
pub fn p1_projection_residual(field: &KineticField) -> f64 {
    let rad = moments(field);
    let p1 = KineticField::from_moments(&rad, field.ordinates.clone()).expect("same layout");
    let grid = field.grid();
    let cell = grid.volume() / grid.len() as f64;
    let mut sum = 0.0;
    for ((i, p), w) in field.intensity.iter().zip(&p1.intensity).zip(field.ordinates.weights()) {
        let sq: f64 = i.values().iter().zip(p.values()).map(|(a, b)| (a - b).powi(2)).sum();
        sum += w * sq;
    }
    (sum * cell).sqrt()
}

/// Right-hand sides of the P1 moment equations evaluated on `rad`.
pub fn p1_moment_rhs(
    rad: &RadiationMoments,
    ords: &OrdinateSet,
    theta: &SpectralField,
    eps: f64,
    sigma_a: f64,
    sigma_s: f64,
) -> (SpectralField, VectorField) {
    let n = ords.n_dims() as f64;
    let inv = 1.0 / eps;
    let d0 = &(&quartic(theta) - &rad.i0.scale(sigma_a)) - &div(&rad.i1).scale(1.0 / n);
    let damping = sigma_a + sigma_s * ords.sphere_measure();
    let d1 = &(-&grad(&rad.i0)) - &rad.i1.scale(damping);
    (d0.scale(inv), d1.scale(inv))
}

/// `L²` mismatch between the moments of the kinetic tendency and the P1
/// moment right-hand sides, without the manifold check.
pub fn moment_residuals(
    field: &KineticField,
    theta: &SpectralField,
    eps: f64,
    sigma_a: f64,
    sigma_s: f64,
) -> (f64, f64) {
    let tendency = moments(&kinetic_rhs(field, theta, eps, sigma_a, sigma_s));
    let rad = moments(field);
    let (d0, d1) = p1_moment_rhs(&rad, &field.ordinates, theta, eps, sigma_a, sigma_s);
    let r0 = crate::spectral::sobolev_norm(&(&tendency.i0 - &d0), 0);
    let r1 = crate::spectral::sobolev_norm(&(&tendency.i1 - &d1), 0);
    (r0, r1)
}

/// [`moment_residuals`] restricted to intensities on the P1 subspace.
pub fn moment_system_check(
    field: &KineticField,
    theta: &SpectralField,
    eps: f64,
    sigma_a: f64,
    sigma_s: f64,
) -> Result<(f64, f64)> {
    let residual = p1_projection_residual(field);
    if residual > P1_MANIFOLD_TOLERANCE {
        return Err(Error::OffClosureManifold { residual });
    }
    Ok(moment_residuals(field, theta, eps, sigma_a, sigma_s))
}

/// Explicit RK4 integration of the transport equation with `θ` frozen.
/// Returns the final field and the smallest intensity seen at any step.
pub fn integrate_kinetic(
    field: &KineticField,
    theta: &SpectralField,
    eps: f64,
    sigma_a: f64,
    sigma_s: f64,
    dt: f64,
    steps: usize,
) -> (KineticField, f64) {
    let rhs = |f: &KineticField| kinetic_rhs(f, theta, eps, sigma_a, sigma_s);
    let mut cur = field.clone();
    let mut min = cur.min();
    for _ in 0..steps {
        let k1 = rhs(&cur);
        let k2 = rhs(&cur.axpy(0.5 * dt, &k1));
        let k3 = rhs(&cur.axpy(0.5 * dt, &k2));
        let k4 = rhs(&cur.axpy(dt, &k3));
        let incr = k1.zip(&k2, |a, b| a.zip_with(b, |x, y| x + 2.0 * y));
        let incr = incr.zip(&k3, |a, b| a.zip_with(b, |x, y| x + 2.0 * y));
        let incr = incr.zip(&k4, |a, b| a + b);
        cur = cur.axpy(dt / 6.0, &incr);
        min = min.min(cur.min());
    }
    (cur, min)
}

/// Stable explicit step for [`integrate_kinetic`]: resolves both streaming
/// (`|ω| ≤ 1`, speed `1/ε`) and collisions.
pub fn kinetic_dt(grid: Grid, ords: &OrdinateSet, eps: f64, sigma_a: f64, sigma_s: f64, cfl: f64) -> f64 {
    let streaming = eps * grid.spacing();
    let collision = eps / (sigma_a + sigma_s * ords.sphere_measure());
    cfl * streaming.min(collision)
}
