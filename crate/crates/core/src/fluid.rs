//! Hydrodynamic state and the primitive-variable fluid equations.
//!
//! Perfect gas with unit gas constant and heat capacity: `P = ρθ`, `e = θ`.

use crate::error::{Error, Result};
use crate::radiation::RadiationMoments;
use crate::spectral::{
    dealias, div, grad, laplacian, product, SpectralField, TensorField, VectorField, Grid,
};

/// States with `min ρ` or `min θ` below this are rejected.
pub const POSITIVITY_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidParams {
    /// Shear viscosity.
    pub mu: f64,
    /// Second viscosity coefficient.
    pub lambda: f64,
    /// Heat conductivity.
    pub kappa: f64,
}

impl FluidParams {
    pub fn new(mu: f64, lambda: f64, kappa: f64) -> Self {
        Self { mu, lambda, kappa }
    }

    /// Checks `μ > 0`, `2μ + nλ > 0`, `κ > 0`.
    pub fn validate(&self, n_dims: usize) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::InvalidParams(format!("mu must be > 0, got {}", self.mu)));
        }
        if !(2.0 * self.mu + n_dims as f64 * self.lambda > 0.0) {
            return Err(Error::InvalidParams(format!(
                "2 mu + n lambda must be > 0 (mu = {}, lambda = {}, n = {n_dims})",
                self.mu, self.lambda
            )));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::InvalidParams(format!(
                "kappa must be > 0, got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct FluidState {
    pub rho: SpectralField,
    pub u: VectorField,
    pub theta: SpectralField,
}

impl FluidState {
    /// Validates grids and positivity.
    pub fn new(rho: SpectralField, u: VectorField, theta: SpectralField) -> Result<Self> {
        let grid = rho.grid();
        if u.grid() != grid || theta.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let state = Self { rho, u, theta };
        state.check_positive()?;
        Ok(state)
    }

    /// Spatially constant state.
    pub fn uniform(grid: Grid, rho: f64, u: &[f64], theta: f64) -> Result<Self> {
        Self::new(
            SpectralField::constant(grid, rho),
            VectorField::constant(grid, u),
            SpectralField::constant(grid, theta),
        )
    }

    pub fn grid(&self) -> Grid {
        self.rho.grid()
    }

    pub fn check_positive(&self) -> Result<()> {
        for (field, f) in [("rho", &self.rho), ("theta", &self.theta)] {
            let min = f.min();
            if !(min >= POSITIVITY_THRESHOLD) {
                return Err(Error::NonPositiveState {
                    field,
                    min,
                    threshold: POSITIVITY_THRESHOLD,
                });
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.u.is_finite() && self.theta.is_finite()
    }

    /// `self + dt · tendency`, unchecked.
    pub fn advanced(&self, dt: f64, t: &FluidTendency) -> Self {
        Self {
            rho: self.rho.zip_with(&t.d_rho, |a, b| a + dt * b),
            u: self
                .u
                .zip_components(&t.d_u, |a, b| a.zip_with(b, |x, y| x + dt * y)),
            theta: self.theta.zip_with(&t.d_theta, |a, b| a + dt * b),
        }
    }

    /// Total mass `∫ρ dx`.
    pub fn mass(&self) -> f64 {
        self.rho.integral()
    }

    pub fn shifted(&self, cells: [usize; 2]) -> Self {
        Self {
            rho: self.rho.shifted(cells),
            u: self.u.shifted(cells),
            theta: self.theta.shifted(cells),
        }
    }
}

/// Time derivatives of `(ρ, u, θ)`.
#[derive(Clone, Debug)]
pub struct FluidTendency {
    pub d_rho: SpectralField,
    pub d_u: VectorField,
    pub d_theta: SpectralField,
}

impl FluidTendency {
    /// `Σ cᵢ tᵢ`, for Runge–Kutta combinations.
    pub fn combine(terms: &[(f64, &FluidTendency)]) -> Self {
        let (c0, first) = terms[0];
        let mut acc = Self {
            d_rho: first.d_rho.scale(c0),
            d_u: first.d_u.scale(c0),
            d_theta: first.d_theta.scale(c0),
        };
        for &(c, t) in &terms[1..] {
            acc.d_rho = acc.d_rho.zip_with(&t.d_rho, |a, b| a + c * b);
            acc.d_u = acc
                .d_u
                .zip_components(&t.d_u, |a, b| a.zip_with(b, |x, y| x + c * y));
            acc.d_theta = acc.d_theta.zip_with(&t.d_theta, |a, b| a + c * b);
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.d_rho
            .max_abs()
            .max(self.d_u.max_abs())
            .max(self.d_theta.max_abs())
    }
}

/// Velocity gradient as a tensor, entry `(i, j) = ∂_i u_j`.
fn velocity_gradient(u: &VectorField) -> TensorField {
    let grads: Vec<VectorField> = u.components().iter().map(grad).collect();
    TensorField::from_fn(u.n_components(), |i, j| grads[j].component(i).clone())
}

fn strain_from_gradient(g: &TensorField) -> TensorField {
    TensorField::from_fn(g.dim(), |i, j| {
        if i == j {
            g.get(i, i).clone()
        } else {
            (g.get(i, j) + g.get(j, i)).scale(0.5)
        }
    })
}

/// `𝔻(u) = (∇u + ∇uᵀ)/2`.
pub fn strain(u: &VectorField) -> TensorField {
    strain_from_gradient(&velocity_gradient(u))
}

fn stress_from_strain(d: &TensorField, p: &FluidParams) -> TensorField {
    let div_u = d.trace();
    TensorField::from_fn(d.dim(), |i, j| {
        let s = d.get(i, j).scale(2.0 * p.mu);
        if i == j {
            &s + &div_u.scale(p.lambda)
        } else {
            s
        }
    })
}

/// `Ψ(u) = 2μ𝔻(u) + λ (div u) 𝕀`.
pub fn viscous_stress(u: &VectorField, p: &FluidParams) -> TensorField {
    stress_from_strain(&strain(u), p)
}

fn dissipation_from_strain(d: &TensorField, p: &FluidParams) -> SpectralField {
    let tr = d.trace();
    let quad = d.contract(d).zip_with(&tr, |dd, t| 2.0 * p.mu * dd + p.lambda * t * t);
    dealias(&quad)
}

/// `Ψ(u) : ∇u = 2μ|𝔻(u)|² + λ (div u)²`, dealiased.
pub fn dissipation(u: &VectorField, p: &FluidParams) -> SpectralField {
    dissipation_from_strain(&strain(u), p)
}

/// Row divergence `(div Ψ)_i = Σ_j ∂_j Ψ_ij`.
fn tensor_div(t: &TensorField) -> VectorField {
    let n = t.dim();
    let rows = (0..n)
        .map(|i| {
            let row = VectorField::new((0..n).map(|j| t.get(i, j).clone()).collect())
                .expect("tensor rows share a grid");
            div(&row)
        })
        .collect();
    VectorField::new(rows).expect("tensor rows share a grid")
}

/// Shared fluid operator; the ε-system and the limit system differ only in
/// the momentum and heat sources, both entering before division by `ρ`.
fn fluid_tendency(
    f: &FluidState,
    momentum_source: Option<&VectorField>,
    heat_source: &SpectralField,
    p: &FluidParams,
) -> Result<FluidTendency> {
    f.check_positive()?;
    let rho = &f.rho;
    let theta = &f.theta;
    let u = &f.u;
    let n = u.n_components();

    let d_rho = -&div(&u.map_components(|uj| product(rho, uj)));

    let vel_grad = velocity_gradient(u);
    let d = strain_from_gradient(&vel_grad);
    let stress = stress_from_strain(&d, p);
    let div_stress = tensor_div(&stress);
    let grad_p = grad(&product(rho, theta));

    let d_u = VectorField::new(
        (0..n)
            .map(|i| {
                // (u·∇)u_i = Σ_j u_j ∂_j u_i
                let mut adv = product(u.component(0), vel_grad.get(0, i));
                for j in 1..n {
                    adv = &adv + &product(u.component(j), vel_grad.get(j, i));
                }
                let mut force = div_stress.component(i) - grad_p.component(i);
                if let Some(src) = momentum_source {
                    force = &force + src.component(i);
                }
                &(-&adv) + &dealias(&force.pointwise_div(rho))
            })
            .collect(),
    )?;

    let div_u = d.trace();
    let grad_theta = grad(theta);
    let mut transport = product(u.component(0), grad_theta.component(0));
    for j in 1..n {
        transport = &transport + &product(u.component(j), grad_theta.component(j));
    }
    let compression = product(theta, &div_u);
    let heating = &(&laplacian(theta).scale(p.kappa) + &dissipation_from_strain(&d, p)) + heat_source;
    let d_theta = &(&(-&transport) - &compression) + &dealias(&heating.pointwise_div(rho));

    Ok(FluidTendency { d_rho, d_u, d_theta })
}

/// Tendencies of the fluid part of the ε-system: momentum source `ε I₁`,
/// heat source `I₀ − θ⁴`.
pub fn fluid_rhs_eps(
    f: &FluidState,
    rad: &RadiationMoments,
    eps: f64,
    p: &FluidParams,
) -> Result<FluidTendency> {
    if rad.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    f.check_positive()?;
    let momentum = rad.i1.scale(eps);
    let heat = &rad.i0 - &crate::spectral::quartic(&f.theta);
    fluid_tendency(f, Some(&momentum), &heat, p)
}

/// Tendencies of the limit system: no momentum source, heat source `−div q⁰`.
pub fn fluid_rhs_limit(f: &FluidState, q0: &VectorField, p: &FluidParams) -> Result<FluidTendency> {
    if q0.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let heat = -&div(q0);
    fluid_tendency(f, None, &heat, p)
}
