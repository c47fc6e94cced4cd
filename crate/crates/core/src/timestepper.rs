//! Time integration of the ε-system and the limit system.
//!
//! The ε-system is advanced by Strang splitting: half a step of the linear
//! radiation relaxation with `θ` frozen (solved exactly per Fourier mode),
//! a full RK4 step of the fluid with the radiation moments frozen, and
//! another radiation half step. The stiff `1/ε` scale never enters the step
//! size.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fluid::{fluid_rhs_eps, fluid_rhs_limit, FluidParams, FluidState, FluidTendency};
use crate::radiation::{limit_q, RadiationMoments};
use crate::spectral::{quartic, Grid, SpectralField, VectorField};

/// Full state of the ε-system.
#[derive(Clone, Debug)]
pub struct EpsState {
    pub fluid: FluidState,
    pub rad: RadiationMoments,
    pub time: f64,
}

impl EpsState {
    pub fn new(fluid: FluidState, rad: RadiationMoments, time: f64) -> Result<Self> {
        if fluid.grid() != rad.grid() {
            return Err(Error::GridMismatch);
        }
        fluid.check_positive()?;
        Ok(Self { fluid, rad, time })
    }

    pub fn grid(&self) -> Grid {
        self.fluid.grid()
    }

    pub fn shifted(&self, cells: [usize; 2]) -> Self {
        Self {
            fluid: self.fluid.shifted(cells),
            rad: self.rad.shifted(cells),
            time: self.time,
        }
    }
}

/// State of the limit system; `q⁰` is always derived from `θ`.
#[derive(Clone, Debug)]
pub struct LimitState {
    pub fluid: FluidState,
    pub time: f64,
}

impl LimitState {
    pub fn new(fluid: FluidState, time: f64) -> Result<Self> {
        fluid.check_positive()?;
        Ok(Self { fluid, time })
    }

    pub fn grid(&self) -> Grid {
        self.fluid.grid()
    }

    /// `q⁰ = limit_q(θ⁰)` at the current time.
    pub fn flux(&self) -> VectorField {
        limit_q(&self.fluid.theta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl {
    /// Upper bound on any single step.
    pub dt_max: f64,
    pub cfl_advective: f64,
    pub cfl_diffusive: f64,
    pub t_end: f64,
}

impl StepControl {
    pub const DEFAULT_CFL: f64 = 0.4;

    pub fn new(t_end: f64) -> Self {
        Self {
            dt_max: f64::INFINITY,
            cfl_advective: Self::DEFAULT_CFL,
            cfl_diffusive: Self::DEFAULT_CFL,
            t_end,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |c: f64| c > 0.0 && c <= 1.0;
        if !(self.dt_max > 0.0) {
            return Err(Error::InvalidParams(format!("dt_max must be > 0, got {}", self.dt_max)));
        }
        if !in_unit(self.cfl_advective) || !in_unit(self.cfl_diffusive) {
            return Err(Error::InvalidParams(format!(
                "cfl numbers must lie in (0, 1], got {} / {}",
                self.cfl_advective, self.cfl_diffusive
            )));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidParams(format!("t_end must be > 0, got {}", self.t_end)));
        }
        Ok(())
    }
}

/// Individual step-size limits; [`cfl_dt`] takes their minimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CflBounds {
    /// `cfl_adv · h / (max|u| + √θ_max)`.
    pub advective: f64,
    /// `cfl_diff · h² · ρ_min / max(μ, κ)`.
    pub diffusive: f64,
    /// `t_end − t`.
    pub remaining: f64,
}

pub fn cfl_bounds(fluid: &FluidState, time: f64, p: &FluidParams, c: &StepControl) -> CflBounds {
    let h = fluid.grid().spacing();
    let speed = fluid.u.max_abs() + fluid.theta.max().max(0.0).sqrt();
    CflBounds {
        advective: c.cfl_advective * h / speed,
        diffusive: c.cfl_diffusive * h * h * fluid.rho.min() / p.mu.max(p.kappa),
        remaining: c.t_end - time,
    }
}

/// Stable step for either system. `ε` is accepted for symmetry but imposes no
/// restriction: the relaxation is integrated exactly.
pub fn cfl_dt(fluid: &FluidState, time: f64, p: &FluidParams, _eps: Option<f64>, c: &StepControl) -> f64 {
    let b = cfl_bounds(fluid, time, p, c);
    b.advective.min(b.diffusive).min(b.remaining).min(c.dt_max)
}

/// Exact solution over `[0, dt]` of
/// `ε∂ₜI₀ = θ⁴ − I₀ − div I₁`, `ε∂ₜI₁ = −I₁ − ∇I₀` with `θ⁴` frozen.
///
/// Per mode, with `m = |k|` and `k̂ = k/m`, the longitudinal pair
/// `(Î₀, k̂·Î₁)` relaxes to `(b, −imb)/(1 + m²)` through
/// `exp(τM)`, `M = −I − imσₓ`, `τ = dt/ε`, i.e.
/// `e^{−τ}[cos(mτ) I − i sin(mτ) σₓ]`. Transverse parts decay as `e^{−τ}`.
pub fn radiation_exact_substep(
    rad: &RadiationMoments,
    theta_frozen: &SpectralField,
    eps: f64,
    dt: f64,
) -> RadiationMoments {
    assert!(eps > 0.0 && dt >= 0.0);
    let grid = rad.grid();
    let n = grid.n_dims();
    let tau = dt / eps;
    let decay = (-tau).exp();
    let i = Complex64::new(0.0, 1.0);

    let source = quartic(theta_frozen);
    let b_hat = source.coefficients();
    let a_hat = rad.i0.coefficients();
    let v_hat: Vec<&[Complex64]> = rad.i1.components().iter().map(|c| c.coefficients()).collect();

    let mut a_out = vec![Complex64::default(); grid.len()];
    let mut v_out = vec![vec![Complex64::default(); grid.len()]; n];

    for idx in 0..grid.len() {
        let kd = grid.derivative_wavenumber(idx);
        let m = (kd[0] * kd[0] + kd[1] * kd[1]).sqrt();
        let b = b_hat[idx];
        let a0 = a_hat[idx];
        if m == 0.0 {
            a_out[idx] = b + (a0 - b) * decay;
            for j in 0..n {
                v_out[j][idx] = v_hat[j][idx] * decay;
            }
            continue;
        }
        let khat = [kd[0] / m, kd[1] / m];
        let c0: Complex64 = (0..n).map(|j| v_hat[j][idx] * khat[j]).sum();
        let a_star = b / (1.0 + m * m);
        let c_star = -i * m * a_star;
        let (sin, cos) = (m * tau).sin_cos();
        let da = a0 - a_star;
        let dc = c0 - c_star;
        let a = a_star + decay * (cos * da - i * sin * dc);
        let c = c_star + decay * (-i * sin * da + cos * dc);
        a_out[idx] = a;
        for j in 0..n {
            let transverse = v_hat[j][idx] - c0 * khat[j];
            v_out[j][idx] = c * khat[j] + transverse * decay;
        }
    }

    RadiationMoments {
        i0: SpectralField::from_coefficients(grid, &a_out),
        i1: VectorField::new(
            v_out
                .iter()
                .map(|c| SpectralField::from_coefficients(grid, c))
                .collect(),
        )
        .expect("components share a grid"),
    }
}

fn rk4<F>(state: &FluidState, dt: f64, rhs: F) -> Result<FluidState>
where
    F: Fn(&FluidState) -> Result<FluidTendency>,
{
    let k1 = rhs(state)?;
    let k2 = rhs(&state.advanced(0.5 * dt, &k1))?;
    let k3 = rhs(&state.advanced(0.5 * dt, &k2))?;
    let k4 = rhs(&state.advanced(dt, &k3))?;
    let incr = FluidTendency::combine(&[(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)]);
    Ok(state.advanced(dt / 6.0, &incr))
}

fn accept(fluid: FluidState, time: f64) -> Result<FluidState> {
    if !fluid.is_finite() {
        return Err(Error::BlowUp { time });
    }
    fluid.check_positive()?;
    Ok(fluid)
}

/// One Strang step of the ε-system.
pub fn step_eps(s: &EpsState, p: &FluidParams, eps: f64, dt: f64) -> Result<EpsState> {
    assert!(eps > 0.0 && dt > 0.0);
    s.fluid.check_positive()?;
    let half = 0.5 * dt;
    let rad = radiation_exact_substep(&s.rad, &s.fluid.theta, eps, half);
    let fluid = rk4(&s.fluid, dt, |f| fluid_rhs_eps(f, &rad, eps, p))?;
    let time = s.time + dt;
    let fluid = accept(fluid, time)?;
    let rad = radiation_exact_substep(&rad, &fluid.theta, eps, half);
    if !rad.is_finite() {
        return Err(Error::BlowUp { time });
    }
    Ok(EpsState { fluid, rad, time })
}

/// One RK4 step of the limit system, `q⁰` re-derived at every stage.
pub fn step_limit(s: &LimitState, p: &FluidParams, dt: f64) -> Result<LimitState> {
    assert!(dt > 0.0);
    let fluid = rk4(&s.fluid, dt, |f| fluid_rhs_limit(f, &limit_q(&f.theta), p))?;
    let time = s.time + dt;
    Ok(LimitState {
        fluid: accept(fluid, time)?,
        time,
    })
}

/// Steps the ε-system until `t_target` with CFL-limited steps, landing on it
/// exactly.
pub fn advance_eps(s: &EpsState, p: &FluidParams, eps: f64, c: &StepControl, t_target: f64) -> Result<EpsState> {
    let mut cur = s.clone();
    while t_target - cur.time > 1e-14 * t_target.abs().max(1.0) {
        let control = StepControl { t_end: t_target, ..*c };
        let dt = cfl_dt(&cur.fluid, cur.time, p, Some(eps), &control);
        cur = step_eps(&cur, p, eps, dt)?;
    }
    cur.time = t_target;
    Ok(cur)
}

/// Limit-system counterpart of [`advance_eps`].
pub fn advance_limit(s: &LimitState, p: &FluidParams, c: &StepControl, t_target: f64) -> Result<LimitState> {
    let mut cur = s.clone();
    while t_target - cur.time > 1e-14 * t_target.abs().max(1.0) {
        let control = StepControl { t_end: t_target, ..*c };
        let dt = cfl_dt(&cur.fluid, cur.time, p, None, &control);
        cur = step_limit(&cur, p, dt)?;
    }
    cur.time = t_target;
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiation::{limit_i0, radiation_rhs};
    use std::f64::consts::PI;

    fn g1(n: usize) -> Grid {
        Grid::new(1, n).unwrap()
    }

    #[test]
    fn zero_mode_decouples() {
        let g = g1(16);
        let rad = RadiationMoments::uniform(g, 2.0, &[0.5]);
        let theta = SpectralField::constant(g, 1.1);
        let b = 1.1f64.powi(4);
        let (eps, dt) = (0.1, 0.03);
        let out = radiation_exact_substep(&rad, &theta, eps, dt);
        let e = (-dt / eps).exp();
        assert!((out.i0.mean() - (b + (2.0 - b) * e)).abs() < 1e-14);
        assert!((out.i1.component(0).mean() - 0.5 * e).abs() < 1e-14);
    }

    #[test]
    fn zero_step_is_identity() {
        let g = Grid::new(2, 16).unwrap();
        let rad = RadiationMoments::new(
            SpectralField::from_fn(g, |x| 1.0 + 0.3 * (x[0] - 2.0 * x[1]).sin()),
            VectorField::from_fn(g, |x, j| 0.2 * (x[1 - j] + 0.3).cos()),
        )
        .unwrap();
        let theta = SpectralField::from_fn(g, |x| 1.0 + 0.1 * x[0].cos());
        let out = radiation_exact_substep(&rad, &theta, 0.05, 0.0);
        assert!(out.max_diff(&rad) < 1e-14);
    }

    /// Fine-step explicit RK4 on the radiation ODE is the oracle.
    #[test]
    fn matches_explicit_oracle_and_relaxes() {
        let g = Grid::new(2, 16).unwrap();
        let theta = SpectralField::from_fn(g, |x| 1.0 + 0.1 * (x[0] + x[1]).cos());
        let rad0 = RadiationMoments::new(
            SpectralField::from_fn(g, |x| 1.0 + 0.2 * x[1].sin()),
            VectorField::from_fn(g, |x, j| 0.1 * (2.0 * x[j]).sin() + 0.05 * x[1 - j].cos()),
        )
        .unwrap();
        let eps = 0.2;
        let dt = 0.1;
        let exact = radiation_exact_substep(&rad0, &theta, eps, dt);

        let steps = 4000;
        let h = dt / steps as f64;
        let add = |r: &RadiationMoments, c: f64, t: &crate::radiation::RadiationTendency| RadiationMoments {
            i0: r.i0.zip_with(&t.d_i0, |a, b| a + c * b),
            i1: r.i1.zip_components(&t.d_i1, |a, b| a.zip_with(b, |x, y| x + c * y)),
        };
        let mut r = rad0.clone();
        for _ in 0..steps {
            let k1 = radiation_rhs(&r, &theta, eps);
            let k2 = radiation_rhs(&add(&r, 0.5 * h, &k1), &theta, eps);
            let k3 = radiation_rhs(&add(&r, 0.5 * h, &k2), &theta, eps);
            let k4 = radiation_rhs(&add(&r, h, &k3), &theta, eps);
            r = add(&r, h / 6.0, &k1);
            r = add(&r, h / 3.0, &k2);
            r = add(&r, h / 3.0, &k3);
            r = add(&r, h / 6.0, &k4);
        }
        assert!(exact.max_diff(&r) < 1e-9, "{:e}", exact.max_diff(&r));

        let relaxed = radiation_exact_substep(&rad0, &theta, eps, 60.0 * eps);
        assert!(relaxed.max_diff(&RadiationMoments::relaxed(&theta)) < 1e-8);
    }

    #[test]
    fn substep_semigroup() {
        let g = Grid::new(2, 16).unwrap();
        let theta = SpectralField::from_fn(g, |x| 1.0 + 0.1 * x[0].sin() * x[1].cos());
        let rad = RadiationMoments::new(
            SpectralField::from_fn(g, |x| 0.9 + 0.2 * (3.0 * x[0]).cos()),
            VectorField::from_fn(g, |x, j| 0.1 * (x[0] + (j as f64) * x[1]).sin()),
        )
        .unwrap();
        let one = radiation_exact_substep(&rad, &theta, 0.05, 0.04);
        let half = radiation_exact_substep(&rad, &theta, 0.05, 0.02);
        let two = radiation_exact_substep(&half, &theta, 0.05, 0.02);
        assert!(one.max_diff(&two) < 1e-12);
    }

    fn equilibrium(g: Grid) -> EpsState {
        let zero = vec![0.0; g.n_dims()];
        EpsState::new(
            FluidState::uniform(g, 1.0, &zero, 1.0).unwrap(),
            RadiationMoments::uniform(g, 1.0, &zero),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let p = FluidParams::new(0.01, 0.01, 0.01);
        for g in [g1(32), Grid::new(2, 16).unwrap()] {
            let s = equilibrium(g);
            let next = step_eps(&s, &p, 0.01, 0.05).unwrap();
            assert!(next.fluid.rho.max_diff(&s.fluid.rho) < 1e-13);
            assert!(next.fluid.u.max_abs() < 1e-13);
            assert!(next.fluid.theta.max_diff(&s.fluid.theta) < 1e-13);
            assert!(next.rad.max_diff(&s.rad) < 1e-13);

            let l = LimitState::new(s.fluid.clone(), 0.0).unwrap();
            let ln = step_limit(&l, &p, 0.05).unwrap();
            assert!(ln.fluid.theta.max_diff(&l.fluid.theta) < 1e-13);
            assert!(ln.fluid.u.max_abs() < 1e-13);
        }
    }

    fn smooth_state(g: Grid) -> EpsState {
        let fluid = FluidState::new(
            SpectralField::from_fn(g, |x| 1.0 + 0.1 * x[0].sin()),
            VectorField::from_fn(g, |x, _| 0.1 * x[0].sin()),
            SpectralField::from_fn(g, |x| 1.0 + 0.1 * x[0].cos()),
        )
        .unwrap();
        let rad = RadiationMoments::relaxed(&fluid.theta);
        EpsState::new(fluid, rad, 0.0).unwrap()
    }

    #[test]
    fn translation_equivariance() {
        let g = g1(32);
        let p = FluidParams::new(0.01, 0.01, 0.01);
        let s = smooth_state(g);
        let a = step_eps(&s, &p, 0.05, 0.01).unwrap().shifted([1, 0]);
        let b = step_eps(&s.shifted([1, 0]), &p, 0.05, 0.01).unwrap();
        assert!(a.fluid.theta.max_diff(&b.fluid.theta) < 1e-13);
        assert!(a.fluid.u.max_diff(&b.fluid.u) < 1e-13);
        assert!(a.rad.max_diff(&b.rad) < 1e-13);
    }

    #[test]
    fn cfl_examples() {
        let g = g1(64);
        let p = FluidParams::new(0.01, 0.01, 0.01);
        let f = FluidState::uniform(g, 1.0, &[0.0], 1.0).unwrap();
        let c = StepControl {
            cfl_advective: 0.5,
            ..StepControl::new(10.0)
        };
        let b = cfl_bounds(&f, 0.0, &p, &c);
        assert!((b.advective - 0.5 * 2.0 * PI / 64.0).abs() < 1e-15);

        let fine = g1(256);
        let f = FluidState::uniform(fine, 1.0, &[0.0], 1.0).unwrap();
        let p = FluidParams::new(0.1, 0.1, 0.1);
        let b = cfl_bounds(&f, 0.0, &p, &c);
        assert!(b.diffusive < b.advective);
        assert_eq!(cfl_dt(&f, 0.0, &p, Some(0.1), &c), b.diffusive);
        assert_eq!(cfl_dt(&f, 0.0, &p, Some(0.1), &c), cfl_dt(&f, 0.0, &p, Some(0.05), &c));
        assert_eq!(cfl_dt(&f, 9.999, &p, None, &c), 10.0 - 9.999);
    }

    #[test]
    fn stable_as_eps_shrinks() {
        let g = g1(32);
        let p = FluidParams::new(0.01, 0.01, 0.01);
        let c = StepControl::new(0.2);
        let s = smooth_state(g);
        for eps in [0.1, 0.05, 0.025, 0.0125, 1e-4] {
            let out = advance_eps(&s, &p, eps, &c, 0.2).unwrap();
            assert!(out.fluid.is_finite() && out.rad.is_finite());
            let rel = (out.fluid.mass() - s.fluid.mass()).abs() / s.fluid.mass();
            assert!(rel < 1e-10);
        }
        let l = advance_limit(&LimitState::new(s.fluid.clone(), 0.0).unwrap(), &p, &c, 0.2).unwrap();
        assert!((l.fluid.mass() - s.fluid.mass()).abs() / s.fluid.mass() < 1e-10);
        assert!(limit_i0(&l.fluid.theta).is_finite());
    }

    #[test]
    fn blow_up_and_positivity_are_reported() {
        let g = g1(16);
        let p = FluidParams::new(0.01, 0.01, 0.01);
        let mut s = smooth_state(g);
        s.fluid.theta = SpectralField::from_fn(g, |x| 1.0 + 0.1 * x[0].cos() - if x[0] == 0.0 { 5.0 } else { 0.0 });
        assert!(matches!(step_eps(&s, &p, 0.1, 0.01), Err(Error::NonPositiveState { .. })));

        let mut s = smooth_state(g);
        s.rad.i0 = SpectralField::constant(g, f64::NAN);
        assert!(matches!(step_eps(&s, &p, 0.1, 0.01), Err(Error::BlowUp { .. })));
    }
}
