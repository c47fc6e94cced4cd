//! Error fields between the ε-system and the limit system, the energy
//! functionals built on them, well-prepared initial data and rate fitting.

use crate::error::{Error, Result};
use crate::fluid::{FluidState, POSITIVITY_THRESHOLD};
use crate::radiation::{limit_i0, limit_q, RadiationMoments};
use crate::spectral::{sobolev_norm_tuple, Grid, SpectralField, VectorField};
use crate::timestepper::{EpsState, LimitState};

/// Largest admissible gap between the times of compared states.
pub const TIME_TOLERANCE: f64 = 1e-12;

/// Default bound on `sup Γ/ε²`.
pub const DEFAULT_GAMMA_BOUND: f64 = 100.0;

/// Differences `(N, U, Θ)` of the fluid fields and `(J₀, J₁)` of the radiation
/// moments against the limit pair built from `θ⁰`.
#[derive(Clone, Debug)]
pub struct ErrorFields {
    pub time: f64,
    pub n: SpectralField,
    pub u: VectorField,
    pub theta: SpectralField,
    pub j0: SpectralField,
    pub j1: VectorField,
}

impl ErrorFields {
    pub fn fluid_norm(&self, s: u32) -> f64 {
        sobolev_norm_tuple(&[&self.n, &self.u, &self.theta], s)
    }

    /// Unweighted `‖(J₀, J₁)‖ₛ`.
    pub fn radiation_norm(&self, s: u32) -> f64 {
        sobolev_norm_tuple(&[&self.j0, &self.j1], s)
    }

    pub fn max_abs(&self) -> f64 {
        [
            self.n.max_abs(),
            self.u.max_abs(),
            self.theta.max_abs(),
            self.j0.max_abs(),
            self.j1.max_abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            time: self.time,
            n: self.n.scale(c),
            u: self.u.scale(c),
            theta: self.theta.scale(c),
            j0: self.j0.scale(c),
            j1: self.j1.scale(c),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRecord {
    pub time: f64,
    pub fluid_energy: f64,
    pub full_energy: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub eps_values: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn error_fields(eps_state: &EpsState, limit_state: &LimitState) -> Result<ErrorFields> {
    if eps_state.grid() != limit_state.grid() {
        return Err(Error::GridMismatch);
    }
    if (eps_state.time - limit_state.time).abs() > TIME_TOLERANCE {
        return Err(Error::TimeMismatch {
            eps_time: eps_state.time,
            limit_time: limit_state.time,
        });
    }
    let (fe, f0) = (&eps_state.fluid, &limit_state.fluid);
    Ok(ErrorFields {
        time: limit_state.time,
        n: &fe.rho - &f0.rho,
        u: &fe.u - &f0.u,
        theta: &fe.theta - &f0.theta,
        j0: &eps_state.rad.i0 - &limit_i0(&f0.theta),
        j1: &eps_state.rad.i1 - &limit_q(&f0.theta),
    })
}

pub fn energy(err: &ErrorFields, s: u32, eps: f64) -> EnergyRecord {
    let fluid = err.fluid_norm(s);
    let rad = err.radiation_norm(s);
    let gamma = fluid * fluid + eps * rad * rad;
    EnergyRecord {
        time: err.time,
        fluid_energy: fluid,
        full_energy: gamma.sqrt(),
        gamma,
    }
}

/// One trigonometric term `amplitude · cos(k·x + phase)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigTerm {
    pub k: [i64; 2],
    pub amplitude: f64,
    pub phase: f64,
}

impl TrigTerm {
    pub const fn new(k: [i64; 2], amplitude: f64, phase: f64) -> Self {
        Self { k, amplitude, phase }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let arg: f64 = x.iter().zip(self.k).map(|(xi, ki)| xi * ki as f64).sum();
        self.amplitude * (arg + self.phase).cos()
    }
}

pub fn trig_profile(grid: Grid, terms: &[TrigTerm]) -> SpectralField {
    SpectralField::from_fn(grid, |x| terms.iter().map(|t| t.eval(x)).sum())
}

/// Perturbation shapes used by [`well_prepared_init`]. Each is normalized to
/// unit `L²` norm (the velocity and flux as whole vectors).
#[derive(Clone, Debug)]
pub struct PerturbationShapes {
    pub rho: SpectralField,
    pub u: VectorField,
    pub theta: SpectralField,
    pub i0: SpectralField,
    pub i1: VectorField,
}

/// Trigonometric descriptions of the perturbation shapes; `u` and `i1` carry
/// one term list per component.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeSpec {
    pub rho: Vec<TrigTerm>,
    pub u: Vec<Vec<TrigTerm>>,
    pub theta: Vec<TrigTerm>,
    pub i0: Vec<TrigTerm>,
    pub i1: Vec<Vec<TrigTerm>>,
}

impl ShapeSpec {
    /// Single low modes, with phases chosen so no two shapes coincide.
    pub fn default_for(n_dims: usize) -> Self {
        use std::f64::consts::FRAC_PI_2 as H;
        let k = |a: i64, b: i64| if n_dims == 1 { [a, 0] } else { [a, b] };
        let one = |kk, ph| vec![TrigTerm::new(kk, 1.0, ph)];
        Self {
            rho: one(k(1, 1), -H),
            u: (0..n_dims).map(|j| one(if j == 0 { k(1, 0) } else { k(0, 1) }, 0.0)).collect(),
            theta: one(k(2, 1), 0.0),
            i0: one(k(1, 2), 0.0),
            i1: (0..n_dims).map(|j| one(if j == 0 { k(2, 0) } else { k(0, 2) }, -H)).collect(),
        }
    }

    pub fn build(&self, grid: Grid) -> Result<PerturbationShapes> {
        let n = grid.n_dims();
        if self.u.len() != n || self.i1.len() != n {
            return Err(Error::InvalidParams(format!(
                "vector perturbation shapes need {n} components"
            )));
        }
        let scalar = |terms: &[TrigTerm]| normalized_scalar(trig_profile(grid, terms));
        let vector = |comps: &[Vec<TrigTerm>]| {
            let v = VectorField::new(comps.iter().map(|t| trig_profile(grid, t)).collect())?;
            normalized_vector(v)
        };
        Ok(PerturbationShapes {
            rho: scalar(&self.rho)?,
            u: vector(&self.u)?,
            theta: scalar(&self.theta)?,
            i0: scalar(&self.i0)?,
            i1: vector(&self.i1)?,
        })
    }
}

fn unit_scale(norm: f64) -> Result<f64> {
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidParams("perturbation shape has zero norm".into()));
    }
    Ok(1.0 / norm)
}

fn normalized_scalar(f: SpectralField) -> Result<SpectralField> {
    let c = unit_scale(crate::spectral::sobolev_norm(&f, 0))?;
    Ok(f.scale(c))
}

fn normalized_vector(v: VectorField) -> Result<VectorField> {
    let c = unit_scale(crate::spectral::sobolev_norm(&v, 0))?;
    Ok(v.scale(c))
}

impl PerturbationShapes {
    pub fn default_for(grid: Grid) -> Self {
        ShapeSpec::default_for(grid.n_dims())
            .build(grid)
            .expect("default shapes are well formed")
    }
}

/// Initial data for one member of an ε-sweep.
#[derive(Clone, Debug)]
pub struct WellPrepared {
    pub eps_state: EpsState,
    pub limit_state: LimitState,
    /// `‖(ρᵉ−ρ⁰, uᵉ−u⁰, θᵉ−θ⁰)‖ₛ + √ε‖(I₀ᵉ − I₀ref, I₁ᵉ − q⁰)‖ₛ` at `t = 0`.
    pub hypothesis_lhs: f64,
    /// `hypothesis_lhs / ε`.
    pub l0: f64,
}

/// Left side of the well-preparedness hypothesis for a pair of states.
pub fn hypothesis_lhs(eps_state: &EpsState, limit_state: &LimitState, eps: f64, s: u32) -> Result<f64> {
    let e = error_fields(eps_state, limit_state)?;
    Ok(e.fluid_norm(s) + eps.sqrt() * e.radiation_norm(s))
}

fn ensure_positive(field: &'static str, f: &SpectralField) -> Result<()> {
    let min = f.min();
    if !(min > POSITIVITY_THRESHOLD) {
        return Err(Error::PositivityLost { field, min });
    }
    Ok(())
}

/// Perturbs the limit profiles by `ε·amp·δ` (fluid) and `√ε·amp·δ`
/// (radiation about the limit pair) and reports the hypothesis constant at
/// Sobolev index `s`.
pub fn well_prepared_init(
    base: &FluidState,
    eps: f64,
    amp: f64,
    shapes: &PerturbationShapes,
    s: u32,
) -> Result<WellPrepared> {
    if !(eps > 0.0) || !(amp >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "need eps > 0 and amp >= 0, got {eps} and {amp}"
        )));
    }
    if shapes.rho.grid() != base.grid() {
        return Err(Error::GridMismatch);
    }
    let cf = eps * amp;
    let cr = eps.sqrt() * amp;
    let rho = &base.rho + &shapes.rho.scale(cf);
    let theta = &base.theta + &shapes.theta.scale(cf);
    ensure_positive("rho", &rho)?;
    ensure_positive("theta", &theta)?;
    let u = &base.u + &shapes.u.scale(cf);
    let fluid = FluidState::new(rho, u, theta)?;

    let reference = RadiationMoments::relaxed(&base.theta);
    let rad = RadiationMoments::new(
        &reference.i0 + &shapes.i0.scale(cr),
        &reference.i1 + &shapes.i1.scale(cr),
    )?;

    let eps_state = EpsState::new(fluid, rad, 0.0)?;
    let limit_state = LimitState::new(base.clone(), 0.0)?;
    let lhs = hypothesis_lhs(&eps_state, &limit_state, eps, s)?;
    Ok(WellPrepared {
        eps_state,
        limit_state,
        hypothesis_lhs: lhs,
        l0: lhs / eps,
    })
}

/// Least-squares fit of `ln err = slope · ln ε + intercept`.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", pairs.len())));
    }
    if let Some(&(e, v)) = pairs.iter().find(|(e, v)| !(*v > 0.0) || !v.is_finite() || !(*e > 0.0)) {
        return Err(Error::DegenerateFit(format!("non-positive value at eps = {e}: {v}")));
    }
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::DegenerateFit("eps values must be distinct".into()));
    }

    let xs: Vec<f64> = sorted.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = sorted.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };

    Ok(RateFit {
        eps_values: sorted.iter().map(|p| p.0).collect(),
        errors: sorted.iter().map(|p| p.1).collect(),
        slope,
        intercept,
        r_squared,
    })
}

/// `(sup_t Γ/ε², sup ≤ bound)`.
pub fn gamma_bound_check(records: &[EnergyRecord], eps: f64, bound: f64) -> (f64, bool) {
    assert!(!records.is_empty(), "empty energy series");
    let worst = records.iter().map(|r| r.gamma).fold(0.0, f64::max) / (eps * eps);
    (worst, worst <= bound)
}
