//! P1 radiation moments, their relaxation dynamics, and the limit closure.
//!
//! All normalization constants of the gray P1 system are one, so the moment
//! equations read `ε∂ₜI₀ + div I₁ = θ⁴ − I₀`, `ε∂ₜI₁ + ∇I₀ = −I₁`.
//!
//! On the torus `(−Δ)⁻¹` is singular at `k = 0`, but the composite
//! `(−Δ)⁻¹ div q⁰` coincides with `(I − Δ)⁻¹ θ⁴`, which is what
//! [`limit_i0`] returns.

use crate::error::{Error, Result};
use crate::spectral::{
    div, grad, helmholtz_inverse, quartic, sobolev_norm, Grid, SpectralField, VectorField,
};

#[derive(Clone, Debug)]
pub struct RadiationMoments {
    pub i0: SpectralField,
    pub i1: VectorField,
}

impl RadiationMoments {
    pub fn new(i0: SpectralField, i1: VectorField) -> Result<Self> {
        if i0.grid() != i1.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { i0, i1 })
    }

    pub fn uniform(grid: Grid, i0: f64, i1: &[f64]) -> Self {
        Self {
            i0: SpectralField::constant(grid, i0),
            i1: VectorField::constant(grid, i1),
        }
    }

    /// The relaxed pair `(limit_i0(θ), limit_q(θ))`.
    pub fn relaxed(theta: &SpectralField) -> Self {
        let i0 = limit_i0(theta);
        let i1 = -&grad(&i0);
        Self { i0, i1 }
    }

    pub fn grid(&self) -> Grid {
        self.i0.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.i0.is_finite() && self.i1.is_finite()
    }

    pub fn shifted(&self, cells: [usize; 2]) -> Self {
        Self {
            i0: self.i0.shifted(cells),
            i1: self.i1.shifted(cells),
        }
    }

    /// `‖(I₀, I₁)‖ₛ` (root of summed squares).
    pub fn sobolev_norm(&self, s: u32) -> f64 {
        (sobolev_norm(&self.i0, s).powi(2) + sobolev_norm(&self.i1, s).powi(2)).sqrt()
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        self.i0.max_diff(&other.i0).max(self.i1.max_diff(&other.i1))
    }
}

impl std::ops::Sub for &RadiationMoments {
    type Output = RadiationMoments;
    fn sub(self, rhs: Self) -> RadiationMoments {
        RadiationMoments {
            i0: &self.i0 - &rhs.i0,
            i1: &self.i1 - &rhs.i1,
        }
    }
}

/// Tendencies `(∂ₜI₀, ∂ₜI₁)` of the P1 moments.
#[derive(Clone, Debug)]
pub struct RadiationTendency {
    pub d_i0: SpectralField,
    pub d_i1: VectorField,
}

/// `d_I0 = [θ⁴ − I₀ − div I₁]/ε`, `d_I1 = [−I₁ − ∇I₀]/ε`.
pub fn radiation_rhs(rad: &RadiationMoments, theta: &SpectralField, eps: f64) -> RadiationTendency {
    assert!(eps > 0.0, "eps must be positive");
    let inv = 1.0 / eps;
    let d_i0 = (&(&quartic(theta) - &rad.i0) - &div(&rad.i1)).scale(inv);
    let d_i1 = (&(-&rad.i1) - &grad(&rad.i0)).scale(inv);
    RadiationTendency { d_i0, d_i1 }
}

/// `(I − Δ)⁻¹ e` for a given emission field `e`.
pub fn relaxed_intensity(emission: &SpectralField) -> SpectralField {
    helmholtz_inverse(emission)
}

/// Limit zeroth moment `I₀ = (I − Δ)⁻¹ θ⁴`.
pub fn limit_i0(theta: &SpectralField) -> SpectralField {
    relaxed_intensity(&quartic(theta))
}

/// Limit flux `q⁰ = −∇(I − Δ)⁻¹ θ⁴`.
pub fn limit_q(theta: &SpectralField) -> VectorField {
    -&grad(&limit_i0(theta))
}

/// `q⁰` from the literal operator form `(−Δ/(I − Δ) − I) ∇θ⁴`, applied mode by
/// mode. Agrees with [`limit_q`] since `−Δ/(I − Δ) − I = −(I − Δ)⁻¹`.
pub fn limit_q_operator_form(theta: &SpectralField) -> VectorField {
    let g = grad(&quartic(theta));
    g.map_components(|c| {
        let lap = crate::spectral::laplacian(c);
        // −Δ/(I − Δ) c − c
        &helmholtz_inverse(&(-&lap)) - c
    })
}

/// `‖−∇ div q + q + ∇θ⁴‖₀`.
pub fn limit_closure_residual(theta: &SpectralField, q: &VectorField) -> Result<f64> {
    if theta.grid() != q.grid() {
        return Err(Error::GridMismatch);
    }
    let r = &(&(-&grad(&div(q))) + q) + &grad(&quartic(theta));
    Ok(sobolev_norm(&r, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{helmholtz, partial};

    fn g1() -> Grid {
        Grid::new(1, 64).unwrap()
    }

    fn theta_profile(g: Grid) -> SpectralField {
        SpectralField::from_fn(g, |x| 1.0 + 0.1 * x[0].cos())
    }

    #[test]
    fn rhs_at_radiative_equilibrium() {
        let g = g1();
        let rad = RadiationMoments::uniform(g, 1.0, &[0.0]);
        let t = radiation_rhs(&rad, &SpectralField::constant(g, 1.0), 0.3);
        assert!(t.d_i0.max_abs() < 1e-14 && t.d_i1.max_abs() < 1e-14);
    }

    #[test]
    fn rhs_direct_substitution() {
        let g = g1();
        let i0 = SpectralField::from_fn(g, |x| 1.0 + x[0].cos());
        let rad = RadiationMoments::new(i0, VectorField::zeros(g)).unwrap();
        let t = radiation_rhs(&rad, &SpectralField::constant(g, 1.0), 1.0);
        let minus_cos = SpectralField::from_fn(g, |x| -x[0].cos());
        let sin = SpectralField::from_fn(g, |x| x[0].sin());
        assert!(t.d_i0.max_diff(&minus_cos) < 1e-13);
        assert!(t.d_i1.component(0).max_diff(&sin) < 1e-13);
    }

    #[test]
    fn limit_pair_is_steady() {
        let g = g1();
        let theta = theta_profile(g);
        let rad = RadiationMoments::relaxed(&theta);
        for eps in [1.0, 0.05, 0.0125] {
            let t = radiation_rhs(&rad, &theta, eps);
            assert!(t.d_i0.max_abs() < 1e-10);
            assert!(t.d_i1.max_abs() < 1e-10);
        }
    }

    #[test]
    fn rhs_scales_inversely_with_eps() {
        let g = Grid::new(2, 16).unwrap();
        let theta = SpectralField::from_fn(g, |x| 1.0 + 0.2 * (x[0] + x[1]).sin());
        let rad = RadiationMoments::new(
            SpectralField::from_fn(g, |x| 1.0 + 0.3 * x[1].cos()),
            VectorField::from_fn(g, |x, j| 0.1 * (x[j] + 0.5).sin()),
        )
        .unwrap();
        let a = radiation_rhs(&rad, &theta, 0.1);
        let b = radiation_rhs(&rad, &theta, 0.2);
        assert!(a.d_i0.max_diff(&b.d_i0.scale(2.0)) < 1e-12);
        assert!(a.d_i1.max_diff(&b.d_i1.scale(2.0)) < 1e-12);
    }

    #[test]
    fn limit_i0_examples() {
        let g = g1();
        let one = SpectralField::constant(g, 1.0);
        assert!(limit_i0(&one).max_diff(&one) < 1e-15);

        let emission = SpectralField::from_fn(g, |x| 1.0 + x[0].cos());
        let expect = SpectralField::from_fn(g, |x| 1.0 + 0.5 * x[0].cos());
        assert!(relaxed_intensity(&emission).max_diff(&expect) < 1e-14);

        let theta = theta_profile(g);
        let i0 = limit_i0(&theta);
        let t4 = quartic(&theta);
        assert!((i0.mean() - t4.mean()).abs() < 1e-15);
        let residual = sobolev_norm(&(&helmholtz(&i0) - &t4), 0);
        assert!(residual < 1e-12, "residual = {residual:e}");
    }

    #[test]
    fn limit_q_examples() {
        let g = g1();
        assert!(limit_q(&SpectralField::constant(g, 1.3)).max_abs() < 1e-15);

        let emission = SpectralField::from_fn(g, |x| 1.0 + x[0].cos());
        let q = -&grad(&relaxed_intensity(&emission));
        let expect = SpectralField::from_fn(g, |x| 0.5 * x[0].sin());
        assert!(q.component(0).max_diff(&expect) < 1e-14);

        let g2 = Grid::new(2, 32).unwrap();
        let theta = SpectralField::from_fn(g2, |x| 1.0 + 0.1 * x[0].sin() * (2.0 * x[1]).cos());
        let q = limit_q(&theta);
        let curl = &partial(q.component(1), 0) - &partial(q.component(0), 1);
        assert!(curl.max_abs() < 1e-12);

        let literal = limit_q_operator_form(&theta);
        assert!(literal.max_diff(&q) < 1e-13);
    }

    #[test]
    fn closure_residual_examples() {
        let g = g1();
        let theta = theta_profile(g);
        let q = limit_q(&theta);
        assert!(limit_closure_residual(&theta, &q).unwrap() < 1e-11);

        let zero = VectorField::zeros(g);
        let r0 = limit_closure_residual(&theta, &zero).unwrap();
        let expect = sobolev_norm(&grad(&quartic(&theta)), 0);
        assert!((r0 - expect).abs() < 1e-14 && r0 > 0.0);

        // The residual operator is affine in q with zero offset at q⁰, so the
        // perturbed residual equals ‖(−∇div + I) δq‖₀, here δq = 0.01 sin x:
        // −∂ₓ∂ₓ(0.01 sin x) + 0.01 sin x = 0.02 sin x, norm 0.02√π.
        let dq = VectorField::from_fn(g, |x, _| 0.01 * x[0].sin());
        let r = limit_closure_residual(&theta, &(&q + &dq)).unwrap();
        let oracle = 0.02 * std::f64::consts::PI.sqrt();
        assert!((r - oracle).abs() < 1e-6);
    }
}
