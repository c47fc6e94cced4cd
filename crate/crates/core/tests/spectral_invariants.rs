use proptest::prelude::*;
use radhydro_core::spectral::{
    div, grad, helmholtz, helmholtz_inverse, laplacian, partial, sobolev_norm, Grid, SpectralField,
};

const SIZES: [(usize, usize); 4] = [(1, 32), (1, 64), (2, 32), (2, 64)];

fn random_field() -> impl Strategy<Value = SpectralField> {
    (0..SIZES.len()).prop_flat_map(|i| {
        let (n, pts) = SIZES[i];
        let grid = Grid::new(n, pts).unwrap();
        prop::collection::vec(-1.0..1.0f64, grid.len())
            .prop_map(move |v| SpectralField::new(grid, v).unwrap())
    })
}

fn random_pair() -> impl Strategy<Value = (SpectralField, SpectralField)> {
    (0..SIZES.len()).prop_flat_map(|i| {
        let (n, pts) = SIZES[i];
        let grid = Grid::new(n, pts).unwrap();
        let v = || prop::collection::vec(-1.0..1.0f64, grid.len());
        (v(), v()).prop_map(move |(a, b)| {
            (SpectralField::new(grid, a).unwrap(), SpectralField::new(grid, b).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_round_trip(f in random_field()) {
        let back = SpectralField::from_coefficients(f.grid(), f.coefficients());
        prop_assert!(back.max_diff(&f) < 1e-12);
    }

    #[test]
    fn derivative_is_skew_adjoint((f, g) in random_pair()) {
        for axis in 0..f.grid().n_dims() {
            let lhs = partial(&f, axis).inner(&g);
            let rhs = -f.inner(&partial(&g, axis));
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn laplacian_is_self_adjoint((f, g) in random_pair()) {
        let a = laplacian(&f).inner(&g);
        let b = f.inner(&laplacian(&g));
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn div_grad_is_laplacian(f in random_field()) {
        let d = div(&grad(&f));
        let l = laplacian(&f);
        prop_assert!(d.max_diff(&l) < 1e-10 * (1.0 + l.max_abs()));
    }

    #[test]
    fn helmholtz_inverse_identity(f in random_field()) {
        prop_assert!(helmholtz_inverse(&helmholtz(&f)).max_diff(&f) < 1e-10);
        prop_assert!(helmholtz(&helmholtz_inverse(&f)).max_diff(&f) < 1e-10);
    }

    #[test]
    fn sobolev_norm_monotone_in_s(f in random_field()) {
        let norms: Vec<f64> = (0..=4).map(|s| sobolev_norm(&f, s)).collect();
        for w in norms.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn sobolev_norm_is_homogeneous(f in random_field(), c in -3.0..3.0f64) {
        let a = sobolev_norm(&f.scale(c), 2);
        let b = c.abs() * sobolev_norm(&f, 2);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
    }
}

#[test]
fn spectral_accuracy_improves_with_resolution() {
    for n in [1, 2] {
        let errors: Vec<f64> = [32, 64]
            .iter()
            .map(|&pts| {
                let g = Grid::new(n, pts).unwrap();
                let y = |x: &[f64]| x.get(1).copied().unwrap_or(0.0);
                let f = SpectralField::from_fn(g, |x| (x[0].sin() + 0.5 * y(x).cos()).exp());
                let exact =
                    SpectralField::from_fn(g, |x| x[0].cos() * (x[0].sin() + 0.5 * y(x).cos()).exp());
                partial(&f, 0).max_diff(&exact)
            })
            .collect();
        assert!(errors[0] < 1e-9, "{errors:?}");
        assert!(errors[1] <= errors[0].max(1e-13), "{errors:?}");
    }
}
