use proptest::prelude::*;
use schaeffer_core::linalg::DenseMatrix;
use schaeffer_core::model::{
    build_toeplitz, det_times_inverse, malmquist_walsh, minimal_poly_check, model_matrix, SpectrumSpec,
};
use schaeffer_core::C64;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[test]
fn toeplitz_leading_rows() {
    let t = build_toeplitz(re(0.5), 3).unwrap();
    let e = t.entries();
    assert_eq!((e[(0, 0)], e[(0, 1)]), (re(0.5), re(0.0)));
    assert_eq!((e[(1, 0)], e[(1, 1)]), (re(0.75), re(0.5)));
    assert_eq!([e[(2, 0)], e[(2, 1)], e[(2, 2)]], [re(-0.375), re(0.75), re(0.5)]);
    assert_eq!(build_toeplitz(re(0.5), 4).unwrap().determinant(), re(0.0625));
}

#[test]
fn toeplitz_rejects_degenerate_lambdas() {
    assert!(build_toeplitz(re(0.0), 3).is_err());
    assert!(build_toeplitz(re(1.0), 3).is_err());
    assert!(build_toeplitz(re(0.5), 0).is_err());
}

#[test]
fn nilpotency_index_equals_dimension() {
    for lambda in [0.5, 0.9, 0.2] {
        for n in 1..=32 {
            let t = build_toeplitz(re(lambda), n).unwrap();
            let report = minimal_poly_check(&t).unwrap();
            assert_eq!(report.degree, n, "lambda = {lambda}");
            assert!(report.residual <= 1e-8);
            // (T - λI)^{n-1} keeps the corner entry (1 - λ²)^{n-1}.
            let nil = &t.entries().clone() - &DenseMatrix::identity(n).scale(re(lambda));
            let mut p = DenseMatrix::identity(n);
            for _ in 1..n {
                p = &p * &nil;
            }
            let corner = (1.0 - lambda * lambda).powi(n as i32 - 1);
            assert!((p[(n - 1, 0)].re - corner).abs() <= 1e-12 * corner.max(1e-300) + 1e-300);
        }
    }
}

#[test]
fn scaled_inverse_small_cases() {
    let one = det_times_inverse(&build_toeplitz(re(0.5), 1).unwrap()).unwrap();
    assert!((one[(0, 0)] - re(1.0)).norm() < 1e-15);
    let two = det_times_inverse(&build_toeplitz(re(0.5), 2).unwrap()).unwrap();
    let expect = [[0.5, 0.0], [-0.75, 0.5]];
    for (i, row) in expect.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!((two[(i, j)] - re(*v)).norm() < 1e-15);
        }
    }
}

#[test]
fn scaled_inverse_defining_identity() {
    for n in [3usize, 8, 16, 32, 64] {
        for lambda in [0.2, 0.5, 0.8] {
            let t = build_toeplitz(re(lambda), n).unwrap();
            let adj = det_times_inverse(&t).unwrap();
            let rhs = DenseMatrix::identity(n).scale(t.determinant());
            let err = (t.entries() * &adj).max_abs_diff(&rhs);
            assert!(err <= 1e-10, "lambda = {lambda}, n = {n}: {err:e}");
        }
        // Complex parameters make the adjugate entries grow geometrically, so
        // the residual is measured against their size.
        let t = build_toeplitz(C64::new(0.3, -0.6), n).unwrap();
        let adj = det_times_inverse(&t).unwrap();
        let rhs = DenseMatrix::identity(n).scale(t.determinant());
        let err = (t.entries() * &adj).max_abs_diff(&rhs);
        assert!(err <= 1e-14 * n as f64 * adj.max_abs(), "complex, n = {n}: {err:e}");
    }
}

#[test]
fn first_basis_function_closed_form() {
    let basis = malmquist_walsh(&SpectrumSpec::real_singleton(0.5, 1).unwrap()).unwrap();
    for z in [re(0.0), C64::new(0.3, 0.2), C64::from_polar(1.0, 2.0)] {
        let expect = 0.75f64.sqrt() / (1.0 - 0.5 * z);
        assert!((basis.eval(0, z) - expect).norm() < 1e-14);
    }
    assert!(basis.gram_residual(basis.quadrature_nodes()) < 1e-10);
}

#[test]
fn model_matrix_reproduces_the_counterexample() {
    for lambda in [0.2, 0.5, 0.8] {
        for n in 1..=8 {
            let m = model_matrix(&SpectrumSpec::real_singleton(lambda, n).unwrap()).unwrap();
            let t = build_toeplitz(re(lambda), n).unwrap();
            let err = m.max_abs_diff(t.entries());
            assert!(err < 1e-10, "lambda = {lambda}, n = {n}: {err:e}");
        }
    }
    let single = model_matrix(&SpectrumSpec::real_singleton(0.5, 1).unwrap()).unwrap();
    assert!((single[(0, 0)] - re(0.5)).norm() < 1e-14);
}

#[test]
fn model_matrix_eigenvalues_for_two_points() {
    let spec = SpectrumSpec::new(vec![(re(0.3), 1), (re(0.6), 1)]).unwrap();
    let m = model_matrix(&spec).unwrap();
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let mut eig = [((tr + disc) / 2.0).re, ((tr - disc) / 2.0).re];
    eig.sort_by(f64::total_cmp);
    assert!((eig[0] - 0.3).abs() < 1e-8 && (eig[1] - 0.6).abs() < 1e-8, "{eig:?}");
}

#[test]
fn boundary_eigenvalues_have_no_model_space_basis() {
    let spec = SpectrumSpec::new(vec![(re(1.0), 1)]).unwrap();
    assert!(malmquist_walsh(&spec).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn toeplitz_structure_and_spectrum(r in 0.05f64..0.95, t in 0.0f64..6.28, n in 1usize..20) {
        let lambda = C64::from_polar(r, t);
        let m = build_toeplitz(lambda, n).unwrap();
        let e = m.entries();
        for i in 0..n {
            prop_assert_eq!(e[(i, i)], lambda);
            for j in i + 1..n {
                prop_assert_eq!(e[(i, j)], re(0.0));
            }
            for j in 0..i {
                prop_assert_eq!(e[(i, j)], e[(i - j, 0)]);
            }
        }
        prop_assert!((m.determinant() - lambda.powu(n as u32)).norm() <= 1e-14 * r.powi(n as i32) + 1e-300);
    }
}
