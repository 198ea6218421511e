use proptest::prelude::*;
use schaeffer_core::airy::{airy_ai, airy_ai_prime};
use schaeffer_core::asymptotics::{
    alpha0, classify_region, decay_exponent_fit, gamma_cubed, phase_derivatives, stationary_phase_envelope,
    stationary_phase_estimate, stationary_points, truth_series, uniform_airy_estimate_with_truth, uniform_airy_terms,
    windowed_max, RegionLabel, SaddleKind,
};
use schaeffer_core::C64;

/// `(x, Ai(x), Ai'(x))` from a high-precision series and quadrature table.
fn airy_table() -> Vec<(f64, f64, f64)> {
    include_str!("data/airy_oracle.csv")
        .lines()
        .skip(1)
        .map(|line| {
            let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect()
}

#[test]
fn airy_matches_reference_table() {
    let table = airy_table();
    assert_eq!(table.len(), 401);
    for (x, ai, aip) in table {
        assert!((airy_ai(x) - ai).abs() <= 1e-10 * ai.abs(), "Ai({x})");
        assert!((airy_ai_prime(x) - aip).abs() <= 1e-10 * aip.abs(), "Ai'({x})");
    }
    assert_eq!(airy_ai(0.0), 0.3550280538878172);
    assert_eq!(airy_ai_prime(0.0), -0.2588194037928068);
}

#[test]
fn airy_equation_second_difference_is_second_order() {
    let xs: Vec<f64> = (0..=40).map(|i| -10.0 + 0.5 * i as f64).collect();
    let residual = |h: f64| {
        xs.iter()
            .map(|&x| ((airy_ai(x + h) - 2.0 * airy_ai(x) + airy_ai(x - h)) / (h * h) - x * airy_ai(x)).abs())
            .fold(0.0, f64::max)
    };
    let r: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|&h| residual(h)).collect();
    for w in r.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.1, "{r:?}");
    }
}

#[test]
fn edge_parameter() {
    assert!((alpha0(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!((alpha0(1.0 / 3.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((alpha0(1e-9).unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn saddle_examples_and_third_derivative() {
    let s = stationary_points(0.5, 1.0).unwrap();
    assert_eq!(s.kind, SaddleKind::CircleConjugatePair);
    assert!((s.z_plus - C64::new(0.5, 0.75f64.sqrt())).norm() < 1e-15);
    assert!(phase_derivatives(0.5, 1.0, s.z_plus).unwrap().f1.norm() < 1e-12);
    assert_eq!(stationary_points(0.5, 3.0).unwrap().kind, SaddleKind::CoalescedAtPlusMinusOne);
    let r = stationary_points(0.5, 4.0).unwrap();
    assert_eq!(r.kind, SaddleKind::RealReciprocalPair);
    assert!((r.z_plus * r.z_minus - 1.0).norm() < 1e-12);
    for lambda in [0.2, 0.5, 0.8] {
        let a = 1.0 / alpha0(lambda).unwrap();
        let d = phase_derivatives(lambda, a, C64::new(1.0, 0.0)).unwrap();
        let expect = -2.0 * lambda * (1.0 + lambda) / (1.0 - lambda).powi(3);
        assert!((d.f3.re - expect).abs() < 1e-10 * expect.abs() && d.f3.im.abs() < 1e-10);
    }
}

#[test]
fn second_derivative_matches_finite_differences() {
    for (lambda, a) in [(0.5, 1.0), (0.3, 0.9), (0.5, 4.0), (0.7, 0.1)] {
        let s = stationary_points(lambda, a).unwrap();
        let h = 1e-3;
        let f1 = |z: C64| phase_derivatives(lambda, a, z).unwrap().f1;
        let z = s.z_plus;
        let numeric = (f1(z - 2.0 * h) - 8.0 * f1(z - h) + 8.0 * f1(z + h) - f1(z + 2.0 * h)) / (12.0 * h);
        let err = (numeric - s.f_second_deriv_at_plus).norm();
        assert!(err < 1e-8 * s.f_second_deriv_at_plus.norm().max(1.0), "lambda = {lambda}, a = {a}: {err:e}");
    }
}

#[test]
fn region_examples() {
    let lbl = |k| classify_region(0.5, 1000, k, None, None).unwrap().label;
    assert_eq!(lbl(200), RegionLabel::II);
    assert_eq!(lbl(1000), RegionLabel::IV);
    assert_eq!(lbl(5999), RegionLabel::VI);
    assert_eq!(lbl(6000), RegionLabel::VII);
    let t = classify_region(0.5, 1000, 200, None, None).unwrap().thresholds;
    assert!((t.alpha_n - 1000.0 / 6.0).abs() < 1e-9);
}

#[test]
fn coalescence_is_a_removable_point() {
    assert_eq!(gamma_cubed(0.5, 3.0).unwrap().gamma_sq, 0.0);
    // a = 3 ∓ 1e-4 at n = 10^5.
    let lo = uniform_airy_terms(0.5, 100_000, 299_990).unwrap();
    let mid = uniform_airy_terms(0.5, 100_000, 300_000).unwrap();
    let hi = uniform_airy_terms(0.5, 100_000, 300_010).unwrap();
    let scale = mid.a0.norm().max(mid.a1.norm());
    for side in [lo, hi] {
        assert!((side.a0 - mid.a0).norm() < 1e-3 * scale);
        assert!((side.a1 - mid.a1).norm() < 1e-3 * scale);
    }
    assert!(mid.a1.norm().is_finite() && mid.a1.norm() > 0.0);
    assert!((mid.value.re - (mid.a0.re * airy_ai(0.0) / 100_000f64.cbrt()
        + mid.a1.re * airy_ai_prime(0.0) / 100_000f64.powf(2.0 / 3.0)))
    .abs()
        < 1e-15);
}

#[test]
fn stationary_phase_against_exact_coefficients() {
    let n = 1024;
    let truth = truth_series(0.5, n, 1300).unwrap();
    for k in 820..=1228 {
        let est = stationary_phase_estimate(0.5, n, k).unwrap();
        let exact = truth.coeffs()[k].re;
        let rel = (est - exact).abs() / exact.abs().max(1e-14);
        assert!(rel <= 0.10, "k = {k}: relative error {rel}");
        let env = stationary_phase_envelope(0.5, n, k as f64 / n as f64).unwrap();
        assert!(est.abs() <= env * (1.0 + 1e-12));
    }
}

#[test]
fn uniform_expansion_tracks_the_local_envelope() {
    // Measured against the local size of the coefficients, the uniform
    // expansion is accurate across the whole transition window, including
    // the indices where the exact coefficient crosses zero.
    let n = 1024;
    let truth = truth_series(0.5, n, 3500).unwrap();
    for k in 2868..=3277 {
        let e = uniform_airy_estimate_with_truth(0.5, n, k, &truth).unwrap();
        let local = windowed_max(&truth, k);
        assert!((e.value - e.fft_truth).norm() <= 0.05 * local, "k = {k}");
    }
    let at_edge = uniform_airy_estimate_with_truth(0.5, n, 3072, &truth).unwrap();
    assert!(at_edge.rel_error <= 0.10);
    assert_eq!(at_edge.gamma_sq, 0.0);
}

#[test]
fn decay_fit_examples() {
    let grid = [256usize, 512, 1024, 2048];
    let v = decay_exponent_fit(0.5, RegionLabel::V, &grid).unwrap();
    assert!((-0.77..=-0.57).contains(&v.slope), "V: {}", v.slope);
    let iv = decay_exponent_fit(0.5, RegionLabel::IV, &grid).unwrap();
    assert!((-0.6..=-0.4).contains(&iv.slope), "IV: {}", iv.slope);
    let i = decay_exponent_fit(0.5, RegionLabel::I, &grid).unwrap();
    assert!(i.log_linear && i.slope < 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn saddle_trichotomy(lambda in 0.05f64..0.95, a in 0.02f64..40.0) {
        let s = stationary_points(lambda, a).unwrap();
        let a0 = alpha0(lambda).unwrap();
        let d = phase_derivatives(lambda, a, s.z_plus).unwrap();
        prop_assert!(d.f1.norm() <= 1e-10 * (1.0 + a));
        match s.kind {
            SaddleKind::CircleConjugatePair => {
                prop_assert!(a > a0 && a < 1.0 / a0);
                prop_assert!((s.z_plus.norm() - 1.0).abs() < 1e-12);
                prop_assert!((s.z_minus - s.z_plus.conj()).norm() < 1e-12);
            }
            SaddleKind::RealReciprocalPair => {
                prop_assert!(a < a0 || a > 1.0 / a0);
                prop_assert!((s.z_plus * s.z_minus - 1.0).norm() < 1e-12);
            }
            SaddleKind::CoalescedAtPlusMinusOne => {
                prop_assert!((a - a0).abs() < 1e-6 || (a - 1.0 / a0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn regions_partition_the_indices(lambda in 0.1f64..0.9, n in 64usize..4096) {
        let mut prev = RegionLabel::I;
        // Past α⁻¹n = 2n/α₀ with the default α = α₀/2.
        let top = (2.5 * n as f64 / alpha0(lambda).unwrap()) as usize;
        for k in (0..top).step_by((top / 300).max(1)) {
            let label = classify_region(lambda, n, k, None, None).unwrap().label;
            prop_assert!(label >= prev);
            prev = label;
        }
        prop_assert_eq!(prev, RegionLabel::VII);
    }
}
