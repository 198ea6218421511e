use proptest::prelude::*;
use schaeffer_core::blaschke::{
    blaschke_power_coeffs, blaschke_product_coeffs, linf_a_norm, moebius_coeff, weighted_coeff_log_modulus,
    weighted_coeffs, CoefficientSeries, MoebiusParam,
};
use schaeffer_core::C64;

/// Taylor coefficients of `b_λ^n` by repeated truncated convolution with the
/// single-factor series `-λ, 1-|λ|², (1-|λ|²) conj(λ), ...`.
fn convolution_oracle(lambda: C64, n: usize, k_max: usize) -> Vec<C64> {
    let one = C64::new(1.0, 0.0);
    let factor: Vec<C64> = (0..=k_max)
        .map(|k| match k {
            0 => -lambda,
            _ => (one - lambda.norm_sqr()) * lambda.conj().powu(k as u32 - 1),
        })
        .collect();
    let mut acc = vec![C64::new(0.0, 0.0); k_max + 1];
    acc[0] = one;
    for _ in 0..n {
        let mut next = vec![C64::new(0.0, 0.0); k_max + 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, f) in factor.iter().enumerate().take(k_max + 1 - i) {
                next[i + j] += a * f;
            }
        }
        acc = next;
    }
    acc
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn single_factor_coefficients() {
    let l = C64::new(0.5, 0.0);
    let got: Vec<f64> = (0..3).map(|k| moebius_coeff(l, k).unwrap().re).collect();
    assert_eq!(got, vec![-0.5, 0.75, 0.375]);
    let s = blaschke_power_coeffs(MoebiusParam::real(0.5, 1).unwrap(), 2).unwrap();
    let re: Vec<f64> = s.coeffs().iter().map(|c| c.re).collect();
    for (a, b) in re.iter().zip([-0.5, 0.75, 0.375]) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn powers_match_direct_convolution() {
    for (lambda, n) in [(C64::new(0.5, 0.0), 5), (C64::new(0.3, 0.4), 7), (C64::new(-0.8, 0.1), 3)] {
        let s = blaschke_power_coeffs(MoebiusParam::new(lambda, n).unwrap(), 60).unwrap();
        let oracle = convolution_oracle(lambda, n, 60);
        assert!(max_diff(s.coeffs(), &oracle) < 1e-12, "lambda = {lambda}, n = {n}");
    }
}

#[test]
fn products_match_factorwise_convolution() {
    let f = [(C64::new(0.2, 0.0), 2), (C64::new(-0.1, 0.6), 1)];
    let s = blaschke_product_coeffs(&f, 40).unwrap();
    let a = convolution_oracle(f[0].0, 2, 40);
    let b = convolution_oracle(f[1].0, 1, 40);
    let mut prod = vec![C64::new(0.0, 0.0); 41];
    for i in 0..=40 {
        for j in 0..=40 - i {
            prod[i + j] += a[i] * b[j];
        }
    }
    assert!(max_diff(s.coeffs(), &prod) < 1e-12);
}

#[test]
fn weighted_small_case_by_hand() {
    let s = weighted_coeffs(MoebiusParam::real(0.5, 1).unwrap(), 4).unwrap();
    let expect = [-0.5, 0.75, 0.875, -0.5625, -0.28125];
    for (c, e) in s.coeffs().iter().zip(expect) {
        assert!((c.re - e).abs() < 1e-15 && c.im == 0.0);
    }
    assert_eq!(linf_a_norm(&s).unwrap(), 0.875);
}

#[test]
fn parseval_for_inner_functions() {
    let s = blaschke_power_coeffs(MoebiusParam::real(0.5, 64).unwrap(), 1024).unwrap();
    let energy: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum();
    assert!((energy - 1.0).abs() < 1e-10, "energy {energy}");
}

#[test]
fn exponentially_small_before_the_band() {
    let s = weighted_coeffs(MoebiusParam::real(0.5, 64).unwrap(), 1024).unwrap();
    // k = 8 lies below αn = 64/6 with the default α = α₀/2.
    assert!(s.coeffs()[8].norm() < 1e-6);
    // k = 16 is already in the transition region; reference value from a
    // 2^16-point FFT of (1 - z²) b^64 sampled on the circle.
    assert!((s.coeffs()[16].norm() - 2.4688342350898847e-3).abs() < 1e-12);
}

#[test]
fn zero_padding_keeps_the_sup_norm() {
    let s = weighted_coeffs(MoebiusParam::real(0.5, 32).unwrap(), 512).unwrap();
    let padded = s.zero_padded(100);
    assert_eq!(linf_a_norm(&s).unwrap(), linf_a_norm(&padded).unwrap());
    let general = CoefficientSeries::new(s.coeffs().to_vec());
    assert_eq!(general.linf(), s.linf());
}

#[test]
fn truncation_before_the_band_is_rejected() {
    let s = weighted_coeffs(MoebiusParam::real(0.5, 256).unwrap(), 300).unwrap();
    assert!(linf_a_norm(&s).is_err());
}

#[test]
fn sqrt_n_envelope_for_several_lambdas() {
    for lambda in [0.3, 0.5, 0.7] {
        let a0 = (1.0 - lambda) / (1.0 + lambda);
        let scaled: Vec<f64> = [256usize, 512, 1024, 2048, 4096]
            .iter()
            .map(|&n| {
                let k_max = (n as f64 / a0).ceil() as usize + 8 * (n as f64).cbrt().ceil() as usize + 64;
                let s = weighted_coeffs(MoebiusParam::real(lambda, n).unwrap(), k_max).unwrap();
                n as f64 * linf_a_norm(&s).unwrap().powi(2)
            })
            .collect();
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(lo > 0.0 && hi / lo < 1.5, "lambda = {lambda}: {scaled:?}");
    }
}

#[test]
fn log_modulus_reaches_below_double_range() {
    // Far left of the band the coefficient underflows, but its logarithm
    // still decreases steadily with n.
    let logs: Vec<f64> =
        [1024usize, 2048, 4096].iter().map(|&n| weighted_coeff_log_modulus(0.5, n, n / 16).unwrap()).collect();
    assert!(logs[2] < -745.0, "{logs:?}");
    assert!(logs.windows(2).all(|w| w[1] < w[0]));
    let s = weighted_coeffs(MoebiusParam::real(0.5, 64).unwrap(), 400).unwrap();
    for k in [30usize, 64, 150, 250] {
        let direct = s.coeffs()[k].norm().ln();
        assert!((weighted_coeff_log_modulus(0.5, 64, k).unwrap() - direct).abs() < 1e-6, "k = {k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn conjugate_parameter_conjugates_coefficients(r in 0.05f64..0.9, t in 0.0f64..6.28, n in 1usize..12) {
        let l = C64::from_polar(r, t);
        let a = blaschke_power_coeffs(MoebiusParam::new(l, n).unwrap(), 64).unwrap();
        let b = blaschke_power_coeffs(MoebiusParam::new(l.conj(), n).unwrap(), 64).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((x.conj() - y).norm() < 1e-13);
        }
    }

    #[test]
    fn split_identity_is_exact(lambda in 0.05f64..0.95, n in 1usize..40) {
        let p = MoebiusParam::real(lambda, n).unwrap();
        let b = blaschke_power_coeffs(p, 200).unwrap();
        let w = weighted_coeffs(p, 200).unwrap();
        for k in 2..=200 {
            prop_assert_eq!(w.coeffs()[k], b.coeffs()[k] - b.coeffs()[k - 2]);
        }
    }

    #[test]
    fn parseval_holds_for_random_powers(r in 0.05f64..0.8, t in 0.0f64..6.28, n in 1usize..30) {
        let l = C64::from_polar(r, t);
        let s = blaschke_power_coeffs(MoebiusParam::new(l, n).unwrap(), 2048).unwrap();
        let energy: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((energy - 1.0).abs() < 1e-10);
    }
}
