//! Taylor coefficients from samples on a circle.

use crate::C64;
use rustfft::FftPlanner;

/// Samples `f` at `n_points` equispaced nodes of the unit circle and returns
/// the discrete Fourier coefficients, i.e. the Taylor coefficients of `f`
/// folded modulo `n_points`.
pub(crate) fn unit_circle_coefficients<F>(f: F, n_points: usize) -> Vec<C64>
where
    F: Fn(C64) -> C64,
{
    let step = std::f64::consts::TAU / n_points as f64;
    let mut buf: Vec<C64> = (0..n_points)
        .map(|j| f(C64::from_polar(1.0, step * j as f64)))
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n_points).process(&mut buf);
    let scale = 1.0 / n_points as f64;
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

/// `ln |c_k|` of the Taylor coefficient c_k of `exp(log_f)`, computed by the
/// trapezoid rule on the circle of the given radius with log-sum-exp scaling.
/// Returns `None` when the sum underflows to exactly zero.
pub(crate) fn log_coefficient_on_circle<F>(log_f: F, k: usize, radius: f64, n_points: usize) -> Option<f64>
where
    F: Fn(C64) -> C64,
{
    let step = std::f64::consts::TAU / n_points as f64;
    let logs: Vec<C64> = (0..n_points)
        .map(|j| {
            let theta = step * j as f64;
            let z = C64::from_polar(radius, theta);
            log_f(z) - C64::new(0.0, (k as f64) * theta)
        })
        .collect();
    let peak = logs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return None;
    }
    let sum: C64 = logs.iter().map(|l| (l - peak).exp()).sum();
    let m = sum.norm();
    if m == 0.0 {
        return None;
    }
    Some(peak + m.ln() - (n_points as f64).ln() - (k as f64) * radius.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_coefficients_recovered() {
        let c = unit_circle_coefficients(|z| 1.0 + 2.0 * z + 3.0 * z * z, 8);
        assert!((c[0] - 1.0).norm() < 1e-14);
        assert!((c[1] - 2.0).norm() < 1e-14);
        assert!((c[2] - 3.0).norm() < 1e-14);
        assert!(c[3..].iter().all(|x| x.norm() < 1e-14));
    }

    #[test]
    fn log_coefficient_of_exponential() {
        // exp(z) has c_k = 1/k!
        let l = log_coefficient_on_circle(|z| z, 10, 10.0, 128).unwrap();
        let exact = -(1..=10).map(|j| (j as f64).ln()).sum::<f64>();
        assert!((l - exact).abs() < 1e-12);
    }
}
