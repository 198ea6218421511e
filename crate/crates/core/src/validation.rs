//! The acceptance criteria as library functions.
//!
//! Each criterion recomputes its quantities from scratch and reports the
//! measured numbers next to the verdict. The same functions back the
//! `validate` command and the `acceptance` test target.

use crate::airy::{airy_ai, airy_ai_prime};
use crate::asymptotics::{
    alpha0, decay_exponent_fit, phase_derivatives, stationary_points, truth_series, uniform_airy_estimate_with_truth,
    RegionLabel, SaddleKind,
};
use crate::blaschke::{linf_a_norm, weighted_coeffs, MoebiusParam};
use crate::model::{build_toeplitz, minimal_poly_check, model_matrix, SpectrumSpec};
use crate::resolvent::{
    applicable_closed_forms, case2_log_gain, mainlemma_bound, optimize_rho, schaeffer_baseline, thm_case1, thm_case2, BoundQuery,
    BoundRule,
};
use crate::wiener::{phi_exact_truncated, phi_lower_bound, resolvent_interpolation_norm, schaeffer_upper, TruncationPolicy};
use crate::{Error, Result, C64};
use rand::{rngs::StdRng, Rng, SeedableRng};
use std::time::{Duration, Instant};

/// Reference values of `Ai` and `Ai'` on `[-20, 20]`, step `0.1`, computed
/// with 160-digit arithmetic.
const AIRY_ORACLE: &str = include_str!("../tests/data/airy_oracle.csv");

/// Verdict of one criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    /// `PASS [ 3] title (1.2 s): detail`.
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {} ({:.1} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

pub const ALL: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "sqrt(n) growth of the Hoelder lower bound",
        2 => "upper envelope of sqrt(n) * sup-norm",
        3 => "lower bound <= truncated phi <= sqrt(en)",
        4 => "Toeplitz counterexample construction",
        5 => "case-2 bound below the Schaeffer baseline",
        6 => "optimised bound dominates the closed forms",
        7 => "saddle points and their configuration",
        8 => "Airy functions against the reference table",
        9 => "uniform Airy expansion against exact coefficients",
        10 => "decay rates per region",
        11 => "growth of the resolvent lower bound",
        _ => "unknown criterion",
    }
}

/// Runs one criterion; errors count as failures.
pub fn run(id: u8) -> Outcome {
    let start = Instant::now();
    let res = match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        other => Err(Error::Config(format!("no criterion {other}"))),
    };
    let elapsed = start.elapsed();
    let (passed, detail) = match res {
        Ok((p, d)) => (p, d),
        Err(e) => (false, format!("error: {e}")),
    };
    // Runtime budgets are part of the criteria that state one.
    let budget = match id {
        1 | 9 => Some(60.0),
        3 => Some(120.0),
        _ => None,
    };
    let (passed, detail) = match budget {
        Some(b) if elapsed.as_secs_f64() > b => (false, format!("{detail}; exceeded {b} s budget")),
        _ => (passed, detail),
    };
    Outcome { id, title: title(id), passed, detail, elapsed }
}

type Verdict = Result<(bool, String)>;

const GROWTH_NS: [usize; 5] = [256, 512, 1024, 2048, 4096];

fn weighted_sup(lambda: f64, n: usize) -> Result<f64> {
    let spec = SpectrumSpec::real_singleton(lambda, n)?;
    let k_max = crate::blaschke::dominant_end(spec.points()) + (8.0 * (n as f64).cbrt()).ceil() as usize;
    linf_a_norm(&weighted_coeffs(MoebiusParam::real(lambda, n)?, k_max)?)
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// `L(n)/sqrt(n)` within a 30% band and `L(4096)/L(1024) ∈ [1.7, 2.3]`.
pub fn criterion_1() -> Verdict {
    let mut l = Vec::new();
    for n in GROWTH_NS {
        l.push(phi_lower_bound(&SpectrumSpec::real_singleton(0.5, n)?)?);
    }
    let scaled: Vec<f64> = l.iter().zip(GROWTH_NS).map(|(v, n)| v / (n as f64).sqrt()).collect();
    let band = spread(&scaled);
    let ratio = l[4] / l[2];
    let ok = scaled.iter().all(|&s| s > 0.0) && band <= 1.3 && (1.7..=2.3).contains(&ratio);
    Ok((ok, format!("L/sqrt(n) = {scaled:.4?}, max/min = {band:.4}, L(4096)/L(1024) = {ratio:.4}")))
}

/// `sqrt(n) * sup|c_w|` bounded with max/min ≤ 1.5.
pub fn criterion_2() -> Verdict {
    let mut v = Vec::new();
    for n in GROWTH_NS {
        v.push((n as f64).sqrt() * weighted_sup(0.5, n)?);
    }
    let k = v.iter().cloned().fold(0.0, f64::max);
    let band = spread(&v);
    Ok((band <= 1.5, format!("sqrt(n)*sup = {v:.4?}, K = {k:.4}, max/min = {band:.4}")))
}

/// Sandwich for `λ = 0.5`, `n ∈ {4, 8, 16, 32}` at converged degree.
pub fn criterion_3() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [4usize, 8, 16, 32] {
        let spec = SpectrumSpec::real_singleton(0.5, n)?;
        let r = phi_exact_truncated(&spec, TruncationPolicy::default().start_degree(n))?;
        let upper = schaeffer_upper(n)?;
        let good = r.converged && r.lower_bound <= r.phi_truncated && r.phi_truncated <= upper + 1e-3;
        ok &= good;
        parts.push(format!("n={n}: {:.6} <= {:.9} (D={}) <= {:.6}", r.lower_bound, r.phi_truncated, r.degree, upper));
    }
    Ok((ok, parts.join("; ")))
}

/// Nilpotency, determinant and the model-operator reproduction.
pub fn criterion_4() -> Verdict {
    let lambda = C64::new(0.5, 0.0);
    let mut worst_residual = 0.0f64;
    let mut worst_model = 0.0f64;
    let mut bad = Vec::new();
    for n in 2..=16usize {
        let t = build_toeplitz(lambda, n)?;
        let mp = minimal_poly_check(&t)?;
        worst_residual = worst_residual.max(mp.residual);
        if mp.degree != n || mp.residual > 1e-8 {
            bad.push(format!("n={n}: degree {} residual {:e}", mp.degree, mp.residual));
        }
        if t.determinant() != C64::new(0.5f64.powi(n as i32), 0.0) {
            bad.push(format!("n={n}: det = {}", t.determinant()));
        }
        if n <= 8 {
            let m = model_matrix(&SpectrumSpec::singleton(lambda, n)?)?;
            let d = m.max_abs_diff(t.entries());
            worst_model = worst_model.max(d);
            if d > 1e-10 {
                bad.push(format!("n={n}: model matrix differs by {d:e}"));
            }
        }
    }
    let detail = format!("max nilpotency residual {worst_residual:e}, max model deviation {worst_model:e}");
    Ok((bad.is_empty(), if bad.is_empty() { detail } else { format!("{detail}; {}", bad.join("; ")) }))
}

/// Strictly below the baseline, and within 1% of it exactly when `r^{2|m|}`
/// is small enough for `sqrt(1 - r^{2|m|}/e) ≥ 0.99`.
pub fn criterion_5() -> Verdict {
    let near_threshold = std::f64::consts::E * (1.0 - 0.99f64 * 0.99);
    let mut strict = 0usize;
    let mut near = 0usize;
    let mut bad = Vec::new();
    for ri in 1..=9 {
        let r = ri as f64 / 10.0;
        for m in 1..=64usize {
            let q = BoundQuery::new(SpectrumSpec::real_singleton(r, m)?, C64::new(0.0, 0.0), 1.0)?;
            let c2 = thm_case2(&q)?;
            let base = schaeffer_baseline(&q)?;
            // Once r^(2m)/e drops below the resolution of the log values the
            // two bounds round to the same double, so strictness is read from
            // the log gain itself after checking that it is what separates them.
            let gain = case2_log_gain(r, m);
            if (c2.ln_value - base.ln_value - gain).abs() > 1e-12 * base.ln_value.abs().max(1.0) {
                bad.push(format!("r={r}, m={m}: log gap {} differs from gain {gain}", c2.ln_value - base.ln_value));
            }
            if gain < 0.0 {
                strict += 1;
            } else {
                bad.push(format!("r={r}, m={m}: not strictly below"));
            }
            let within = gain.exp() >= 0.99;
            let small = r.powi(2 * m as i32) <= near_threshold;
            near += within as usize;
            if within != small {
                bad.push(format!("r={r}, m={m}: within 1% = {within} but r^(2m) = {:e}", r.powi(2 * m as i32)));
            }
        }
    }
    let detail = format!("{strict}/576 strictly below, {near} within 1% (all with r^(2m) <= {near_threshold:.4})");
    Ok((bad.is_empty(), if bad.is_empty() { detail } else { format!("{detail}; {}", bad.join("; ")) }))
}

/// Dominance over cases 2–4 and the case-1 limit.
pub fn criterion_6() -> Verdict {
    let mut bad = Vec::new();
    let mut checked = 0usize;
    let mut min_gap = f64::INFINITY;
    for lambda in [0.3, 0.5, 0.7] {
        for n in [1usize, 2, 4, 8, 16] {
            for zeta in [0.0, 0.3, 0.9, 1.0] {
                if zeta == lambda {
                    // The resolvent is not defined at an eigenvalue.
                    continue;
                }
                let q = BoundQuery::new(SpectrumSpec::real_singleton(lambda, n)?, C64::new(zeta, 0.0), 1.0)?;
                let opt = optimize_rho(&q)?;
                for cf in applicable_closed_forms(&q) {
                    if !matches!(cf.rule, BoundRule::Case2 | BoundRule::Case3 | BoundRule::Case4) {
                        continue;
                    }
                    checked += 1;
                    min_gap = min_gap.min(cf.value - opt.value);
                    if opt.value > cf.value + 1e-9 {
                        bad.push(format!("lambda={lambda} n={n} zeta={zeta}: {} {} < {}", cf.rule.label(), cf.value, opt.value));
                    }
                }
            }
        }
    }
    let unit = |t: f64| C64::from_polar(1.0, t);
    let cases = [
        (vec![(unit(0.0), 4)], C64::new(0.0, 0.0)),
        (vec![(unit(0.0), 1)], C64::new(0.5, 0.0)),
        (vec![(unit(std::f64::consts::FRAC_PI_2), 1), (unit(std::f64::consts::PI), 1), (unit(0.7), 2)], C64::new(0.0, 0.0)),
        (vec![(unit(2.0), 3)], C64::new(-0.4, 0.3)),
    ];
    let mut worst_rel = 0.0f64;
    for (points, zeta) in cases {
        let q = BoundQuery::new(SpectrumSpec::new(points)?, zeta, 1.0)?;
        let lemma = mainlemma_bound(&q, 1.0 - 1e-6)?;
        let c1 = thm_case1(&q)?.value;
        let rel = (lemma - c1).abs() / c1;
        worst_rel = worst_rel.max(rel);
        if rel > 1e-3 {
            bad.push(format!("case-1 limit off by {rel:e} at zeta={zeta}"));
        }
    }
    let detail = format!("{checked} closed forms checked, smallest margin {min_gap:e}; case-1 limit within {worst_rel:e}");
    Ok((bad.is_empty(), if bad.is_empty() { detail } else { format!("{detail}; {}", bad.join("; ")) }))
}

/// Stationarity and the circle / coalesced / real-pair trichotomy.
pub fn criterion_7() -> Verdict {
    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let lambda: f64 = rng.gen_range(0.02..0.98);
        let a: f64 = (rng.gen_range(-3.0f64..3.0)).exp();
        let s = stationary_points(lambda, a)?;
        let a0 = alpha0(lambda)?;
        for z in [s.z_plus, s.z_minus] {
            let f1 = phase_derivatives(lambda, a, z)?.f1.norm();
            worst = worst.max(f1);
            if f1 > 1e-10 {
                bad.push(format!("|f'| = {f1:e} at lambda={lambda}, a={a}"));
            }
        }
        let consistent = if a > a0 && a < 1.0 / a0 {
            s.kind == SaddleKind::CircleConjugatePair
                && (s.z_plus.norm() - 1.0).abs() <= 1e-12
                && (s.z_minus - s.z_plus.conj()).norm() <= 1e-12
        } else {
            s.kind == SaddleKind::RealReciprocalPair && (s.z_plus * s.z_minus - 1.0).norm() <= 1e-12
        };
        if !consistent {
            bad.push(format!("kind {:?} inconsistent at lambda={lambda}, a={a}", s.kind));
        }
    }
    let mut third = Vec::new();
    for lambda in [0.2, 0.5, 0.8] {
        let a = 1.0 / alpha0(lambda)?;
        let f3 = phase_derivatives(lambda, a, C64::new(1.0, 0.0))?.f3;
        let expect = -2.0 * lambda * (1.0 + lambda) / (1.0 - lambda).powi(3);
        let err = (f3 - expect).norm();
        third.push(err);
        if err > 1e-10 {
            bad.push(format!("f''' off by {err:e} at lambda={lambda}"));
        }
    }
    let detail = format!("1000 samples, max |f'(z)| = {worst:e}; f''' errors [{}]", sci(&third));
    bad.truncate(5);
    Ok((bad.is_empty(), if bad.is_empty() { detail } else { format!("{detail}; {}", bad.join("; ")) }))
}

/// Parses the reference table into `(x, Ai, Ai')` triples.
pub fn airy_reference() -> Result<Vec<(f64, f64, f64)>> {
    AIRY_ORACLE
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad reference row {l:?}: {e}")))?;
            match v[..] {
                [x, ai, aip] => Ok((x, ai, aip)),
                _ => Err(Error::Config(format!("bad reference row {l:?}"))),
            }
        })
        .collect()
}

/// Largest `|Ai'' - x Ai|` by central second differences of step `h` on
/// `[-10, 10]`.
pub fn airy_ode_residual(h: f64) -> f64 {
    (0..=80)
        .map(|i| -10.0 + 0.25 * i as f64)
        .map(|x| ((airy_ai(x + h) - 2.0 * airy_ai(x) + airy_ai(x - h)) / (h * h) - x * airy_ai(x)).abs())
        .fold(0.0, f64::max)
}

/// Reference agreement to `1e-10` relative and second-order ODE residual.
pub fn criterion_8() -> Verdict {
    let table = airy_reference()?;
    let mut worst = 0.0f64;
    for &(x, ai, aip) in &table {
        worst = worst.max((airy_ai(x) - ai).abs() / ai.abs()).max((airy_ai_prime(x) - aip).abs() / aip.abs());
    }
    let hs = [0.2, 0.1, 0.05, 0.025];
    let res: Vec<f64> = hs.iter().map(|&h| airy_ode_residual(h)).collect();
    let orders: Vec<f64> = res.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let ok = table.len() == 401 && worst <= 1e-10 && orders.iter().all(|o| (1.8..=2.2).contains(o));
    Ok((ok, format!("{} points, max rel error {worst:e}; ODE residuals [{}], orders {orders:.3?}", table.len(), sci(&res))))
}

/// Uniform expansion within 15% on `|k/n - 3| ≤ 0.2` and 10% at `k = 3072`.
pub fn criterion_9() -> Verdict {
    let n = 1024usize;
    let lo = (2.8 * n as f64).ceil() as usize;
    let hi = (3.2 * n as f64).floor() as usize;
    let truth = truth_series(0.5, n, hi)?;
    let mut worst = (0.0f64, 0usize);
    let mut over = Vec::new();
    for k in lo..=hi {
        let e = uniform_airy_estimate_with_truth(0.5, n, k, &truth)?;
        if e.rel_error > worst.0 {
            worst = (e.rel_error, k);
        }
        if e.rel_error > 0.15 {
            over.push(format!("k={k}: {:.3}", e.rel_error));
        }
    }
    let centre = uniform_airy_estimate_with_truth(0.5, n, 3072, &truth)?.rel_error;
    let ok = over.is_empty() && centre <= 0.1;
    let mut detail = format!(
        "k=3072 rel error {centre:.4}; worst {:.4} at k={} over {} indices",
        worst.0,
        worst.1,
        hi - lo + 1
    );
    if !over.is_empty() {
        detail.push_str(&format!("; above 15%: {}", over.join(", ")));
    }
    Ok((ok, detail))
}

/// Power-law slopes for III, IV, V and exponential decay for I, VII.
pub fn criterion_10() -> Verdict {
    let ns = [256usize, 512, 1024, 2048];
    let two_thirds = -2.0 / 3.0;
    let checks: [(RegionLabel, f64, f64); 5] = [
        (RegionLabel::III, two_thirds - 0.1, two_thirds + 0.1),
        (RegionLabel::IV, -0.6, -0.4),
        (RegionLabel::V, two_thirds - 0.1, two_thirds + 0.1),
        (RegionLabel::I, f64::NEG_INFINITY, 0.0),
        (RegionLabel::VII, f64::NEG_INFINITY, 0.0),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (region, lo, hi) in checks {
        let fit = decay_exponent_fit(0.5, region, &ns)?;
        let good = if hi == 0.0 { fit.log_linear && fit.slope < 0.0 } else { (lo..=hi).contains(&fit.slope) };
        ok &= good;
        parts.push(format!("{} {:.4}{}", region.name(), fit.slope, if fit.log_linear { "/n" } else { "" }));
    }
    Ok((ok, parts.join(", ")))
}

/// Minimum of the resolvent interpolation problem at doubling degrees until
/// the relative change drops below the default tolerance.
pub fn converged_resolvent_norm(spec: &SpectrumSpec, zeta: C64) -> Result<(f64, usize)> {
    let policy = TruncationPolicy::default();
    let mut d = policy.start_degree(spec.degree());
    let mut v = resolvent_interpolation_norm(spec, zeta, d)?;
    while 2 * d <= policy.cap {
        let next = resolvent_interpolation_norm(spec, zeta, 2 * d)?;
        d *= 2;
        let done = (v - next).abs() <= policy.rel_tol * next.abs();
        v = next;
        if done {
            break;
        }
    }
    Ok((v, d))
}

/// `|B(ζ)|` times the resolvent interpolation norm grows, with ratio ≥ 1.5
/// between `n = 32` and `n = 8`.
pub fn criterion_11() -> Verdict {
    let zeta = C64::new(0.9, 0.0);
    let mut vals = Vec::new();
    for n in [4usize, 8, 16, 32] {
        let spec = SpectrumSpec::real_singleton(0.5, n)?;
        let (rin, _) = converged_resolvent_norm(&spec, zeta)?;
        vals.push(spec.blaschke_value(zeta).norm() * rin);
    }
    let monotone = vals.windows(2).all(|w| w[1] > w[0]);
    let ratio = vals[3] / vals[1];
    Ok((monotone && ratio >= 1.5, format!("products {vals:.5?}, monotone = {monotone}, ratio(32/8) = {ratio:.4}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_table_shape() {
        let t = airy_reference().unwrap();
        assert_eq!(t.len(), 401);
        assert_eq!(t[200].0, 0.0);
        assert!((t[200].1 - crate::airy::AI0).abs() < 1e-16);
    }

    #[test]
    fn fast_criteria_pass() {
        for id in [4u8, 5, 7] {
            let o = run(id);
            assert!(o.passed, "{}", o.line());
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run(12).passed);
    }
}
