//! Taylor coefficients of Blaschke powers `b_λ^n` and of the weighted
//! functions `(1 - z²) b_λ^n`.
//!
//! The Blaschke factor is `b_λ(z) = (z - λ) / (1 - conj(λ) z)` for every
//! complex `λ` in the open unit disk, so `b_λ(0) = -λ` and the first-order
//! coefficient is `1 - |λ|²`.

use crate::fourier::{log_coefficient_on_circle, unit_circle_coefficients};
use crate::{Error, Result, C64};
use serde::Serialize;

/// Largest FFT length the adaptive coefficient routine will allocate.
pub const MAX_FFT_LEN: usize = 1 << 24;

/// Agreement required between successive FFT sizes.
const ALIAS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Origin {
    BlaschkePower,
    WeightedBlaschkePower,
    General,
}

/// Finite Taylor coefficient vector `c[0..=K]` with cached sequence norms.
#[derive(Debug, Clone)]
pub struct CoefficientSeries {
    coeffs: Vec<C64>,
    origin: Origin,
    tail_tol: f64,
    dominant_end: Option<usize>,
    l1: f64,
    l2: f64,
    linf: f64,
}

impl CoefficientSeries {
    /// Wraps arbitrary coefficients. No truncation guarantee is attached.
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self::with_meta(coeffs, Origin::General, 0.0, None)
    }

    pub(crate) fn with_meta(coeffs: Vec<C64>, origin: Origin, tail_tol: f64, dominant_end: Option<usize>) -> Self {
        let l1 = coeffs.iter().map(|c| c.norm()).sum();
        let l2 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let linf = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        Self { coeffs, origin, tail_tol, dominant_end, l1, l2, linf }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }
    pub fn origin(&self) -> Origin {
        self.origin
    }
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
    /// Wiener norm of the stored part.
    pub fn l1(&self) -> f64 {
        self.l1
    }
    pub fn l2(&self) -> f64 {
        self.l2
    }
    pub fn linf(&self) -> f64 {
        self.linf
    }
    /// Upper bound on `Σ_{k>K} |c_k|²` for Blaschke-derived series.
    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }
    /// Index the series must reach before its sup norm is trustworthy.
    pub fn dominant_end(&self) -> Option<usize> {
        self.dominant_end
    }

    /// Same series with `extra` zeros appended.
    pub fn zero_padded(&self, extra: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.extend(std::iter::repeat_n(C64::new(0.0, 0.0), extra));
        Self::with_meta(c, self.origin, self.tail_tol, self.dominant_end)
    }
}

/// A single Blaschke factor raised to a positive power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusParam {
    lambda: C64,
    n: usize,
}

impl MoebiusParam {
    pub fn new(lambda: C64, n: usize) -> Result<Self> {
        if !(lambda.norm() < 1.0) {
            return Err(Error::Domain(format!("|lambda| = {} must be < 1", lambda.norm())));
        }
        if n == 0 {
            return Err(Error::Domain("power n must be at least 1".into()));
        }
        Ok(Self { lambda, n })
    }

    pub fn real(lambda: f64, n: usize) -> Result<Self> {
        Self::new(C64::new(lambda, 0.0), n)
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }
    pub fn n(&self) -> usize {
        self.n
    }
}

/// `(1 - |λ|) / (1 + |λ|)`, the left edge of the oscillatory coefficient band.
pub fn alpha0_of_modulus(modulus: f64) -> f64 {
    (1.0 - modulus) / (1.0 + modulus)
}

/// Evaluates `b_λ(z)`.
pub fn blaschke_factor(lambda: C64, z: C64) -> C64 {
    (z - lambda) / (1.0 - lambda.conj() * z)
}

/// Taylor coefficient `k` of a single Blaschke factor.
pub fn moebius_coeff(lambda: C64, k: usize) -> Result<C64> {
    if !(lambda.norm() < 1.0) {
        return Err(Error::Domain(format!("|lambda| = {} must be < 1", lambda.norm())));
    }
    if k == 0 {
        return Ok(-lambda);
    }
    Ok((1.0 - lambda.norm_sqr()) * lambda.conj().powu(k as u32 - 1))
}

/// Index past which the coefficients of `∏ b_{λ_i}^{m_i}` are exponentially
/// small: `Σ m_i (1+|λ_i|)/(1-|λ_i|) + n^{1/3}` rounded up.
pub fn dominant_end(factors: &[(C64, usize)]) -> usize {
    let n: usize = factors.iter().map(|f| f.1).sum();
    let edge: f64 = factors.iter().map(|&(l, m)| m as f64 / alpha0_of_modulus(l.norm())).sum();
    (edge + (n as f64).cbrt()).ceil() as usize
}

/// Coverage used when sizing the FFT: the right edge plus an `8 n^{1/3}` margin.
fn fft_cover(factors: &[(C64, usize)]) -> usize {
    let n: usize = factors.iter().map(|f| f.1).sum();
    let edge: f64 = factors.iter().map(|&(l, m)| m as f64 / alpha0_of_modulus(l.norm())).sum();
    (edge.ceil() + 8.0 * (n as f64).cbrt()).ceil() as usize
}

fn product_value(factors: &[(C64, usize)], z: C64) -> C64 {
    factors
        .iter()
        .fold(C64::new(1.0, 0.0), |acc, &(l, m)| acc * blaschke_factor(l, z).powu(m as u32))
}

/// Runs the doubling FFT until coefficients `0..=k_max` settle. Returns the
/// coefficients and `Σ_{k>k_max} |c_k|²` measured on the final grid.
fn adaptive_coefficients<F>(f: F, k_max: usize, cover: usize) -> Result<(Vec<C64>, f64)>
where
    F: Fn(C64) -> C64,
{
    let need = (k_max + 1).max(cover).max(1);
    let mut n_points = (4 * need).next_power_of_two();
    let mut prev: Option<Vec<C64>> = None;
    loop {
        if n_points > MAX_FFT_LEN {
            return Err(Error::Resource(format!(
                "FFT length {n_points} needed for K = {k_max} exceeds the budget {MAX_FFT_LEN}"
            )));
        }
        let all = unit_circle_coefficients(&f, n_points);
        let cur: Vec<C64> = all[..=k_max.min(n_points - 1)].to_vec();
        if let Some(p) = &prev {
            let diff = p.iter().zip(&cur).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if diff <= ALIAS_TOL && cur.len() == k_max + 1 {
                let tail = all[k_max + 1..].iter().map(|c| c.norm_sqr()).sum();
                return Ok((cur, tail));
            }
        }
        prev = Some(cur);
        n_points *= 2;
    }
}

fn check_factors(factors: &[(C64, usize)]) -> Result<()> {
    if factors.is_empty() {
        return Err(Error::Domain("empty Blaschke product".into()));
    }
    for &(l, m) in factors {
        if !(l.norm() < 1.0) {
            return Err(Error::Domain(format!("|lambda| = {} must be < 1", l.norm())));
        }
        if m == 0 {
            return Err(Error::Domain("zero multiplicity".into()));
        }
    }
    Ok(())
}

/// Coefficients `0..=k_max` of the finite Blaschke product `∏ b_{λ_i}^{m_i}`.
pub fn blaschke_product_coeffs(factors: &[(C64, usize)], k_max: usize) -> Result<CoefficientSeries> {
    check_factors(factors)?;
    if k_max < 1 {
        return Err(Error::Precondition("K must be at least 1".into()));
    }
    let (mut c, tail) = adaptive_coefficients(|z| product_value(factors, z), k_max, fft_cover(factors))?;
    if factors.iter().all(|f| f.0.im == 0.0) {
        // Real zeros give a real product: drop the transform's round-off.
        c.iter_mut().for_each(|x| x.im = 0.0);
    }
    Ok(CoefficientSeries::with_meta(
        c,
        Origin::BlaschkePower,
        tail + ALIAS_TOL,
        Some(dominant_end(factors)),
    ))
}

/// Coefficients `0..=k_max` of `b_λ^n`.
pub fn blaschke_power_coeffs(p: MoebiusParam, k_max: usize) -> Result<CoefficientSeries> {
    blaschke_product_coeffs(&[(p.lambda, p.n)], k_max)
}

/// Coefficients of `(1 - z²) B` from those of `B`: `w_k = c_k - c_{k-2}`.
pub fn weight_series(b: &CoefficientSeries) -> CoefficientSeries {
    let c = b.coeffs();
    let w = (0..c.len())
        .map(|k| if k >= 2 { c[k] - c[k - 2] } else { c[k] })
        .collect();
    CoefficientSeries::with_meta(w, Origin::WeightedBlaschkePower, 4.0 * b.tail_tol(), b.dominant_end())
}

/// Coefficients `0..=k_max` of `(1 - z²) b_λ^n`.
pub fn weighted_coeffs(p: MoebiusParam, k_max: usize) -> Result<CoefficientSeries> {
    if k_max < 2 {
        return Err(Error::Precondition("K must be at least 2".into()));
    }
    Ok(weight_series(&blaschke_power_coeffs(p, k_max)?))
}

/// Coefficients `0..=k_max` of `(1 - z²) ∏ b_{λ_i}^{m_i}`.
pub fn weighted_product_coeffs(factors: &[(C64, usize)], k_max: usize) -> Result<CoefficientSeries> {
    if k_max < 2 {
        return Err(Error::Precondition("K must be at least 2".into()));
    }
    Ok(weight_series(&blaschke_product_coeffs(factors, k_max)?))
}

/// `sup_k |c_k|` over the stored coefficients.
///
/// Blaschke-derived series must extend past the right edge of the dominant
/// band, otherwise the maximum may not have been reached yet.
pub fn linf_a_norm(s: &CoefficientSeries) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::Precondition("empty series".into()));
    }
    if let Some(end) = s.dominant_end() {
        if s.len() <= end {
            return Err(Error::Precondition(format!(
                "series stops at index {} before the dominant band ends at {end}",
                s.len() - 1
            )));
        }
    }
    Ok(s.linf())
}

/// Radius of the steepest-descent circle for coefficient `k` of
/// `(1 - z²) b_λ^n` with real `λ`.
fn saddle_radius(lambda: f64, n: usize, k: usize) -> f64 {
    let l = lambda.abs();
    if k == 0 || l == 0.0 {
        return 1.0;
    }
    let a = k as f64 / n as f64;
    let a0 = alpha0_of_modulus(l);
    let center = (a * (1.0 + l * l) - (1.0 - l * l)) / (2.0 * l * a);
    if a < a0 && center < -1.0 {
        (center + (center * center - 1.0).sqrt()).abs()
    } else if a > 1.0 / a0 && center > 1.0 {
        // Lies strictly between 1 and the pole at 1/λ.
        center + (center * center - 1.0).sqrt()
    } else {
        1.0
    }
}

/// `ln |c_k|` for the single coefficient `k` of `(1 - z²) b_λ^n`, real `λ`.
///
/// Integrates on the circle through the relevant saddle point so that
/// coefficients far below `1e-300` are still resolved.
pub fn weighted_coeff_log_modulus(lambda: f64, n: usize, k: usize) -> Result<f64> {
    MoebiusParam::real(lambda, n)?;
    let radius = saddle_radius(lambda, n, k);
    let lam = C64::new(lambda, 0.0);
    let nf = n as f64;
    let log_f = move |z: C64| (1.0 - z * z).ln() + nf * blaschke_factor(lam, z).ln();
    let mut n_points = (8 * (n + k) + 64).next_power_of_two();
    let mut prev: Option<f64> = None;
    loop {
        if n_points > MAX_FFT_LEN {
            return Err(Error::Resource(format!("quadrature length {n_points} exceeds budget")));
        }
        let cur = log_coefficient_on_circle(log_f, k, radius, n_points)
            .ok_or_else(|| Error::Numerical(format!("coefficient {k} underflowed")))?;
        if let Some(p) = prev {
            if (p - cur).abs() <= 1e-9 * (1.0 + cur.abs()) {
                return Ok(cur);
            }
        }
        prev = Some(cur);
        n_points *= 2;
    }
}
