//! Saddle-point asymptotics of the coefficients `ĉ_w(k)` of `(1 - z²) b_λ^n`
//! for real `λ ∈ (0, 1)` and `a = k/n`.
//!
//! The phase is `f(z, a) = a log z + log(1 - λz) - log(z - λ)`. Its two
//! saddles lie on the unit circle for `a ∈ (α₀, 1/α₀)`, `α₀ = (1-λ)/(1+λ)`,
//! coalesce at `±1` on the edges and become a real reciprocal pair outside.
//! Away from the edges a two-saddle stationary-phase formula applies; near
//! the right edge a uniform Airy expansion based on the cubic normal form
//! `f = -t³/3 + γ² t` is used, and the left edge is reduced to it through
//! `ĉ_{w,λ}(k) = (-1)^{n+k} ĉ_{w,-λ}(k)`.

use crate::airy::airy_pair;
use crate::blaschke::{weighted_coeff_log_modulus, weighted_coeffs, CoefficientSeries, MoebiusParam};
use crate::{Error, Result, C64};
use serde::Serialize;
use std::f64::consts::PI;

const COALESCE_TOL: f64 = 1e-14;
/// Floor on `|truth|` in relative errors.
pub const TRUTH_FLOOR: f64 = 1e-14;
/// Half-width of the window used for envelope maxima.
pub const ENVELOPE_HALF_WINDOW: usize = 3;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must lie in (0, 1)")));
    }
    Ok(())
}

/// `(1 - λ)/(1 + λ)`.
pub fn alpha0(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok((1.0 - lambda) / (1.0 + lambda))
}

/// `f` and its first three `z`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseDerivatives {
    pub f: C64,
    pub f1: C64,
    pub f2: C64,
    pub f3: C64,
}

/// `f(z, a) = log(z^a (1 - λz)/(z - λ))` with principal logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseFunction {
    lambda: f64,
    a: f64,
}

impl PhaseFunction {
    pub fn new(lambda: f64, a: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Self::signed(lambda, a)
    }

    /// Also accepts `λ ∈ (-1, 0)`, used by the mirrored left edge.
    fn signed(lambda: f64, a: f64) -> Result<Self> {
        if !(lambda.abs() < 1.0) || lambda == 0.0 {
            return Err(Error::Domain(format!("lambda = {lambda} must satisfy 0 < |lambda| < 1")));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!("a = {a} must be positive")));
        }
        Ok(Self { lambda, a })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn a(&self) -> f64 {
        self.a
    }

    fn check_point(&self, z: C64) -> Result<()> {
        let l = self.lambda;
        if z == C64::new(0.0, 0.0) || z == C64::new(l, 0.0) || z == C64::new(1.0 / l, 0.0) {
            return Err(Error::Domain(format!("z = {z} is a singular point of the phase")));
        }
        Ok(())
    }

    pub fn value(&self, z: C64) -> Result<C64> {
        self.check_point(z)?;
        Ok(self.raw_value(z))
    }

    fn raw_value(&self, z: C64) -> C64 {
        let l = self.lambda;
        self.a * z.ln() + (1.0 - l * z).ln() - (z - l).ln()
    }

    pub fn derivatives(&self, z: C64) -> Result<PhaseDerivatives> {
        self.check_point(z)?;
        let (l, a) = (self.lambda, self.a);
        let p = z - l;
        let q = 1.0 - l * z;
        Ok(PhaseDerivatives {
            f: self.raw_value(z),
            f1: -1.0 / p + a / z - l / q,
            f2: 1.0 / (p * p) - a / (z * z) - l * l / (q * q),
            f3: -2.0 / (p * p * p) + 2.0 * a / (z * z * z) - 2.0 * l * l * l / (q * q * q),
        })
    }

    /// Closed form of `f''` at a stationary point:
    /// `λ (1 - λ²)(1 - z²) / (z (z - λ)² (1 - λz)²)`.
    pub fn second_derivative_at_saddle(&self, z: C64) -> C64 {
        let l = self.lambda;
        l * (1.0 - l * l) * (1.0 - z * z) / (z * (z - l) * (z - l) * (1.0 - l * z) * (1.0 - l * z))
    }
}

/// `(f, f', f'', f''')` at `z`.
pub fn phase_derivatives(lambda: f64, a: f64, z: C64) -> Result<PhaseDerivatives> {
    PhaseFunction::new(lambda, a)?.derivatives(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SaddleKind {
    CircleConjugatePair,
    CoalescedAtPlusMinusOne,
    RealReciprocalPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleData {
    /// Upper saddle on the circle, or the larger real saddle.
    pub z_plus: C64,
    pub z_minus: C64,
    pub kind: SaddleKind,
    pub f_second_deriv_at_plus: C64,
}

/// Roots of `z² - 2 m z + 1 = 0` with `m = (a(1+λ²) - (1-λ²))/(2λa)`.
fn saddles_signed(ph: &PhaseFunction) -> SaddleData {
    let (l, a) = (ph.lambda, ph.a);
    let m = (a * (1.0 + l * l) - (1.0 - l * l)) / (2.0 * l * a);
    let edge_lo = (1.0 - l.abs()) / (1.0 + l.abs());
    let edge_hi = 1.0 / edge_lo;
    let coalesced = (a - edge_lo).abs() <= COALESCE_TOL * edge_lo || (a - edge_hi).abs() <= COALESCE_TOL * edge_hi;
    let (zp, zm, kind) = if coalesced {
        let s = C64::new(m.signum(), 0.0);
        (s, s, SaddleKind::CoalescedAtPlusMinusOne)
    } else if a > edge_lo && a < edge_hi {
        let theta = m.clamp(-1.0, 1.0).acos();
        (C64::from_polar(1.0, theta), C64::from_polar(1.0, -theta), SaddleKind::CircleConjugatePair)
    } else {
        let big = m + m.signum() * (m * m - 1.0).max(0.0).sqrt();
        let small = 1.0 / big;
        let (hi, lo) = if big > small { (big, small) } else { (small, big) };
        (C64::new(hi, 0.0), C64::new(lo, 0.0), SaddleKind::RealReciprocalPair)
    };
    SaddleData { z_plus: zp, z_minus: zm, kind, f_second_deriv_at_plus: ph.second_derivative_at_saddle(zp) }
}

/// The two stationary points of `f(·, a)` and their configuration.
pub fn stationary_points(lambda: f64, a: f64) -> Result<SaddleData> {
    let ph = PhaseFunction::new(lambda, a)?;
    Ok(saddles_signed(&ph))
}

/// The seven coefficient regimes, ordered by increasing `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RegionLabel {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 7] = [
        RegionLabel::I,
        RegionLabel::II,
        RegionLabel::III,
        RegionLabel::IV,
        RegionLabel::V,
        RegionLabel::VI,
        RegionLabel::VII,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RegionLabel::I => "I",
            RegionLabel::II => "II",
            RegionLabel::III => "III",
            RegionLabel::IV => "IV",
            RegionLabel::V => "V",
            RegionLabel::VI => "VI",
            RegionLabel::VII => "VII",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown region {s:?}")))
    }
}

/// Cut points of the region table for one `(λ, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionThresholds {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_n: f64,
    pub left_edge_lo: f64,
    pub left_edge_hi: f64,
    pub right_edge_lo: f64,
    pub right_edge_hi: f64,
    pub alpha_inv_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionClass {
    pub label: RegionLabel,
    pub thresholds: RegionThresholds,
}

/// Default `α = α₀/2` and `β = (α₀+1)/2`, validated overrides otherwise.
pub fn region_parameters(lambda: f64, alpha: Option<f64>, beta: Option<f64>) -> Result<(f64, f64)> {
    let a0 = alpha0(lambda)?;
    let alpha = alpha.unwrap_or(a0 / 2.0);
    let beta = beta.unwrap_or((a0 + 1.0) / 2.0);
    if !(alpha > 0.0 && alpha < a0) {
        return Err(Error::Config(format!("alpha = {alpha} must lie in (0, {a0})")));
    }
    if !(beta > a0 && beta < 1.0) {
        return Err(Error::Config(format!("beta = {beta} must lie in ({a0}, 1)")));
    }
    Ok((alpha, beta))
}

pub fn region_thresholds(lambda: f64, n: usize, alpha: Option<f64>, beta: Option<f64>) -> Result<RegionThresholds> {
    let (alpha, beta) = region_parameters(lambda, alpha, beta)?;
    let a0 = alpha0(lambda)?;
    let nf = n as f64;
    let w = nf.cbrt();
    Ok(RegionThresholds {
        alpha,
        beta,
        alpha_n: alpha * nf,
        left_edge_lo: a0 * nf - w,
        left_edge_hi: a0 * nf + w,
        right_edge_lo: nf / a0 - w,
        right_edge_hi: nf / a0 + w,
        alpha_inv_n: nf / alpha,
    })
}

/// Threshold comparisons with a relative slack so that exact boundary
/// values such as `k = n/α` are not lost to rounding.
fn slack(t: f64) -> f64 {
    1e-12 * t.abs().max(1.0)
}

fn le(k: f64, t: f64) -> bool {
    k <= t + slack(t)
}

fn lt(k: f64, t: f64) -> bool {
    k < t - slack(t)
}

/// Row of the region table containing `k`:
/// I `[0, αn]`, II `(αn, α₀n - n^{1/3})`, III `[α₀n ∓ n^{1/3}]`,
/// IV between the edges, V `[n/α₀ ∓ n^{1/3}]`, VI `(n/α₀ + n^{1/3}, n/α)`,
/// VII `[n/α, ∞)`.
pub fn classify_region(lambda: f64, n: usize, k: usize, alpha: Option<f64>, beta: Option<f64>) -> Result<RegionClass> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let t = region_thresholds(lambda, n, alpha, beta)?;
    let kf = k as f64;
    let label = if le(kf, t.alpha_n) {
        RegionLabel::I
    } else if lt(kf, t.left_edge_lo) {
        RegionLabel::II
    } else if le(kf, t.left_edge_hi) {
        RegionLabel::III
    } else if lt(kf, t.right_edge_lo) {
        RegionLabel::IV
    } else if le(kf, t.right_edge_hi) {
        RegionLabel::V
    } else if lt(kf, t.alpha_inv_n) {
        RegionLabel::VI
    } else {
        RegionLabel::VII
    };
    Ok(RegionClass { label, thresholds: t })
}

/// Exact cubic normal form near the right edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicNormalForm {
    /// Real `γ²`: positive past the edge, negative on the oscillatory side.
    pub gamma_sq: f64,
    /// `γ` itself: positive real, or `i g` with `g > 0`.
    pub gamma: C64,
    /// `(a - 1/α₀)(1 - λ)/(λ(1 + λ))^{1/3}`.
    pub leading_order_gamma_sq: f64,
    /// Saddle mapped to `t = +γ`.
    pub z_plus: C64,
    /// Saddle mapped to `t = -γ`.
    pub z_minus: C64,
}

/// Normal form for signed `λ` around the coalescence `a_c = (1+λ)/(1-λ)`,
/// where the local map is `t ≈ c (z - 1)`, `c³ = λ(1+λ)/(1-λ)³`.
fn normal_form_signed(lambda: f64, a: f64) -> Result<(CubicNormalForm, f64)> {
    let ph = PhaseFunction::signed(lambda, a)?;
    let c = (lambda * (1.0 + lambda) / (1.0 - lambda).powi(3)).cbrt();
    let a_c = (1.0 + lambda) / (1.0 - lambda);
    let delta = a - a_c;
    let leading = delta / c;
    let sd = saddles_signed(&ph);
    let (gamma, zp, zm) = match sd.kind {
        SaddleKind::CoalescedAtPlusMinusOne => (C64::new(0.0, 0.0), sd.z_plus, sd.z_minus),
        SaddleKind::RealReciprocalPair => {
            let (s1, s2) = (sd.z_plus, sd.z_minus);
            let (zp, zm) = if c * (s1.re - 1.0) > 0.0 { (s1, s2) } else { (s2, s1) };
            let g = (1.5 * ph.raw_value(zp).re).cbrt();
            (C64::new(g, 0.0), zp, zm)
        }
        SaddleKind::CircleConjugatePair => {
            let (s1, s2) = (sd.z_plus, sd.z_minus);
            let (zp, zm) = if c * s1.im > 0.0 { (s1, s2) } else { (s2, s1) };
            let g = (-1.5 * ph.raw_value(zp).im).cbrt();
            (C64::new(0.0, g), zp, zm)
        }
    };
    let gamma_sq = (gamma * gamma).re;
    Ok((CubicNormalForm { gamma_sq, gamma, leading_order_gamma_sq: leading, z_plus: zp, z_minus: zm }, c))
}

/// `γ` from `(2/3) γ³ = f(z₊, a)` for `a` within `0.5/α₀` of the right edge `1/α₀`.
pub fn gamma_cubed(lambda: f64, a: f64) -> Result<CubicNormalForm> {
    let a0 = alpha0(lambda)?;
    if !((a - 1.0 / a0).abs() <= 0.5 / a0) {
        return Err(Error::Mode(format!("a = {a} is outside the right-edge neighbourhood; use the stationary-phase path")));
    }
    Ok(normal_form_signed(lambda, a)?.0)
}

/// Components of the two-term uniform expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiryTerms {
    pub gamma_sq: f64,
    pub a0: C64,
    pub a1: C64,
    pub value: C64,
    /// `z'(t)` at `t = +γ` and `t = -γ`; used for branch tracking.
    pub zprime_plus: C64,
    pub zprime_minus: C64,
    /// `true` when the left edge was reduced to the right edge.
    pub mirrored: bool,
}

/// Which coalescence the Airy expansion is anchored at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Edge {
    Left,
    Right,
}

fn psi(z: C64) -> C64 {
    (z * z - 1.0) / (z * z * z)
}

/// Uniform expansion at signed `λ` around `a_c = (1+λ)/(1-λ)`.
fn airy_terms_signed(lambda: f64, n: usize, a: f64) -> Result<AiryTerms> {
    let (nf, c) = normal_form_signed(lambda, a)?;
    let ph = PhaseFunction::signed(lambda, a)?;
    let seed = C64::new(1.0 / c, 0.0);
    let gamma = nf.gamma;
    let (a0, a1, zpp, zpm) = if gamma.norm() < 1e-7 {
        // removable singularity: G(t) = ψ(z(t)) z'(t) has G(0) = 0, G'(0) = ψ'(1)/c² = 2/c²
        (C64::new(0.0, 0.0), C64::new(2.0 / (c * c), 0.0), seed, seed)
    } else {
        let pick = |sq: C64| {
            let r = sq.sqrt();
            if (r - seed).norm() <= (-r - seed).norm() {
                r
            } else {
                -r
            }
        };
        let f2p = ph.derivatives(nf.z_plus)?.f2;
        let f2m = ph.derivatives(nf.z_minus)?.f2;
        let zpp = pick(-2.0 * gamma / f2p);
        let zpm = pick(2.0 * gamma / f2m);
        let gp = psi(nf.z_plus) * zpp;
        let gm = psi(nf.z_minus) * zpm;
        ((gp + gm) / 2.0, (gp - gm) / (2.0 * gamma), zpp, zpm)
    };
    let nn = n as f64;
    let x = nn.powf(2.0 / 3.0) * nf.gamma_sq;
    let (ai, aip) = airy_pair(x);
    let orientation = c.signum();
    let value = orientation * (a0 * ai / nn.cbrt() + a1 * aip / nn.powf(2.0 / 3.0));
    Ok(AiryTerms { gamma_sq: nf.gamma_sq, a0, a1, value, zprime_plus: zpp, zprime_minus: zpm, mirrored: false })
}

/// Which edge neighbourhood `a` falls in; the nearer one (in `|ln|`) if both.
pub fn airy_edge(lambda: f64, a: f64) -> Result<Edge> {
    let a0 = alpha0(lambda)?;
    let right = (a - 1.0 / a0).abs() <= 0.5 / a0;
    let left = (a - a0).abs() <= 0.5 * a0;
    match (left, right) {
        (true, true) => Ok(if (a / a0).ln().abs() <= (a * a0).ln().abs() { Edge::Left } else { Edge::Right }),
        (true, false) => Ok(Edge::Left),
        (false, true) => Ok(Edge::Right),
        (false, false) => Err(Error::Mode(format!("a = {a} is not near a coalescence edge"))),
    }
}

/// Two-term uniform Airy approximation of `ĉ_w(k)` without ground truth.
pub fn uniform_airy_terms(lambda: f64, n: usize, k: usize) -> Result<AiryTerms> {
    check_lambda(lambda)?;
    if n == 0 || k == 0 {
        return Err(Error::Domain("n and k must be positive".into()));
    }
    let a = k as f64 / n as f64;
    match airy_edge(lambda, a)? {
        Edge::Right => airy_terms_signed(lambda, n, a),
        Edge::Left => {
            let mut t = airy_terms_signed(-lambda, n, a)?;
            if (n + k) % 2 == 1 {
                t.value = -t.value;
                t.a0 = -t.a0;
                t.a1 = -t.a1;
            }
            t.mirrored = true;
            Ok(t)
        }
    }
}

/// Uniform expansion compared with the exact coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiryEstimate {
    pub region: RegionLabel,
    pub gamma_sq: f64,
    pub a0: C64,
    pub a1: C64,
    pub value: C64,
    pub fft_truth: C64,
    pub rel_error: f64,
    pub mirrored: bool,
}

/// `|value - truth| / max(|truth|, 1e-14)`.
pub fn relative_error(value: C64, truth: C64) -> f64 {
    (value - truth).norm() / truth.norm().max(TRUTH_FLOOR)
}

/// Uniform estimate with truth read from precomputed weighted coefficients.
pub fn uniform_airy_estimate_with_truth(lambda: f64, n: usize, k: usize, truth: &CoefficientSeries) -> Result<AiryEstimate> {
    let t = uniform_airy_terms(lambda, n, k)?;
    let exact = *truth
        .coeffs()
        .get(k)
        .ok_or_else(|| Error::Precondition(format!("truth series stops before k = {k}")))?;
    Ok(AiryEstimate {
        region: classify_region(lambda, n, k, None, None)?.label,
        gamma_sq: t.gamma_sq,
        a0: t.a0,
        a1: t.a1,
        value: t.value,
        fft_truth: exact,
        rel_error: relative_error(t.value, exact),
        mirrored: t.mirrored,
    })
}

/// Weighted coefficients covering every region up to `k_max`.
pub fn truth_series(lambda: f64, n: usize, k_max: usize) -> Result<CoefficientSeries> {
    let p = MoebiusParam::real(lambda, n)?;
    weighted_coeffs(p, k_max.max(2))
}

/// Uniform Airy estimate of `ĉ_w(k)` together with its FFT ground truth.
pub fn uniform_airy_estimate(lambda: f64, n: usize, k: usize) -> Result<AiryEstimate> {
    let truth = truth_series(lambda, n, k)?;
    uniform_airy_estimate_with_truth(lambda, n, k, &truth)
}

/// Flags branch jumps of `z'(t±)` between adjacent samples of a sweep.
#[derive(Debug, Default, Clone)]
pub struct BranchTracker {
    prev: Option<(C64, C64, bool)>,
}

impl BranchTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accepts the next sample, failing if either branch value moves by
    /// more than 50% relative to the previous sample on the same edge.
    pub fn observe(&mut self, t: &AiryTerms) -> Result<()> {
        let cur = (t.zprime_plus, t.zprime_minus, t.mirrored);
        if let Some((p, m, mir)) = self.prev {
            if mir == t.mirrored {
                let jp = (cur.0 - p).norm() / p.norm();
                let jm = (cur.1 - m).norm() / m.norm();
                if jp > 0.5 || jm > 0.5 {
                    self.prev = Some(cur);
                    return Err(Error::Numerical(format!("branch jump of z'(t) by {:.0}%", 100.0 * jp.max(jm))));
                }
            }
        }
        self.prev = Some(cur);
        Ok(())
    }
}

/// `(1 - λ²) sqrt(2/(πn)) ((a - α₀)(1/α₀ - a))^{1/4} / (λ a^{3/2})`.
pub fn stationary_phase_envelope(lambda: f64, n: usize, a: f64) -> Result<f64> {
    let a0 = alpha0(lambda)?;
    if !(a > a0 && a < 1.0 / a0) {
        return Err(Error::Mode(format!("a = {a} lies outside the oscillatory band")));
    }
    let q = (a - a0) * (1.0 / a0 - a);
    Ok((1.0 - lambda * lambda) * (2.0 / (PI * n as f64)).sqrt() * q.powf(0.25) / (lambda * a.powf(1.5)))
}

/// Two-saddle stationary-phase value of `ĉ_w(k)` for `k/n ∈ (β, 1/β)`:
/// envelope times `cos(n h(φ₊) - φ₊ + 3π/4)` with `h(φ) = Im f(e^{iφ})`.
pub fn stationary_phase_estimate(lambda: f64, n: usize, k: usize) -> Result<f64> {
    stationary_phase_estimate_with(lambda, n, k, None)
}

pub fn stationary_phase_estimate_with(lambda: f64, n: usize, k: usize, beta: Option<f64>) -> Result<f64> {
    let (_, beta) = region_parameters(lambda, None, beta)?;
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let a = k as f64 / n as f64;
    if !(a > beta && a < 1.0 / beta) {
        return Err(Error::Mode(format!("a = {a} lies outside ({beta}, {})", 1.0 / beta)));
    }
    let ph = PhaseFunction::new(lambda, a)?;
    let sd = saddles_signed(&ph);
    let phi = sd.z_plus.arg();
    let h = ph.raw_value(sd.z_plus).im;
    let env = stationary_phase_envelope(lambda, n, a)?;
    Ok(env * (n as f64 * h - phi + 0.75 * PI).cos())
}

/// Least-squares decay fit of a representative coefficient per region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub region: RegionLabel,
    /// Slope against `ln n` for III–V, against `n` for the exponential rows.
    pub slope: f64,
    pub intercept: f64,
    pub log_linear: bool,
    pub n_values: Vec<usize>,
    pub k_values: Vec<usize>,
    pub log_values: Vec<f64>,
}

/// Representative index of a region at size `n`.
pub fn representative_k(lambda: f64, region: RegionLabel, n: usize, alpha: Option<f64>) -> Result<usize> {
    let (alpha, _) = region_parameters(lambda, alpha, None)?;
    let a0 = alpha0(lambda)?;
    let nf = n as f64;
    let k = match region {
        RegionLabel::I => (alpha * nf).floor(),
        RegionLabel::II => (0.5 * (alpha + a0) * nf).round(),
        RegionLabel::III => (a0 * nf).round(),
        RegionLabel::IV => nf.round(),
        RegionLabel::V => (nf / a0).round(),
        RegionLabel::VI => (0.5 * (1.0 / a0 + 1.0 / alpha) * nf).round(),
        RegionLabel::VII => (nf / alpha * (1.0 - 1e-12)).ceil(),
    };
    Ok(k.max(1.0) as usize)
}

/// `max |ĉ_w(j)|` for `j ∈ [k - 3, k + 3]`.
pub fn windowed_max(series: &CoefficientSeries, k: usize) -> f64 {
    let lo = k.saturating_sub(ENVELOPE_HALF_WINDOW);
    let hi = (k + ENVELOPE_HALF_WINDOW).min(series.len() - 1);
    series.coeffs()[lo..=hi].iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn least_squares(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Numerical("degenerate fit: zero variance in abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Fits the decay of region representatives over `n_list`: log-log with
/// windowed maxima for III, IV, V; `ln|ĉ_w|` against `n` for I, II, VI, VII.
pub fn decay_exponent_fit(lambda: f64, region: RegionLabel, n_list: &[usize]) -> Result<DecayFit> {
    check_lambda(lambda)?;
    if n_list.len() < 4 {
        return Err(Error::Precondition("need at least 4 values of n".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::Precondition("n values must be positive and strictly increasing".into()));
    }
    let log_linear = matches!(region, RegionLabel::I | RegionLabel::II | RegionLabel::VI | RegionLabel::VII);
    let mut ks = Vec::with_capacity(n_list.len());
    let mut logs = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let k = representative_k(lambda, region, n, None)?;
        let v = if log_linear {
            weighted_coeff_log_modulus(lambda, n, k)?
        } else {
            let s = truth_series(lambda, n, k + ENVELOPE_HALF_WINDOW)?;
            windowed_max(&s, k).ln()
        };
        ks.push(k);
        logs.push(v);
    }
    let xs: Vec<f64> = n_list.iter().map(|&n| if log_linear { n as f64 } else { (n as f64).ln() }).collect();
    let (slope, intercept) = least_squares(&xs, &logs)?;
    Ok(DecayFit { region, slope, intercept, log_linear, n_values: n_list.to_vec(), k_values: ks, log_values: logs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha0_values() {
        assert!((alpha0(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((alpha0(1.0 / 3.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((alpha0(1e-12).unwrap() - 1.0).abs() < 1e-11);
        assert!(alpha0(0.0).is_err());
    }

    #[test]
    fn saddle_examples() {
        let s = stationary_points(0.5, 1.0).unwrap();
        assert_eq!(s.kind, SaddleKind::CircleConjugatePair);
        assert!((s.z_plus - C64::new(0.5, 0.75f64.sqrt())).norm() < 1e-15);
        let c = stationary_points(0.5, 3.0).unwrap();
        assert_eq!(c.kind, SaddleKind::CoalescedAtPlusMinusOne);
        assert_eq!(c.z_plus, C64::new(1.0, 0.0));
        let r = stationary_points(0.5, 4.0).unwrap();
        assert_eq!(r.kind, SaddleKind::RealReciprocalPair);
        assert!((r.z_plus * r.z_minus - 1.0).norm() < 1e-12);
        let d = phase_derivatives(0.5, 4.0, r.z_plus).unwrap();
        assert!(d.f1.norm() < 1e-12);
        assert!(stationary_points(0.5, 0.0).is_err());
    }

    #[test]
    fn third_derivative_at_coalescence() {
        let d = phase_derivatives(0.5, 3.0, C64::new(1.0, 0.0)).unwrap();
        assert!((d.f3 - C64::new(-12.0, 0.0)).norm() < 1e-12);
        assert!(d.f.norm() < 1e-15);
        assert!(phase_derivatives(0.5, 3.0, C64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn region_examples() {
        let lbl = |k| classify_region(0.5, 1000, k, None, None).unwrap().label;
        assert_eq!(lbl(200), RegionLabel::II);
        assert_eq!(lbl(1000), RegionLabel::IV);
        assert_eq!(lbl(5999), RegionLabel::VI);
        assert_eq!(lbl(6000), RegionLabel::VII);
        assert_eq!(lbl(0), RegionLabel::I);
        assert_eq!(lbl(333), RegionLabel::III);
        assert_eq!(lbl(3000), RegionLabel::V);
        assert!(matches!(classify_region(0.5, 1000, 10, Some(0.5), None), Err(Error::Config(_))));
        assert!(matches!(classify_region(0.5, 1000, 10, None, Some(0.2)), Err(Error::Config(_))));
    }

    #[test]
    fn gamma_signs() {
        let g = gamma_cubed(0.5, 3.0).unwrap();
        assert_eq!(g.gamma_sq, 0.0);
        let above = gamma_cubed(0.5, 3.1).unwrap();
        assert!(above.gamma_sq > 0.0);
        let lead = 0.1 * 0.5 / (0.5f64 * 1.5).cbrt();
        assert!((above.gamma_sq / lead - 1.0).abs() < 0.2);
        assert!((above.leading_order_gamma_sq - lead).abs() < 1e-12);
        assert!(gamma_cubed(0.5, 2.9).unwrap().gamma_sq < 0.0);
        assert!(matches!(gamma_cubed(0.5, 1.0), Err(Error::Mode(_))));
    }

    #[test]
    fn stationary_phase_bounded_by_envelope() {
        let v = stationary_phase_estimate(0.5, 1024, 1024).unwrap();
        let env = (2.0 * 0.75 / (1024.0 * PI)).sqrt() * (2.0f64 / 3.0).powf(0.25) * 2f64.powf(0.25) / 0.5;
        assert!(v.abs() <= env * (1.0 + 1e-12));
        assert!(matches!(stationary_phase_estimate(0.5, 1024, 100), Err(Error::Mode(_))));
    }

    #[test]
    fn fit_needs_four_points() {
        assert!(matches!(decay_exponent_fit(0.5, RegionLabel::IV, &[8, 16, 32]), Err(Error::Precondition(_))));
        assert!(matches!(decay_exponent_fit(0.5, RegionLabel::IV, &[8, 16, 16, 32]), Err(Error::Precondition(_))));
    }
}
