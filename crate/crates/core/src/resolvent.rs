//! Upper bounds for resolvent norms of power-bounded operators with a given
//! minimal polynomial, and the pseudo-hyperbolic metric of the disk.

use crate::model::SpectrumSpec;
use crate::{Error, Result, C64};
use serde::Serialize;
use std::f64::consts::E;

const RHO_MIN: f64 = 1e-6;
const RHO_MAX: f64 = 1.0 - 1e-6;
const GRID: usize = 32;
const RHO_TOL: f64 = 1e-8;
const UNIT_TOL: f64 = 1e-12;

/// `|z - w| / |1 - conj(z) w|`.
pub fn pseudo_hyperbolic(z: C64, w: C64) -> Result<f64> {
    let den = 1.0 - z.conj() * w;
    if den == C64::new(0.0, 0.0) {
        return Err(Error::Domain(format!("1 - conj({z})·{w} vanishes")));
    }
    Ok((z - w).norm() / den.norm())
}

/// Operator data for the bounds: spectrum, evaluation point and power bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundQuery {
    spec: SpectrumSpec,
    zeta: C64,
    c: f64,
}

impl BoundQuery {
    pub fn new(spec: SpectrumSpec, zeta: C64, c: f64) -> Result<Self> {
        if !(c >= 1.0) || !c.is_finite() {
            return Err(Error::Domain(format!("power bound C = {c} must be at least 1")));
        }
        if !zeta.re.is_finite() || !zeta.im.is_finite() {
            return Err(Error::Domain("non-finite zeta".into()));
        }
        if spec.points().iter().any(|p| p.0 == zeta) {
            return Err(Error::Domain(format!("zeta = {zeta} is an eigenvalue")));
        }
        Ok(Self { spec, zeta, c })
    }

    pub fn spec(&self) -> &SpectrumSpec {
        &self.spec
    }
    pub fn zeta(&self) -> C64 {
        self.zeta
    }
    pub fn c(&self) -> f64 {
        self.c
    }

    fn degree(&self) -> usize {
        self.spec.degree()
    }

    fn min_distance(&self) -> f64 {
        self.spec.points().iter().map(|p| (self.zeta - p.0).norm()).fold(f64::INFINITY, f64::min)
    }

    fn min_one_minus_conj(&self) -> f64 {
        self.spec
            .points()
            .iter()
            .map(|p| (1.0 - p.0.conj() * self.zeta).norm())
            .fold(f64::INFINITY, f64::min)
    }

    fn has_repeated(&self) -> bool {
        self.spec.points().iter().any(|p| p.1 > 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundRule {
    MainLemmaOpt,
    Case1,
    Case2,
    Case3,
    Case4,
    SchaefferBaseline,
}

impl BoundRule {
    pub fn label(&self) -> &'static str {
        match self {
            BoundRule::MainLemmaOpt => "mainlemma_opt",
            BoundRule::Case1 => "case1",
            BoundRule::Case2 => "case2",
            BoundRule::Case3 => "case3",
            BoundRule::Case4 => "case4",
            BoundRule::SchaefferBaseline => "schaeffer_baseline",
        }
    }
}

/// Intermediate quantities reported with a bound.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DeltaTerms {
    /// `min_i |1 - conj(λ_i) ζ|`.
    pub min_one_minus_conj_lambda_zeta: Option<f64>,
    /// `(1 - r²)/(1 - r|ζ|)`.
    pub delta_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub rule: BoundRule,
    pub value: f64,
    /// Natural log of `value`; stays finite when `value` overflows.
    pub ln_value: f64,
    pub rho_star: Option<f64>,
    /// Separation used: pseudo-hyperbolic for case 3, `min|λ_i|` for case 2
    /// and the baseline, Euclidean `min|ζ - λ_i|` for cases 1 and 4.
    pub r: Option<f64>,
    pub delta_terms: DeltaTerms,
    /// Second closed form of case 4 (the one produced by its derivation).
    pub proof_form: Option<f64>,
    /// Set when repeated eigenvalues were handled by continuity of the
    /// diagonalizable formula.
    pub continuity_extended: bool,
    /// Set when the pre-scan over `ρ` found more than one local minimum.
    pub multimodal: bool,
}

impl BoundReport {
    fn closed(rule: BoundRule, ln_value: f64, r: Option<f64>, q: &BoundQuery) -> Self {
        Self {
            rule,
            value: ln_value.exp(),
            ln_value,
            rho_star: None,
            r,
            delta_terms: DeltaTerms::default(),
            proof_form: None,
            continuity_extended: false,
            multimodal: false,
        }
        .with_flag(q)
    }

    fn with_flag(mut self, q: &BoundQuery) -> Self {
        self.continuity_extended = q.has_repeated() && matches!(self.rule, BoundRule::MainLemmaOpt);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("BoundReport serialises")
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Natural log of [`mainlemma_bound`].
pub fn mainlemma_log_bound(q: &BoundQuery, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Domain(format!("rho = {rho} must lie in (0, 1)")));
    }
    let lambdas = q.spec.expanded();
    let rho2 = rho * rho;
    let ln_rho = rho.ln();
    let mut prefix = 0.0;
    let mut terms = Vec::with_capacity(lambdas.len());
    for (k, l) in lambdas.iter().enumerate() {
        let dist = (q.zeta - l).norm();
        if dist == 0.0 {
            return Err(Error::Domain(format!("zeta coincides with eigenvalue {l}")));
        }
        let weight = (-rho2 * l.norm_sqr()).ln_1p();
        terms.push(-2.0 * k as f64 * ln_rho + weight - 2.0 * dist.ln() + prefix);
        // |(1/b_λ(ζ))(1 + (1-ρ²) conj(λ)ζ/(1 - conj(λ)ζ))| = |1 - ρ² conj(λ) ζ| / |ζ - λ|
        prefix += 2.0 * ((1.0 - rho2 * l.conj() * q.zeta).norm().ln() - dist.ln());
    }
    let one_minus_rho2 = (1.0 - rho) * (1.0 + rho);
    Ok(q.c.ln() + 0.5 * (log_sum_exp(&terms) - one_minus_rho2.ln()))
}

/// `C · sqrt( (1/(1-ρ²)) Σ_k ρ^{-(2k-2)} (1-ρ²|λ_k|²)/|ζ-λ_k|² ∏_{j<k} |…|² )`
/// evaluated in log space.
pub fn mainlemma_bound(q: &BoundQuery, rho: f64) -> Result<f64> {
    Ok(mainlemma_log_bound(q, rho)?.exp())
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// The 32 pre-scan points in `[1e-6, 1 - 1e-6]`.
pub fn rho_grid() -> Vec<f64> {
    (0..GRID).map(|i| RHO_MIN + (RHO_MAX - RHO_MIN) * i as f64 / (GRID - 1) as f64).collect()
}

/// Minimises the lemma bound over `ρ`: a 32-point scan brackets the minimum,
/// then golden-section search refines it to `|Δρ| < 1e-8`. The result never
/// exceeds the best scanned value.
pub fn optimize_rho(q: &BoundQuery) -> Result<BoundReport> {
    let grid = rho_grid();
    let vals = grid.iter().map(|&r| mainlemma_log_bound(q, r)).collect::<Result<Vec<_>>>()?;
    let best = (0..GRID).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    let local_minima = (0..GRID)
        .filter(|&i| {
            let left = i == 0 || vals[i] < vals[i - 1];
            let right = i == GRID - 1 || vals[i] <= vals[i + 1];
            left && right
        })
        .count();
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(GRID - 1)];
    let f = |r: f64| mainlemma_log_bound(q, r).unwrap_or(f64::INFINITY);
    let (mut rho, mut ln_v) = golden_section(f, lo, hi, RHO_TOL);
    if vals[best] <= ln_v {
        rho = grid[best];
        ln_v = vals[best];
    }
    Ok(BoundReport {
        rule: BoundRule::MainLemmaOpt,
        value: ln_v.exp(),
        ln_value: ln_v,
        rho_star: Some(rho),
        r: None,
        delta_terms: DeltaTerms::default(),
        proof_form: None,
        continuity_extended: false,
        multimodal: local_minima > 1,
    }
    .with_flag(q))
}

/// All eigenvalues on the unit circle: `C sqrt|m| / min_i |ζ - λ_i|`.
pub fn thm_case1(q: &BoundQuery) -> Result<BoundReport> {
    if q.spec.points().iter().any(|p| (p.0.norm() - 1.0).abs() > UNIT_TOL) {
        return Err(Error::Mode("case 1 needs every eigenvalue on the unit circle".into()));
    }
    let d = q.min_distance();
    let m = q.degree() as f64;
    let ln_v = q.c.ln() + 0.5 * m.ln() - d.ln();
    Ok(BoundReport::closed(BoundRule::Case1, ln_v, Some(d), q))
}

fn require_origin(q: &BoundQuery) -> Result<f64> {
    if q.zeta != C64::new(0.0, 0.0) {
        return Err(Error::Mode("this bound applies at zeta = 0 only".into()));
    }
    let r = q.spec.min_modulus();
    if r == 0.0 {
        return Err(Error::Domain("r = min|lambda_i| vanishes".into()));
    }
    Ok(r)
}

/// `ln` of the ratio between the case-2 bound and the baseline
/// `C sqrt(e|m|)/r^{|m|}`, i.e. `½ ln(1 - r^{2|m|}/e)`.
pub fn case2_log_gain(r: f64, m: usize) -> f64 {
    0.5 * (-(2.0 * m as f64 * r.ln()).exp() / E).ln_1p()
}

/// At `ζ = 0`: `C sqrt(|m| (e - r^{2|m|})) / r^{|m|}` with `r = min|λ_i|`.
pub fn thm_case2(q: &BoundQuery) -> Result<BoundReport> {
    let r = require_origin(q)?;
    let m = q.degree();
    let ln_v = q.c.ln() + 0.5 * (E * m as f64).ln() + case2_log_gain(r, m) - m as f64 * r.ln();
    let mut rep = BoundReport::closed(BoundRule::Case2, ln_v, Some(r), q);
    rep.rho_star = Some((1.0 - 1.0 / (m as f64 + 1.0)).sqrt());
    Ok(rep)
}

/// `C sqrt(e|m|) / r^{|m|}` at `ζ = 0`.
pub fn schaeffer_baseline(q: &BoundQuery) -> Result<BoundReport> {
    let r = require_origin(q)?;
    let m = q.degree() as f64;
    let ln_v = q.c.ln() + 0.5 * (E * m).ln() - m * r.ln();
    Ok(BoundReport::closed(BoundRule::SchaefferBaseline, ln_v, Some(r), q))
}

/// `ζ` inside the disk with pseudo-hyperbolic separation `r ∈ (0, 1)`:
/// `C e √2 sqrt|m| / (s r^{|m|}) · sqrt(1/(1 - r|ζ|) + 1/(2(1 - r²)|m|))`,
/// `s = min_i |1 - conj(λ_i) ζ|`.
pub fn thm_case3(q: &BoundQuery) -> Result<BoundReport> {
    let az = q.zeta.norm();
    if !(az < 1.0) {
        return Err(Error::Mode("case 3 needs |zeta| < 1".into()));
    }
    let mut r = f64::INFINITY;
    for p in q.spec.points() {
        r = r.min(pseudo_hyperbolic(q.zeta, p.0)?);
    }
    if r == 0.0 {
        return Err(Error::Domain("zeta lies in the spectrum".into()));
    }
    if !(r < 1.0) {
        return Err(Error::Mode("case 3 needs pseudo-hyperbolic separation below 1".into()));
    }
    let s = q.min_one_minus_conj();
    let m = q.degree() as f64;
    let inner = 1.0 / (1.0 - r * az) + 1.0 / (2.0 * (1.0 - r * r) * m);
    let ln_v = q.c.ln() + 1.0 + 0.5 * 2f64.ln() + 0.5 * m.ln() - s.ln() - m * r.ln() + 0.5 * inner.ln();
    let mut rep = BoundReport::closed(BoundRule::Case3, ln_v, Some(r), q);
    rep.delta_terms = DeltaTerms {
        min_one_minus_conj_lambda_zeta: Some(s),
        delta_max: Some((1.0 - r * r) / (1.0 - r * az)),
    };
    Ok(rep)
}

/// `ζ` on the unit circle: headline `(3/2) C sqrt(e² - 1) |m| / min|ζ - λ_i|`;
/// the report also carries the form
/// `2C (|m|/min|ζ-λ_i|) sqrt(2 + 1/(2|m|)) sqrt((e^{1+s/2} - 1)/(s + 2))`.
pub fn thm_case4(q: &BoundQuery) -> Result<BoundReport> {
    if (q.zeta.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::Mode("case 4 needs |zeta| = 1".into()));
    }
    let d = q.min_distance();
    let s = q.min_one_minus_conj();
    let m = q.degree() as f64;
    let ln_v = q.c.ln() + 1.5f64.ln() + 0.5 * (E * E - 1.0).ln() + m.ln() - d.ln();
    let proof = 2.0 * q.c * (m / d) * (2.0 + 1.0 / (2.0 * m)).sqrt() * (((1.0 + s / 2.0).exp() - 1.0) / (s + 2.0)).sqrt();
    let mut rep = BoundReport::closed(BoundRule::Case4, ln_v, Some(d), q);
    rep.proof_form = Some(proof);
    rep.delta_terms.min_one_minus_conj_lambda_zeta = Some(s);
    Ok(rep)
}

/// Every closed form whose hypotheses hold for `q`.
pub fn applicable_closed_forms(q: &BoundQuery) -> Vec<BoundReport> {
    [thm_case1(q), thm_case2(q), thm_case3(q), thm_case4(q), schaeffer_baseline(q)]
        .into_iter()
        .filter_map(|r| r.ok())
        .collect()
}
