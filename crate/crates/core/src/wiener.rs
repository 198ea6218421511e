//! Truncated Wiener-algebra quotient norms.
//!
//! For a spectrum with Blaschke product `B`, the quotient norm of `u` is
//! `inf_g ‖u + B g‖_W`. Restricting `g` to polynomials of degree `≤ D` gives an
//! upper bound that decreases as `D` grows. Multiplication by the inner
//! function `B` is an isometry of `ℓ²`, so this parametrisation stays well
//! conditioned even when the interpolation nodes cluster.
//!
//! Real data lead to an `ℓ¹` regression solved exactly by the simplex method.
//! Complex data fall back to Douglas-Rachford splitting, reported as
//! uncertified.

use crate::blaschke::{dominant_end, linf_a_norm, weighted_product_coeffs, CoefficientSeries};
use crate::model::{malmquist_walsh, SpectrumSpec};
use crate::simplex::{self, Column, LinearProgram, SimplexOptions};
use crate::{Error, Result, C64};
use serde::Serialize;

/// Coefficients of `B` below this magnitude are dropped.
const COEFF_FLOOR: f64 = 1e-17;
/// Stopping tolerance of the complex fallback.
pub const COMPLEX_TOL: f64 = 1e-5;

/// Degree schedule for the truncated problems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPolicy {
    /// Starting degree; `max(8|m|, 64)` when absent.
    pub initial: Option<usize>,
    pub cap: usize,
    pub rel_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { initial: None, cap: 4096, rel_tol: 1e-3 }
    }
}

impl TruncationPolicy {
    pub fn start_degree(&self, degree: usize) -> usize {
        self.initial.unwrap_or_else(|| (8 * degree).max(64))
    }
}

/// What is being interpolated on the spectrum.
#[derive(Debug, Clone)]
pub enum Target {
    /// A function given by its Taylor coefficients.
    Series(CoefficientSeries),
    /// Any function equal to `1/z` on the spectrum.
    InverseLift,
    /// Any function equal to `1/(ζ - z)` on the spectrum.
    ResolventLift(C64),
}

/// Value of a truncated quotient-norm problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientValue {
    pub value: f64,
    pub degree: usize,
    /// `true` when solved exactly by the simplex method.
    pub certified: bool,
}

/// Outcome of the truncated computation of `φ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiResult {
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub phi_truncated: f64,
    pub degree: usize,
    pub converged: bool,
    pub lower_bound: f64,
    pub schaeffer_upper: f64,
}

impl PhiResult {
    pub fn value(&self) -> f64 {
        self.phi_truncated
    }
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("PhiResult serialises")
    }
}

/// Coefficients of `B`, trimmed once they fall below `1e-17` of the peak.
///
/// Each factor is applied as multiplication by `z - λ` followed by division by
/// `1 - conj(λ) z`, a stable first-order recurrence. Unlike an FFT this keeps
/// the relative accuracy of the tiny tail coefficients.
fn blaschke_coefficients(spec: &SpectrumSpec) -> Result<Vec<C64>> {
    let mut k_max = 2 * dominant_end(spec.points()) + 64;
    loop {
        let mut c = vec![C64::new(0.0, 0.0); k_max];
        c[0] = C64::new(1.0, 0.0);
        for &(lambda, m) in spec.points() {
            for _ in 0..m {
                let mut prev_in = C64::new(0.0, 0.0);
                let mut prev_out = C64::new(0.0, 0.0);
                for x in c.iter_mut() {
                    let t = prev_in - lambda * *x;
                    prev_in = *x;
                    prev_out = t + lambda.conj() * prev_out;
                    *x = prev_out;
                }
            }
        }
        let peak = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let last = c.iter().rposition(|x| x.norm() > COEFF_FLOOR * peak.max(1.0)).unwrap_or(0);
        if last + 16 < k_max {
            c.truncate(last + 1);
            return Ok(c);
        }
        k_max *= 2;
    }
}

/// Taylor coefficients of the model-space element interpolating
/// `1/(ζ - z)` (with multiplicity) on the spectrum. With `negate` the sign is
/// flipped, which at `ζ = 0` interpolates `1/z`.
fn resolvent_representative(spec: &SpectrumSpec, zeta: C64, negate: bool, min_len: usize) -> Result<Vec<C64>> {
    let basis = malmquist_walsh(spec)?;
    let mut weights = Vec::with_capacity(basis.dim());
    let mut prefix = C64::new(1.0, 0.0);
    for j in 0..basis.dim() {
        let l = basis.pole(j);
        weights.push(prefix * basis.normalizer(j) / (zeta - l));
        // 1 / b_λ(ζ) = (1 - conj(λ) ζ) / (ζ - λ)
        prefix *= (1.0 - l.conj() * zeta) / (zeta - l);
    }
    if negate {
        for w in &mut weights {
            *w = -*w;
        }
    }
    let mut len = min_len.max(64);
    loop {
        let coeffs = basis.coefficients(len);
        let mut u = vec![C64::new(0.0, 0.0); len];
        for (w, e) in weights.iter().zip(&coeffs) {
            for (acc, c) in u.iter_mut().zip(e) {
                *acc += w * c;
            }
        }
        let peak = u.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let last = u.iter().rposition(|x| x.norm() > COEFF_FLOOR * peak).unwrap_or(0);
        if last + 16 < len {
            u.truncate((last + 1).max(min_len));
            if spec.is_real() && zeta.im == 0.0 {
                u.iter_mut().for_each(|x| x.im = 0.0);
            }
            return Ok(u);
        }
        len *= 2;
    }
}

fn check_zeta(spec: &SpectrumSpec, zeta: C64) -> Result<()> {
    if !zeta.re.is_finite() || !zeta.im.is_finite() {
        return Err(Error::Domain("non-finite zeta".into()));
    }
    if spec.points().iter().any(|p| p.0 == zeta) {
        return Err(Error::Domain(format!("zeta = {zeta} is an eigenvalue")));
    }
    Ok(())
}

fn is_real(v: &[C64]) -> bool {
    v.iter().all(|c| c.im == 0.0)
}

/// `min ‖u + Σ_{j<dim} g_j z^{shift+j} B‖_1` over the correction coefficients.
fn affine_l1_min(u: &[C64], b: &[C64], shift: usize, dim: usize) -> Result<(f64, bool)> {
    let rows = u.len().max(shift + dim + b.len() - 1);
    let mut u_full = u.to_vec();
    u_full.resize(rows, C64::new(0.0, 0.0));
    let scale = u_full.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok((0.0, true));
    }
    if is_real(&u_full) && is_real(b) {
        let ur: Vec<f64> = u_full.iter().map(|c| c.re / scale).collect();
        let br: Vec<f64> = b.iter().map(|c| c.re).collect();
        let v = real_l1_min(&ur, &br, shift, dim)?;
        Ok((v * scale, true))
    } else {
        let un: Vec<C64> = u_full.iter().map(|c| c / scale).collect();
        let v = complex_l1_min(&un, b, shift, dim)?;
        Ok((v * scale, false))
    }
}

fn real_l1_min(u: &[f64], b: &[f64], shift: usize, dim: usize) -> Result<f64> {
    let rows = u.len();
    let mut columns = Vec::with_capacity(dim + 2 * rows);
    let mut cost = Vec::with_capacity(dim + 2 * rows);
    for j in 0..dim {
        columns.push(Column::from_dense(shift + j, b));
        cost.push(0.0);
    }
    let first_slack = columns.len();
    let mut basis = Vec::with_capacity(rows);
    for k in 0..rows {
        // u_k + (B g)_k = p_k - q_k
        columns.push(Column::unit(k, -1.0));
        columns.push(Column::unit(k, 1.0));
        cost.extend([1.0, 1.0]);
        basis.push(if -u[k] >= 0.0 { first_slack + 2 * k + 1 } else { first_slack + 2 * k });
    }
    let mut free = vec![false; columns.len()];
    free[..dim].fill(true);
    let lp = LinearProgram { n_rows: rows, columns, b: u.iter().map(|v| -v).collect(), c: cost, free };
    let sol = simplex::solve(&lp, Some(&basis), &SimplexOptions::default())?;
    // Evaluate the objective from the recovered polynomial rather than the slacks.
    let mut a = u.to_vec();
    for j in 0..dim {
        let g = sol.x[j];
        if g == 0.0 {
            continue;
        }
        for (i, bv) in b.iter().enumerate() {
            a[shift + j + i] += g * bv;
        }
    }
    Ok(a.iter().map(|v| v.abs()).sum())
}

/// Douglas-Rachford splitting between the affine set `u + range(M)` and the
/// `ℓ¹` ball proximal map.
fn complex_l1_min(u: &[C64], b: &[C64], shift: usize, dim: usize) -> Result<f64> {
    let rows = u.len();
    let apply = |g: &[C64]| -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); rows];
        for (j, gj) in g.iter().enumerate() {
            for (i, bv) in b.iter().enumerate() {
                out[shift + j + i] += gj * bv;
            }
        }
        out
    };
    let adjoint = |v: &[C64]| -> Vec<C64> {
        (0..dim)
            .map(|j| b.iter().enumerate().map(|(i, bv)| bv.conj() * v[shift + j + i]).sum())
            .collect()
    };
    // Gram matrix MᴴM is Hermitian positive definite; factor it once.
    let mut gram = vec![C64::new(0.0, 0.0); dim * dim];
    for p in 0..dim {
        for q in 0..dim {
            let off = q as isize - p as isize;
            gram[p * dim + q] = b
                .iter()
                .enumerate()
                .filter_map(|(i, bv)| {
                    let k = i as isize - off;
                    (k >= 0 && (k as usize) < b.len()).then(|| b[k as usize].conj() * bv)
                })
                .sum();
        }
    }
    let chol = cholesky(&gram, dim).ok_or_else(|| Error::Numerical("correction Gram matrix not positive definite".into()))?;
    let project = |x: &[C64]| -> Vec<C64> {
        let d: Vec<C64> = x.iter().zip(u).map(|(a, b)| a - b).collect();
        let g = cholesky_solve(&chol, dim, &adjoint(&d));
        let mg = apply(&g);
        u.iter().zip(mg).map(|(a, b)| a + b).collect()
    };
    let t = 0.5 / (rows as f64).sqrt();
    let mut z = u.to_vec();
    let mut best = f64::INFINITY;
    let mut last_check = f64::INFINITY;
    for it in 0..50_000 {
        let x = project(&z);
        let obj: f64 = x.iter().map(|c| c.norm()).sum();
        best = best.min(obj);
        let mut step = 0.0;
        for (zi, xi) in z.iter_mut().zip(&x) {
            let r = 2.0 * xi - *zi;
            let m = r.norm();
            let v = if m > t { r * ((m - t) / m) } else { C64::new(0.0, 0.0) };
            let delta = v - xi;
            step += delta.norm_sqr();
            *zi += delta;
        }
        if it % 200 == 199 {
            if (last_check - best).abs() <= COMPLEX_TOL * best.max(1e-300) && step.sqrt() <= COMPLEX_TOL {
                return Ok(best);
            }
            last_check = best;
        }
    }
    Ok(best)
}

fn cholesky(a: &[C64], n: usize) -> Option<Vec<C64>> {
    let mut l = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                if s.re <= 0.0 {
                    return None;
                }
                l[i * n + i] = C64::new(s.re.sqrt(), 0.0);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &[C64], n: usize, rhs: &[C64]) -> Vec<C64> {
    let mut y = rhs.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] = y[i] - l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] = y[i] - l[k * n + i].conj() * y[k];
        }
        y[i] /= l[i * n + i];
    }
    y
}

/// Upper bound on the quotient norm of `target` obtained with corrections of
/// degree `≤ D`.
pub fn quotient_norm_detailed(target: &Target, spec: &SpectrumSpec, degree: usize) -> Result<QuotientValue> {
    spec.require_interior()?;
    if degree < spec.degree() {
        return Err(Error::Precondition(format!("degree {degree} is below |m| = {}", spec.degree())));
    }
    let b = blaschke_coefficients(spec)?;
    let min_len = degree + b.len();
    let u = match target {
        Target::Series(s) => s.coeffs().to_vec(),
        Target::InverseLift => {
            if spec.contains_zero() {
                return Err(Error::Domain("1/z is undefined at an eigenvalue 0".into()));
            }
            resolvent_representative(spec, C64::new(0.0, 0.0), true, min_len)?
        }
        Target::ResolventLift(zeta) => {
            check_zeta(spec, *zeta)?;
            resolvent_representative(spec, *zeta, false, min_len)?
        }
    };
    let (value, certified) = affine_l1_min(&u, &b, 0, degree + 1)?;
    Ok(QuotientValue { value, degree, certified })
}

/// `quotient_norm_detailed(..).value`.
pub fn quotient_norm(target: &Target, spec: &SpectrumSpec, degree: usize) -> Result<f64> {
    Ok(quotient_norm_detailed(target, spec, degree)?.value)
}

/// `min ‖h‖_W - |h(0)|` over `h = B g`, `g` of degree `≤ D`, `h(0) = ∏ λ_i`.
pub fn phi_at_degree(spec: &SpectrumSpec, degree: usize) -> Result<f64> {
    check_phi_spec(spec)?;
    if degree < spec.degree() + 1 {
        return Err(Error::Precondition(format!("degree {degree} is below |m| + 1 = {}", spec.degree() + 1)));
    }
    let b = blaschke_coefficients(spec)?;
    let sign = if spec.degree().is_multiple_of(2) { 1.0 } else { -1.0 };
    let u: Vec<C64> = b.iter().map(|c| c * sign).collect();
    let (value, _) = affine_l1_min(&u, &b, 1, degree)?;
    Ok((value - spec.product().norm()).max(0.0))
}

fn check_phi_spec(spec: &SpectrumSpec) -> Result<()> {
    spec.require_interior()?;
    if !spec.is_real() {
        return Err(Error::Mode("exact mode needs a real spectrum; use phi_complex".into()));
    }
    if spec.contains_zero() {
        return Err(Error::Domain("an eigenvalue 0 forces h(0) = 0".into()));
    }
    Ok(())
}

/// Doubles the degree from `D` until two successive values agree to the
/// policy's relative tolerance.
pub fn phi_exact_truncated_with(spec: &SpectrumSpec, degree: usize, policy: &TruncationPolicy) -> Result<PhiResult> {
    check_phi_spec(spec)?;
    let mut d = degree;
    let mut value = phi_at_degree(spec, d)?;
    let mut converged = false;
    while 2 * d <= policy.cap {
        let next = phi_at_degree(spec, 2 * d)?;
        let done = (value - next).abs() <= policy.rel_tol * next.abs().max(f64::MIN_POSITIVE);
        d *= 2;
        value = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(PhiResult {
        n: spec.degree(),
        lambdas: spec.expanded().iter().map(|l| l.re).collect(),
        phi_truncated: value,
        degree: d,
        converged,
        lower_bound: phi_lower_bound(spec)?,
        schaeffer_upper: schaeffer_upper(spec.degree())?,
    })
}

/// `phi_exact_truncated_with` under the default policy.
pub fn phi_exact_truncated(spec: &SpectrumSpec, degree: usize) -> Result<PhiResult> {
    phi_exact_truncated_with(spec, degree, &TruncationPolicy::default())
}

/// Variant of `phi_at_degree` that also accepts complex spectra. Complex
/// data go through operator splitting and are reported as not certified.
pub fn phi_complex(spec: &SpectrumSpec, degree: usize) -> Result<QuotientValue> {
    spec.require_interior()?;
    if spec.contains_zero() {
        return Err(Error::Domain("an eigenvalue 0 forces h(0) = 0".into()));
    }
    let b = blaschke_coefficients(spec)?;
    let sign = if spec.degree().is_multiple_of(2) { 1.0 } else { -1.0 };
    let u: Vec<C64> = b.iter().map(|c| c * sign).collect();
    let (value, certified) = affine_l1_min(&u, &b, 1, degree)?;
    Ok(QuotientValue { value: (value - spec.product().norm()).max(0.0), degree, certified })
}

/// `1/‖(1 - z²) B‖_{ℓ∞^A} - ∏|λ_i|`, clamped at zero.
pub fn phi_lower_bound(spec: &SpectrumSpec) -> Result<f64> {
    spec.require_interior()?;
    let n = spec.degree();
    let k_max = dominant_end(spec.points()) + (8.0 * (n as f64).cbrt()).ceil() as usize;
    let w = weighted_product_coeffs(spec.points(), k_max.max(2))?;
    let sup = linf_a_norm(&w)?;
    Ok((1.0 / sup - spec.product().norm()).max(0.0))
}

/// `sqrt(e n)`.
pub fn schaeffer_upper(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    Ok((std::f64::consts::E * n as f64).sqrt())
}

/// Truncated `inf ‖f‖_W` over `f` with `f(λ_j) = 1/(ζ - λ_j)`.
pub fn resolvent_interpolation_norm(spec: &SpectrumSpec, zeta: C64, degree: usize) -> Result<f64> {
    check_zeta(spec, zeta)?;
    quotient_norm(&Target::ResolventLift(zeta), spec, degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn constant_and_identity_targets() {
        let spec = SpectrumSpec::real_singleton(0.5, 1).unwrap();
        let one = Target::Series(CoefficientSeries::new(vec![re(1.0)]));
        assert!((quotient_norm(&one, &spec, 4).unwrap() - 1.0).abs() < 1e-9);
        let z = Target::Series(CoefficientSeries::new(vec![re(0.0), re(1.0)]));
        assert!((quotient_norm(&z, &spec, 4).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn scalar_resolvent_values() {
        let spec = SpectrumSpec::real_singleton(0.5, 1).unwrap();
        assert!((resolvent_interpolation_norm(&spec, re(0.0), 8).unwrap() - 2.0).abs() < 1e-9);
        assert!((resolvent_interpolation_norm(&spec, re(2.0), 8).unwrap() - 2.0 / 3.0).abs() < 1e-9);
        assert!(matches!(resolvent_interpolation_norm(&spec, re(0.5), 8), Err(Error::Domain(_))));
    }

    #[test]
    fn phi_single_point() {
        let spec = SpectrumSpec::real_singleton(0.5, 1).unwrap();
        assert!((phi_at_degree(&spec, 8).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn phi_errors() {
        let complex = SpectrumSpec::singleton(C64::new(0.3, 0.2), 2).unwrap();
        assert!(matches!(phi_at_degree(&complex, 16), Err(Error::Mode(_))));
        let zero = SpectrumSpec::real_singleton(0.0, 2).unwrap();
        assert!(matches!(phi_at_degree(&zero, 16), Err(Error::Domain(_))));
        let spec = SpectrumSpec::real_singleton(0.5, 4).unwrap();
        assert!(matches!(phi_at_degree(&spec, 4), Err(Error::Precondition(_))));
        assert!(matches!(quotient_norm(&Target::InverseLift, &spec, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn lower_bound_single_point() {
        let spec = SpectrumSpec::real_singleton(0.5, 1).unwrap();
        assert!((phi_lower_bound(&spec).unwrap() - (1.0 / 0.875 - 0.5)).abs() < 1e-12);
        let clamp = SpectrumSpec::real_singleton(0.9, 1).unwrap();
        assert!(phi_lower_bound(&clamp).unwrap() >= 0.0);
    }

    #[test]
    fn schaeffer_values() {
        assert!((schaeffer_upper(1).unwrap() - 1.6487212707001282).abs() < 1e-15);
        assert!((schaeffer_upper(4).unwrap() - 3.297442541400256).abs() < 1e-14);
        assert!(schaeffer_upper(0).is_err());
    }

    #[test]
    fn cholesky_roundtrip() {
        let a = [re(4.0), C64::new(1.0, 1.0), C64::new(1.0, -1.0), re(3.0)];
        let l = cholesky(&a, 2).unwrap();
        let x = cholesky_solve(&l, 2, &[re(1.0), re(2.0)]);
        let r0 = a[0] * x[0] + a[1] * x[1];
        let r1 = a[2] * x[0] + a[3] * x[1];
        assert!((r0 - 1.0).norm() < 1e-14 && (r1 - 2.0).norm() < 1e-14);
    }
}
