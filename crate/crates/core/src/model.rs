//! The lower-triangular Toeplitz counterexample, the Malmquist-Walsh basis of
//! a model space, and the compression of multiplication by `z` to it.

use crate::blaschke::blaschke_factor;
use crate::linalg::DenseMatrix;
use crate::{Error, Result, C64};
use serde::Serialize;

/// Node count the quadrature starts from.
pub const BASE_QUADRATURE_NODES: usize = 2048;
const MAX_QUADRATURE_NODES: usize = 1 << 21;
const GRAM_TOL: f64 = 1e-10;

/// Multiset of eigenvalues in the closed unit disk.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSpec {
    points: Vec<(C64, usize)>,
}

impl SpectrumSpec {
    pub fn new(points: Vec<(C64, usize)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("spectrum must contain at least one point".into()));
        }
        for &(l, m) in &points {
            if !l.re.is_finite() || !l.im.is_finite() || l.norm() > 1.0 + 1e-15 {
                return Err(Error::Domain(format!("eigenvalue {l} lies outside the closed unit disk")));
            }
            if m == 0 {
                return Err(Error::Domain(format!("eigenvalue {l} has multiplicity 0")));
            }
        }
        Ok(Self { points })
    }

    /// `{(λ, n)}`.
    pub fn singleton(lambda: C64, n: usize) -> Result<Self> {
        Self::new(vec![(lambda, n)])
    }

    pub fn real_singleton(lambda: f64, n: usize) -> Result<Self> {
        Self::singleton(C64::new(lambda, 0.0), n)
    }

    pub fn points(&self) -> &[(C64, usize)] {
        &self.points
    }

    /// Degree of the minimal polynomial, `Σ m_i`.
    pub fn degree(&self) -> usize {
        self.points.iter().map(|p| p.1).sum()
    }

    /// Eigenvalues repeated by multiplicity, in the stored order.
    pub fn expanded(&self) -> Vec<C64> {
        self.points.iter().flat_map(|&(l, m)| std::iter::repeat_n(l, m)).collect()
    }

    pub fn is_real(&self) -> bool {
        self.points.iter().all(|p| p.0.im == 0.0)
    }

    pub fn all_interior(&self) -> bool {
        self.points.iter().all(|p| p.0.norm() < 1.0)
    }

    pub fn contains_zero(&self) -> bool {
        self.points.iter().any(|p| p.0 == C64::new(0.0, 0.0))
    }

    /// `∏ λ_i` with multiplicity.
    pub fn product(&self) -> C64 {
        self.points.iter().fold(C64::new(1.0, 0.0), |acc, &(l, m)| acc * l.powu(m as u32))
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|p| p.0.norm()).fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.points.iter().map(|p| p.0.norm()).fold(f64::INFINITY, f64::min)
    }

    /// Spectrum with every eigenvalue conjugated.
    pub fn conj(&self) -> Self {
        Self { points: self.points.iter().map(|&(l, m)| (l.conj(), m)).collect() }
    }

    /// Value of the Blaschke product `∏ b_{λ_i}(z)^{m_i}`.
    pub fn blaschke_value(&self, z: C64) -> C64 {
        self.points
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, &(l, m)| acc * blaschke_factor(l, z).powu(m as u32))
    }

    pub(crate) fn require_interior(&self) -> Result<()> {
        match self.points.iter().find(|p| !(p.0.norm() < 1.0)) {
            Some(p) => Err(Error::Domain(format!("eigenvalue {} lies on the unit circle", p.0))),
            None => Ok(()),
        }
    }
}

/// Lower-triangular Toeplitz matrix with constant diagonal `λ`.
#[derive(Debug, Clone)]
pub struct ToeplitzMatrix {
    entries: DenseMatrix,
    lambda: C64,
    n: usize,
}

impl ToeplitzMatrix {
    pub fn entries(&self) -> &DenseMatrix {
        &self.entries
    }
    pub fn lambda(&self) -> C64 {
        self.lambda
    }
    pub fn n(&self) -> usize {
        self.n
    }
    /// Product of the diagonal, `λ^n`.
    pub fn determinant(&self) -> C64 {
        (0..self.n).fold(C64::new(1.0, 0.0), |acc, i| acc * self.entries[(i, i)])
    }
}

/// Entry on the `d`-th subdiagonal of the counterexample matrix.
fn toeplitz_band(lambda: C64, d: usize) -> C64 {
    match d {
        0 => lambda,
        _ => (-lambda.conj()).powu(d as u32 - 1) * (1.0 - lambda * lambda),
    }
}

/// Builds the `n × n` counterexample: diagonal `λ`, subdiagonal `1 - λ²`,
/// and `(-conj λ)^{d-1} (1 - λ²)` on the `d`-th subdiagonal.
pub fn build_toeplitz(lambda: C64, n: usize) -> Result<ToeplitzMatrix> {
    let r = lambda.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("need 0 < |lambda| < 1, got {lambda}")));
    }
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let band: Vec<C64> = (0..n).map(|d| toeplitz_band(lambda, d)).collect();
    let entries = DenseMatrix::from_fn(n, n, |j, i| if j >= i { band[j - i] } else { C64::new(0.0, 0.0) });
    Ok(ToeplitzMatrix { entries, lambda, n })
}

/// Orthonormal rational basis `e_j = sqrt(1-|λ_j|²)/(1 - conj(λ_j) z) · ∏_{i<j} b_{λ_i}`
/// of the model space of a finite Blaschke product.
#[derive(Debug, Clone)]
pub struct MalmquistWalshBasis {
    poles: Vec<C64>,
    normalizers: Vec<f64>,
    nodes: usize,
}

impl MalmquistWalshBasis {
    pub fn dim(&self) -> usize {
        self.poles.len()
    }

    /// `λ_j` for the `j`-th basis function (0-based).
    pub fn pole(&self, j: usize) -> C64 {
        self.poles[j]
    }

    pub fn normalizer(&self, j: usize) -> f64 {
        self.normalizers[j]
    }

    /// The Blaschke prefix `λ_0, …, λ_{j-1}` of basis function `j`.
    pub fn prefix(&self, j: usize) -> &[C64] {
        &self.poles[..j]
    }

    /// Quadrature size at which orthonormality was certified.
    pub fn quadrature_nodes(&self) -> usize {
        self.nodes
    }

    /// All basis functions evaluated at `z`.
    pub fn eval_all(&self, z: C64) -> Vec<C64> {
        let mut prefix = C64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.dim());
        for (l, s) in self.poles.iter().zip(&self.normalizers) {
            out.push(prefix * *s / (1.0 - l.conj() * z));
            prefix *= blaschke_factor(*l, z);
        }
        out
    }

    pub fn eval(&self, j: usize, z: C64) -> C64 {
        self.eval_all(z)[j]
    }

    /// Taylor coefficients `0..len` of every basis function.
    pub fn coefficients(&self, len: usize) -> Vec<Vec<C64>> {
        let mut prefix = vec![C64::new(0.0, 0.0); len];
        if len > 0 {
            prefix[0] = C64::new(1.0, 0.0);
        }
        let mut out = Vec::with_capacity(self.dim());
        for (l, s) in self.poles.iter().zip(&self.normalizers) {
            let mut e = divide_by_pole_factor(&prefix, *l);
            for c in &mut e {
                *c *= *s;
            }
            out.push(e);
            let shifted = multiply_by_root_factor(&prefix, *l);
            prefix = divide_by_pole_factor(&shifted, *l);
        }
        out
    }

    /// `max |G - I|` of the Gram matrix under `nodes`-point trapezoid quadrature.
    pub fn gram_residual(&self, nodes: usize) -> f64 {
        let g = quadrature_products(self, nodes, false);
        (&g - &DenseMatrix::identity(self.dim())).max_abs()
    }
}

/// `x(z) / (1 - conj(λ) z)` as a power series truncated to the length of `x`.
fn divide_by_pole_factor(x: &[C64], lambda: C64) -> Vec<C64> {
    let lc = lambda.conj();
    let mut y = Vec::with_capacity(x.len());
    let mut prev = C64::new(0.0, 0.0);
    for &v in x {
        prev = v + lc * prev;
        y.push(prev);
    }
    y
}

/// `(z - λ) x(z)` truncated to the length of `x`.
fn multiply_by_root_factor(x: &[C64], lambda: C64) -> Vec<C64> {
    (0..x.len())
        .map(|k| if k == 0 { -lambda * x[0] } else { x[k - 1] - lambda * x[k] })
        .collect()
}

/// `⟨z^s e_i, e_j⟩` for all `i, j` (row `j`, column `i`) with `s ∈ {0, 1}`.
fn quadrature_products(basis: &MalmquistWalshBasis, nodes: usize, shift: bool) -> DenseMatrix {
    let d = basis.dim();
    let mut m = DenseMatrix::zeros(d, d);
    let step = std::f64::consts::TAU / nodes as f64;
    for t in 0..nodes {
        let z = C64::from_polar(1.0, step * t as f64);
        let e = basis.eval_all(z);
        let w = if shift { z } else { C64::new(1.0, 0.0) };
        for j in 0..d {
            let ej = e[j].conj();
            for i in 0..d {
                m[(j, i)] += w * e[i] * ej;
            }
        }
    }
    m.scale(C64::new(1.0 / nodes as f64, 0.0))
}

/// Builds the basis and certifies orthonormality by doubling the quadrature
/// from 2048 nodes until the Gram residual is below `1e-10`.
pub fn malmquist_walsh(spec: &SpectrumSpec) -> Result<MalmquistWalshBasis> {
    spec.require_interior()?;
    let poles = spec.expanded();
    let normalizers = poles.iter().map(|l| (1.0 - l.norm_sqr()).sqrt()).collect();
    let mut basis = MalmquistWalshBasis { poles, normalizers, nodes: BASE_QUADRATURE_NODES };
    loop {
        if basis.gram_residual(basis.nodes) < GRAM_TOL {
            return Ok(basis);
        }
        basis.nodes *= 2;
        if basis.nodes > MAX_QUADRATURE_NODES {
            return Err(Error::Numerical("Gram matrix quadrature did not converge".into()));
        }
    }
}

/// Matrix of multiplication by `z` compressed to the model space, in the
/// Malmquist-Walsh basis: entry `(j, i)` is `⟨z e_i, e_j⟩`.
pub fn model_matrix(spec: &SpectrumSpec) -> Result<DenseMatrix> {
    let basis = malmquist_walsh(spec)?;
    Ok(quadrature_products(&basis, basis.quadrature_nodes(), true))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalPolyReport {
    pub degree: usize,
    pub residual: f64,
}

/// Checks that `(T - λI)^n = 0` while `(T - λI)^{n-1} ≠ 0`.
///
/// The reported degree is the first power whose Frobenius norm collapses by
/// more than `1e-8` relative to the submultiplicative estimate from the
/// previous power.
pub fn minimal_poly_check(t: &ToeplitzMatrix) -> Result<MinimalPolyReport> {
    let n = t.n();
    let nil = &t.entries - &DenseMatrix::identity(n).scale(t.lambda);
    let nil_norm = nil.frobenius();
    let mut power = DenseMatrix::identity(n);
    let mut prev_norm = power.frobenius();
    let mut degree = None;
    for d in 1..=n {
        power = &power * &nil;
        let norm = power.frobenius();
        if degree.is_none() && norm <= 1e-8 * prev_norm * nil_norm.max(f64::MIN_POSITIVE) {
            degree = Some(d);
        }
        prev_norm = norm;
    }
    let residual = prev_norm;
    let scale = nil_norm.max(1.0).powi(n as i32);
    if residual > 1e-8 * scale {
        return Err(Error::Consistency(format!(
            "(T - lambda I)^{n} has Frobenius norm {residual:e}"
        )));
    }
    Ok(MinimalPolyReport { degree: degree.unwrap_or(n), residual })
}

/// `det(T) · T⁻¹` by forward substitution, one column at a time.
pub fn det_times_inverse(t: &ToeplitzMatrix) -> Result<DenseMatrix> {
    let n = t.n();
    let a = t.entries();
    if (0..n).any(|i| a[(i, i)] == C64::new(0.0, 0.0)) {
        return Err(Error::Domain("singular triangular matrix".into()));
    }
    let det = t.determinant();
    let mut out = DenseMatrix::zeros(n, n);
    for c in 0..n {
        for r in c..n {
            let mut acc = if r == c { det } else { C64::new(0.0, 0.0) };
            for k in c..r {
                acc -= a[(r, k)] * out[(k, c)];
            }
            out[(r, c)] = acc / a[(r, r)];
        }
    }
    Ok(out)
}
