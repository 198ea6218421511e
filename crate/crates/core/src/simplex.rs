//! Dense revised simplex for linear programs
//! `min cᵀx  s.t.  Ax = b, x ≥ 0` where selected variables may be free.
//!
//! Columns are stored sparsely, the basis inverse densely. Pricing is
//! Dantzig's rule, switching to Bland's rule after a run of degenerate
//! pivots so that cycling cannot occur.

use thiserror::Error;

/// Reduced costs this close to zero may be pure round-off.
const NOISE_REDUCED_COST: f64 = 1e-7;
/// Roll-backs allowed after a singular refactorization.
const MAX_RECOVERIES: usize = 4;
/// Feasibility relaxation of the Harris ratio test.
const HARRIS_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("problem is infeasible")]
    Infeasible,
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("basis matrix became singular")]
    SingularBasis,
    #[error("malformed problem: {0}")]
    Malformed(String),
}

/// Sparse column of the constraint matrix.
#[derive(Debug, Clone, Default)]
pub struct Column {
    pub rows: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Column {
    pub fn unit(row: usize, val: f64) -> Self {
        Self { rows: vec![row], vals: vec![val] }
    }

    /// Builds a column from dense values, dropping exact zeros.
    pub fn from_dense(offset: usize, vals: &[f64]) -> Self {
        let mut c = Self::default();
        for (i, &v) in vals.iter().enumerate() {
            if v != 0.0 {
                c.rows.push(offset + i);
                c.vals.push(v);
            }
        }
        c
    }

    fn dot(&self, y: &[f64]) -> f64 {
        self.rows.iter().zip(&self.vals).map(|(&r, &v)| v * y[r]).sum()
    }
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub n_rows: usize,
    pub columns: Vec<Column>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Variables without a sign constraint; empty means none. A free
    /// variable never leaves the basis once it has entered.
    pub free: Vec<bool>,
}

impl LinearProgram {
    fn is_free(&self, j: usize) -> bool {
        self.free.get(j).copied().unwrap_or(false)
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub max_iterations: usize,
    pub refactor_every: usize,
    pub degenerate_run_before_bland: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            optimality_tol: 1e-10,
            pivot_tol: 1e-7,
            max_iterations: 200_000,
            refactor_every: 64,
            degenerate_run_before_bland: 40,
        }
    }
}

struct Checkpoint {
    basis: Vec<usize>,
    binv: Vec<f64>,
    xb: Vec<f64>,
}

struct State<'a> {
    lp: &'a LinearProgram,
    cost: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    blocked: Vec<bool>,
    iterations: usize,
}

impl<'a> State<'a> {
    fn m(&self) -> usize {
        self.lp.n_rows
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m();
        let mut a = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            let col = &self.lp.columns[j];
            for (&r, &v) in col.rows.iter().zip(&col.vals) {
                a[r * m + k] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&p, &q| a[p * m + col].abs().total_cmp(&a[q * m + col].abs()))
                .unwrap();
            if a[piv * m + col].abs() < 1e-13 {
                return Err(LpError::SingularBasis);
            }
            if piv != col {
                for k in 0..m {
                    a.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            let d = 1.0 / a[col * m + col];
            for k in 0..m {
                a[col * m + k] *= d;
                inv[col * m + k] *= d;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] -= f * a[col * m + k];
                    inv[r * m + k] -= f * inv[col * m + k];
                }
            }
        }
        self.binv = inv;
        self.xb = (0..m)
            .map(|r| (0..m).map(|i| self.binv[r * m + i] * self.lp.b[i]).sum::<f64>())
            .collect();
        Ok(())
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint { basis: self.basis.clone(), binv: self.binv.clone(), xb: self.xb.clone() }
    }

    fn restore(&mut self, cp: &Checkpoint) {
        for &j in &self.basis {
            self.in_basis[j] = false;
        }
        for &j in &cp.basis {
            self.in_basis[j] = true;
        }
        self.basis.clone_from(&cp.basis);
        self.binv.clone_from(&cp.binv);
        self.xb.clone_from(&cp.xb);
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m();
        let mut y = vec![0.0; m];
        for (r, &j) in self.basis.iter().enumerate() {
            let cb = self.cost[j];
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[r * m..(r + 1) * m];
            for (yi, &v) in y.iter_mut().zip(row) {
                *yi += cb * v;
            }
        }
        y
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m();
        let col = &self.lp.columns[j];
        (0..m)
            .map(|r| {
                let row = &self.binv[r * m..(r + 1) * m];
                col.rows.iter().zip(&col.vals).map(|(&i, &v)| row[i] * v).sum()
            })
            .collect()
    }

    fn run(&mut self, opts: &SimplexOptions) -> Result<(), LpError> {
        let m = self.m();
        let mut degenerate_run = 0usize;
        let mut since_refactor = 0usize;
        let mut refactor_every = opts.refactor_every.max(m);
        let mut pivot_tol = opts.pivot_tol;
        let mut checkpoint = self.checkpoint();
        let mut recoveries = 0usize;
        // Columns whose improving reduced cost turned out to be round-off,
        // excluded until the basis changes.
        let mut skipped: Vec<usize> = Vec::new();
        loop {
            if self.iterations >= opts.max_iterations {
                return Err(LpError::IterationLimit(opts.max_iterations));
            }
            let bland = degenerate_run >= opts.degenerate_run_before_bland;
            let y = self.duals();
            let mut entering = None;
            let mut best = -opts.optimality_tol;
            for (j, col) in self.lp.columns.iter().enumerate() {
                if self.in_basis[j] || self.blocked[j] || skipped.contains(&j) {
                    continue;
                }
                let d = self.cost[j] - col.dot(&y);
                // A free variable improves the objective in either direction.
                let (score, sign) = if self.lp.is_free(j) && d > 0.0 { (-d, -1.0) } else { (d, 1.0) };
                if score < best {
                    entering = Some((j, sign));
                    if bland {
                        break;
                    }
                    best = score;
                }
            }
            let Some((q, sign)) = entering else {
                // Confirm optimality against a fresh factorization.
                if since_refactor == 0 {
                    return Ok(());
                }
                since_refactor = 0;
                match self.refactor() {
                    Ok(()) => checkpoint = self.checkpoint(),
                    Err(LpError::SingularBasis) if recoveries < MAX_RECOVERIES => {
                        recoveries += 1;
                        self.restore(&checkpoint);
                        pivot_tol *= 10.0;
                        refactor_every = (refactor_every / 2).max(16);
                        degenerate_run = 0;
                    }
                    Err(e) => return Err(e),
                }
                skipped.clear();
                continue;
            };
            let dq = sign * (self.cost[q] - self.lp.columns[q].dot(&y));
            let u = self.ftran(q);
            let w: Vec<f64> = u.iter().map(|v| sign * v).collect();
            // Harris two-pass ratio test: bound the step with slightly relaxed
            // feasibility, then take the largest pivot among the rows that
            // block within that bound. Free basic variables never block.
            let blocks = |r: usize| w[r] > pivot_tol && !self.lp.is_free(self.basis[r]);
            let mut theta_max = f64::INFINITY;
            for r in (0..m).filter(|&r| blocks(r)) {
                theta_max = theta_max.min((self.xb[r].max(0.0) + HARRIS_SLACK) / w[r]);
            }
            let mut leave: Option<usize> = None;
            for r in (0..m).filter(|&r| blocks(r)) {
                if self.xb[r].max(0.0) / w[r] <= theta_max {
                    let better = match leave {
                        None => true,
                        Some(l) if bland => self.basis[r] < self.basis[l],
                        Some(l) => w[r] > w[l],
                    };
                    if better {
                        leave = Some(r);
                    }
                }
            }
            let Some(r) = leave else {
                if dq > -NOISE_REDUCED_COST {
                    skipped.push(q);
                    continue;
                }
                if since_refactor > 0 {
                    // Rule out an unbounded ray produced by a drifted inverse.
                    since_refactor = 0;
                    match self.refactor() {
                        Ok(()) => checkpoint = self.checkpoint(),
                        Err(LpError::SingularBasis) if recoveries < MAX_RECOVERIES => {
                            recoveries += 1;
                            self.restore(&checkpoint);
                            pivot_tol *= 10.0;
                            refactor_every = (refactor_every / 2).max(16);
                            degenerate_run = 0;
                        }
                        Err(e) => return Err(e),
                    }
                    skipped.clear();
                    continue;
                }
                return Err(LpError::Unbounded);
            };
            skipped.clear();
            let theta = self.xb[r].max(0.0) / w[r];
            if theta <= 1e-14 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for i in 0..m {
                self.xb[i] -= theta * w[i];
            }
            self.xb[r] = sign * theta;
            let piv = u[r];
            let (head, rest) = self.binv.split_at_mut(r * m);
            let (prow, tail) = rest.split_at_mut(m);
            for v in prow.iter_mut() {
                *v /= piv;
            }
            for (i, row) in head.chunks_mut(m).chain(tail.chunks_mut(m)).enumerate() {
                let idx = if i < r { i } else { i + 1 };
                let f = u[idx];
                if f == 0.0 {
                    continue;
                }
                for (a, &p) in row.iter_mut().zip(prow.iter()) {
                    *a -= f * p;
                }
            }
            self.in_basis[self.basis[r]] = false;
            self.in_basis[q] = true;
            self.basis[r] = q;
            self.iterations += 1;
            since_refactor += 1;
            if since_refactor >= refactor_every {
                since_refactor = 0;
                match self.refactor() {
                    Ok(()) => checkpoint = self.checkpoint(),
                    Err(LpError::SingularBasis) if recoveries < MAX_RECOVERIES => {
                        // Roll back to the last sound basis and continue
                        // with larger pivots and fresher factorizations.
                        recoveries += 1;
                        self.restore(&checkpoint);
                        pivot_tol *= 10.0;
                        refactor_every = (refactor_every / 2).max(16);
                        skipped.clear();
                        degenerate_run = 0;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
}

/// Solves the program. `initial_basis`, when given, must index `n_rows`
/// columns forming a primal feasible basis; otherwise a phase-one problem
/// with artificial variables is solved first.
pub fn solve(
    lp: &LinearProgram,
    initial_basis: Option<&[usize]>,
    opts: &SimplexOptions,
) -> Result<LpSolution, LpError> {
    let m = lp.n_rows;
    let n = lp.columns.len();
    if lp.b.len() != m || lp.c.len() != n {
        return Err(LpError::Malformed("dimension mismatch".into()));
    }
    if lp.columns.iter().any(|c| c.rows.iter().any(|&r| r >= m)) {
        return Err(LpError::Malformed("row index out of range".into()));
    }
    match initial_basis {
        Some(basis) => {
            if basis.len() != m {
                return Err(LpError::Malformed("initial basis has wrong size".into()));
            }
            let mut st = new_state(lp, lp.c.clone(), basis.to_vec(), vec![false; n]);
            st.refactor()?;
            if st.basis.iter().zip(&st.xb).any(|(&j, &v)| v < -1e-9 && !lp.is_free(j)) {
                return Err(LpError::Malformed("initial basis is not primal feasible".into()));
            }
            st.run(opts)?;
            Ok(extract(&st, n))
        }
        None => two_phase(lp, opts),
    }
}

fn new_state<'a>(lp: &'a LinearProgram, cost: Vec<f64>, basis: Vec<usize>, blocked: Vec<bool>) -> State<'a> {
    let mut in_basis = vec![false; lp.columns.len()];
    for &j in &basis {
        in_basis[j] = true;
    }
    State { lp, cost, basis, in_basis, binv: Vec::new(), xb: Vec::new(), blocked, iterations: 0 }
}

fn extract(st: &State<'_>, n: usize) -> LpSolution {
    let mut x = vec![0.0; n];
    for (r, &j) in st.basis.iter().enumerate() {
        if j < n {
            x[j] = if st.lp.is_free(j) { st.xb[r] } else { st.xb[r].max(0.0) };
        }
    }
    let objective = x.iter().zip(&st.lp.c).map(|(a, b)| a * b).sum();
    LpSolution { x, objective, iterations: st.iterations }
}

fn two_phase(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution, LpError> {
    let m = lp.n_rows;
    let n = lp.columns.len();
    let mut aug = LinearProgram { n_rows: m, columns: Vec::with_capacity(n + m), b: lp.b.clone(), c: vec![], free: lp.free.clone() };
    for col in &lp.columns {
        let mut c = col.clone();
        for (r, v) in c.rows.iter().zip(c.vals.iter_mut()) {
            if lp.b[*r] < 0.0 {
                *v = -*v;
            }
        }
        aug.columns.push(c);
    }
    for b in &mut aug.b {
        *b = b.abs();
    }
    for r in 0..m {
        aug.columns.push(Column::unit(r, 1.0));
    }
    let mut cost = vec![0.0; n + m];
    for c in &mut cost[n..] {
        *c = 1.0;
    }
    aug.c = cost.clone();
    let basis: Vec<usize> = (n..n + m).collect();
    let mut st = new_state(&aug, cost, basis, vec![false; n + m]);
    st.refactor()?;
    st.run(opts)?;
    let scale = 1.0 + aug.b.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let infeas: f64 = st.basis.iter().zip(&st.xb).filter(|(j, _)| **j >= n).map(|(_, v)| v.max(0.0)).sum();
    if infeas > 1e-8 * scale {
        return Err(LpError::Infeasible);
    }
    // Drive zero-level artificials out of the basis where possible.
    for r in 0..m {
        if st.basis[r] < n {
            continue;
        }
        let row = st.binv[r * m..(r + 1) * m].to_vec();
        if let Some(q) = (0..n).find(|&j| !st.in_basis[j] && aug.columns[j].dot(&row).abs() > 1e-7) {
            st.in_basis[st.basis[r]] = false;
            st.in_basis[q] = true;
            st.basis[r] = q;
            st.refactor()?;
        }
    }
    let phase1_iters = st.iterations;
    let mut cost2 = lp.c.clone();
    cost2.extend(std::iter::repeat_n(0.0, m));
    st.cost = cost2;
    for b in st.blocked[n..].iter_mut() {
        *b = true;
    }
    st.iterations = 0;
    st.run(opts)?;
    let mut sol = extract(&st, n);
    sol.objective = sol.x.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
    sol.iterations += phase1_iters;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_lp(a: &[&[f64]], b: &[f64], c: &[f64]) -> LinearProgram {
        let m = a.len();
        let n = c.len();
        let columns = (0..n)
            .map(|j| Column::from_dense(0, &(0..m).map(|i| a[i][j]).collect::<Vec<_>>()))
            .collect();
        LinearProgram { n_rows: m, columns, b: b.to_vec(), c: c.to_vec(), free: vec![] }
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y  s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  → optimum 36 at (2, 6)
        let lp = dense_lp(
            &[&[1., 0., 1., 0., 0.], &[0., 2., 0., 1., 0.], &[3., 2., 0., 0., 1.]],
            &[4., 12., 18.],
            &[-3., -5., 0., 0., 0.],
        );
        let s = solve(&lp, None, &SimplexOptions::default()).unwrap();
        assert!((s.objective + 36.0).abs() < 1e-10);
        assert!((s.x[0] - 2.0).abs() < 1e-10 && (s.x[1] - 6.0).abs() < 1e-10);
        let s2 = solve(&lp, Some(&[2, 3, 4]), &SimplexOptions::default()).unwrap();
        assert!((s2.objective + 36.0).abs() < 1e-10);
    }

    #[test]
    fn infeasible_detected() {
        // x1 + x2 = -1 with x ≥ 0
        let lp = dense_lp(&[&[1., 1.]], &[-1.], &[1., 1.]);
        assert_eq!(solve(&lp, None, &SimplexOptions::default()).unwrap_err(), LpError::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // min -x1 s.t. x1 - x2 = 0
        let lp = dense_lp(&[&[1., -1.]], &[0.], &[-1., 0.]);
        assert_eq!(solve(&lp, None, &SimplexOptions::default()).unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn l1_regression_line() {
        // min |1 - g| + |2 - g| + |4 - g| over g: median 2 gives 3.
        // rows: g - p_k + q_k = t_k, g = g⁺ - g⁻
        let t = [1.0, 2.0, 4.0];
        let mut columns = vec![Column::from_dense(0, &[1., 1., 1.]), Column::from_dense(0, &[-1., -1., -1.])];
        let mut c = vec![0.0, 0.0];
        for k in 0..3 {
            columns.push(Column::unit(k, -1.0));
            columns.push(Column::unit(k, 1.0));
            c.extend([1.0, 1.0]);
        }
        let lp = LinearProgram { n_rows: 3, columns, b: t.to_vec(), c, free: vec![] };
        let s = solve(&lp, Some(&[3, 5, 7]), &SimplexOptions::default()).unwrap();
        assert!((s.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn free_variable_takes_negative_values() {
        // min |-3 - g| + |-1 - g|: any g in [-3, -1] gives 2.
        let mut columns = vec![Column::from_dense(0, &[1., 1.])];
        let mut c = vec![0.0];
        for k in 0..2 {
            columns.push(Column::unit(k, -1.0));
            columns.push(Column::unit(k, 1.0));
            c.extend([1.0, 1.0]);
        }
        let lp = LinearProgram { n_rows: 2, columns, b: vec![-3.0, -1.0], c, free: vec![true, false, false, false, false] };
        let s = solve(&lp, Some(&[1, 3]), &SimplexOptions::default()).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
        assert!(s.x[0] <= -1.0 + 1e-12 && s.x[0] >= -3.0 - 1e-12);
        let s2 = solve(&lp, None, &SimplexOptions::default()).unwrap();
        assert!((s2.objective - 2.0).abs() < 1e-12);
    }
}
