//! The study commands. Each returns its tables; writing them is left to
//! [`crate::harness::output::emit`].
//!
//! Grid cells are independent, so every command maps them over a worker pool
//! and collects the results in input order, which keeps output byte-identical
//! for a given configuration regardless of the worker count.

use crate::asymptotics::{
    alpha0, classify_region, decay_exponent_fit, representative_k, stationary_phase_estimate_with, truth_series,
    uniform_airy_estimate_with_truth, uniform_airy_terms, BranchTracker, RegionLabel,
};
use crate::blaschke::{dominant_end, linf_a_norm, weighted_coeffs, MoebiusParam};
use crate::harness::config::StudyConfig;
use crate::harness::output::{Cell, Table};
use crate::model::SpectrumSpec;
use crate::resolvent::{applicable_closed_forms, optimize_rho, BoundQuery, BoundRule};
use crate::wiener::{phi_exact_truncated_with, phi_lower_bound, schaeffer_upper};
use crate::{Error, Result, C64};
use rayon::prelude::*;

/// Relative slack of the dominance column in the bound sweep.
pub const DOMINANCE_TOL: f64 = 1e-9;
/// Largest `|m|` for which the growth study solves the linear program.
pub const GROWTH_LP_MAX_N: usize = 64;

/// Maps `f` over `items` on a pool of `workers` threads, keeping input order.
pub fn par_map_ordered<T, R, F>(workers: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

fn grid<A: Copy, B: Copy>(xs: &[A], ys: &[B]) -> Vec<(A, B)> {
    xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect()
}

/// Index up to which the weighted series is resolved: past the dominant
/// region by `8 n^{1/3}`.
fn coverage(lambda: C64, n: usize) -> usize {
    dominant_end(&[(lambda, n)]) + (8.0 * (n as f64).cbrt()).ceil() as usize
}

/// Coefficient tables of `(1 - z²) b_λ^n` and their sup norms.
pub fn cmd_coeffs(cfg: &StudyConfig) -> Result<Vec<Table>> {
    let n_grid = cfg.require_n_grid()?;
    let k_top = cfg.k_list.iter().copied().max();
    let cells = grid(&cfg.lambdas, n_grid);
    let results = par_map_ordered(cfg.workers, &cells, |&(lambda, n)| -> Result<_> {
        let p = MoebiusParam::new(lambda, n)?;
        let k_max = coverage(lambda, n).max(k_top.unwrap_or(0)).max(2);
        let s = weighted_coeffs(p, k_max)?;
        let sup = linf_a_norm(&s)?;
        let argmax = s.coeffs().iter().map(|c| c.norm()).enumerate().fold((0, 0.0), |b, (k, v)| if v > b.1 { (k, v) } else { b }).0;
        Ok((lambda, n, s, sup, argmax))
    })?;
    let mut coeffs = Table::new("coeffs", &["lambda", "lambda_im", "n", "k", "re", "im", "abs"]);
    let mut norms =
        Table::new("norms", &["lambda", "lambda_im", "n", "k_max", "linf", "sqrt_n_linf", "argmax_k", "argmax_a", "tail_tol"]);
    for r in results {
        let (lambda, n, s, sup, argmax) = r?;
        let ks: Vec<usize> = if cfg.k_list.is_empty() { (0..s.len()).collect() } else { cfg.k_list.clone() };
        for k in ks {
            let c = s.coeffs()[k];
            coeffs.push(vec![lambda.re.into(), lambda.im.into(), n.into(), k.into(), c.re.into(), c.im.into(), c.norm().into()]);
        }
        norms.push(vec![
            lambda.re.into(),
            lambda.im.into(),
            n.into(),
            (s.len() - 1).into(),
            sup.into(),
            ((n as f64).sqrt() * sup).into(),
            argmax.into(),
            (argmax as f64 / n as f64).into(),
            s.tail_tol().into(),
        ]);
    }
    Ok(vec![coeffs, norms])
}

/// Lower bound, truncated `φ` and the `sqrt(en)` baseline per `n`.
pub fn cmd_growth(cfg: &StudyConfig) -> Result<Vec<Table>> {
    let n_grid = cfg.require_n_grid()?;
    let lambdas = cfg.real_unit_lambdas()?;
    let cells = grid(&lambdas, n_grid);
    let policy = cfg.truncation;
    let rows = par_map_ordered(cfg.workers, &cells, |&(lambda, n)| -> Result<_> {
        let spec = SpectrumSpec::real_singleton(lambda, n)?;
        let lower = phi_lower_bound(&spec)?;
        let phi = if n <= GROWTH_LP_MAX_N {
            match phi_exact_truncated_with(&spec, policy.start_degree(n), &policy) {
                Ok(r) => Some((r.phi_truncated, r.degree, r.converged)),
                Err(e) => {
                    eprintln!("growth: lambda = {lambda}, n = {n}: linear program failed: {e}");
                    None
                }
            }
        } else {
            None
        };
        Ok((lambda, n, lower, phi, schaeffer_upper(n)?))
    })?;
    let mut table = Table::new(
        "growth",
        &["lambda", "n", "L", "phi_D", "degree", "converged", "sqrt_en", "L_over_sqrt_n", "sandwich_ok", "below_sqrt_en"],
    );
    let mut lows: Vec<(f64, usize, f64)> = Vec::new();
    for r in rows {
        let (lambda, n, lower, phi, upper) = r?;
        let sandwich = phi.map(|(v, _, _)| lower <= v);
        table.push(vec![
            lambda.into(),
            n.into(),
            lower.into(),
            phi.map(|p| p.0).into(),
            phi.map(|p| p.1).into(),
            phi.map_or(Cell::Bool(false), |p| p.2.into()),
            upper.into(),
            (lower / (n as f64).sqrt()).into(),
            sandwich.into(),
            (lower <= upper).into(),
        ]);
        lows.push((lambda, n, lower));
    }
    let mut ratios = Table::new("growth_ratios", &["lambda", "n", "four_n", "L_ratio"]);
    for &(lambda, n, l) in &lows {
        if let Some(&(_, n4, l4)) = lows.iter().find(|&&(lam, m, _)| lam == lambda && m == 4 * n) {
            ratios.push(vec![lambda.into(), n.into(), n4.into(), (l4 / l).into()]);
        }
    }
    Ok(vec![table, ratios])
}

/// Optimised and closed-form resolvent bounds over the λ × n × ζ grid.
pub fn cmd_bounds(cfg: &StudyConfig) -> Result<Vec<Table>> {
    let n_grid = cfg.require_n_grid()?;
    let cells: Vec<(C64, usize, C64)> =
        grid(&cfg.lambdas, n_grid).into_iter().flat_map(|(l, n)| cfg.zetas.iter().map(move |&z| (l, n, z))).collect();
    let c = cfg.c;
    let results = par_map_ordered(cfg.workers, &cells, |&(lambda, n, zeta)| -> Result<_> {
        let q = BoundQuery::new(SpectrumSpec::singleton(lambda, n)?, zeta, c)?;
        let opt = optimize_rho(&q)?;
        Ok((opt, applicable_closed_forms(&q)))
    })?;
    let mut table = Table::new(
        "bounds",
        &[
            "lambda",
            "lambda_im",
            "n",
            "zeta_re",
            "zeta_im",
            "C",
            "rule",
            "value",
            "ln_value",
            "rho_star",
            "r",
            "proof_form",
            "optimized_dominates",
            "continuity_extended",
        ],
    );
    for (&(lambda, n, zeta), res) in cells.iter().zip(results) {
        let (opt, closed) = match res {
            Ok(v) => v,
            Err(e) => {
                eprintln!("bounds: lambda = {lambda}, n = {n}, zeta = {zeta}: skipped: {e}");
                continue;
            }
        };
        let head = |rule: &str| -> Vec<Cell> {
            vec![lambda.re.into(), lambda.im.into(), n.into(), zeta.re.into(), zeta.im.into(), c.into(), rule.into()]
        };
        let mut row = head(opt.rule.label());
        row.extend([
            opt.value.into(),
            opt.ln_value.into(),
            opt.rho_star.into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            opt.continuity_extended.into(),
        ]);
        table.push(row);
        for cf in closed {
            let dominated = matches!(cf.rule, BoundRule::Case2 | BoundRule::Case3 | BoundRule::Case4)
                .then(|| opt.ln_value <= cf.ln_value + DOMINANCE_TOL);
            let mut row = head(cf.rule.label());
            row.extend([
                cf.value.into(),
                cf.ln_value.into(),
                cf.rho_star.into(),
                cf.r.into(),
                cf.proof_form.into(),
                dominated.into(),
                cf.continuity_extended.into(),
            ]);
            table.push(row);
        }
        if n == 1 {
            // A 1×1 operator: the resolvent is the scalar 1/(ζ - λ).
            let exact = 1.0 / (zeta - lambda).norm();
            let mut row = head("exact_scalar");
            row.extend([exact.into(), exact.ln().into(), Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty, false.into()]);
            table.push(row);
        }
    }
    Ok(vec![table])
}

/// Default coefficient indices: one representative per region plus windows
/// of width `0.2 n` around the right coalescence and the centre `k = n`.
pub fn default_asymptotic_ks(lambda: f64, n: usize, alpha: Option<f64>) -> Result<Vec<usize>> {
    let mut ks = Vec::new();
    for r in RegionLabel::ALL {
        ks.push(representative_k(lambda, r, n, alpha)?);
    }
    let a0 = alpha0(lambda)?;
    let step = (n / 256).max(1);
    for centre in [1.0 / a0, 1.0] {
        let lo = ((centre - 0.2) * n as f64).ceil().max(1.0) as usize;
        let hi = ((centre + 0.2) * n as f64).floor() as usize;
        ks.extend((lo..=hi).step_by(step));
    }
    ks.sort_unstable();
    ks.dedup();
    Ok(ks)
}

struct AsymptoticRow {
    k: usize,
    region: RegionLabel,
    method: &'static str,
    estimate: Option<f64>,
    truth: f64,
    rel_error: Option<f64>,
    gamma_sq: Option<f64>,
    branch_ok: Option<bool>,
}

fn asymptotic_rows(cfg: &StudyConfig, lambda: f64, n: usize) -> Result<Vec<AsymptoticRow>> {
    let ks = if cfg.k_list.is_empty() { default_asymptotic_ks(lambda, n, cfg.alpha)? } else { cfg.k_list.clone() };
    let k_top = ks.iter().copied().max().unwrap_or(0);
    let truth = truth_series(lambda, n, k_top + 3)?;
    let mut tracker = BranchTracker::new();
    let mut out = Vec::with_capacity(ks.len());
    for k in ks {
        let region = classify_region(lambda, n, k, cfg.alpha, cfg.beta)?.label;
        let exact = truth.coeffs()[k].re;
        let mut row =
            AsymptoticRow { k, region, method: "none", estimate: None, truth: exact, rel_error: None, gamma_sq: None, branch_ok: None };
        if let Ok(terms) = uniform_airy_terms(lambda, n, k) {
            let e = uniform_airy_estimate_with_truth(lambda, n, k, &truth)?;
            row.method = "uniform_airy";
            row.estimate = Some(e.value.re);
            row.rel_error = Some(e.rel_error);
            row.gamma_sq = Some(e.gamma_sq);
            row.branch_ok = Some(tracker.observe(&terms).is_ok());
        } else if let Ok(v) = stationary_phase_estimate_with(lambda, n, k, cfg.beta) {
            row.method = "stationary_phase";
            row.estimate = Some(v);
            row.rel_error = Some(crate::asymptotics::relative_error(C64::new(v, 0.0), C64::new(exact, 0.0)));
        }
        out.push(row);
    }
    Ok(out)
}

/// Asymptotic estimates against exact coefficients, plus per-region decay
/// fits when the n grid has at least four sizes.
pub fn cmd_asymptotics(cfg: &StudyConfig) -> Result<Vec<Table>> {
    let n_grid = cfg.require_n_grid()?;
    let lambdas = cfg.real_unit_lambdas()?;
    let cells = grid(&lambdas, n_grid);
    let results = par_map_ordered(cfg.workers, &cells, |&(lambda, n)| asymptotic_rows(cfg, lambda, n))?;
    let mut table = Table::new(
        "asymptotics",
        &["lambda", "n", "k", "region", "method", "estimate_re", "truth_re", "rel_error", "gamma_sq", "branch_ok"],
    );
    for (&(lambda, n), rows) in cells.iter().zip(results) {
        for r in rows? {
            table.push(vec![
                lambda.into(),
                n.into(),
                r.k.into(),
                r.region.name().into(),
                r.method.into(),
                r.estimate.into(),
                r.truth.into(),
                r.rel_error.into(),
                r.gamma_sq.into(),
                r.branch_ok.into(),
            ]);
        }
    }
    let mut tables = vec![table];
    if n_grid.len() >= 4 {
        let fits_in = grid(&lambdas, &RegionLabel::ALL);
        let fits = par_map_ordered(cfg.workers, &fits_in, |&(lambda, region)| decay_exponent_fit(lambda, region, n_grid))?;
        let mut t = Table::new("decay_fits", &["lambda", "region", "abscissa", "slope", "intercept"]);
        for (&(lambda, region), fit) in fits_in.iter().zip(fits) {
            match fit {
                Ok(f) => t.push(vec![
                    lambda.into(),
                    region.name().into(),
                    (if f.log_linear { "n" } else { "ln_n" }).into(),
                    f.slope.into(),
                    f.intercept.into(),
                ]),
                Err(e) => eprintln!("asymptotics: lambda = {lambda}, region {}: fit failed: {e}", region.name()),
            }
        }
        tables.push(t);
    }
    Ok(tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Settings;

    fn cfg(lambda: &str, n: &str, k: Option<&str>) -> StudyConfig {
        Settings { lambda: Some(lambda.into()), n: Some(n.into()), k: k.map(Into::into), workers: Some("2".into()), ..Default::default() }
            .resolve()
            .unwrap()
    }

    #[test]
    fn coeffs_row_for_n_one() {
        let t = cmd_coeffs(&cfg("0.5", "1", Some("2"))).unwrap();
        assert_eq!(t[0].rows.len(), 1);
        assert_eq!(t[0].rows[0][3], Cell::Int(2));
        assert_eq!(t[0].rows[0][4], Cell::Num(0.875));
        assert_eq!(t[1].rows[0][4], Cell::Num(0.875));
    }

    #[test]
    fn empty_grid_is_a_config_error() {
        let c = Settings::default().resolve().unwrap();
        assert!(matches!(cmd_coeffs(&c), Err(Error::Config(_))));
        assert!(matches!(cmd_growth(&c), Err(Error::Config(_))));
    }

    #[test]
    fn bounds_include_exact_scalar_for_one_by_one() {
        let mut c = cfg("0.5", "1", None);
        c.zetas = vec![C64::new(0.0, 0.0)];
        let t = &cmd_bounds(&c).unwrap()[0];
        let rule = t.column("rule").unwrap();
        let value = t.column("value").unwrap();
        let exact = t.rows.iter().find(|r| r[rule] == Cell::from("exact_scalar")).unwrap();
        assert_eq!(exact[value], Cell::Num(2.0));
        for r in &t.rows {
            if let Cell::Num(v) = r[value] {
                assert!(v >= 2.0 - 1e-12, "every bound dominates the true resolvent");
            }
        }
    }

    #[test]
    fn output_independent_of_worker_count() {
        let mut a = cfg("0.5", "8,16", None);
        let mut b = a.clone();
        a.workers = 1;
        b.workers = 3;
        assert_eq!(cmd_growth(&a).unwrap(), cmd_growth(&b).unwrap());
    }
}
