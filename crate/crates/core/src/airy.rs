//! The Airy function `Ai` and its derivative on the real line.
//!
//! * `|x| ≤ 2`: Maclaurin series.
//! * `x > 2`: `Ai(x) = (1/π) sqrt(x/3) K_{1/3}(ζ)`, `Ai'(x) = -(x/(π√3)) K_{2/3}(ζ)`
//!   with `ζ = (2/3) x^{3/2}` and `K_ν(ζ) = ∫_0^∞ e^{-ζ cosh t} cosh(νt) dt`
//!   by the trapezoid rule, which converges geometrically here.
//! * `-9 ≤ x < -2`: Taylor stepping of `y'' = x y` from `x = -2`.
//! * `x < -9`: oscillatory asymptotic expansion with correction series.

use std::f64::consts::{FRAC_PI_4, PI};

/// `Ai(0) = 3^{-2/3} / Γ(2/3)`.
pub const AI0: f64 = 0.355_028_053_887_817_2;
/// `-Ai'(0) = 3^{-1/3} / Γ(1/3)`.
pub const NEG_AIP0: f64 = 0.258_819_403_792_806_8;

const SERIES_LIMIT: f64 = 2.0;
const ASYMPTOTIC_LIMIT: f64 = -9.0;
const STEP: f64 = 0.25;

/// `Ai(x)`.
pub fn airy_ai(x: f64) -> f64 {
    airy_pair(x).0
}

/// `Ai'(x)`.
pub fn airy_ai_prime(x: f64) -> f64 {
    airy_pair(x).1
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_pair(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, f64::NAN);
    }
    if x.abs() <= SERIES_LIMIT {
        maclaurin(x)
    } else if x > 0.0 {
        decaying(x)
    } else if x >= ASYMPTOTIC_LIMIT {
        taylor_march(x)
    } else {
        oscillatory(x)
    }
}

fn maclaurin(x: f64) -> (f64, f64) {
    // Ai = AI0 f - NEG_AIP0 g with f = Σ 3^k (1/3)_k x^{3k}/(3k)!, g = Σ 3^k (2/3)_k x^{3k+1}/(3k+1)!
    let x3 = x * x * x;
    let (mut f, mut g) = (1.0, x);
    let (mut fp, mut gp) = (0.0, 1.0);
    let (mut tf, mut tg) = (1.0, x);
    // derivative terms tracked separately so that x = 0 is exact
    let (mut tfp, mut tgp) = (0.0, 1.0);
    let mut k = 1.0;
    loop {
        let a = 3.0 * k;
        tf *= x3 / ((a - 1.0) * a);
        tg *= x3 / (a * (a + 1.0));
        tfp = if k == 1.0 { x * x / 2.0 } else { tfp * x3 / ((a - 3.0) * (a - 1.0)) };
        tgp *= x3 / ((a - 2.0) * a);
        f += tf;
        g += tg;
        fp += tfp;
        gp += tgp;
        if tf.abs() + tg.abs() + tfp.abs() + tgp.abs() < 1e-18 * (f.abs() + g.abs() + fp.abs() + gp.abs()) || k > 60.0 {
            break;
        }
        k += 1.0;
    }
    (AI0 * f - NEG_AIP0 * g, AI0 * fp - NEG_AIP0 * gp)
}

/// `e^{ζ} K_ν(ζ)` by the trapezoid rule in `t`.
fn scaled_bessel_k(nu: f64, zeta: f64) -> f64 {
    let h = 0.05f64;
    let mut sum = 0.5f64;
    let mut t = h;
    loop {
        let term = (-zeta * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
        t += h;
    }
    sum * h
}

fn decaying(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let damp = (-zeta).exp();
    let ai = (x / 3.0).sqrt() / PI * scaled_bessel_k(1.0 / 3.0, zeta) * damp;
    let aip = -x / (PI * 3f64.sqrt()) * scaled_bessel_k(2.0 / 3.0, zeta) * damp;
    (ai, aip)
}

/// Advances `(y, y')` of `y'' = x y` from `x0` by `h` with a Taylor series.
fn taylor_step(x0: f64, y: f64, yp: f64, h: f64) -> (f64, f64) {
    // c_{k+2} = (x0 c_k + c_{k-1}) / ((k+2)(k+1))
    let mut c = vec![y, yp, x0 * y / 2.0];
    let mut val = y + yp * h + c[2] * h * h;
    let mut der = yp + 2.0 * c[2] * h;
    let mut hk = h * h;
    for k in 3..120 {
        let next = (x0 * c[k - 2] + c[k - 3]) / ((k * (k - 1)) as f64);
        c.push(next);
        der += k as f64 * next * hk;
        hk *= h;
        val += next * hk;
        if k > 6 && (next * hk).abs() < 1e-20 * (val.abs() + der.abs() * h.abs()) {
            break;
        }
    }
    (val, der)
}

fn taylor_march(x: f64) -> (f64, f64) {
    let (mut y, mut yp) = maclaurin(-SERIES_LIMIT);
    let mut x0 = -SERIES_LIMIT;
    let steps = ((x0 - x) / STEP).ceil().max(1.0) as usize;
    let h = (x - x0) / steps as f64;
    for _ in 0..steps {
        let (a, b) = taylor_step(x0, y, yp, h);
        y = a;
        yp = b;
        x0 += h;
    }
    (y, yp)
}

fn oscillatory(x: f64) -> (f64, f64) {
    let z = -x;
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    // u_k, v_k coefficients of the expansion
    let mut u = vec![1.0f64];
    let mut v = vec![1.0f64];
    for k in 1..40 {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    let series = |c: &[f64], odd: bool| -> f64 {
        let mut s = 0.0f64;
        let mut last = f64::INFINITY;
        let mut sign = 1.0;
        let mut j = if odd { 1 } else { 0 };
        while j < c.len() {
            let term = c[j] / zeta.powi(j as i32);
            if term.abs() >= last || term.abs() < 1e-18 * s.abs().max(1e-300) {
                break;
            }
            s += sign * term;
            last = term.abs();
            sign = -sign;
            j += 2;
        }
        s
    };
    let (pu, qu) = (series(&u, false), series(&u, true));
    let (pv, qv) = (series(&v, false), series(&v, true));
    let theta = zeta - FRAC_PI_4;
    let (s, c) = theta.sin_cos();
    let pref = 1.0 / PI.sqrt();
    let ai = pref * z.powf(-0.25) * (c * pu + s * qu);
    let aip = pref * z.powf(0.25) * (s * pv - c * qv);
    (ai, aip)
}
