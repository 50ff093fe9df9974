//! Adaptive Simpson quadrature, in plain and log domains.
//!
//! The log-domain variant integrates `exp(φ)` given `φ` and returns
//! `log ∫ exp(φ)`, so integrals of weights like `exp(-1/|y|)` stay
//! meaningful far below the smallest positive double.

use alloc::vec::Vec;

use num_traits::Float;

use crate::coeff::{CoeffFn, Interval};
use crate::{Error, Result};

/// Maximum bisection depth of any subinterval.
pub const MAX_DEPTH: u32 = 60;

const SEED_POINTS: usize = 129;

/// `log(e^a + e^b)` with `-∞` as the additive identity.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log |e^a − e^b|`.
fn log_abs_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return f64::NEG_INFINITY;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (-(lo - hi).exp_m1()).ln()
}

fn log_simpson(lw: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    // (b - a)/6 · (fa + 4 fm + fb), everything in logs
    lw - 6.0f64.ln() + log_add(log_add(fa, 4.0f64.ln() + fm), fb)
}

/// `log ∫_lo^hi exp(φ(y)) dy` with relative tolerance `tol`.
///
/// `split` forces a breakpoint (typically the flat point `y = 0`).
pub fn log_integrate<F: Fn(f64) -> f64>(phi: F, lo: f64, hi: f64, tol: f64, split: Option<f64>) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(crate::error::invalid("quadrature tolerance must be positive"));
    }
    if hi <= lo {
        return Ok(f64::NEG_INFINITY);
    }
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(2);
    match split {
        Some(s) if s > lo && s < hi => {
            pieces.push((lo, s));
            pieces.push((s, hi));
        }
        _ => pieces.push((lo, hi)),
    }

    // crude scale estimate: trapezoid on each piece
    let mut est = f64::NEG_INFINITY;
    for &(a, b) in &pieces {
        let h = (b - a) / (SEED_POINTS - 1) as f64;
        let mut acc = f64::NEG_INFINITY;
        for i in 0..SEED_POINTS {
            let w = if i == 0 || i == SEED_POINTS - 1 { 0.5 } else { 1.0 };
            let v = phi(a + h * i as f64);
            if v.is_nan() {
                return Err(Error::NotFinite { at: a + h * i as f64 });
            }
            acc = log_add(acc, w.ln() + v);
        }
        est = log_add(est, acc + h.ln());
    }

    let total_width = hi - lo;
    // a crude seed can be off by orders of magnitude when the mass sits in
    // a sliver; rerun once with the first result as the scale
    let mut result = adaptive_log(&phi, &pieces, tol, est, total_width)?;
    for _ in 0..3 {
        if result == f64::NEG_INFINITY || (result - est).abs() <= 2.0f64.ln() {
            break;
        }
        est = result;
        result = adaptive_log(&phi, &pieces, tol, est, total_width)?;
    }
    Ok(result)
}

fn adaptive_log<F: Fn(f64) -> f64>(phi: &F, pieces: &[(f64, f64)], tol: f64, est: f64, width: f64) -> Result<f64> {
    struct Seg {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        depth: u32,
    }
    let ltol = (15.0 * tol).ln() + est - width.ln();
    let mut total = f64::NEG_INFINITY;
    let mut stack: Vec<Seg> = Vec::new();
    for &(a, b) in pieces {
        let (fa, fm, fb) = (phi(a), phi(0.5 * (a + b)), phi(b));
        let whole = log_simpson((b - a).ln(), fa, fm, fb);
        stack.push(Seg { a, b, fa, fm, fb, whole, depth: 0 });
    }
    while let Some(s) = stack.pop() {
        let m = 0.5 * (s.a + s.b);
        let (lm, rm) = (0.5 * (s.a + m), 0.5 * (m + s.b));
        let (flm, frm) = (phi(lm), phi(rm));
        if flm.is_nan() || frm.is_nan() {
            return Err(Error::NotFinite { at: if flm.is_nan() { lm } else { rm } });
        }
        let half_lw = (0.5 * (s.b - s.a)).ln();
        let left = log_simpson(half_lw, s.fa, flm, s.fm);
        let right = log_simpson(half_lw, s.fm, frm, s.fb);
        let both = log_add(left, right);
        let err = log_abs_diff(both, s.whole);
        let allowed = ltol + (s.b - s.a).ln();
        // φ carries absolute rounding ~ |φ|·eps, which bounds the attainable
        // relative accuracy of a piece where |φ| is huge; rounded midpoints
        // add a relative width error ~ ulp(y)/(b-a)
        let mag = [s.fa, s.fm, s.fb, flm, frm]
            .iter()
            .filter(|v| v.is_finite())
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let abscissa = s.a.abs().max(s.b.abs()) / (s.b - s.a);
        let floor = both + (f64::EPSILON * (64.0 * mag + 4.0 * abscissa)).ln();
        if err <= allowed || err <= floor || (both == f64::NEG_INFINITY && s.whole == f64::NEG_INFINITY) {
            total = log_add(total, both);
        } else if s.depth >= MAX_DEPTH {
            return Err(Error::QuadratureDiverged { lo: s.a, hi: s.b });
        } else {
            stack.push(Seg {
                a: s.a,
                b: m,
                fa: s.fa,
                fm: flm,
                fb: s.fm,
                whole: left,
                depth: s.depth + 1,
            });
            stack.push(Seg {
                a: m,
                b: s.b,
                fa: s.fm,
                fm: frm,
                fb: s.fb,
                whole: right,
                depth: s.depth + 1,
            });
        }
    }
    Ok(total)
}

/// `∫_lo^hi f` by adaptive Simpson with relative tolerance `tol` measured
/// against `∫|f|`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(crate::error::invalid("quadrature tolerance must be positive"));
    }
    if hi == lo {
        return Ok(0.0);
    }
    if hi < lo {
        return integrate(f, hi, lo, tol).map(|v| -v);
    }
    let h = (hi - lo) / (SEED_POINTS - 1) as f64;
    let mut scale = 0.0;
    for i in 0..SEED_POINTS {
        let w = if i == 0 || i == SEED_POINTS - 1 { 0.5 } else { 1.0 };
        let v = f(lo + h * i as f64);
        if !v.is_finite() {
            return Err(Error::NotFinite { at: lo + h * i as f64 });
        }
        scale += w * v.abs();
    }
    scale *= h;
    let width = hi - lo;
    // absolute floor keeps identically-zero integrands from recursing forever
    let budget = 15.0 * tol * scale.max(f64::MIN_POSITIVE) / width;

    struct Seg {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        depth: u32,
    }
    let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
    let mut stack = alloc::vec![Seg {
        a: lo,
        b: hi,
        fa,
        fm,
        fb,
        whole: width / 6.0 * (fa + 4.0 * fm + fb),
        depth: 0,
    }];
    let mut total = 0.0;
    let mut comp = 0.0; // Kahan compensation
    while let Some(s) = stack.pop() {
        let m = 0.5 * (s.a + s.b);
        let (lm, rm) = (0.5 * (s.a + m), 0.5 * (m + s.b));
        let (flm, frm) = (f(lm), f(rm));
        let hw = 0.5 * (s.b - s.a);
        let left = hw / 6.0 * (s.fa + 4.0 * flm + s.fm);
        let right = hw / 6.0 * (s.fm + 4.0 * frm + s.fb);
        let both = left + right;
        if !both.is_finite() {
            return Err(Error::NotFinite { at: m });
        }
        if (both - s.whole).abs() <= budget * (s.b - s.a) || s.b - s.a <= f64::EPSILON * width {
            let y = both - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        } else if s.depth >= MAX_DEPTH {
            return Err(Error::QuadratureDiverged { lo: s.a, hi: s.b });
        } else {
            stack.push(Seg {
                a: s.a,
                b: m,
                fa: s.fa,
                fm: flm,
                fb: s.fm,
                whole: left,
                depth: s.depth + 1,
            });
            stack.push(Seg {
                a: m,
                b: s.b,
                fa: s.fm,
                fm: frm,
                fb: s.fb,
                whole: right,
                depth: s.depth + 1,
            });
        }
    }
    Ok(total)
}

/// `log a_I = log ∫_I a`, `-∞` when the integral vanishes.
pub fn log_interval_integral(f: &CoeffFn, i: &Interval, tol: f64) -> Result<f64> {
    let dom = f.domain();
    // allow a rounding-level overshoot at the domain ends
    let slack = 1e-12 * (dom.hi - dom.lo);
    if i.lo() < dom.lo - slack || i.hi() > dom.hi + slack {
        let at = if i.lo() < dom.lo { i.lo() } else { i.hi() };
        return Err(Error::OutsideDomain { at, lo: dom.lo, hi: dom.hi });
    }
    let (lo, hi) = (i.lo().max(dom.lo), i.hi().min(dom.hi));
    log_integrate(|y| f.log_eval_unchecked(y), lo, hi, tol, Some(0.0))
}

/// `a_I = ∫_I a(y) dy` with relative tolerance `tol`.
pub fn interval_integral(f: &CoeffFn, i: &Interval, tol: f64) -> Result<f64> {
    log_interval_integral(f, i, tol).map(f64::exp)
}
