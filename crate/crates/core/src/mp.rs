//! Averaged positivity, the `M_p` stopping-time condition, and the
//! pointwise Fedii rate `|y|^{1/p} log a(y) → 0`.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffFn, Interval};
use crate::quad::log_interval_integral;
use crate::{Error, Result, Verdict};

/// Tunables of [`mp_check`]; the defaults are the documented ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpConfig {
    /// Centers are `k·δ₀/grid`.
    pub grid: usize,
    pub theta_hold: f64,
    pub theta_fail: f64,
    /// `δ_k = δ₀·2^{-k}` for `k = 0..=k_max`.
    pub k_max: u32,
    /// Levels added past the first one whose `a_{3I}` drops below `δ_K`.
    pub extra_levels: u32,
    pub max_levels: u32,
    pub quad_tol: f64,
}

impl Default for MpConfig {
    fn default() -> Self {
        MpConfig {
            grid: 64,
            theta_hold: 0.05,
            theta_fail: 0.5,
            k_max: 40,
            extra_levels: 6,
            max_levels: 200,
            quad_tol: 1e-8,
        }
    }
}

/// Outcome of [`check_averaged_positivity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Positivity {
    pub positive: bool,
    pub witness: Option<Interval>,
    pub intervals_checked: usize,
}

fn base_levels(grid: usize) -> u32 {
    (grid as f64).log2().ceil() as u32
}

/// Intervals of one dyadic level: half-width `δ₀2^{-ℓ}`, centers on the
/// `δ₀/grid` lattice, contained in `[-δ₀, δ₀]`.
fn level_intervals(delta0: f64, grid: usize, level: u32) -> Vec<Interval> {
    let w = delta0 * 0.5f64.powi(level as i32);
    let step = delta0 / grid as f64;
    let kmax = ((delta0 - w) / step + 1e-9).floor() as i64;
    (-kmax..=kmax)
        .map(|k| Interval {
            center: k as f64 * step,
            half_width: w,
        })
        .collect()
}

fn check_domain(a: &CoeffFn, reach: f64) -> Result<()> {
    let d = a.domain();
    if d.lo > -reach || d.hi < reach {
        return Err(crate::error::invalid(format!(
            "coefficient domain [{}, {}] must contain [-{reach}, {reach}]",
            d.lo, d.hi
        )));
    }
    Ok(())
}

/// `a_I > 0` on every interval of the dyadic family in `[-δ₀, δ₀]`.
pub fn check_averaged_positivity(a: &CoeffFn, delta0: f64, grid: usize) -> Result<Positivity> {
    if !(delta0 > 0.0) {
        return Err(crate::error::invalid("delta0 must be positive"));
    }
    if grid < 16 {
        return Err(crate::error::invalid("grid must be at least 16"));
    }
    check_domain(a, delta0)?;
    let mut checked = 0;
    for level in 0..=base_levels(grid) {
        for i in level_intervals(delta0, grid, level) {
            checked += 1;
            if log_interval_integral(a, &i, 1e-6)? == f64::NEG_INFINITY {
                return Ok(Positivity {
                    positive: false,
                    witness: Some(i),
                    intervals_checked: checked,
                });
            }
        }
    }
    Ok(Positivity {
        positive: true,
        witness: None,
        intervals_checked: checked,
    })
}

/// One point of the `S(δ)` curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SPoint {
    pub delta: f64,
    #[serde(with = "crate::float_serde")]
    pub s: f64,
}

/// Result of [`mp_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpVerdict {
    pub p: f64,
    pub delta0: f64,
    /// `(δ_k, S(δ_k))`, `δ` decreasing.
    pub s_curve: Vec<SPoint>,
    pub verdict: Verdict,
    /// Interval realizing `S(δ_K)`.
    pub witness: Option<Interval>,
    pub theta_hold: f64,
    pub theta_fail: f64,
    /// Dyadic levels actually used.
    pub levels: u32,
    /// `|I|^{1/p}|log δ|` along centered intervals `I = [-h, h]` with
    /// `a_{3I} = δ` exactly (the decisive intervals for even monotone
    /// weights); `δ` values where no such `h ≤ δ₀` exists are omitted.
    pub decisive_curve: Vec<SPoint>,
    /// Log-log slope of the decisive curve vs `δ`; on the α-family its sign
    /// is the sign of `1/p − α`.
    pub decisive_slope: Option<f64>,
}

struct Member {
    interval: Interval,
    log_a3: f64,
}

/// Evaluates `S(δ) = sup{|I|^{1/p}|log a_{3I}| : a_{3I} < δ}` along
/// `δ = δ₀2^{-k}` and classifies the trend. `sup ∅ = 0`.
pub fn mp_check(a: &CoeffFn, p: f64, delta0: f64, cfg: &MpConfig) -> Result<MpVerdict> {
    if !(p > 0.0) {
        return Err(crate::error::invalid("p must be positive"));
    }
    if !(cfg.theta_hold > 0.0 && cfg.theta_fail >= cfg.theta_hold) {
        return Err(crate::error::invalid("thresholds must satisfy 0 < theta_hold <= theta_fail"));
    }
    let pos = check_averaged_positivity(a, delta0, cfg.grid)?;
    if !pos.positive {
        let w = pos.witness.unwrap();
        return Err(crate::error::invalid(format!(
            "averaged positivity fails on [{}, {}]",
            w.lo(),
            w.hi()
        )));
    }
    check_domain(a, 3.0 * delta0)?;

    let ln2 = 2.0f64.ln();
    let ln_delta_k = delta0.ln() - cfg.k_max as f64 * ln2;
    let mut family: Vec<Member> = Vec::new();
    let base = base_levels(cfg.grid);
    let mut level = 0u32;
    let mut reached_at: Option<u32> = None;
    let mut prev_min_avg = f64::INFINITY;
    loop {
        let mut min_log_avg = f64::INFINITY;
        let mut min_log = f64::INFINITY;
        for i in level_intervals(delta0, cfg.grid, level) {
            let t = i.tripled();
            let la = log_interval_integral(a, &t, cfg.quad_tol)?;
            min_log = min_log.min(la);
            min_log_avg = min_log_avg.min(la - t.len().ln());
            family.push(Member { interval: i, log_a3: la });
        }
        if reached_at.is_none() && min_log < ln_delta_k {
            reached_at = Some(level);
        }
        let drop = prev_min_avg;
        prev_min_avg = min_log_avg;
        level += 1;
        if level >= cfg.max_levels {
            break;
        }
        if level <= base {
            continue;
        }
        // refine only while the weight looks degenerate (the smallest local
        // log-average keeps dropping), and stop a few levels after reaching
        // the δ_K scale
        if reached_at.is_none() && drop - min_log_avg < 1e-2 {
            break;
        }
        if let Some(r) = reached_at {
            if level > r + cfg.extra_levels {
                break;
            }
        }
    }

    let inv_p = 1.0 / p;
    let score = |m: &Member| m.interval.len().powf(inv_p) * m.log_a3.abs();
    let mut s_curve = Vec::with_capacity(cfg.k_max as usize + 1);
    let mut witness = None;
    for k in 0..=cfg.k_max {
        let ln_d = delta0.ln() - k as f64 * ln2;
        let mut s = 0.0f64;
        let mut arg = None;
        for m in &family {
            if m.log_a3 < ln_d {
                let v = score(m);
                if v > s {
                    s = v;
                    arg = Some(m.interval);
                }
            }
        }
        let delta = ln_d.exp();
        s_curve.push(SPoint { delta, s });
        if k == cfg.k_max {
            witness = arg;
        }
    }

    let mut decisive_curve = Vec::new();
    for k in 0..=cfg.k_max {
        let ln_d = delta0.ln() - k as f64 * ln2;
        if let Some(h) = centered_width_for(a, ln_d, delta0, cfg.quad_tol)? {
            decisive_curve.push(SPoint {
                delta: ln_d.exp(),
                s: (2.0 * h).powf(inv_p) * ln_d.abs(),
            });
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = decisive_curve
        .iter()
        .filter(|pt| pt.s > 0.0)
        .map(|pt| (pt.delta.ln(), pt.s.ln()))
        .unzip();
    let decisive_slope = if xs.len() >= 4 { crate::stats::slope(&xs, &ys) } else { None };

    let last = s_curve.last().map_or(0.0, |pt| pt.s);
    let tail = &s_curve[s_curve.len().saturating_sub(5)..];
    let nonincreasing = tail.windows(2).all(|w| w[1].s <= w[0].s);
    // "last decade" of δ: the final ⌈log₂10⌉ + 1 points
    let decade = &s_curve[s_curve.len().saturating_sub(4)..];
    let verdict = if last < cfg.theta_hold && nonincreasing {
        Verdict::Holds
    } else if decade.iter().all(|pt| pt.s >= cfg.theta_fail) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };

    Ok(MpVerdict {
        p,
        delta0,
        s_curve,
        verdict,
        witness,
        theta_hold: cfg.theta_hold,
        theta_fail: cfg.theta_fail,
        levels: level,
        decisive_curve,
        decisive_slope,
    })
}

/// Half-width `h ≤ δ₀` with `log a_{[-3h, 3h]} = ln_delta`, by bisection on
/// `log h` (the left side is nondecreasing in `h` for nonnegative `a`).
fn centered_width_for(a: &CoeffFn, ln_delta: f64, delta0: f64, tol: f64) -> Result<Option<f64>> {
    let la = |h: f64| log_interval_integral(a, &Interval { center: 0.0, half_width: 3.0 * h }, tol);
    if la(delta0)? <= ln_delta {
        return Ok(None);
    }
    let (mut lo, mut hi) = (delta0.ln() - 200.0 * 2.0f64.ln(), delta0.ln());
    if la(lo.exp())? > ln_delta {
        return Ok(None);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if la(mid.exp())? > ln_delta {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Ok(Some(lo.exp()))
}

/// Result of [`fedii_rate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FediiReport {
    pub p: f64,
    /// `(y, r(y))` for `y = 2^{-k}`, `k = 4..=40`.
    #[serde(with = "crate::float_serde::pairs")]
    pub samples: Vec<(f64, f64)>,
    pub verdict: Verdict,
    /// Extrapolated `lim_{y→0} r(y)` (`-∞` when diverging).
    #[serde(with = "crate::float_serde")]
    pub limit: f64,
    /// Log-log slope of `|r|` vs `y` over the second half of the samples.
    pub trend_slope: Option<f64>,
}

/// Threshold below which `|r|` counts as vanished.
pub const FEDII_ZERO: f64 = 1e-3;
/// Minimal log-log slope accepted as a power-law decay of `|r|`.
pub const FEDII_TREND: f64 = 0.05;

/// Classifies `r(y) = |y|^{1/p} log a(y)` as `y → 0⁺`.
pub fn fedii_rate(a: &CoeffFn, p: f64) -> Result<FediiReport> {
    if !(p > 0.0) {
        return Err(crate::error::invalid("p must be positive"));
    }
    let mut samples = Vec::with_capacity(37);
    for k in 4..=40 {
        let y = 0.5f64.powi(k);
        let la = a.log_eval(y)?;
        if la == f64::NEG_INFINITY {
            return Err(Error::RateUndefined { at: y });
        }
        samples.push((y, y.powf(1.0 / p) * la));
    }
    let half = &samples[samples.len() / 2..];
    let (xs, ys): (Vec<f64>, Vec<f64>) = half
        .iter()
        .filter(|(_, r)| *r != 0.0)
        .map(|(y, r)| (y.ln(), r.abs().ln()))
        .unzip();
    let trend_slope = if xs.len() == half.len() { crate::stats::slope(&xs, &ys) } else { None };
    let tail = &samples[samples.len() - 5..];
    let small_and_shrinking =
        tail.last().unwrap().1.abs() < FEDII_ZERO && tail.windows(2).all(|w| w[1].1.abs() <= w[0].1.abs());
    let (verdict, limit) = match trend_slope {
        _ if small_and_shrinking => (Verdict::Holds, 0.0),
        Some(s) if s > FEDII_TREND => (Verdict::Holds, 0.0),
        Some(s) if s < -FEDII_TREND => {
            let sign = tail.last().unwrap().1.signum();
            (Verdict::Fails, sign * f64::INFINITY)
        }
        _ => (Verdict::Fails, tail.last().unwrap().1),
    };
    Ok(FediiReport {
        p,
        samples,
        verdict,
        limit,
        trend_slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{alpha_family, parse_coeff};

    #[test]
    fn positivity_examples() {
        let a = parse_coeff("exp(-1/abs(y))").unwrap();
        assert!(check_averaged_positivity(&a, 0.5, 16).unwrap().positive);
        let z = parse_coeff("0").unwrap();
        let r = check_averaged_positivity(&z, 0.5, 16).unwrap();
        assert!(!r.positive && r.witness.is_some());
        let m = parse_coeff("max(y, 0)").unwrap();
        let r = check_averaged_positivity(&m, 0.5, 16).unwrap();
        assert!(!r.positive);
        let w = r.witness.unwrap();
        assert!(w.lo() >= -0.5 && w.hi() <= 0.0);
    }

    #[test]
    fn fedii_examples() {
        let r = fedii_rate(&alpha_family(0.5).unwrap(), 1.0).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let r = fedii_rate(&alpha_family(1.0).unwrap(), 1.0).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!((r.limit + 1.0).abs() < 1e-12);
        let r = fedii_rate(&alpha_family(2.0).unwrap(), 1.0).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.limit, f64::NEG_INFINITY);
        let r = fedii_rate(&parse_coeff("1").unwrap(), 1.0).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn fedii_needs_log_form_when_zero() {
        let a = parse_coeff("max(abs(y) - 0.5, 0)").unwrap();
        assert!(matches!(fedii_rate(&a, 1.0), Err(Error::RateUndefined { .. })));
    }

    #[test]
    fn mp_examples() {
        let cfg = MpConfig::default();
        let v = mp_check(&alpha_family(0.5).unwrap(), 1.0, 0.25, &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::Holds, "{:?}", v.s_curve.last());
        let v = mp_check(&alpha_family(2.0).unwrap(), 1.0, 0.25, &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::Fails);
        let v = mp_check(&parse_coeff("1").unwrap(), 2.0, 0.25, &cfg).unwrap();
        assert_eq!(v.verdict, Verdict::Holds);
        assert_eq!(v.s_curve.last().unwrap().s, 0.0);
    }

    #[test]
    fn s_curve_is_monotone() {
        let cfg = MpConfig::default();
        for alpha in [0.5, 1.0, 2.0] {
            let v = mp_check(&alpha_family(alpha).unwrap(), 1.0, 0.25, &cfg).unwrap();
            for w in v.s_curve.windows(2) {
                assert!(w[1].s <= w[0].s);
            }
        }
    }
}
