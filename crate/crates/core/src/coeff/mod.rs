//! Coefficient functions: `a(y)`, `g(x)`, and the `L₁` fields.

mod expr;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use num_traits::Float;
use serde::{Deserialize, Serialize};

pub use expr::{to_source, BinOp, Expr, Func1, Func2, NamedConst, Parity, Program};

use crate::{Error, Result};

/// Values below this are reported as exactly zero by [`CoeffFn::eval_at`].
pub const UNDERFLOW: f64 = 1e-300;

/// Number of points of the nonnegativity scan done at parse time.
pub const SCAN_POINTS: usize = 1001;

/// Closed interval `[lo, hi]` on which a coefficient is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(crate::error::invalid(format!("domain [{lo}, {hi}] is empty or not finite")));
        }
        Ok(Domain { lo, hi })
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.lo && y <= self.hi
    }

    pub fn is_symmetric(&self) -> bool {
        self.lo == -self.hi
    }
}

impl Default for Domain {
    fn default() -> Self {
        Domain { lo: -1.0, hi: 1.0 }
    }
}

/// An interval given by center and half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub half_width: f64,
}

impl Interval {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite() && center.is_finite()) {
            return Err(crate::error::invalid(format!("interval half-width {half_width} must be positive")));
        }
        Ok(Interval { center, half_width })
    }

    pub fn from_bounds(lo: f64, hi: f64) -> Result<Self> {
        Self::new(0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    /// Same center, three times the half-width.
    pub fn tripled(&self) -> Interval {
        Interval {
            center: self.center,
            half_width: 3.0 * self.half_width,
        }
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn len(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.lo() >= self.lo() && other.hi() <= self.hi()
    }
}

/// Parity metadata recorded on a [`CoeffFn`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffParity {
    Even,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotone {
    /// `a ≥ 0` and nondecreasing on `(0, hi]`.
    NonnegIncreasingOnPositiveAxis,
    None,
}

/// A nonnegative scalar coefficient of one variable.
#[derive(Debug, Clone)]
pub struct CoeffFn {
    source: String,
    var: String,
    expr: Expr,
    program: Program,
    log_expr: Option<Expr>,
    log_program: Option<Program>,
    parity: CoeffParity,
    monotone: Monotone,
    domain: Domain,
}

impl PartialEq for CoeffFn {
    fn eq(&self, other: &Self) -> bool {
        self.expr == other.expr && self.domain == other.domain
    }
}

const ALLOWED_VARS: [&str; 3] = ["y", "x", "t"];

/// Parses a single-variable coefficient on the default domain `[-1, 1]`.
pub fn parse_coeff(source: &str) -> Result<CoeffFn> {
    CoeffFn::parse_on(source, Domain::default())
}

impl CoeffFn {
    /// Parses `source` (over one of `y`, `x` or `t`) and validates it as a
    /// nonnegative weight on `domain`.
    pub fn parse_on(source: &str, domain: Domain) -> Result<CoeffFn> {
        let seen: RefCell<Option<String>> = RefCell::new(None);
        let mixed: RefCell<Option<String>> = RefCell::new(None);
        let resolve = |name: &str| -> Option<usize> {
            if !ALLOWED_VARS.contains(&name) {
                return None;
            }
            let mut s = seen.borrow_mut();
            match s.as_deref() {
                None => *s = Some(name.to_string()),
                Some(prev) if prev != name => *mixed.borrow_mut() = Some(name.to_string()),
                _ => {}
            }
            Some(0)
        };
        let expr = Expr::parse(source, &resolve)?;
        if let Some(name) = mixed.into_inner() {
            return Err(crate::error::invalid(format!(
                "coefficient must use a single variable; `{name}` mixes with `{}`",
                seen.borrow().as_deref().unwrap_or("y")
            )));
        }
        let var = seen.into_inner().unwrap_or_else(|| "y".to_string());
        Self::from_expr(source, var, expr, domain)
    }

    fn from_expr(source: &str, var: String, expr: Expr, domain: Domain) -> Result<CoeffFn> {
        let program = expr.compile();
        let log_expr = expr.log_form();
        let log_program = log_expr.as_ref().map(Expr::compile);
        let mut f = CoeffFn {
            source: source.to_string(),
            var,
            expr,
            program,
            log_expr,
            log_program,
            parity: CoeffParity::None,
            monotone: Monotone::None,
            domain,
        };
        f.scan_nonnegative()?;
        f.parity = f.detect_parity();
        f.monotone = f.detect_monotone();
        Ok(f)
    }

    /// Returns a copy with a different domain (re-validated).
    pub fn with_domain(&self, domain: Domain) -> Result<CoeffFn> {
        Self::from_expr(&self.source, self.var.clone(), self.expr.clone(), domain)
    }

    fn scan_nonnegative(&self) -> Result<()> {
        let (lo, hi) = (self.domain.lo, self.domain.hi);
        for i in 0..SCAN_POINTS {
            let y = lo + (hi - lo) * (i as f64) / ((SCAN_POINTS - 1) as f64);
            let v = self.extended(y).ok_or(Error::NotFinite { at: y })?;
            if v < 0.0 {
                return Err(Error::NegativeWeight { at: y, value: v });
            }
        }
        Ok(())
    }

    fn detect_parity(&self) -> CoeffParity {
        if !self.domain.is_symmetric() {
            return CoeffParity::None;
        }
        // structural evenness is confirmed by exact sampling; anything
        // structurally odd or mixed is still accepted if the samples agree
        let sampled = (0..SCAN_POINTS).all(|i| {
            let y = self.domain.hi * (i as f64) / ((SCAN_POINTS - 1) as f64);
            self.raw(y).to_bits() == self.raw(-y).to_bits() || (self.raw(y).is_nan() && self.raw(-y).is_nan())
        });
        let structural = matches!(self.expr.parity(), Parity::Even | Parity::Constant);
        if sampled && (structural || self.expr.parity() != Parity::Odd) {
            CoeffParity::Even
        } else {
            CoeffParity::None
        }
    }

    fn detect_monotone(&self) -> Monotone {
        if self.domain.hi <= 0.0 {
            return Monotone::None;
        }
        let lo = self.domain.lo.max(0.0);
        let m = 10_000;
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=m {
            let y = lo + (self.domain.hi - lo) * (i as f64) / (m as f64);
            let l = self.log_eval_unchecked(y);
            if l.is_nan() || l < prev {
                return Monotone::None;
            }
            prev = l;
        }
        Monotone::NonnegIncreasingOnPositiveAxis
    }

    fn raw(&self, y: f64) -> f64 {
        self.program.eval(&[y])
    }

    /// Value with the continuous extension at removable singularities, or
    /// `None` when no finite limit is found.
    fn extended(&self, y: f64) -> Option<f64> {
        let v = self.raw(y);
        if v.is_finite() {
            return Some(v);
        }
        if let Some(lp) = &self.log_program {
            let l = lp.eval(&[y]);
            if l == f64::NEG_INFINITY {
                return Some(0.0);
            }
        }
        // two-sided probe just off the point
        let d = (y.abs() * 1e-12).max(1e-200);
        let (l, r) = (self.raw(y - d), self.raw(y + d));
        if l.is_finite() && r.is_finite() && (l - r).abs() <= 1e-9 * (1.0 + l.abs().max(r.abs())) {
            Some(0.5 * (l + r))
        } else {
            None
        }
    }

    /// Pointwise value; below [`UNDERFLOW`] returns exactly 0.
    pub fn eval_at(&self, y: f64) -> Result<f64> {
        if !self.domain.contains(y) {
            return Err(Error::OutsideDomain {
                at: y,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        let v = self.extended(y).ok_or(Error::NotFinite { at: y })?;
        Ok(if v < UNDERFLOW { 0.0 } else { v })
    }

    /// Like [`eval_at`](Self::eval_at) but without the domain check; used in
    /// inner loops over grids already known to lie in the domain.
    pub fn value(&self, y: f64) -> f64 {
        match self.extended(y) {
            Some(v) if v >= UNDERFLOW => v,
            Some(_) => 0.0,
            None => f64::NAN,
        }
    }

    /// `log a(y)`, through the symbolic log form when available so that it
    /// stays finite far below the double-precision underflow threshold.
    pub fn log_eval(&self, y: f64) -> Result<f64> {
        if !self.domain.contains(y) {
            return Err(Error::OutsideDomain {
                at: y,
                lo: self.domain.lo,
                hi: self.domain.hi,
            });
        }
        let l = self.log_eval_unchecked(y);
        if l.is_nan() {
            Err(Error::NotFinite { at: y })
        } else {
            Ok(l)
        }
    }

    pub(crate) fn log_eval_unchecked(&self, y: f64) -> f64 {
        match &self.log_program {
            Some(lp) => {
                let l = lp.eval(&[y]);
                if l.is_nan() {
                    self.extended(y).map_or(f64::NAN, |v| v.ln())
                } else {
                    l
                }
            }
            None => self.extended(y).map_or(f64::NAN, |v| v.ln()),
        }
    }

    pub fn has_log_form(&self) -> bool {
        self.log_expr.is_some()
    }

    pub fn log_form(&self) -> Option<&Expr> {
        self.log_expr.as_ref()
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn parity(&self) -> CoeffParity {
        self.parity
    }

    pub fn monotone(&self) -> Monotone {
        self.monotone
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Canonical pretty-printed form.
    pub fn canonical(&self) -> String {
        to_source(&self.expr, &[self.var.as_str()])
    }

    /// `sup |a|` over `n` evenly spaced samples of the domain.
    pub fn sampled_sup(&self, n: usize) -> f64 {
        sample_points(self.domain.lo, self.domain.hi, n)
            .map(|y| self.value(y))
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for CoeffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

fn sample_points(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| lo + (hi - lo) * (i as f64) / ((n - 1) as f64))
}

/// Serialized form: either the bare source text (default domain) or
/// `{ "expr": ..., "domain": [lo, hi] }`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffRepr {
    Text(String),
    Full {
        expr: String,
        #[serde(default = "default_domain_pair")]
        domain: [f64; 2],
    },
}

fn default_domain_pair() -> [f64; 2] {
    [-1.0, 1.0]
}

impl Serialize for CoeffFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        CoeffRepr::Full {
            expr: self.source.clone(),
            domain: [self.domain.lo, self.domain.hi],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CoeffFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let (src, dom) = match CoeffRepr::deserialize(d)? {
            CoeffRepr::Text(s) => (s, Domain::default()),
            CoeffRepr::Full { expr, domain } => (
                expr,
                Domain::new(domain[0], domain[1]).map_err(serde::de::Error::custom)?,
            ),
        };
        CoeffFn::parse_on(&src, dom).map_err(serde::de::Error::custom)
    }
}

/// A real field over `(x1, x2, t)`; `x` is an alias for `x1`. Used for the
/// `L₁` coefficients and for `g`, which may be signed (`a₀`) or depend on
/// time (parabolic problems).
#[derive(Debug, Clone)]
pub struct FieldFn {
    source: String,
    expr: Expr,
    program: Program,
}

impl PartialEq for FieldFn {
    fn eq(&self, other: &Self) -> bool {
        self.expr == other.expr
    }
}

const FIELD_VARS: [&str; 3] = ["x1", "x2", "t"];

impl FieldFn {
    pub fn parse(source: &str) -> Result<FieldFn> {
        let resolve = |name: &str| match name {
            "x1" | "x" => Some(0),
            "x2" => Some(1),
            "t" => Some(2),
            _ => None,
        };
        let expr = Expr::parse(source, &resolve)?;
        let program = expr.compile();
        Ok(FieldFn {
            source: source.to_string(),
            expr,
            program,
        })
    }

    pub fn constant(c: f64) -> FieldFn {
        let expr = Expr::Num(c);
        FieldFn {
            source: format!("{c:?}"),
            program: expr.compile(),
            expr,
        }
    }

    pub fn eval(&self, x1: f64, x2: f64, t: f64) -> f64 {
        self.program.eval(&[x1, x2, t])
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn canonical(&self) -> String {
        to_source(&self.expr, &FIELD_VARS)
    }

    pub fn depends_on_t(&self) -> bool {
        self.expr.uses_var(2)
    }

    pub fn depends_on_x2(&self) -> bool {
        self.expr.uses_var(1)
    }

    pub fn is_constant(&self) -> bool {
        self.expr.max_var().is_none()
    }

    /// Returns `Some(c)` when the field is the constant `c`.
    pub fn constant_value(&self) -> Option<f64> {
        self.is_constant().then(|| self.eval(0.0, 0.0, 0.0))
    }

    /// `(inf, sup)` of the field sampled on the box `[-r, r]^dim × ts`.
    pub fn sampled_range(&self, r: f64, dim: usize, ts: &[f64], n: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let x2s: Vec<f64> = if dim >= 2 {
            sample_points(-r, r, n).collect()
        } else {
            alloc::vec![0.0]
        };
        let t_default = [0.0];
        let ts = if ts.is_empty() { &t_default[..] } else { ts };
        for x1 in sample_points(-r, r, n) {
            for &x2 in &x2s {
                for &t in ts {
                    let v = self.eval(x1, x2, t);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        (lo, hi)
    }
}

impl fmt::Display for FieldFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl Serialize for FieldFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for FieldFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        FieldFn::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// `exp(-|y|^(-α))`, the standard infinitely degenerate weight.
pub fn alpha_family(alpha: f64) -> Result<CoeffFn> {
    if !(alpha > 0.0) {
        return Err(crate::error::invalid("alpha must be positive"));
    }
    parse_coeff(&format!("exp(-abs(y)^(-{alpha:?}))"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn worked_values() {
        let a = parse_coeff("exp(-abs(y)^(-1))").unwrap();
        assert!(close(a.eval_at(0.5).unwrap(), (-2.0f64).exp(), 1e-15));
        assert_eq!(a.eval_at(0.0).unwrap(), 0.0);
        assert_eq!(parse_coeff("1").unwrap().eval_at(0.3).unwrap(), 1.0);
        let b = parse_coeff("exp(-abs(y)^(-0.5))").unwrap();
        assert!(close(b.log_eval(0.04).unwrap(), -5.0, 1e-14));
        let sq = CoeffFn::parse_on("y^2", Domain::new(-4.0, 4.0).unwrap()).unwrap();
        assert_eq!(sq.eval_at(3.0).unwrap(), 9.0);
        let c = parse_coeff("exp(-abs(y)^(-2))").unwrap();
        assert!(close(c.eval_at(0.1).unwrap(), 3.720075976020836e-44, 1e-12));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_coeff("y - 0.5"), Err(Error::NegativeWeight { .. })));
        assert!(matches!(parse_coeff("exp(-z)"), Err(Error::UnknownIdentifier { .. })));
        assert!(matches!(parse_coeff("exp(-y"), Err(Error::Syntax { .. })));
        assert!(parse_coeff("x + y + 2").is_err());
        let a = parse_coeff("1").unwrap();
        assert!(matches!(a.eval_at(1.5), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn metadata() {
        let a = alpha_family(0.5).unwrap();
        assert!(a.has_log_form());
        assert_eq!(a.parity(), CoeffParity::Even);
        assert_eq!(a.monotone(), Monotone::NonnegIncreasingOnPositiveAxis);
        let m = parse_coeff("max(y, 0)").unwrap();
        assert_eq!(m.parity(), CoeffParity::None);
        assert!(!m.has_log_form());
        let h = CoeffFn::parse_on("y^2", Domain::new(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(h.parity(), CoeffParity::None);
    }

    #[test]
    fn alpha_family_on_fine_grid() {
        for alpha in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let a = alpha_family(alpha).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for i in 0..10_000 {
                let y = (i as f64) / 9_999.0;
                assert_eq!(a.value(y).to_bits(), a.value(-y).to_bits());
                let l = a.log_eval(y).unwrap();
                if i == 0 {
                    assert_eq!(l, f64::NEG_INFINITY);
                } else {
                    assert!(l.is_finite() && l > prev, "alpha {alpha} y {y}");
                    prev = l;
                }
            }
        }
    }

    #[test]
    fn serde_roundtrip_text_and_object() {
        let a = parse_coeff("exp(-abs(y)^(-1))").unwrap();
        let repr = CoeffRepr::Full {
            expr: a.source().to_string(),
            domain: [-1.0, 1.0],
        };
        match repr {
            CoeffRepr::Full { expr, .. } => assert_eq!(expr, "exp(-abs(y)^(-1))"),
            CoeffRepr::Text(_) => unreachable!(),
        }
    }

    #[test]
    fn fields() {
        let f = FieldFn::parse("x1^2 + x2^2 + t").unwrap();
        assert_eq!(f.eval(1.0, 2.0, 3.0), 8.0);
        assert!(f.depends_on_t() && f.depends_on_x2());
        let g = FieldFn::parse("x^2").unwrap();
        assert_eq!(g.eval(3.0, 0.0, 0.0), 9.0);
        assert_eq!(FieldFn::parse("-2").unwrap().constant_value(), Some(-2.0));
        assert!(FieldFn::parse("y").is_err());
        let (lo, hi) = FieldFn::parse("x1 - x2").unwrap().sampled_range(1.0, 2, &[], 11);
        assert_eq!((lo, hi), (-2.0, 2.0));
    }

    #[test]
    fn intervals() {
        let i = Interval::new(0.25, 0.1).unwrap();
        let t = i.tripled();
        assert_eq!(t.center, 0.25);
        assert!((t.half_width - 0.3).abs() < 1e-16);
        assert!(t.contains_interval(&i));
        assert!(Interval::new(0.0, 0.0).is_err());
        assert!(Interval::new(0.0, -1.0).is_err());
    }
}
