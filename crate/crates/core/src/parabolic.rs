//! Parabolic spectral profiles: the closed-form one-dimensional family
//! `v(t) = exp(-∫_0^t [a₀ + gλ])` and the initial-boundary value problem
//! `∂_t u + T̃₀u = -(a₀ + λg)u` on `Q_r × (-T, T]`, marched by Crank–Nicolson
//! from `u = u_L` at `t = -T`.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::coeff::{CoeffFn, FieldFn};
use crate::elliptic::{bound_flags, box_grid, center_index, spatial_stencil, u_lower, with_boundary, EllipticCoeffs};
use crate::quad::integrate;
use crate::superlog::{assess, lambda_growth, ProbeConfig, ProbeReport};
use crate::{Error, Result, Verdict};

/// Quadrature tolerance of the one-dimensional profile.
pub const PROFILE_1D_TOL: f64 = 1e-12;

fn field_t(f: &FieldFn, t: f64) -> f64 {
    f.eval(0.0, 0.0, t)
}

/// `∫_{t1}^{t2} [a₀ + gλ]`.
pub fn exponent_integral(a0: &FieldFn, g: &FieldFn, lambda: f64, t1: f64, t2: f64) -> Result<f64> {
    integrate(|s| field_t(a0, s) + lambda * field_t(g, s), t1, t2, PROFILE_1D_TOL)
}

/// `v(t, λ) = exp(-∫_0^t [a₀ + gλ])` for `-T ≤ t ≤ T`; `a₀` and `g` are
/// fields in `t`.
pub fn profile_1d(a0: &FieldFn, g: &FieldFn, lambda: f64, horizon: f64, t: f64) -> Result<f64> {
    if !(horizon > 0.0) || !(t.abs() <= horizon) {
        return Err(Error::OutsideDomain { at: t, lo: -horizon, hi: horizon });
    }
    Ok((-exponent_integral(a0, g, lambda, 0.0, t)?).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile1dReport {
    pub lambda: f64,
    pub horizon: f64,
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub positive: bool,
    /// `e^{2T‖a₀⁻‖ + T(‖g‖λ + ‖a₀⁺‖)}`, the bound on `|v|` over `(-T, T)`.
    pub bound: f64,
    pub bound_ok: bool,
}

/// `v` on `points` equispaced times in `[-T, T]` with the sampled bound.
pub fn profile_1d_table(a0: &FieldFn, g: &FieldFn, lambda: f64, horizon: f64, points: usize) -> Result<Profile1dReport> {
    if points < 2 {
        return Err(crate::error::invalid("need at least two time points"));
    }
    let t: Vec<f64> = (0..points)
        .map(|k| -horizon + 2.0 * horizon * k as f64 / (points - 1) as f64)
        .collect();
    let v = t
        .iter()
        .map(|&s| profile_1d(a0, g, lambda, horizon, s))
        .collect::<Result<Vec<_>>>()?;
    let sample: Vec<f64> = (0..=1000).map(|k| -horizon + 2.0 * horizon * k as f64 / 1000.0).collect();
    let (a_lo, a_hi) = sample.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
        let a = field_t(a0, s);
        (lo.min(a), hi.max(a))
    });
    let g_hi = sample.iter().fold(0.0f64, |m, &s| m.max(field_t(g, s).abs()));
    let neg = (-a_lo).max(0.0);
    let pos = a_hi.max(0.0);
    let bound = (2.0 * horizon * neg + horizon * (g_hi * lambda + pos)).exp();
    Ok(Profile1dReport {
        lambda,
        horizon,
        positive: v.iter().all(|x| *x > 0.0),
        bound_ok: v.iter().all(|x| x.abs() <= bound * (1.0 + 1e-10)),
        t,
        v,
        bound,
    })
}

/// Space-time discretization of the parabolic problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicGrid {
    /// Interior points per spatial axis, odd.
    pub n_x: usize,
    /// Time levels including `t = -T` and `t = T`, odd so that `t = 0` is one.
    pub n_t: usize,
    pub dim: usize,
    /// Keep every `save_every`-th time level (the `t = 0` level is always kept).
    pub save_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicProfile {
    pub lambda: f64,
    pub r: f64,
    pub c: f64,
    pub horizon: f64,
    /// `‖a₀⁻‖_∞` on the cylinder.
    pub alpha: f64,
    pub grid: ParabolicGrid,
    pub x: Vec<f64>,
    /// Times of the saved slices.
    pub t_saved: Vec<f64>,
    /// Full-grid `u` at each saved time.
    pub u_saved: Vec<Vec<f64>>,
    /// `max u` at every time level.
    pub level_max: Vec<f64>,
    /// `u(0, 0)`.
    pub u_center: f64,
    pub tol: f64,
    /// `min (u - u_L)` over all levels.
    pub lower_slack: f64,
    /// `min (e^{α(t+T)} - u)` over all levels.
    pub upper_slack: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub under_resolved: bool,
}

impl ParabolicProfile {
    /// `v = u/u(0,0)` on a saved slice.
    pub fn v_slice(&self, k: usize) -> Vec<f64> {
        self.u_saved[k].iter().map(|u| u / self.u_center).collect()
    }

    /// Index of the `t = 0` slice.
    pub fn zero_slice(&self) -> usize {
        self.t_saved.iter().position(|t| *t == 0.0).unwrap_or(0)
    }

    pub fn v_at_origin(&self) -> f64 {
        let k = self.zero_slice();
        self.u_saved[k][center_index(self.grid.n_x, self.grid.dim)] / self.u_center
    }
}

/// Time at level `m` of `n_t` on `[-T, T]`, with `t = 0` exact at the middle.
fn time_level(horizon: f64, n_t: usize, m: usize) -> f64 {
    let steps = (n_t - 1) as f64;
    horizon * (2.0 * m as f64 - steps) / steps
}

/// Crank–Nicolson march with the (upwinded) elliptic stencil.
#[allow(clippy::too_many_arguments)]
pub fn solve_profile_parabolic(
    coeffs: &EllipticCoeffs,
    g: &FieldFn,
    lambda: f64,
    r: f64,
    c: f64,
    horizon: f64,
    grid: ParabolicGrid,
) -> Result<ParabolicProfile> {
    let ParabolicGrid { n_x, n_t, dim, save_every } = grid;
    if dim != 1 && dim != 2 {
        return Err(crate::error::invalid(alloc::format!("dimension {dim} not supported (1 or 2)")));
    }
    if n_x < 3 || n_x % 2 == 0 || n_t < 3 || n_t % 2 == 0 {
        return Err(crate::error::invalid("n_x and n_t must be odd and at least 3"));
    }
    if n_t < n_x {
        return Err(crate::error::invalid(alloc::format!(
            "under-resolved in time: n_t = {n_t} must be at least n_x = {n_x}"
        )));
    }
    if !(lambda >= 1.0) || !(r > 0.0) || !(c > 0.0) || !(horizon > 0.0) {
        return Err(crate::error::invalid("need lambda >= 1 and positive r, c, T"));
    }
    let save_every = save_every.max(1);
    let xs = box_grid(r, n_x);
    let k = 2.0 * horizon / (n_t - 1) as f64;
    let time_dependent = g.depends_on_t()
        || coeffs.a11.depends_on_t()
        || coeffs.a22.depends_on_t()
        || coeffs.a1.depends_on_t()
        || coeffs.a2.depends_on_t()
        || coeffs.a0.depends_on_t();

    // α = ‖a₀⁻‖ on the cylinder
    let ts: Vec<f64> = (0..65).map(|m| -horizon + 2.0 * horizon * m as f64 / 64.0).collect();
    let (a0_lo, _) = coeffs.a0.sampled_range(r, dim, &ts, 65);
    let (a0_grid_lo, _) = coeffs.a0.sampled_range(r, dim, &ts, n_x + 2);
    let alpha = (-a0_lo.min(a0_grid_lo)).max(0.0);
    let tol = 1e-4 * (2.0 * alpha * horizon).exp();

    let ul = |x1: f64| u_lower(c, lambda, r, x1);
    let count = if dim == 2 { n_x * n_x } else { n_x };
    let mut interior: Vec<f64> = if dim == 2 {
        (0..count).map(|q| ul(xs[q % n_x + 1])).collect()
    } else {
        (0..count).map(|q| ul(xs[q + 1])).collect()
    };

    let mid = (n_t - 1) / 2;
    let mut t_saved = Vec::new();
    let mut u_saved = Vec::new();
    let mut level_max = Vec::with_capacity(n_t);
    let mut lower_slack = f64::INFINITY;
    let mut upper_slack = f64::INFINITY;
    let mut lower_ok = true;
    let mut upper_ok = true;
    let mut u_center = f64::NAN;

    let mut record = |m: usize, interior: &[f64]| {
        let t = time_level(horizon, n_t, m);
        let full = with_boundary(interior, n_x, dim, &xs, ul);
        let upper = (alpha * (t + horizon)).exp();
        let (ls, lo_ok, up_ok) = bound_flags(&full, &xs, n_x, dim, ul, upper, tol);
        let mx = full.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
        lower_slack = lower_slack.min(ls);
        upper_slack = upper_slack.min(upper - mx);
        lower_ok &= lo_ok;
        upper_ok &= up_ok;
        level_max.push(mx);
        if m == mid {
            u_center = full[center_index(n_x, dim)];
        }
        if m % save_every == 0 || m == mid || m == n_t - 1 {
            t_saved.push(t);
            u_saved.push(full);
        }
    };
    record(0, &interior);

    let mut st_old = spatial_stencil(coeffs, g, lambda, r, n_x, dim, time_level(horizon, n_t, 0))?;
    let mut rhs_old = st_old.boundary_rhs(ul, &xs);
    let mut fixed = if time_dependent {
        None
    } else {
        Some(st_old.shifted_solver(1.0, 0.5 * k)?)
    };
    for m in 1..n_t {
        let (st_new, rhs_new) = if time_dependent {
            let s = spatial_stencil(coeffs, g, lambda, r, n_x, dim, time_level(horizon, n_t, m))?;
            let b = s.boundary_rhs(ul, &xs);
            (s, b)
        } else {
            (st_old.clone(), rhs_old.clone())
        };
        let au = st_old.apply(&interior);
        let b: Vec<f64> = (0..count)
            .map(|q| interior[q] - 0.5 * k * au[q] + 0.5 * k * (rhs_old[q] + rhs_new[q]))
            .collect();
        interior = match &mut fixed {
            Some(solver) => solver.solve(&b)?,
            None => st_new.shifted_solver(1.0, 0.5 * k)?.solve(&b)?,
        };
        if interior.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotFinite { at: time_level(horizon, n_t, m) });
        }
        record(m, &interior);
        st_old = st_new;
        rhs_old = rhs_new;
    }
    if !(u_center > 0.0) {
        return Err(Error::BoundViolated { name: "u(0,0) > 0", observed: u_center, declared: 0.0 });
    }
    Ok(ParabolicProfile {
        lambda,
        r,
        c,
        horizon,
        alpha,
        grid: ParabolicGrid { n_x, n_t, dim, save_every },
        x: xs,
        t_saved,
        u_saved,
        level_max,
        u_center,
        tol,
        lower_slack,
        upper_slack,
        lower_ok,
        upper_ok,
        under_resolved: !(lower_ok && upper_ok),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub operator: alloc::string::String,
    pub p: f64,
    pub verdict: Verdict,
    /// `α < 1/p`.
    pub expected_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub alpha: f64,
    pub rows: Vec<Table1Row>,
    pub probe: ProbeReport,
    /// Every decided row matches `α < 1/p`.
    pub consistent: bool,
}

/// The two necessary conditions for `a = exp(-|y|^{-α})`: order `½` for
/// `∂_t + L_F` and order 1 for `-∂_x² + L_F`. One set of ground states
/// serves both rows.
pub fn table1_experiment(a: &CoeffFn, alpha: f64, cfg: &ProbeConfig) -> Result<Table1Report> {
    let base = lambda_growth(a, 1.0, cfg)?;
    table1_from_probe(alpha, base, cfg)
}

/// As [`table1_experiment`] from an existing probe report.
pub fn table1_from_probe(alpha: f64, base: ProbeReport, cfg: &ProbeConfig) -> Result<Table1Report> {
    let mut rows = Vec::new();
    for (op, p) in [("dt + L_F", 0.5), ("-dx^2 + L_F", 1.0)] {
        let r = assess(p, &base.k_values, &base.lambda_min, cfg)?;
        rows.push(Table1Row {
            operator: op.into(),
            p,
            verdict: r.verdict,
            expected_holds: alpha < 1.0 / p,
        });
    }
    let consistent = rows.iter().all(|row| match row.verdict {
        Verdict::Holds => row.expected_holds,
        Verdict::Fails => !row.expected_holds,
        Verdict::Inconclusive => true,
    });
    Ok(Table1Report { alpha, rows, probe: base, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> FieldFn {
        FieldFn::parse(s).unwrap()
    }

    #[test]
    fn one_dimensional_closed_forms() {
        let v = profile_1d(&f("0"), &f("1"), 5.0, 1.0, 0.3).unwrap();
        assert!((v - (-1.5f64).exp()).abs() < 1e-14);
        assert_eq!(profile_1d(&f("0"), &f("1"), 5.0, 1.0, 0.0).unwrap(), 1.0);
        for lambda in [1.0, 50.0] {
            let v = profile_1d(&f("1"), &f("0"), lambda, 1.0, -0.7).unwrap();
            assert!((v - 0.7f64.exp()).abs() < 1e-14);
        }
        let t: f64 = 0.8;
        let v = profile_1d(&f("t"), &f("t^2"), 3.0, 1.0, t).unwrap();
        let exact = (-(t * t / 2.0 + t * t * t)).exp();
        assert!((v - exact).abs() < 1e-12 * exact);
        assert!(profile_1d(&f("0"), &f("1"), 1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn one_dimensional_table() {
        let r = profile_1d_table(&f("-1 + t"), &f("t^2"), 4.0, 0.5, 21).unwrap();
        assert!(r.positive && r.bound_ok);
        assert_eq!(r.v[10], 1.0);
    }

    fn heat_1d(g: &str, a0: &str, lambda: f64, n_x: usize, n_t: usize) -> ParabolicProfile {
        let co = EllipticCoeffs { a0: f(a0), ..EllipticCoeffs::laplacian() };
        let grid = ParabolicGrid { n_x, n_t, dim: 1, save_every: 1 };
        solve_profile_parabolic(&co, &f(g), lambda, 0.3, 1.0, 0.5, grid).unwrap()
    }

    #[test]
    fn heat_between_exponential_walls() {
        let p = heat_1d("0", "0", 4.0, 41, 81);
        assert!(p.lower_ok && p.upper_ok && !p.under_resolved);
        assert!(p.level_max.iter().all(|m| *m <= 1.0 + p.tol));
        for w in p.level_max.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert_eq!(p.v_at_origin(), 1.0);
    }

    #[test]
    fn negative_potential_upper_solution() {
        let p = heat_1d("1", "-1", core::f64::consts::E.powi(2), 41, 81);
        assert_eq!(p.alpha, 1.0);
        assert!(p.lower_ok && p.upper_ok);
    }

    #[test]
    fn time_step_guard() {
        let co = EllipticCoeffs::laplacian();
        let grid = ParabolicGrid { n_x: 41, n_t: 21, dim: 1, save_every: 1 };
        assert!(solve_profile_parabolic(&co, &f("1"), 1.0, 0.3, 1.0, 0.5, grid).is_err());
    }

    #[test]
    fn two_dimensional_march() {
        let co = EllipticCoeffs::laplacian();
        let grid = ParabolicGrid { n_x: 15, n_t: 31, dim: 2, save_every: 10 };
        let p = solve_profile_parabolic(&co, &f("x1^2 + x2^2"), 3.0, 0.3, 2.0, 0.25, grid).unwrap();
        assert!(p.lower_ok && p.upper_ok);
        assert_eq!(p.v_at_origin(), 1.0);
    }

    #[test]
    fn space_time_refinement_order() {
        let co = EllipticCoeffs { a0: f("1 + x1^2"), ..EllipticCoeffs::laplacian() };
        let run = |n_x: usize, n_t: usize| {
            let grid = ParabolicGrid { n_x, n_t, dim: 1, save_every: n_t };
            solve_profile_parabolic(&co, &f("1"), 2.0, 0.3, 1.0, 0.2, grid).unwrap()
        };
        let a = run(21, 41);
        let b = run(43, 81);
        let c = run(87, 161);
        let last = |p: &ParabolicProfile| p.u_saved.last().unwrap().clone();
        let (ua, ub, uc) = (last(&a), last(&b), last(&c));
        let d1 = ua.iter().enumerate().map(|(k, v)| (v - ub[2 * k]).abs()).fold(0.0, f64::max);
        let d2 = ub.iter().enumerate().map(|(k, v)| (v - uc[2 * k]).abs()).fold(0.0, f64::max);
        let order = (d1 / d2).log2();
        assert!(order >= 1.8, "order {order}");
    }
}
