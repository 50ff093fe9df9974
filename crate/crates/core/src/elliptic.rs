//! Elliptic spectral profile: barrier parameters, the Dirichlet problem
//! `L₁u + gλu = 0` on `Q_r = (-r, r)^dim` with data `e^{c√λ(x₁-r)}`, and the
//! two-sided bound `e^{c√λ(x₁-r)} ≤ u ≤ 2`.
//!
//! `L₁ = -a₁₁∂₁² - a₂₂∂₂² + a₁∂₁ + a₂∂₂ + a₀` (no mixed second derivatives).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::coeff::FieldFn;
use crate::linalg::{solve_tridiagonal, BandLu, BandMatrix};
use crate::{Error, Result};

/// Coefficients of `L₁`. In one dimension `a22` and `a2` are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticCoeffs {
    pub a11: FieldFn,
    #[serde(default = "one")]
    pub a22: FieldFn,
    #[serde(default = "zero")]
    pub a1: FieldFn,
    #[serde(default = "zero")]
    pub a2: FieldFn,
    #[serde(default = "zero")]
    pub a0: FieldFn,
}

fn one() -> FieldFn {
    FieldFn::constant(1.0)
}

fn zero() -> FieldFn {
    FieldFn::constant(0.0)
}

impl EllipticCoeffs {
    /// `-Δ`.
    pub fn laplacian() -> Self {
        EllipticCoeffs {
            a11: one(),
            a22: one(),
            a1: zero(),
            a2: zero(),
            a0: zero(),
        }
    }

    /// Sampled `(inf a₁₁, ‖a₁‖, ‖a₀‖, ‖g‖)` on `[-r_s, r_s]^dim × ts`.
    pub fn sampled_inputs(&self, g: &FieldFn, r_s: f64, dim: usize, ts: &[f64], samples: usize) -> BarrierInputs {
        let (a11_lo, _) = self.a11.sampled_range(r_s, dim, ts, samples);
        let (a1_lo, a1_hi) = self.a1.sampled_range(r_s, dim, ts, samples);
        let (a0_lo, a0_hi) = self.a0.sampled_range(r_s, dim, ts, samples);
        let (g_lo, g_hi) = g.sampled_range(r_s, dim, ts, samples);
        BarrierInputs {
            inf_a11: a11_lo,
            norm_a1: a1_lo.abs().max(a1_hi.abs()),
            norm_a0: a0_lo.abs().max(a0_hi.abs()),
            norm_g: g_lo.abs().max(g_hi.abs()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierInputs {
    pub inf_a11: f64,
    pub norm_a1: f64,
    pub norm_a0: f64,
    pub norm_g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    pub beta: f64,
    pub beta0: f64,
    pub beta1: f64,
    pub r0: f64,
    pub c0: f64,
    pub lambda_min: f64,
    pub inputs: BarrierInputs,
}

/// `β = max((‖a₁‖+1)/inf a₁₁, 4‖a₀‖)`, `r₀ = min(log 2/(2β), 1)`, and the
/// smallest `c₀` with `inf a₁₁ c²λ ≥ ‖a₁‖c√λ + ‖g‖λ + ‖a₀‖` for all
/// `λ ≥ lambda_min`.
pub fn barrier_params(inf_a11: f64, norm_a1: f64, norm_a0: f64, norm_g: f64, lambda_min: f64) -> Result<BarrierParams> {
    if !(inf_a11 > 0.0) {
        return Err(Error::BoundViolated { name: "inf a11 > 0", observed: inf_a11, declared: 0.0 });
    }
    if !(norm_a1 >= 0.0 && norm_a0 >= 0.0 && norm_g >= 0.0) {
        return Err(crate::error::invalid("coefficient norms must be nonnegative"));
    }
    if !(lambda_min >= 1.0) {
        return Err(crate::error::invalid("lambda_min must be at least 1"));
    }
    let beta0 = (norm_a1 + 1.0) / inf_a11;
    let beta1 = 4.0 * norm_a0;
    let beta = beta0.max(beta1);
    let r0 = (LN_2 / (2.0 * beta)).min(1.0);
    // the left side minus the right, divided by λ, increases in λ, so the
    // constraint binds at lambda_min
    let b = norm_a1 / lambda_min.sqrt();
    let k = norm_g + norm_a0 / lambda_min;
    let c0 = (b + (b * b + 4.0 * inf_a11 * k).sqrt()) / (2.0 * inf_a11);
    Ok(BarrierParams {
        beta,
        beta0,
        beta1,
        r0,
        c0,
        lambda_min,
        inputs: BarrierInputs { inf_a11, norm_a1, norm_a0, norm_g },
    })
}

impl BarrierParams {
    pub fn from_inputs(inputs: BarrierInputs, lambda_min: f64) -> Result<Self> {
        barrier_params(inputs.inf_a11, inputs.norm_a1, inputs.norm_a0, inputs.norm_g, lambda_min)
    }

    /// `w(x) = 3 - e^{β(r-x₁)}`.
    pub fn w(&self, r: f64, x1: f64) -> f64 {
        3.0 - (self.beta * (r - x1)).exp()
    }

    /// `r = min(r₀, r_user)` and `c = max(c₀, c_user)`.
    pub fn choose(&self, r_user: Option<f64>, c_user: Option<f64>) -> (f64, f64) {
        (r_user.map_or(self.r0, |r| r.min(self.r0)), c_user.map_or(self.c0, |c| c.max(self.c0)))
    }
}

/// `u_L = e^{c√λ(x₁-r)}`.
pub fn u_lower(c: f64, lambda: f64, r: f64, x1: f64) -> f64 {
    (c * lambda.sqrt() * (x1 - r)).exp()
}

/// `(L₁ + λg)u_L / u_L = -a₁₁c²λ + a₁c√λ + λg + a₀`.
pub fn lower_solution_factor(a11: f64, a1: f64, a0: f64, g: f64, c: f64, lambda: f64) -> f64 {
    -a11 * c * c * lambda + a1 * c * lambda.sqrt() + lambda * g + a0
}

/// Grid of `n + 2` points on `[-r, r]` with `x = 0` exact at the centre.
pub fn box_grid(r: f64, n: usize) -> Vec<f64> {
    let m = (n + 1) as f64;
    (0..n + 2).map(|k| r * (2.0 * k as f64 - m) / m).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierCheck {
    /// `min (L₁ + λg)w` over the grid.
    pub min_slack: f64,
    pub holds: bool,
    pub w_min: f64,
    pub w_max: f64,
    /// `1 ≤ w ≤ 2` up to a few ulps.
    pub w_ok: bool,
    /// Largest `(L₁+λg)u_L/u_L` at `c₀`; should be `≤ 0`.
    pub lower_factor_max: f64,
    pub points: usize,
}

/// Pointwise slack tolerance of [`verify_barrier`].
pub const BARRIER_TOL: f64 = 1e-9;

/// Evaluates `(L₁ + λg)w` with the analytic derivatives of `w` on a
/// `grid^dim` tensor grid of `Q̄_r`, after checking that the sampled
/// coefficients respect the norms `bp` was built from.
pub fn verify_barrier(
    coeffs: &EllipticCoeffs,
    g: &FieldFn,
    bp: &BarrierParams,
    lambda: f64,
    r: f64,
    grid: usize,
    dim: usize,
) -> Result<BarrierCheck> {
    check_dim(dim)?;
    if !(r > 0.0 && r <= bp.r0 * (1.0 + 1e-15)) {
        return Err(Error::BoundViolated { name: "r <= r0", observed: r, declared: bp.r0 });
    }
    if grid < 2 {
        return Err(crate::error::invalid("barrier grid needs at least 2 points"));
    }
    let xs: Vec<f64> = (0..grid).map(|k| -r + 2.0 * r * k as f64 / (grid - 1) as f64).collect();
    let x2s: Vec<f64> = if dim == 2 { xs.clone() } else { vec![0.0] };
    let inp = bp.inputs;
    let slackened = |v: f64| v * (1.0 + 1e-12) + 1e-300;
    let mut min_slack = f64::INFINITY;
    let mut lower_factor_max = f64::NEG_INFINITY;
    let mut w_min = f64::INFINITY;
    let mut w_max = f64::NEG_INFINITY;
    for &x2 in &x2s {
        for &x1 in &xs {
            let a11 = coeffs.a11.eval(x1, x2, 0.0);
            let a1 = coeffs.a1.eval(x1, x2, 0.0);
            let a0 = coeffs.a0.eval(x1, x2, 0.0);
            let gv = g.eval(x1, x2, 0.0);
            if a11 < inp.inf_a11 / (1.0 + 1e-12) {
                return Err(Error::BoundViolated { name: "inf a11", observed: a11, declared: inp.inf_a11 });
            }
            if a1.abs() > slackened(inp.norm_a1) {
                return Err(Error::BoundViolated { name: "norm a1", observed: a1.abs(), declared: inp.norm_a1 });
            }
            if a0.abs() > slackened(inp.norm_a0) {
                return Err(Error::BoundViolated { name: "norm a0", observed: a0.abs(), declared: inp.norm_a0 });
            }
            if gv < 0.0 || gv > slackened(inp.norm_g) {
                return Err(Error::BoundViolated { name: "0 <= g <= norm g", observed: gv, declared: inp.norm_g });
            }
            let e = (bp.beta * (r - x1)).exp();
            let w = 3.0 - e;
            // -a₁₁w'' + a₁w' + (a₀ + λg)w with w' = βe, w'' = -β²e
            let lw = a11 * bp.beta * bp.beta * e + a1 * bp.beta * e + (a0 + lambda * gv) * w;
            min_slack = min_slack.min(lw);
            w_min = w_min.min(w);
            w_max = w_max.max(w);
            lower_factor_max = lower_factor_max.max(lower_solution_factor(a11, a1, a0, gv, bp.c0, lambda));
        }
    }
    // w(-r₀) = 3 - e^{log 2} is 1 only up to rounding of exp and log 2
    let ulp = 4.0 * f64::EPSILON;
    Ok(BarrierCheck {
        min_slack,
        holds: min_slack >= -BARRIER_TOL,
        w_min,
        w_max,
        w_ok: w_min >= 1.0 - ulp && w_max <= 2.0 + ulp,
        lower_factor_max,
        points: xs.len() * x2s.len(),
    })
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(crate::error::invalid(alloc::format!("dimension {dim} not supported (1 or 2)")))
    }
}

/// Five-point (three in 1D) stencil of `T̃ = L₁ + λg` at interior nodes,
/// numbered `j·n + i` with `i` along `x₁`.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    pub n: usize,
    pub dim: usize,
    pub center: Vec<f64>,
    pub west: Vec<f64>,
    pub east: Vec<f64>,
    pub south: Vec<f64>,
    pub north: Vec<f64>,
    pub upwinded: bool,
}

/// Second-order central stencil, switched to one-sided first-order
/// differences where the cell Péclet number `|a|h/(2a_ii)` exceeds 1.
fn axis_weights(aii: f64, a: f64, h: f64) -> (f64, f64, f64, bool) {
    let d = aii / (h * h);
    if a.abs() * h / (2.0 * aii) <= 1.0 {
        (-d - a / (2.0 * h), 2.0 * d, -d + a / (2.0 * h), false)
    } else if a > 0.0 {
        (-d - a / h, 2.0 * d + a / h, -d, true)
    } else {
        (-d, 2.0 * d - a / h, -d + a / h, true)
    }
}

pub(crate) fn spatial_stencil(
    coeffs: &EllipticCoeffs,
    g: &FieldFn,
    lambda: f64,
    r: f64,
    n: usize,
    dim: usize,
    t: f64,
) -> Result<Stencil> {
    let xs = box_grid(r, n);
    let h = 2.0 * r / (n + 1) as f64;
    let count = if dim == 2 { n * n } else { n };
    let mut s = Stencil {
        n,
        dim,
        center: vec![0.0; count],
        west: vec![0.0; count],
        east: vec![0.0; count],
        south: vec![0.0; count],
        north: vec![0.0; count],
        upwinded: false,
    };
    let rows = if dim == 2 { n } else { 1 };
    for j in 0..rows {
        let x2 = if dim == 2 { xs[j + 1] } else { 0.0 };
        for i in 0..n {
            let x1 = xs[i + 1];
            let k = j * n + i;
            let a11 = coeffs.a11.eval(x1, x2, t);
            if !(a11 > 0.0) {
                return Err(Error::BoundViolated { name: "a11 > 0", observed: a11, declared: 0.0 });
            }
            let (w, c, e, up) = axis_weights(a11, coeffs.a1.eval(x1, x2, t), h);
            s.west[k] = w;
            s.east[k] = e;
            s.center[k] = c;
            s.upwinded |= up;
            if dim == 2 {
                let a22 = coeffs.a22.eval(x1, x2, t);
                if !(a22 > 0.0) {
                    return Err(Error::BoundViolated { name: "a22 > 0", observed: a22, declared: 0.0 });
                }
                let (so, c2, no, up2) = axis_weights(a22, coeffs.a2.eval(x1, x2, t), h);
                s.south[k] = so;
                s.north[k] = no;
                s.center[k] += c2;
                s.upwinded |= up2;
            }
            let gv = g.eval(x1, x2, t);
            if gv < 0.0 {
                return Err(Error::BoundViolated { name: "g >= 0", observed: gv, declared: 0.0 });
            }
            s.center[k] += coeffs.a0.eval(x1, x2, t) + lambda * gv;
            if !s.center[k].is_finite() {
                return Err(Error::NotFinite { at: x1 });
            }
        }
    }
    Ok(s)
}

impl Stencil {
    /// Contribution of the Dirichlet data `u_L` to each interior equation,
    /// moved to the right-hand side (sign included).
    pub(crate) fn boundary_rhs(&self, bdry: impl Fn(f64) -> f64, xs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut rhs = vec![0.0; self.center.len()];
        let rows = if self.dim == 2 { n } else { 1 };
        for j in 0..rows {
            for i in 0..n {
                let k = j * n + i;
                if i == 0 {
                    rhs[k] -= self.west[k] * bdry(xs[0]);
                }
                if i == n - 1 {
                    rhs[k] -= self.east[k] * bdry(xs[n + 1]);
                }
                if self.dim == 2 {
                    // data depends on x₁ only
                    if j == 0 {
                        rhs[k] -= self.south[k] * bdry(xs[i + 1]);
                    }
                    if j == n - 1 {
                        rhs[k] -= self.north[k] * bdry(xs[i + 1]);
                    }
                }
            }
        }
        rhs
    }

    /// `A u` on interior values with zero boundary data.
    pub(crate) fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; u.len()];
        let rows = if self.dim == 2 { n } else { 1 };
        for j in 0..rows {
            for i in 0..n {
                let k = j * n + i;
                let mut s = self.center[k] * u[k];
                if i > 0 {
                    s += self.west[k] * u[k - 1];
                }
                if i + 1 < n {
                    s += self.east[k] * u[k + 1];
                }
                if self.dim == 2 {
                    if j > 0 {
                        s += self.south[k] * u[k - n];
                    }
                    if j + 1 < n {
                        s += self.north[k] * u[k + n];
                    }
                }
                out[k] = s;
            }
        }
        out
    }

    /// Solves `(shift·I + scale·A) u = rhs`.
    pub(crate) fn solve_shifted(&self, shift: f64, scale: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        self.shifted_solver(shift, scale)?.solve(rhs)
    }

    /// Factors `shift·I + scale·A` once for repeated solves.
    pub(crate) fn shifted_solver(&self, shift: f64, scale: f64) -> Result<ShiftedSolver> {
        let n = self.n;
        if self.dim == 1 {
            return Ok(ShiftedSolver::Tridiagonal {
                lower: self.west[1..].iter().map(|v| scale * v).collect(),
                diag: self.center.iter().map(|v| shift + scale * v).collect(),
                upper: self.east[..n - 1].iter().map(|v| scale * v).collect(),
            });
        }
        let m = n * n;
        let mut a = BandMatrix::zeros(m, n, n);
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                a.add(k, k, shift + scale * self.center[k]);
                if i > 0 {
                    a.add(k, k - 1, scale * self.west[k]);
                }
                if i + 1 < n {
                    a.add(k, k + 1, scale * self.east[k]);
                }
                if j > 0 {
                    a.add(k, k - n, scale * self.south[k]);
                }
                if j + 1 < n {
                    a.add(k, k + n, scale * self.north[k]);
                }
            }
        }
        Ok(ShiftedSolver::Banded(a.factor()?))
    }
}

pub(crate) enum ShiftedSolver {
    Tridiagonal { lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64> },
    Banded(BandLu),
}

impl ShiftedSolver {
    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            ShiftedSolver::Tridiagonal { lower, diag, upper } => solve_tridiagonal(lower, diag, upper, rhs),
            ShiftedSolver::Banded(lu) => lu.solve(rhs),
        }
    }
}

/// Scatters interior values into a full `(n+2)^dim` grid whose boundary
/// carries `bdry(x₁)`.
pub(crate) fn with_boundary(interior: &[f64], n: usize, dim: usize, xs: &[f64], bdry: impl Fn(f64) -> f64) -> Vec<f64> {
    let m = n + 2;
    if dim == 1 {
        let mut u = Vec::with_capacity(m);
        u.push(bdry(xs[0]));
        u.extend_from_slice(interior);
        u.push(bdry(xs[m - 1]));
        return u;
    }
    let mut u = vec![0.0; m * m];
    for j in 0..m {
        for i in 0..m {
            u[j * m + i] = if i == 0 || j == 0 || i == m - 1 || j == m - 1 {
                bdry(xs[i])
            } else {
                interior[(j - 1) * n + (i - 1)]
            };
        }
    }
    u
}

/// Index of the centre `x = 0` in the full grid.
pub(crate) fn center_index(n: usize, dim: usize) -> usize {
    let c = (n + 1) / 2;
    if dim == 2 {
        c * (n + 2) + c
    } else {
        c
    }
}

/// Grid solution of the elliptic profile problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSolution {
    pub lambda: f64,
    pub r: f64,
    pub c: f64,
    pub dim: usize,
    /// Interior points per axis.
    pub n: usize,
    /// Axis grid including the two boundary points.
    pub x: Vec<f64>,
    /// Values on the full grid, `x₂` outer, `x₁` inner.
    pub u: Vec<f64>,
    /// `u/u(0)`.
    pub v: Vec<f64>,
    pub u_center: f64,
    pub u_max: f64,
    /// `min (u - u_L)`.
    pub lower_slack: f64,
    pub tol: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub upwinded: bool,
    /// Relative residual of the discrete linear system.
    pub residual: f64,
}

impl ProfileSolution {
    /// Largest value on the boundary of the grid.
    pub fn boundary_max(&self) -> f64 {
        let m = self.n + 2;
        if self.dim == 1 {
            return self.u[0].max(self.u[m - 1]);
        }
        let mut b = f64::NEG_INFINITY;
        for j in 0..m {
            for i in 0..m {
                if i == 0 || j == 0 || i == m - 1 || j == m - 1 {
                    b = b.max(self.u[j * m + i]);
                }
            }
        }
        b
    }

    pub fn v_at_center(&self) -> f64 {
        self.v[center_index(self.n, self.dim)]
    }
}

/// Bound checks on a full-grid `u` against `u_L ≤ u ≤ upper`.
pub(crate) fn bound_flags(u: &[f64], xs: &[f64], n: usize, dim: usize, ul: impl Fn(f64) -> f64, upper: f64, tol: f64) -> (f64, bool, bool) {
    let m = n + 2;
    let mut slack = f64::INFINITY;
    let mut up = true;
    for (k, &val) in u.iter().enumerate() {
        let x1 = xs[if dim == 2 { k % m } else { k }];
        slack = slack.min(val - ul(x1));
        up &= val <= upper + tol;
    }
    (slack, slack >= -tol, up)
}

/// Finite-difference solve of `L₁u + gλu = 0` on `Q_r` with
/// `u = e^{c√λ(x₁-r)}` on `∂Q_r`; `n` interior points per axis (odd).
pub fn solve_profile(
    coeffs: &EllipticCoeffs,
    g: &FieldFn,
    lambda: f64,
    r: f64,
    c: f64,
    n: usize,
    dim: usize,
) -> Result<ProfileSolution> {
    check_dim(dim)?;
    if n < 3 || n % 2 == 0 {
        return Err(crate::error::invalid(alloc::format!("grid size n = {n} must be odd and at least 3")));
    }
    if !(lambda >= 1.0) || !(r > 0.0 && r <= 1.0) || !(c > 0.0) {
        return Err(crate::error::invalid("need lambda >= 1, 0 < r <= 1 and c > 0"));
    }
    let xs = box_grid(r, n);
    let st = spatial_stencil(coeffs, g, lambda, r, n, dim, 0.0)?;
    let ul = |x1: f64| u_lower(c, lambda, r, x1);
    let rhs = st.boundary_rhs(ul, &xs);
    let interior = st.solve_shifted(0.0, 1.0, &rhs)?;
    let residual = relative_residual(&st, &interior, &rhs);
    let u = with_boundary(&interior, n, dim, &xs, ul);
    let u_center = u[center_index(n, dim)];
    if !(u_center > 0.0) {
        return Err(Error::BoundViolated { name: "u(0) > 0", observed: u_center, declared: 0.0 });
    }
    let v: Vec<f64> = u.iter().map(|x| x / u_center).collect();
    let u_max = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-6 * (1.0 + u_max);
    let (lower_slack, lower_ok, upper_ok) = bound_flags(&u, &xs, n, dim, ul, 2.0, tol);
    Ok(ProfileSolution {
        lambda,
        r,
        c,
        dim,
        n,
        x: xs,
        u,
        v,
        u_center,
        u_max,
        lower_slack,
        tol,
        lower_ok,
        upper_ok,
        upwinded: st.upwinded,
        residual,
    })
}

/// `‖Au - b‖_∞ / (‖A‖_∞‖u‖_∞ + ‖b‖_∞)` for the assembled interior system.
fn relative_residual(st: &Stencil, u: &[f64], b: &[f64]) -> f64 {
    let au = st.apply(u);
    let num = au.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let a_norm = (0..u.len())
        .map(|k| st.center[k].abs() + st.west[k].abs() + st.east[k].abs() + st.south[k].abs() + st.north[k].abs())
        .fold(0.0, f64::max);
    let u_norm = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let b_norm = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    num / (a_norm * u_norm + b_norm).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperCheck {
    pub max_abs_v: f64,
    /// `2e^{c r λ^{1/(2p)}}`.
    pub bound: f64,
    pub holds: bool,
}

/// `max|v| ≤ 2e^{c r λ^{1/(2p)}}(1 + 1e-6)`, which follows from the two
/// bounds since `u(0) ≥ e^{-c√λ r}`; also requires `c ≥ c₀`.
pub fn profile_upper_check(ps: &ProfileSolution, c0: f64, p: f64) -> UpperCheck {
    let max_abs_v = ps.v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let bound = 2.0 * (ps.c * ps.r * ps.lambda.powf(1.0 / (2.0 * p))).exp();
    UpperCheck {
        max_abs_v,
        bound,
        holds: ps.c >= c0 && max_abs_v <= bound * (1.0 + 1e-6),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::E;

    #[test]
    fn barrier_examples() {
        let bp = barrier_params(1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(bp.beta, 1.0);
        assert!((bp.r0 - 0.346574).abs() < 1e-6);
        let bp = barrier_params(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!((bp.beta0, bp.beta1, bp.beta), (2.0, 4.0, 4.0));
        assert!((bp.r0 - 0.086643).abs() < 1e-6);
        let bp = barrier_params(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!((bp.c0 - 1.0).abs() < 1e-15);
        assert!(barrier_params(0.0, 0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn lower_solution_is_subsolution_at_c0() {
        let bp = barrier_params(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        for lambda in [1.0, 2.0, 10.0, 1e4] {
            assert!(lower_solution_factor(1.0, 0.0, 0.0, 1.0, bp.c0, lambda) <= 1e-12 * lambda);
        }
        let bp = barrier_params(0.5, 2.0, 3.0, 1.5, 1.0).unwrap();
        for lambda in [1.0, 7.0, 100.0] {
            for (a1, a0, g) in [(2.0, 3.0, 1.5), (-2.0, -3.0, 0.0), (2.0, -3.0, 1.5)] {
                assert!(lower_solution_factor(0.5, a1, a0, g, bp.c0, lambda) <= 1e-12 * lambda);
            }
        }
    }

    #[test]
    fn barrier_slack_nonnegative() {
        let bp = barrier_params(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        let chk = verify_barrier(&EllipticCoeffs::laplacian(), &FieldFn::constant(1.0), &bp, 10.0, bp.r0, 101, 1).unwrap();
        assert!(chk.holds && chk.min_slack >= 0.0 && chk.w_ok);
        // a₀ at its negative extreme
        let bp = barrier_params(1.0, 0.0, 2.0, 0.0, 1.0).unwrap();
        let co = EllipticCoeffs { a0: FieldFn::constant(-2.0), ..EllipticCoeffs::laplacian() };
        let chk = verify_barrier(&co, &FieldFn::constant(0.0), &bp, 5.0, bp.r0, 101, 2).unwrap();
        assert!(chk.holds, "{}", chk.min_slack);
        // a coefficient outside its declared bound is named
        let co = EllipticCoeffs { a0: FieldFn::constant(-3.0), ..EllipticCoeffs::laplacian() };
        match verify_barrier(&co, &FieldFn::constant(0.0), &bp, 5.0, bp.r0, 11, 1) {
            Err(Error::BoundViolated { name, .. }) => assert_eq!(name, "norm a0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn line_solution_without_potential() {
        let ps = solve_profile(&EllipticCoeffs::laplacian(), &FieldFn::constant(0.0), 4.0, 0.25, 1.0, 101, 1).unwrap();
        for (x, u) in ps.x.iter().zip(&ps.u) {
            let line = (-1f64).exp() + (1.0 - (-1f64).exp()) * (x + 0.25) / 0.5;
            assert!((u - line).abs() < 1e-12);
        }
        assert!(ps.lower_ok && ps.upper_ok);
        assert_eq!(ps.v_at_center(), 1.0);
        let up = profile_upper_check(&ps, 1.0, 1.0);
        assert!((up.max_abs_v - 2.0 / ((-1f64).exp() + 1.0)).abs() < 1e-12);
        assert!((up.bound - 2.0 * 0.5f64.exp()).abs() < 1e-12 && up.holds);
    }

    #[test]
    fn closed_form_two_point_problem() {
        // -u'' + 4u = 0, u(-1/4) = e^{-1}, u(1/4) = 1
        let ps = solve_profile(&EllipticCoeffs::laplacian(), &FieldFn::constant(1.0), 4.0, 0.25, 1.0, 2047, 1).unwrap();
        let (e1, em1) = (0.5f64.exp(), (-0.5f64).exp());
        // A e^{2x} + B e^{-2x}
        let m = [[em1, e1], [e1, em1]];
        let rhs = [(-1f64).exp(), 1.0];
        let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let a = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / d;
        let b = (m[0][0] * rhs[1] - rhs[0] * m[1][0]) / d;
        for (x, u) in ps.x.iter().zip(&ps.u) {
            let exact = a * (2.0 * x).exp() + b * (-2.0 * x).exp();
            assert!((u - exact).abs() < 1e-6, "{x}");
        }
    }

    #[test]
    fn two_dimensional_radial_potential() {
        let g = FieldFn::parse("x1^2 + x2^2").unwrap();
        let co = EllipticCoeffs::laplacian();
        let inp = co.sampled_inputs(&g, 1.0, 2, &[], 41);
        let bp = BarrierParams::from_inputs(inp, 1.0).unwrap();
        let ps = solve_profile(&co, &g, E * E, bp.r0, bp.c0, 41, 2).unwrap();
        assert!(ps.lower_ok && ps.upper_ok);
        assert_eq!(ps.v_at_center(), 1.0);
        assert!(ps.u.iter().fold(0.0f64, |m, x| m.max(*x)) <= 2.0 * ps.boundary_max());
    }

    #[test]
    fn upwinding_switches_on() {
        let co = EllipticCoeffs { a1: FieldFn::constant(500.0), ..EllipticCoeffs::laplacian() };
        let ps = solve_profile(&co, &FieldFn::constant(1.0), 1.0, 0.1, 1.0, 11, 1).unwrap();
        assert!(ps.upwinded);
        let ps = solve_profile(&EllipticCoeffs::laplacian(), &FieldFn::constant(1.0), 1.0, 0.1, 1.0, 11, 1).unwrap();
        assert!(!ps.upwinded);
    }

    #[test]
    fn grid_refinement_is_second_order() {
        let co = EllipticCoeffs { a1: FieldFn::parse("x1").unwrap(), a0: FieldFn::constant(1.0), ..EllipticCoeffs::laplacian() };
        let g = FieldFn::parse("x1^2").unwrap();
        let sol = |n| solve_profile(&co, &g, E.powi(4), 0.2, 2.0, n, 1).unwrap();
        let (a, b, c) = (sol(31), sol(63), sol(127));
        let diff = |p: &ProfileSolution, q: &ProfileSolution| {
            p.u.iter().enumerate().map(|(k, v)| (v - q.u[2 * k]).abs()).fold(0.0, f64::max)
        };
        let (d1, d2) = (diff(&a, &b), diff(&b, &c));
        let ratio = d1 / d2;
        assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
    }

    #[test]
    fn rejects_bad_input() {
        let co = EllipticCoeffs::laplacian();
        let g = FieldFn::constant(1.0);
        assert!(solve_profile(&co, &g, 1.0, 0.1, 1.0, 10, 1).is_err());
        assert!(solve_profile(&co, &g, 0.5, 0.1, 1.0, 11, 1).is_err());
        assert!(solve_profile(&co, &g, 1.0, 0.1, 1.0, 11, 3).is_err());
        assert!(solve_profile(&co, &FieldFn::constant(-1.0), 1.0, 0.1, 1.0, 11, 1).is_err());
    }
}
