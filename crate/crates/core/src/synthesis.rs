//! Low-frequency synthesis `w(x, ·) = v(x, B)u = Σ_k v(x, λ_k)⟨u, e_k⟩e_k`
//! on the spectral surrogate, its norm estimate, and the exponential bound
//! on Littlewood–Paley pieces.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::coeff::FieldFn;
use crate::elliptic::{solve_profile, BarrierParams, EllipticCoeffs, ProfileSolution};
use crate::spectral::lp::psi;
use crate::spectral::SpectralSurrogate;
use crate::{japanese_bracket, log_japanese_bracket, Error, Result};

/// Relative residual accepted from a profile solve.
pub const SOLVER_TOL: f64 = 1e-10;

/// Source of profiles `v(·, λ)` on a fixed `x` grid.
pub trait ProfileProvider {
    fn profile(&self, lambda: f64) -> Result<Arc<ProfileSolution>>;
}

/// Uncached elliptic profiles with fixed `r`, `c` and grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticProfiles {
    pub coeffs: EllipticCoeffs,
    pub g: FieldFn,
    pub r: f64,
    pub c: f64,
    pub n: usize,
    pub dim: usize,
}

impl EllipticProfiles {
    /// `c = c₀` and `r = min(ε/(8c₀), r₀)`.
    pub fn for_eps(coeffs: EllipticCoeffs, g: FieldFn, bp: &BarrierParams, eps: f64, n: usize, dim: usize) -> Self {
        EllipticProfiles {
            coeffs,
            g,
            r: synthesis_radius(bp, eps),
            c: bp.c0,
            n,
            dim,
        }
    }
}

impl ProfileProvider for EllipticProfiles {
    fn profile(&self, lambda: f64) -> Result<Arc<ProfileSolution>> {
        solve_profile(&self.coeffs, &self.g, lambda, self.r, self.c, self.n, self.dim).map(Arc::new)
    }
}

/// `r = min(ε/(8c₀), r₀)`.
pub fn synthesis_radius(bp: &BarrierParams, eps: f64) -> f64 {
    (eps / (8.0 * bp.c0)).min(bp.r0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesizedSolution {
    /// Axis grid of the profiles (boundary included).
    pub x: Vec<f64>,
    pub dim_x: usize,
    /// Number of `x` nodes (`x.len()^dim_x`).
    pub x_nodes: usize,
    pub n_y: usize,
    /// `w[i·n_y + l] = w(x_i, y_l)`.
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub eps: f64,
    pub p: f64,
    pub r: f64,
    pub c: f64,
    /// Coefficients `⟨u, e_k⟩`.
    pub coefficients: Vec<f64>,
    /// Relative residual of each mode's profile solve.
    pub residuals: Vec<f64>,
    /// `max |w(0, ·) - u|`.
    pub trace_defect: f64,
}

impl SynthesizedSolution {
    /// Trapezoid weights on the `x` grid; they sum to `(2r)^dim`.
    pub fn x_weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.x, self.dim_x)
    }

    /// `‖w‖²` with trapezoid weights in `x` and the plain sum in `y`.
    pub fn norm_sq(&self) -> f64 {
        let wx = self.x_weights();
        wx.iter()
            .enumerate()
            .map(|(i, q)| q * self.w[i * self.n_y..(i + 1) * self.n_y].iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    pub fn trace(&self, center: usize) -> &[f64] {
        &self.w[center * self.n_y..(center + 1) * self.n_y]
    }
}

fn trapezoid_weights(x: &[f64], dim: usize) -> Vec<f64> {
    let m = x.len();
    let w1: Vec<f64> = (0..m)
        .map(|k| {
            let left = if k > 0 { x[k] - x[k - 1] } else { 0.0 };
            let right = if k + 1 < m { x[k + 1] - x[k] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect();
    if dim == 1 {
        w1
    } else {
        let mut w = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                w.push(w1[i] * w1[j]);
            }
        }
        w
    }
}

/// `w = v(x, B)u`, one profile per eigenvalue of `s`.
pub fn synthesize<P: ProfileProvider + ?Sized>(
    s: &SpectralSurrogate,
    profiles: &P,
    u: &[f64],
    eps: f64,
    p: f64,
) -> Result<SynthesizedSolution> {
    let coefficients = s.coefficients(u)?;
    let n_y = s.n;
    let mut w: Vec<f64> = Vec::new();
    let mut residuals = Vec::with_capacity(n_y);
    let mut meta: Option<(Vec<f64>, usize, f64, f64, usize)> = None;
    for (k, (&lambda, &ck)) in s.eigenvalues.iter().zip(&coefficients).enumerate() {
        let prof = profiles.profile(lambda).map_err(|e| match e {
            Error::InvalidArgument(_) | Error::BoundViolated { .. } => Error::MissingProfile { lambda },
            other => other,
        })?;
        let nodes = prof.v.len();
        match &meta {
            None => {
                meta = Some((prof.x.clone(), prof.dim, prof.r, prof.c, nodes));
                w = vec![0.0; nodes * n_y];
            }
            Some((x, _, _, _, m)) => {
                if *m != nodes || *x != prof.x {
                    return Err(Error::LengthMismatch { expected: *m, got: nodes });
                }
            }
        }
        residuals.push(prof.residual);
        if ck == 0.0 {
            continue;
        }
        let e = s.vector(k);
        for (i, &vx) in prof.v.iter().enumerate() {
            let a = vx * ck;
            let row = &mut w[i * n_y..(i + 1) * n_y];
            for (wl, el) in row.iter_mut().zip(e) {
                *wl += a * el;
            }
        }
    }
    let (x, dim_x, r, c, x_nodes) = meta.ok_or_else(|| crate::error::invalid("empty spectrum"))?;
    let center = crate::elliptic::center_index(x.len() - 2, dim_x);
    let trace_defect = w[center * n_y..(center + 1) * n_y]
        .iter()
        .zip(u)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(SynthesizedSolution {
        x,
        dim_x,
        x_nodes,
        n_y,
        w,
        u: u.to_vec(),
        eps,
        p,
        r,
        c,
        coefficients,
        residuals,
        trace_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainEstimate {
    pub norm_sq: f64,
    /// `C(r)² = 4(2r)^dim`, from `|v| ≤ 2e^{c√λ r}` and `|Q_r| = (2r)^dim`.
    pub c_r_sq: f64,
    /// `C(r)² Σ_k e^{(ε/2)λ_k^{1/(2p)}}|⟨u, e_k⟩|²`.
    pub rhs: f64,
    pub holds: bool,
}

/// `‖w‖² ≤ C(r)² Σ_k e^{(ε/2)λ_k^{1/(2p)}}|⟨u, e_k⟩|²`.
pub fn domain_estimate(sol: &SynthesizedSolution, s: &SpectralSurrogate) -> DomainEstimate {
    let norm_sq = sol.norm_sq();
    let c_r_sq = 4.0 * (2.0 * sol.r).powi(sol.dim_x as i32);
    let sum: f64 = s
        .eigenvalues
        .iter()
        .zip(&sol.coefficients)
        .map(|(&l, &c)| (0.5 * sol.eps * l.powf(1.0 / (2.0 * sol.p))).exp() * c * c)
        .sum();
    let rhs = c_r_sq * sum;
    DomainEstimate {
        norm_sq,
        c_r_sq,
        rhs,
        holds: norm_sq <= rhs * (1.0 + 1e-12),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionBound {
    pub j: u32,
    /// `‖e^{εB^{1/(2p)}}P_j u‖²`.
    pub lhs: f64,
    /// `‖P_j u‖²`.
    pub pj_norm_sq: f64,
    /// `2e^{2εe^{(j+1)/(2p)}}‖P_j u‖²`.
    pub corrected_rhs: f64,
    /// `6e^{εe^{(j+1)/(2p)}}‖P_j u‖²`, recorded only.
    pub literal_rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub literal_holds: bool,
}

/// Both sides of the exponential bound on `P_j u`, computed spectrally.
pub fn projection_exp_bound(s: &SpectralSurrogate, j: u32, eps: f64, p: f64, u: &[f64]) -> Result<ProjectionBound> {
    if !(eps > 0.0 && p > 0.0) {
        return Err(crate::error::invalid("ε and p must be positive"));
    }
    let c = s.coefficients(u)?;
    let mut lhs = 0.0;
    let mut pj = 0.0;
    for (&l, &ck) in s.eigenvalues.iter().zip(&c) {
        let q = psi(j, l) * ck;
        if q == 0.0 {
            continue;
        }
        pj += q * q;
        lhs += (2.0 * eps * l.powf(1.0 / (2.0 * p))).exp() * q * q;
    }
    let top = ((j + 1) as f64 / (2.0 * p)).exp();
    let corrected_rhs = 2.0 * (2.0 * eps * top).exp() * pj;
    let literal_rhs = 6.0 * (eps * top).exp() * pj;
    Ok(ProjectionBound {
        j,
        lhs,
        pj_norm_sq: pj,
        corrected_rhs,
        literal_rhs,
        slack: corrected_rhs - lhs,
        holds: lhs <= corrected_rhs,
        literal_holds: lhs <= literal_rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowFrequency {
    /// `λ* = (log⟨ξ⟩)^{2p}`.
    pub lambda_star: f64,
    /// `e^{ε(λ*)^{1/(2p)}}`.
    pub lhs: f64,
    /// `⟨ξ⟩^ε`.
    pub rhs: f64,
    pub rel_defect: f64,
}

/// The threshold below which `e^{ελ^{1/(2p)}} ≤ ⟨ξ⟩^ε`.
pub fn low_frequency_threshold(xi: f64, eps: f64, p: f64) -> Result<LowFrequency> {
    if !(eps > 0.0 && p > 0.0) || !xi.is_finite() {
        return Err(crate::error::invalid("ε and p must be positive and ξ finite"));
    }
    let l = log_japanese_bracket(xi);
    let lambda_star = l.powf(2.0 * p);
    let lhs = (eps * lambda_star.powf(1.0 / (2.0 * p))).exp();
    let rhs = japanese_bracket(xi).powf(eps);
    Ok(LowFrequency {
        lambda_star,
        lhs,
        rhs,
        rel_defect: (lhs - rhs).abs() / rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_laplacian, full_decomposition};
    use core::f64::consts::E;

    fn surrogate(n: usize) -> SpectralSurrogate {
        full_decomposition(&build_laplacian(1.0, n).unwrap()).unwrap()
    }

    fn provider(eps: f64) -> EllipticProfiles {
        let co = EllipticCoeffs::laplacian();
        let g = FieldFn::constant(1.0);
        let bp = BarrierParams::from_inputs(co.sampled_inputs(&g, 1.0, 1, &[], 21), 1.0).unwrap();
        EllipticProfiles::for_eps(co, g, &bp, eps, 21, 1)
    }

    #[test]
    fn single_mode_and_zero() {
        let s = surrogate(31);
        let prov = provider(0.5);
        let k = 4;
        let u = s.vector(k).to_vec();
        let sol = synthesize(&s, &prov, &u, 0.5, 1.0).unwrap();
        assert!(sol.trace_defect < 1e-10);
        let prof = prov.profile(s.eigenvalues[k]).unwrap();
        for (i, vx) in prof.v.iter().enumerate() {
            for (l, el) in u.iter().enumerate() {
                assert!((sol.w[i * sol.n_y + l] - vx * el).abs() < 1e-10);
            }
        }
        let zero = synthesize(&s, &prov, &vec![0.0; 31], 0.5, 1.0).unwrap();
        assert!(zero.w.iter().all(|v| *v == 0.0));
        assert!(sol.residuals.iter().all(|r| *r <= SOLVER_TOL));
    }

    #[test]
    fn projection_bound_single_mode() {
        // a surrogate whose only relevant eigenvalue is e²
        let s = SpectralSurrogate {
            n: 2,
            eigenvalues: vec![1.0, E * E],
            eigenvectors: vec![1.0, 0.0, 0.0, 1.0],
            shift: 0.0,
        };
        let r = projection_exp_bound(&s, 2, 0.1, 1.0, &[0.0, 1.0]).unwrap();
        assert!((r.lhs - (0.2 * E).exp()).abs() < 1e-12);
        assert!((r.lhs - 1.722).abs() < 1e-3);
        assert!((r.corrected_rhs - 2.0 * (0.2 * E.powf(1.5)).exp()).abs() < 1e-12);
        assert!((r.corrected_rhs - 4.90).abs() < 1e-2);
        assert!(r.holds);
        let r = projection_exp_bound(&s, 5, 0.1, 1.0, &[0.0, 1.0]).unwrap();
        assert_eq!((r.lhs, r.corrected_rhs), (0.0, 0.0));
        assert!(r.holds);
    }

    #[test]
    fn threshold_identity() {
        let t = low_frequency_threshold(0.0, 0.3, 1.0).unwrap();
        assert!((t.lambda_star - 1.0).abs() < 1e-15 && t.rel_defect < 1e-14);
        let xi = ((8.0f64).exp() - E * E).sqrt();
        let t = low_frequency_threshold(xi, 0.3, 1.0).unwrap();
        assert!((t.lambda_star - 16.0).abs() < 1e-9 && t.rel_defect < 1e-12);
        let t = low_frequency_threshold(xi, 0.3, 0.5).unwrap();
        assert!((t.lambda_star - 4.0).abs() < 1e-10 && t.rel_defect < 1e-12);
    }

    #[test]
    fn radius_rule() {
        let bp = crate::elliptic::barrier_params(1.0, 0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(synthesis_radius(&bp, 0.8), 0.1);
        assert_eq!(synthesis_radius(&bp, 100.0), bp.r0);
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut x = seed;
        (0..n)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn linear_with_trace() {
        let s = surrogate(41);
        let prov = provider(0.4);
        let u1 = pseudo_random(41, 1);
        let u2 = pseudo_random(41, 2);
        let sum: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| a + b).collect();
        let a = synthesize(&s, &prov, &u1, 0.4, 1.0).unwrap();
        let b = synthesize(&s, &prov, &u2, 0.4, 1.0).unwrap();
        let c = synthesize(&s, &prov, &sum, 0.4, 1.0).unwrap();
        for i in 0..c.w.len() {
            assert!((c.w[i] - a.w[i] - b.w[i]).abs() < 1e-12);
        }
        assert!(a.trace_defect < 1e-10 && c.trace_defect < 1e-10);
    }

    #[test]
    fn estimate_on_band() {
        let s = surrogate(65);
        let eps = 0.4;
        let prov = provider(eps);
        let u = crate::spectral::lp::lp_project(&s, 3, &pseudo_random(65, 7)).unwrap();
        let sol = synthesize(&s, &prov, &u, eps, 1.0).unwrap();
        let est = domain_estimate(&sol, &s);
        assert!(est.norm_sq > 0.0);
        assert!(est.holds, "{est:?}");
    }
}
