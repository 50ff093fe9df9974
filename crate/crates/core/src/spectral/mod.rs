//! Discretized 1D operators, eigen-decompositions, and the spectral
//! calculus used by the Littlewood–Paley machinery.
//!
//! Grid convention: `n` interior unknowns on `[-R, R]` with Dirichlet ends,
//! `h = 2R/(n+1)`, `y_i = -R + (i+1)h`. Odd `n` puts `y = 0` on the grid.
//! Inner products are the plain Euclidean ones on grid vectors.

mod eigen;
pub mod lp;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::coeff::CoeffFn;
use crate::{Error, Result};

pub use eigen::{bisect_smallest, gershgorin, inverse_iteration, sturm_count, tql2};
pub use lp::{lp_project, lp_sandwich_check, phi_cutoff, psi, smooth_step, SandwichReport};

/// Largest operator size accepted by [`full_decomposition`].
pub const FULL_DECOMPOSITION_MAX: usize = 4096;

/// Symmetric tridiagonal matrix with grid metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteOperator {
    pub r_y: f64,
    pub n: usize,
    pub h: f64,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl DiscreteOperator {
    /// Wraps raw tridiagonal data (unit spacing, no physical grid).
    pub fn from_parts(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || offdiag.len() + 1 != n {
            return Err(Error::LengthMismatch {
                expected: n.saturating_sub(1),
                got: offdiag.len(),
            });
        }
        Ok(DiscreteOperator {
            r_y: 0.5 * (n as f64 + 1.0),
            n,
            h: 1.0,
            diag,
            offdiag,
        })
    }

    pub fn grid_point(&self, i: usize) -> f64 {
        -self.r_y + (i as f64 + 1.0) * self.h
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.grid_point(i)).collect()
    }

    pub fn matvec(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * u[i];
            if i > 0 {
                s += self.offdiag[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                s += self.offdiag[i] * u[i + 1];
            }
            out[i] = s;
        }
        out
    }

    /// `(A u, u)`.
    pub fn quadratic_form(&self, u: &[f64]) -> f64 {
        eigen::dot(&self.matvec(u), u)
    }
}

/// Discrete Dirichlet Laplacian `-d²/dy²` on `[-R, R]`.
pub fn build_laplacian(r_y: f64, n: usize) -> Result<DiscreteOperator> {
    check_grid(r_y, n)?;
    let h = 2.0 * r_y / (n as f64 + 1.0);
    let ih2 = 1.0 / (h * h);
    Ok(DiscreteOperator {
        r_y,
        n,
        h,
        diag: vec![2.0 * ih2; n],
        offdiag: vec![-ih2; n - 1],
    })
}

fn check_grid(r_y: f64, n: usize) -> Result<()> {
    if !(r_y > 0.0 && r_y.is_finite()) {
        return Err(crate::error::invalid(format!("R_y = {r_y} must be positive")));
    }
    if n < 3 || n % 2 == 0 {
        return Err(crate::error::invalid(format!("grid size n = {n} must be odd and at least 3")));
    }
    Ok(())
}

/// `H_ζ = -d²/dy² + a(y)ζ²` with the 3-point stencil.
pub fn build_schrodinger(a: &CoeffFn, zeta: f64, r_y: f64, n: usize) -> Result<DiscreteOperator> {
    let mut op = build_laplacian(r_y, n)?;
    let z2 = zeta * zeta;
    let dom = a.domain();
    for i in 0..n {
        let y = op.grid_point(i);
        if !dom.contains(y) {
            return Err(Error::OutsideDomain { at: y, lo: dom.lo, hi: dom.hi });
        }
        let v = a.value(y);
        if !v.is_finite() {
            return Err(Error::NotFinite { at: y });
        }
        op.diag[i] += v * z2;
    }
    Ok(op)
}

/// The `k` smallest eigenvalues (Sturm bisection).
pub fn smallest_eigenvalues(op: &DiscreteOperator, k: usize) -> Result<Vec<f64>> {
    bisect_smallest(&op.diag, &op.offdiag, k)
}

/// The `k` smallest eigenpairs; vectors by inverse iteration with
/// reorthogonalization inside clusters.
pub fn smallest_eigenpairs(op: &DiscreteOperator, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let vals = smallest_eigenvalues(op, k)?;
    let (glo, ghi) = gershgorin(&op.diag, &op.offdiag);
    let gap_tol = 1e-3 * (ghi - glo).abs().max(1.0);
    let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(k);
    for j in 0..k {
        let cluster: Vec<&[f64]> = (0..j)
            .filter(|&i| (vals[j] - vals[i]).abs() <= gap_tol)
            .map(|i| vecs[i].as_slice())
            .collect();
        let v = inverse_iteration(&op.diag, &op.offdiag, vals[j], &cluster)?;
        vecs.push(v);
    }
    Ok((vals, vecs))
}

/// Finite eigen-decomposition standing in for the self-adjoint operator `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSurrogate {
    pub n: usize,
    /// Shifted eigenvalues, ascending, `λ_1 ≥ 1`.
    pub eigenvalues: Vec<f64>,
    /// Row `k` is `e_k`.
    pub eigenvectors: Vec<f64>,
    /// Constant added to the raw spectrum.
    pub shift: f64,
}

/// All eigenpairs (implicit QL), shifted so that `λ_1 ≥ 1`.
pub fn full_decomposition(op: &DiscreteOperator) -> Result<SpectralSurrogate> {
    if op.n > FULL_DECOMPOSITION_MAX {
        return Err(Error::BudgetExceeded {
            n: op.n,
            max: FULL_DECOMPOSITION_MAX,
        });
    }
    let (raw, vecs) = tql2(&op.diag, &op.offdiag)?;
    let shift = (1.0 - raw[0]).max(0.0);
    let eigenvalues = raw.iter().map(|l| l + shift).collect();
    Ok(SpectralSurrogate {
        n: op.n,
        eigenvalues,
        eigenvectors: vecs,
        shift,
    })
}

impl SpectralSurrogate {
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k * self.n..(k + 1) * self.n]
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.n {
            Err(Error::LengthMismatch { expected: self.n, got: u.len() })
        } else {
            Ok(())
        }
    }

    /// `⟨u, e_k⟩` for every `k`.
    pub fn coefficients(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        Ok((0..self.n).map(|k| eigen::dot(u, self.vector(k))).collect())
    }

    /// `Σ_k c_k e_k`.
    pub fn expand(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.check_len(c)?;
        let mut out = vec![0.0; self.n];
        for (k, &ck) in c.iter().enumerate() {
            if ck != 0.0 {
                for (o, e) in out.iter_mut().zip(self.vector(k)) {
                    *o += ck * e;
                }
            }
        }
        Ok(out)
    }

    /// `f(B)u = Σ_k f(λ_k)⟨u, e_k⟩e_k`.
    pub fn apply_function<F: Fn(f64) -> f64>(&self, f: F, u: &[f64]) -> Result<Vec<f64>> {
        let mut c = self.coefficients(u)?;
        self.scale_coefficients(&f, &mut c)?;
        self.expand(&c)
    }

    /// Multiplies `c_k` by `f(λ_k)`, erroring on non-finite values.
    pub fn scale_coefficients<F: Fn(f64) -> f64>(&self, f: &F, c: &mut [f64]) -> Result<()> {
        for (ck, &l) in c.iter_mut().zip(&self.eigenvalues) {
            let v = f(l);
            if !v.is_finite() {
                return Err(Error::NonFiniteFunction { lambda: l });
            }
            *ck *= v;
        }
        Ok(())
    }

    /// `‖f(B)u‖² = Σ_k f(λ_k)²⟨u, e_k⟩²`, computed spectrally.
    pub fn function_norm_sq<F: Fn(f64) -> f64>(&self, f: F, u: &[f64]) -> Result<f64> {
        let c = self.coefficients(u)?;
        let mut s = 0.0;
        for (ck, &l) in c.iter().zip(&self.eigenvalues) {
            let v = f(l);
            if !v.is_finite() {
                return Err(Error::NonFiniteFunction { lambda: l });
            }
            s += v * v * ck * ck;
        }
        Ok(s)
    }

    /// Largest residual `‖A e_k − λ_k e_k‖ / (1 + |λ_k|)` against the
    /// unshifted operator.
    pub fn max_residual(&self, op: &DiscreteOperator) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.n {
            let e = self.vector(k);
            let ae = op.matvec(e);
            let lam = self.eigenvalues[k] - self.shift;
            let r: f64 = ae.iter().zip(e).map(|(a, v)| (a - lam * v) * (a - lam * v)).sum::<f64>().sqrt();
            worst = worst.max(r / (1.0 + lam.abs()));
        }
        worst
    }

    /// Largest `|⟨e_i, e_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                let d = eigen::dot(self.vector(i), self.vector(j)) - if i == j { 1.0 } else { 0.0 };
                worst = worst.max(d.abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::parse_coeff;

    #[test]
    fn laplacian_ground_state() {
        let op = build_laplacian(1.0, 4097).unwrap();
        let l = smallest_eigenvalues(&op, 1).unwrap()[0];
        let exact = (core::f64::consts::PI / 2.0).powi(2);
        assert!((l - exact).abs() < 1e-3);
    }

    #[test]
    fn constant_potential_shifts() {
        let a = parse_coeff("1").unwrap();
        let op = build_schrodinger(&a, 10.0, 1.0, 2049).unwrap();
        let l = smallest_eigenvalues(&op, 1).unwrap()[0];
        assert!((l - 102.4674011).abs() < 1e-3, "{l}");
    }

    #[test]
    fn diag_bounds_hold() {
        let a = parse_coeff("exp(-1/abs(y))").unwrap();
        let op = build_schrodinger(&a, 400.0, 1.0, 101).unwrap();
        let ih2 = 1.0 / (op.h * op.h);
        assert!(op.diag.iter().all(|&d| d >= 2.0 * ih2));
        assert!(op.offdiag.iter().all(|&e| e == -ih2));
        assert_eq!(op.grid_point(50), 0.0);
    }

    #[test]
    fn rejects_even_grid() {
        assert!(build_laplacian(1.0, 100).is_err());
        assert!(build_laplacian(0.0, 101).is_err());
    }

    #[test]
    fn shift_normalizes() {
        let op = DiscreteOperator::from_parts(vec![-2.0, 5.0], vec![0.0]).unwrap();
        let s = full_decomposition(&op).unwrap();
        assert_eq!(s.shift, 3.0);
        assert_eq!(s.eigenvalues[0], 1.0);
        let op = DiscreteOperator::from_parts(vec![2.0, 2.0], vec![-1.0]).unwrap();
        let s = full_decomposition(&op).unwrap();
        assert_eq!(s.shift, 0.0);
    }

    #[test]
    fn budget() {
        let op = DiscreteOperator::from_parts(vec![1.0; 4097], vec![0.0; 4096]).unwrap();
        assert!(matches!(full_decomposition(&op), Err(Error::BudgetExceeded { .. })));
    }
}
