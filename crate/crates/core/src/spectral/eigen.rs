//! Symmetric tridiagonal eigen-solvers: Sturm bisection, inverse
//! iteration and implicit QL.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::{Error, Result};

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let qq = if q == 0.0 { f64::EPSILON * (off[i - 1].abs() + f64::MIN_POSITIVE) } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / qq;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin bounds `[lo, hi]` containing the whole spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `k` smallest eigenvalues, ascending, each to absolute tolerance
/// `1e-10·max(1, |λ|)`.
pub fn bisect_smallest(diag: &[f64], off: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = diag.len();
    if k > n {
        return Err(Error::TooManyEigenvalues { k, n });
    }
    if k == 0 {
        return Err(crate::error::invalid("at least one eigenvalue must be requested"));
    }
    if off.len() + 1 != n {
        return Err(Error::LengthMismatch { expected: n - 1, got: off.len() });
    }
    let (glo, ghi) = gershgorin(diag, off);
    let pad = 1e-12 * (glo.abs().max(ghi.abs()) + 1.0);
    let (glo, ghi) = (glo - pad, ghi + pad);
    // shared brackets: lower[j] ≤ λ_j ≤ upper[j]
    let mut lower = vec![glo; k];
    let mut upper = vec![ghi; k];
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let mut lo = lower[j];
        let mut hi = upper[j];
        if j > 0 {
            lo = lo.max(out[j - 1]);
        }
        loop {
            let mid = 0.5 * (lo + hi);
            let tol = 1e-10 * mid.abs().max(1.0);
            if hi - lo <= tol || mid <= lo || mid >= hi {
                break;
            }
            let c = sturm_count(diag, off, mid);
            // refine brackets of later eigenvalues while we are here
            for (m, (lw, up)) in lower.iter_mut().zip(upper.iter_mut()).enumerate().skip(j) {
                if c > m {
                    *up = up.min(mid);
                } else {
                    *lw = lw.max(mid);
                }
            }
            if c > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

/// Eigenvector for an (approximate) eigenvalue by inverse iteration;
/// `against` are previously computed vectors of the same cluster to
/// orthogonalize against.
pub fn inverse_iteration(diag: &[f64], off: &[f64], lambda: f64, against: &[&[f64]]) -> Result<Vec<f64>> {
    let n = diag.len();
    let scale = diag.iter().map(|d| d.abs()).fold(0.0, f64::max) + 2.0 * off.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let shift = lambda + 1e-12 * scale.max(1.0) * (1.0 + against.len() as f64);
    let lu = TridiagLu::factor(diag, off, shift)?;
    // deterministic, non-degenerate start vector
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract()).collect();
    normalize(&mut x);
    for _ in 0..6 {
        let mut y = lu.solve(&x);
        for v in against {
            let d = dot(&y, v);
            for (yi, vi) in y.iter_mut().zip(v.iter()) {
                *yi -= d * vi;
            }
        }
        if normalize(&mut y) == 0.0 {
            return Err(Error::EigenNoConvergence);
        }
        x = y;
    }
    fix_sign(&mut x);
    Ok(x)
}

/// LU of `T − σI` with partial pivoting (second super-diagonal fill-in).
struct TridiagLu {
    l: Vec<f64>,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], sigma: f64) -> Result<Self> {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - sigma).collect();
        let mut du: Vec<f64> = off.to_vec();
        let dl: Vec<f64> = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut l = vec![0.0; n.saturating_sub(1)];
        let mut swap = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * (diag.iter().map(|v| v.abs()).fold(0.0, f64::max) + 1.0);
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                l[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                let f = d[i] / dl[i];
                d[i] = dl[i];
                l[i] = f;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -f * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        for v in d.iter_mut() {
            if *v == 0.0 {
                *v = tiny;
            }
        }
        Ok(TridiagLu { l, u0: d, u1: du, u2: du2, swap })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.u0.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                x.swap(i, i + 1);
                x[i + 1] -= self.l[i] * x[i];
            } else {
                x[i + 1] -= self.l[i] * x[i];
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            if i + 1 < n {
                s -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                s -= self.u2[i] * x[i + 2];
            }
            x[i] = s / self.u0[i];
        }
        x
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let nrm = dot(x, x).sqrt();
    if nrm > 0.0 && nrm.is_finite() {
        for v in x.iter_mut() {
            *v /= nrm;
        }
        nrm
    } else {
        0.0
    }
}

/// Sign convention: the largest-magnitude entry (first on ties) is positive.
pub(crate) fn fix_sign(x: &mut [f64]) {
    let mut best = 0usize;
    for i in 1..x.len() {
        if x[i].abs() > x[best].abs() * (1.0 + 1e-9) {
            best = i;
        }
    }
    if x.get(best).copied().unwrap_or(0.0) < 0.0 {
        for v in x.iter_mut() {
            *v = -*v;
        }
    }
}

/// All eigenpairs by implicit QL. Returns ascending eigenvalues and the
/// eigenvectors as rows of a flat `n×n` array.
pub fn tql2(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if off.len() + 1 != n {
        return Err(Error::LengthMismatch { expected: n - 1, got: off.len() });
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    // z[i*n + k] = k-th component of the vector that becomes eigenvector i
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let mut iterations = 0usize;
    let budget = 60 * n + 100;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                iterations += 1;
                if iterations > budget {
                    return Err(Error::EigenNoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for k in 0..n {
                        let t = zi1[k];
                        zi1[k] = s * zi[k] + c * t;
                        zi[k] = c * zi[k] - s * t;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let vals: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (row, &i) in order.iter().enumerate() {
        vecs[row * n..(row + 1) * n].copy_from_slice(&z[i * n..(i + 1) * n]);
        fix_sign(&mut vecs[row * n..(row + 1) * n]);
    }
    Ok((vals, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let v = bisect_smallest(&[2.0, 2.0], &[-1.0], 2).unwrap();
        assert!((v[0] - 1.0).abs() <= 1e-10 && (v[1] - 3.0).abs() <= 3e-10);
        let (vals, vecs) = tql2(&[2.0, 2.0], &[-1.0]).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((vecs[0] - s).abs() < 1e-14 && (vecs[1] - s).abs() < 1e-14);
        assert!(matches!(bisect_smallest(&[1.0], &[], 2), Err(Error::TooManyEigenvalues { k: 2, n: 1 })));
    }

    #[test]
    fn inverse_iteration_recovers_ground_state() {
        let n = 101;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let lam = bisect_smallest(&diag, &off, 2).unwrap();
        let v0 = inverse_iteration(&diag, &off, lam[0], &[]).unwrap();
        let v1 = inverse_iteration(&diag, &off, lam[1], &[&v0]).unwrap();
        let pi = core::f64::consts::PI;
        for i in 0..n {
            let exact = ((i + 1) as f64 * pi / (n + 1) as f64).sin() * (2.0 / (n + 1) as f64).sqrt();
            assert!((v0[i] - exact).abs() < 1e-9);
        }
        assert!(dot(&v0, &v1).abs() < 1e-12);
    }
}
