//! Direct solvers for the tridiagonal and banded systems of the
//! finite-difference profiles.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Pivots smaller than this (relative to the row scale) count as singular.
const PIVOT_EPS: f64 = 1e-300;

/// Solves `A x = d` for tridiagonal `A` with sub-diagonal `lower` (length
/// n−1), diagonal `diag` (n) and super-diagonal `upper` (n−1). Thomas
/// algorithm, no pivoting: intended for diagonally dominant M-matrices.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if d.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: d.len() });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if lower.len() + 1 != n || upper.len() + 1 != n {
        return Err(Error::LengthMismatch {
            expected: n - 1,
            got: lower.len().min(upper.len()),
        });
    }
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut b = diag[0];
    if b.abs() < PIVOT_EPS {
        return Err(Error::Singular { row: 0 });
    }
    x[0] = d[0] / b;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / b;
        b = diag[i] - lower[i - 1] * c[i - 1];
        if b.abs() < PIVOT_EPS || !b.is_finite() {
            return Err(Error::Singular { row: i });
        }
        x[i] = (d[i] - lower[i - 1] * x[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// `y = A x` for the tridiagonal layout of [`solve_tridiagonal`].
pub fn tridiagonal_matvec(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = diag[i] * x[i];
        if i > 0 {
            s += lower[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            s += upper[i] * x[i + 1];
        }
        y[i] = s;
    }
    y
}

/// Square banded matrix with `kl` sub- and `ku` super-diagonals, row-major
/// band storage.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix {
            n,
            kl,
            ku,
            data: vec![0.0; n * (kl + ku + 1)],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        if j + self.kl < i || j > i + self.ku || i >= self.n || j >= self.n {
            None
        } else {
            Some(i * (self.kl + self.ku + 1) + (j + self.kl - i))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Adds `v` at `(i, j)`; panics if the entry is outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j).expect("entry outside band");
        self.data[k] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let j0 = i.saturating_sub(self.kl);
            let j1 = (i + self.ku).min(self.n - 1);
            let mut s = 0.0;
            for (j, xj) in x.iter().enumerate().take(j1 + 1).skip(j0) {
                s += self.get(i, j) * xj;
            }
            *yi = s;
        }
        y
    }

    /// In-place LU without pivoting; the band shape is preserved.
    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        for k in 0..n {
            let piv = self.get(k, k);
            let row_scale = (k.saturating_sub(self.kl)..=(k + self.ku).min(n - 1))
                .map(|j| self.get(k, j).abs())
                .fold(0.0, f64::max);
            if !(piv.abs() > 1e-14 * row_scale) || !piv.is_finite() {
                return Err(Error::Singular { row: k });
            }
            let i_end = (k + self.kl).min(n - 1);
            let j_end = (k + self.ku).min(n - 1);
            for i in k + 1..=i_end {
                let ik = self.idx(i, k).unwrap();
                let l = self.data[ik] / piv;
                if l == 0.0 {
                    continue;
                }
                self.data[ik] = l;
                for j in k + 1..=j_end {
                    let kj = self.get(k, j);
                    if kj != 0.0 {
                        let ij = self.idx(i, j).unwrap();
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(BandLu { m: self })
    }
}

/// Banded LU factors (unit lower, upper) sharing one band store.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let m = &self.m;
        let n = m.n;
        if b.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: b.len() });
        }
        let mut x = b.to_vec();
        for i in 0..n {
            let j0 = i.saturating_sub(m.kl);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(i).skip(j0) {
                s -= m.get(i, j) * xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let j1 = (i + m.ku).min(n - 1);
            let mut s = x[i];
            for j in i + 1..=j1 {
                s -= m.get(i, j) * x[j];
            }
            x[i] = s / m.get(i, i);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tridiagonal_small() {
        let x = solve_tridiagonal(&[-1.0], &[2.0, 2.0], &[-1.0], &[1.0, 1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert!(matches!(
            solve_tridiagonal(&[1.0], &[0.0, 1.0], &[1.0], &[1.0, 1.0]),
            Err(Error::Singular { row: 0 })
        ));
    }

    #[test]
    fn band_singular_detected() {
        let mut m = BandMatrix::zeros(2, 1, 1);
        m.add(0, 0, 1.0);
        m.add(0, 1, 1.0);
        m.add(1, 0, 1.0);
        m.add(1, 1, 1.0);
        assert!(matches!(m.factor(), Err(Error::Singular { row: 1 })));
    }

    proptest! {
        #[test]
        fn tridiagonal_roundtrip(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 2..40)) {
            let n = v.len();
            let lower: Vec<f64> = v[1..].iter().map(|t| t.0).collect();
            let upper: Vec<f64> = v[..n - 1].iter().map(|t| t.1).collect();
            let diag: Vec<f64> = (0..n).map(|i| 2.5 + v[i].2).collect();
            let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let x = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
            let back = tridiagonal_matvec(&lower, &diag, &upper, &x);
            for i in 0..n {
                prop_assert!((back[i] - rhs[i]).abs() < 1e-12);
            }
        }

        #[test]
        fn band_roundtrip(n in 3usize..30, kl in 0usize..4, ku in 0usize..4, seed in 0u64..1000) {
            let mut m = BandMatrix::zeros(n, kl, ku);
            let mut s = seed as f64 + 0.5;
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    s = (s * 7.31 + 0.17).fract();
                    m.add(i, j, if i == j { 4.0 + kl as f64 + ku as f64 } else { s - 0.5 });
                }
            }
            let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
            let lu = m.clone().factor().unwrap();
            let x = lu.solve(&rhs).unwrap();
            let back = m.matvec(&x);
            for i in 0..n {
                prop_assert!((back[i] - rhs[i]).abs() < 1e-11);
            }
        }
    }
}
