//! Reference values computed independently (dense tridiagonal eigensolvers
//! in double precision) and frozen here.

use hypolab_core::coeff::alpha_family;
use hypolab_core::spectral::{build_schrodinger, full_decomposition, tql2, DiscreteOperator};
use hypolab_core::superlog::{best_constant_curve, eps_from_target, lambda_min, ProbeConfig};
use rand::{Rng, SeedableRng};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn lambda_min_at_e10() {
    let z = 10f64.exp();
    let table = [
        (0.5, 13466.701024853486, 13467.930837351925),
        (1.0, 297.73848299853546, 297.7395844058717),
        (2.0, 29.41577989609377, 29.415798801985254),
    ];
    for (alpha, coarse, fine) in table {
        let a = alpha_family(alpha).unwrap();
        let got = lambda_min(&a, z, 1.0, 8193).unwrap();
        assert!(rel(got, coarse) < 1e-9, "alpha {alpha}: {got} vs {coarse}");
        // backward error ~ ε‖H‖ with ‖H‖ ≈ 4/h² ≈ 1e9 on this grid
        let got = lambda_min(&a, z, 1.0, 32769).unwrap();
        assert!(rel(got, fine) < 1e-8, "alpha {alpha}: {got} vs {fine}");
    }
}

#[test]
fn lambda_min_at_e6_fine_grid() {
    let a = alpha_family(1.0).unwrap();
    let got = lambda_min(&a, 6f64.exp(), 1.0, 32769).unwrap();
    assert!(rel(got, 71.91956496221931) < 1e-8, "{got}");
}

#[test]
fn best_constant_diverges_for_steep_wall() {
    let a = alpha_family(2.0).unwrap();
    let curve = best_constant_curve(&a, 1.0, &[0.1], &ProbeConfig::default()).unwrap();
    let pt = curve.points[0];
    assert!(pt.c_extended >= 1.25 * pt.c_base, "{pt:?}");
    assert!(pt.diverging);
}

#[test]
fn eps_from_target_value() {
    let e = eps_from_target(0.01, 1.0, 1.0).unwrap();
    assert!((e - 0.017_508_8).abs() < 1e-6, "{e}");
}

/// Cyclic Jacobi on the dense matrix.
fn jacobi_eigenvalues(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let n = m.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn ql_matches_dense_jacobi() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for n in [1usize, 2, 5, 17, 40] {
        let diag: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let off: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            dense[i][i] = diag[i];
            if i + 1 < n {
                dense[i][i + 1] = off[i];
                dense[i + 1][i] = off[i];
            }
        }
        let (ql, _) = tql2(&diag, &off).unwrap();
        let jac = jacobi_eigenvalues(dense);
        for (a, b) in ql.iter().zip(&jac) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "n {n}: {a} vs {b}");
        }
    }
}

#[test]
fn schrodinger_surrogate_matches_dense_jacobi() {
    let a = alpha_family(1.0).unwrap();
    let op: DiscreteOperator = build_schrodinger(&a, 20.0, 1.0, 31).unwrap();
    let s = full_decomposition(&op).unwrap();
    let n = op.n;
    let mut dense = vec![vec![0.0; n]; n];
    for i in 0..n {
        dense[i][i] = op.diag[i];
        if i + 1 < n {
            dense[i][i + 1] = op.offdiag[i];
            dense[i + 1][i] = op.offdiag[i];
        }
    }
    let jac = jacobi_eigenvalues(dense);
    for (l, j) in s.eigenvalues.iter().zip(&jac) {
        assert!((l - s.shift - j).abs() < 1e-10 * j.abs().max(1.0));
    }
    assert!(s.max_residual(&op) < 1e-9);
    assert!(s.orthonormality_defect() < 1e-12);
}
