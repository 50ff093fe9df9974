use std::sync::OnceLock;

use hypolab_core::coeff::{alpha_family, parse_coeff, to_source, CoeffFn, Expr, FieldFn, Interval};
use hypolab_core::elliptic::{solve_profile, BarrierParams, EllipticCoeffs};
use hypolab_core::interp::{geometric_tail, lemma_bounds_on_sequence, split_point, ModeSequence};
use hypolab_core::mp::{mp_check, MpConfig};
use hypolab_core::parabolic::{exponent_integral, profile_1d, solve_profile_parabolic, ParabolicGrid};
use hypolab_core::quad::{interval_integral, log_interval_integral};
use hypolab_core::spectral::lp::band_norms_sq;
use hypolab_core::spectral::{build_laplacian, full_decomposition, psi, smallest_eigenvalues, SpectralSurrogate};
use hypolab_core::superlog::{assess, lambda_min, ProbeConfig};
use hypolab_core::synthesis::{synthesize, EllipticProfiles};
use hypolab_core::{log_japanese_bracket, Verdict};
use proptest::prelude::*;

fn y_only(name: &str) -> Option<usize> {
    (name == "y").then_some(0)
}

fn expr_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (0u32..50).prop_map(|n| format!("{}", n as f64 / 4.0)),
        Just("y".to_string()),
        Just("e".to_string()),
        Just("pi".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop_oneof![Just("+"), Just("-"), Just("*"), Just("/"), Just("^")])
                .prop_map(|(a, b, op)| format!("({a}){op}({b})")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), prop_oneof![Just("abs"), Just("exp"), Just("log")]).prop_map(|(a, f)| format!("{f}({a})")),
            (inner.clone(), inner, prop_oneof![Just("min"), Just("max")]).prop_map(|(a, b, f)| format!("{f}({a}, {b})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pretty_print_is_idempotent(src in expr_source()) {
        let e = Expr::parse(&src, &y_only).unwrap();
        let once = to_source(&e, &["y"]);
        let e2 = Expr::parse(&once, &y_only).unwrap();
        let twice = to_source(&e2, &["y"]);
        prop_assert_eq!(&once, &twice);
        for y in [-0.7, 0.0, 0.3, 2.5] {
            let (a, b) = (e.eval(&[y]), e2.eval(&[y]));
            prop_assert!(a == b || (a.is_nan() && b.is_nan()), "{} vs {} at {}", a, b, y);
        }
    }

    #[test]
    fn quadrature_is_monotone_in_the_interval(
        alpha in prop_oneof![Just(0.5), Just(1.0), Just(2.0)],
        lo in -1.0f64..0.9,
        w in 0.01f64..1.0,
        grow_lo in 0.0f64..0.5,
        grow_hi in 0.0f64..0.5,
    ) {
        let a = alpha_family(alpha).unwrap();
        let hi = (lo + w).min(1.0);
        let inner = Interval::from_bounds(lo, hi).unwrap();
        let outer = Interval::from_bounds((lo - grow_lo).max(-1.0), (hi + grow_hi).min(1.0)).unwrap();
        let i = interval_integral(&a, &inner, 1e-10).unwrap();
        let j = interval_integral(&a, &outer, 1e-10).unwrap();
        prop_assert!(i <= j * (1.0 + 1e-9), "{} > {}", i, j);
    }

    #[test]
    fn scaling_shifts_log_integral_by_log_c(
        c in 0.5f64..2.0,
        center in -0.5f64..0.5,
        h in 1e-4f64..0.15,
    ) {
        let a = alpha_family(1.0).unwrap();
        let ca = parse_coeff(&format!("{c:?}*exp(-abs(y)^(-1))")).unwrap();
        let i = Interval::new(center, h).unwrap().tripled();
        let la = log_interval_integral(&a, &i, 1e-10).unwrap();
        let lca = log_interval_integral(&ca, &i, 1e-10).unwrap();
        prop_assert!((la.abs() - lca.abs()).abs() <= c.ln().abs() + 1e-8 * la.abs().max(1.0));
    }

    #[test]
    fn partition_of_unity(t in 0.0f64..60.0) {
        let lambda = t.exp();
        let s: f64 = (0..=64u32).map(|j| psi(j, lambda)).sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn band_sum_brackets_norm(seed in any::<u64>()) {
        let s = laplacian_surrogate();
        let u = random_vec(s.n, seed);
        let norm: f64 = u.iter().map(|v| v * v).sum();
        let bands: f64 = band_norms_sq(s, &u).unwrap().iter().sum();
        prop_assert!(0.5 * norm <= bands * (1.0 + 1e-12));
        prop_assert!(bands <= norm * (1.0 + 1e-12));
    }

    #[test]
    fn verdict_monotone_in_p(p_hi in 0.3f64..3.0, frac in 0.05f64..1.0) {
        let p_lo = p_hi * frac;
        let (ks, lambdas) = stored_alpha1();
        let cfg = ProbeConfig::default();
        let hi = assess(p_hi, ks, lambdas, &cfg).unwrap();
        let lo = assess(p_lo, ks, lambdas, &cfg).unwrap();
        if hi.verdict == Verdict::Holds {
            prop_assert_eq!(lo.verdict, Verdict::Holds);
        }
        if lo.verdict == Verdict::Fails {
            prop_assert_eq!(hi.verdict, Verdict::Fails);
        }
    }

    #[test]
    fn elliptic_maximum_principle(
        a1 in -3.0f64..3.0,
        a0 in 0.0f64..2.0,
        g in 0.1f64..1.5,
        ln_lambda in 0.0f64..8.0,
    ) {
        let coeffs = EllipticCoeffs {
            a1: FieldFn::constant(a1),
            a0: FieldFn::constant(a0),
            ..EllipticCoeffs::laplacian()
        };
        let gf = FieldFn::constant(g);
        let bp = BarrierParams::from_inputs(coeffs.sampled_inputs(&gf, 1.0, 1, &[], 33), 1.0).unwrap();
        let (r, c) = bp.choose(None, None);
        let ps = solve_profile(&coeffs, &gf, ln_lambda.exp(), r, c, 63, 1).unwrap();
        prop_assert_eq!(ps.v_at_center(), 1.0);
        let interior = ps.u[1..ps.u.len() - 1].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(interior <= 2.0 * ps.boundary_max());
    }

    #[test]
    fn profile_1d_is_multiplicative(
        t1 in -1.0f64..1.0,
        t2 in -1.0f64..1.0,
        ln_lambda in 0.0f64..4.0,
    ) {
        let a0 = FieldFn::parse("1 + t/2").unwrap();
        let g = FieldFn::parse("1 + t^2").unwrap();
        let lambda = ln_lambda.exp();
        let v1 = profile_1d(&a0, &g, lambda, 1.0, t1).unwrap();
        let v2 = profile_1d(&a0, &g, lambda, 1.0, t2).unwrap();
        prop_assert!(v1 > 0.0 && v2 > 0.0);
        let expected = (-exponent_integral(&a0, &g, lambda, t1, t2).unwrap()).exp();
        prop_assert!((v2 / v1 - expected).abs() <= 1e-10 * expected.max(1.0));
    }

    #[test]
    fn split_identity_pair(xi in 0.0f64..1e12, eps in 0.01f64..2.0, p in 0.25f64..3.0, s2 in 0.1f64..3.0) {
        let sp = split_point(xi, eps, p, s2).unwrap();
        prop_assert!(sp.defect_r <= 1e-12 && sp.defect_xi <= 1e-12, "{:?}", sp);
        let t = geometric_tail(&sp);
        prop_assert!(t.holds);
        prop_assert!(t.closed <= t.bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn synthesis_is_linear_with_exact_trace(s1 in any::<u64>(), s2 in any::<u64>()) {
        let s = small_surrogate();
        let prov = profiles();
        let u1 = random_vec(s.n, s1);
        let u2 = random_vec(s.n, s2);
        let sum: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| a + b).collect();
        let w1 = synthesize(s, prov, &u1, 0.5, 1.0).unwrap();
        let w2 = synthesize(s, prov, &u2, 0.5, 1.0).unwrap();
        let w = synthesize(s, prov, &sum, 0.5, 1.0).unwrap();
        for i in 0..w.w.len() {
            prop_assert!((w.w[i] - w1.w[i] - w2.w[i]).abs() <= 1e-12);
        }
        prop_assert!(w.trace_defect <= 1e-10 && w1.trace_defect <= 1e-10);
    }

    #[test]
    fn parabolic_max_nonincreasing(a0 in 0.0f64..2.0, g in 0.2f64..1.5, ln_lambda in 0.0f64..4.0) {
        let coeffs = EllipticCoeffs { a0: FieldFn::constant(a0), ..EllipticCoeffs::laplacian() };
        let grid = ParabolicGrid { n_x: 31, n_t: 41, dim: 1, save_every: 10 };
        let pp = solve_profile_parabolic(&coeffs, &FieldFn::constant(g), ln_lambda.exp(), 0.3, 1.0, 0.5, grid).unwrap();
        for w in pp.level_max.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", pp.level_max);
        }
    }

    #[test]
    fn scale_keeps_decisive_verdicts(c in 0.5f64..2.0, which in 0usize..2) {
        let (alpha, p) = [(0.5, 1.0), (2.0, 1.0)][which];
        let src = format!("{c:?}*exp(-abs(y)^(-{alpha:?}))");
        let scaled = parse_coeff(&src).unwrap();
        let cfg = MpConfig::default();
        let base = mp_check(&alpha_family(alpha).unwrap(), p, 0.25, &cfg).unwrap();
        let other = mp_check(&scaled, p, 0.25, &cfg).unwrap();
        prop_assert_ne!(base.verdict, Verdict::Inconclusive);
        prop_assert_eq!(base.verdict, other.verdict);
    }
}

#[test]
fn alpha_family_shape() {
    for alpha in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let a = alpha_family(alpha).unwrap();
        let n = 10_000;
        let mut prev = 0.0;
        for i in 0..=n {
            let y = i as f64 / n as f64;
            let v = a.value(y);
            assert_eq!(v, a.value(-y));
            if i == 0 {
                assert_eq!(v, 0.0);
            } else {
                assert!(a.log_eval(y).unwrap() > f64::NEG_INFINITY);
                assert!(v >= prev, "alpha {alpha} y {y}");
                assert!(a.log_eval(y).unwrap() > a.log_eval((i - 1).max(1) as f64 / n as f64).unwrap() || i == 1);
            }
            prev = v;
        }
    }
}

#[test]
fn laplacian_eigenvalue_richardson() {
    let exact = (std::f64::consts::PI / 2.0).powi(2);
    let err = |n: usize| smallest_eigenvalues(&build_laplacian(1.0, n).unwrap(), 1).unwrap()[0] - exact;
    for n in [63, 127, 255] {
        let ratio = err(n) / err(2 * n + 1);
        assert!((ratio - 4.0).abs() < 0.1, "n {n} ratio {ratio}");
    }
}

#[test]
fn probe_grid_stable_below_e10() {
    let a = alpha_family(1.0).unwrap();
    for k in [4, 6, 8, 10] {
        let z = (k as f64).exp();
        let coarse = lambda_min(&a, z, 1.0, 4097).unwrap();
        let fine = lambda_min(&a, z, 1.0, 8193).unwrap();
        assert!((coarse - fine).abs() / fine <= 1e-3, "k {k}");
    }
}

// The literal slope against log log⟨ζ⟩ is checked by the acceptance battery;
// at ζ ≤ e^10 it still carries the pre-asymptotic bias and sits above 2/α.
#[test]
fn balance_exponent_near_two_over_alpha() {
    let (ks, lambdas) = stored_alpha1();
    let mut reports = vec![(1.0, assess(1.0, ks, lambdas, &ProbeConfig::default()).unwrap())];
    for alpha in [0.5, 2.0] {
        let a = alpha_family(alpha).unwrap();
        let l: Vec<f64> = ks.iter().map(|&k| lambda_min(&a, (0.5 * k as f64).exp(), 1.0, 4097).unwrap()).collect();
        reports.push((alpha, assess(1.0, ks, &l, &ProbeConfig::default()).unwrap()));
    }
    for (alpha, rep) in reports {
        let target = 2.0 / alpha;
        let bal = rep.balance_exponent.expect("balance exponent");
        assert!((bal - target).abs() <= 0.35, "alpha {alpha}: balance {bal}");
        assert!(rep.fitted_exponent > target, "alpha {alpha}: fitted {}", rep.fitted_exponent);
    }
}

#[test]
fn high_band_tight_within_e_on_single_mode() {
    let (eps, p, s2) = (0.3, 1.0, 1.0);
    let xi = 1e6;
    let sp = split_point(xi, eps, p, s2).unwrap();
    let j0 = sp.high_start() as usize;
    let mut amplitudes = vec![vec![0.0]; j0 + 1];
    amplitudes[j0][0] = 1.0;
    let seq = ModeSequence { xi: vec![xi], weights: vec![1.0], amplitudes };
    let rep = lemma_bounds_on_sequence(&seq, eps, p, s2).unwrap();
    assert!(rep.high_holds);
    assert!(rep.high_pointwise <= std::f64::consts::E * rep.high_lhs * (1.0 + 1e-12));
    assert!(log_japanese_bracket(xi) > 1.0);
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn laplacian_surrogate() -> &'static SpectralSurrogate {
    static S: OnceLock<SpectralSurrogate> = OnceLock::new();
    S.get_or_init(|| full_decomposition(&build_laplacian(1.0, 255).unwrap()).unwrap())
}

fn small_surrogate() -> &'static SpectralSurrogate {
    static S: OnceLock<SpectralSurrogate> = OnceLock::new();
    S.get_or_init(|| full_decomposition(&build_laplacian(1.0, 31).unwrap()).unwrap())
}

fn profiles() -> &'static EllipticProfiles {
    static P: OnceLock<EllipticProfiles> = OnceLock::new();
    P.get_or_init(|| {
        let co = EllipticCoeffs::laplacian();
        let g = FieldFn::constant(1.0);
        let bp = BarrierParams::from_inputs(co.sampled_inputs(&g, 1.0, 1, &[], 21), 1.0).unwrap();
        EllipticProfiles::for_eps(co, g, &bp, 0.5, 21, 1)
    })
}

fn stored_alpha1() -> (&'static [u32], &'static [f64]) {
    static D: OnceLock<(Vec<u32>, Vec<f64>)> = OnceLock::new();
    let d = D.get_or_init(|| {
        let a: CoeffFn = alpha_family(1.0).unwrap();
        let ks: Vec<u32> = (4..=20).collect();
        let l = ks.iter().map(|&k| lambda_min(&a, (0.5 * k as f64).exp(), 1.0, 4097).unwrap()).collect();
        (ks, l)
    });
    (&d.0, &d.1)
}
