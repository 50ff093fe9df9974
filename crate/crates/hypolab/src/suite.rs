//! The acceptance battery: ten criteria, each a function returning a
//! pass/fail line. `hypolab suite` and the `acceptance` test run the same code.

use std::f64::consts::E;
use std::time::Instant;

use hypolab_core::coeff::{alpha_family, FieldFn};
use hypolab_core::elliptic::{barrier_params, solve_profile, verify_barrier, EllipticCoeffs};
use hypolab_core::parabolic::profile_1d;
use hypolab_core::superlog::{lambda_min, ProbeConfig};
use hypolab_core::Verdict;
use rand::Rng;
use rayon::prelude::*;

use crate::config::{CoeffSources, EllipticParams, InterpParams, LpParams, MpCheckParams, ParabolicParams, SynthesisParams};
use crate::experiments::{
    rng_for, run_elliptic, run_interp, run_lp_suite, run_mp_check, run_parabolic, run_probe, run_synthesis, Check, SuperlogResult,
};

/// Outcome of one criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Extra diagnostics printed on their own line; never affect `passed`.
    pub companion: Option<String>,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:2} {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

struct Outcome {
    passed: bool,
    detail: String,
    companion: Option<String>,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail, companion: None }
}

pub type CriterionFn = fn() -> CriterionResult;

/// All criteria in order.
pub const CRITERIA: [CriterionFn; 10] = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
];

fn timed(id: u32, title: &'static str, f: impl FnOnce() -> anyhow::Result<Outcome>) -> CriterionResult {
    let t0 = Instant::now();
    let res = f();
    let seconds = t0.elapsed().as_secs_f64();
    match res {
        Ok(o) => CriterionResult { id, title, passed: o.passed, detail: o.detail, companion: o.companion, seconds },
        Err(e) => CriterionResult { id, title, passed: false, detail: format!("error: {e:#}"), companion: None, seconds },
    }
}

fn summarize(checks: &[Check]) -> String {
    checks
        .iter()
        .map(|c| format!("{}{} {:.3e}/{:.1e}", if c.passed { "" } else { "!" }, c.name, c.observed, c.limit))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Default probe grid: `ζ = e^{k/2}`, `k = 4..20`, `n = 8193`, `R_y = 1`.
fn probe_grid(alpha: f64, ps: &[f64]) -> anyhow::Result<SuperlogResult> {
    let cfg = ProbeConfig { check_resolution: false, ..ProbeConfig::default() };
    run_probe(&alpha_family(alpha)?, ps, &cfg, &[])
}

pub fn criterion_1() -> CriterionResult {
    timed(1, "alpha threshold", || {
        let cases: [(f64, &[(f64, Verdict)]); 4] = [
            (0.5, &[(1.0, Verdict::Holds)]),
            (1.0, &[(0.9, Verdict::Holds), (1.0, Verdict::Fails)]),
            (2.0, &[(1.0, Verdict::Fails)]),
            (1.5, &[(0.5, Verdict::Holds)]),
        ];
        let t0 = Instant::now();
        let mut ok = true;
        let mut parts = Vec::new();
        for (alpha, want) in cases {
            let ps: Vec<f64> = want.iter().map(|w| w.0).collect();
            let res = probe_grid(alpha, &ps)?;
            for (rep, &(p, v)) in res.reports.iter().zip(want) {
                ok &= rep.verdict == v;
                let note = if rep.verdict == v { "ok".to_string() } else { format!("expected {v}") };
                parts.push(format!("(a={alpha}, p={p}) {} [{note}]", rep.verdict));
            }
        }
        let secs = t0.elapsed().as_secs_f64();
        ok &= secs <= 60.0;
        Ok(outcome(ok, format!("{}; {secs:.1} s of 60 s", parts.join(", "))))
    })
}

/// `Λ(e^{10})` at `n = 32769` from an independent dense solver.
const FINE_ORACLE: [(f64, f64); 3] = [(0.5, 13467.930837351925), (1.0, 297.7395844058717), (2.0, 29.415798801985254)];

pub fn criterion_2() -> CriterionResult {
    timed(2, "growth exponent", || {
        let mut ok = true;
        let mut parts = Vec::new();
        let mut companion = Vec::new();
        for (alpha, oracle) in FINE_ORACLE {
            let target = 2.0 / alpha;
            let rep = probe_grid(alpha, &[1.0])?.reports.remove(0);
            let s = rep.literal_exponent;
            let within = (s - target).abs() <= 0.35;
            ok &= within;
            let fine = lambda_min(&alpha_family(alpha)?, 10f64.exp(), 1.0, 32769)?;
            let oracle_ok = (fine - oracle).abs() <= 1e-8 * oracle;
            ok &= oracle_ok;
            parts.push(format!(
                "a={alpha}: s={s:.3} vs {target} ({}), oracle {}",
                if within { "ok" } else { "off" },
                if oracle_ok { "ok" } else { "MISMATCH" }
            ));
            if let Some(b) = rep.balance_exponent {
                companion.push(format!("a={alpha}: {b:.3} vs {target} (|diff| {:.3})", (b - target).abs()));
            }
        }
        Ok(Outcome {
            passed: ok,
            detail: parts.join(", "),
            companion: Some(format!("balance exponent, slope vs log log(zeta^2/Lambda): {}", companion.join(", "))),
        })
    })
}

pub fn criterion_3() -> CriterionResult {
    timed(3, "M_p vs rate agreement", || {
        let params = MpCheckParams {
            alpha: vec![0.25, 0.5, 0.8, 1.25, 2.0, 4.0],
            p: vec![0.5, 1.0, 2.0],
            ..MpCheckParams::default()
        };
        let alphas = params.alpha.clone();
        let res = run_mp_check(&params)?;
        let mut ok = true;
        let mut decisive = 0;
        let mut bad = Vec::new();
        for (i, row) in res.rows.iter().enumerate() {
            let alpha = alphas[i / params.p.len()];
            let margin = (alpha - 1.0 / row.p).abs();
            let rate = row.rate.as_ref().map(|r| r.verdict);
            if margin >= 0.2 {
                if let Some(agree) = row.agree {
                    decisive += 1;
                    if !agree {
                        ok = false;
                        bad.push(format!("(a={alpha}, p={})", row.p));
                    }
                }
            }
            if margin < 1e-12 && (row.mp.verdict == Verdict::Holds || rate == Some(Verdict::Holds)) {
                ok = false;
                bad.push(format!("threshold (a={alpha}, p={}) holds", row.p));
            }
        }
        Ok(outcome(ok, format!("{} cases, {decisive} decisive agreements checked, disagreements: {:?}", res.rows.len(), bad)))
    })
}

pub fn criterion_4() -> CriterionResult {
    timed(4, "elliptic profile bounds", || {
        let ops = [
            ("-Lap", CoeffSources::default()),
            ("-Lap + x1 d1 + 1", CoeffSources { a1: "x1".into(), a0: "1".into(), ..CoeffSources::default() }),
        ];
        let lambdas = vec![1.0, E * E, E.powi(4)];
        let mut jobs = Vec::new();
        for (name, co) in &ops {
            for dim in [1usize, 2] {
                for g in ["1", "x1^2", "x1^2 + x2^2"] {
                    jobs.push((*name, co.clone(), dim, g));
                }
            }
        }
        let results = jobs
            .par_iter()
            .map(|(name, co, dim, g)| {
                let params = EllipticParams {
                    coefficients: co.clone(),
                    g: g.to_string(),
                    dim: *dim,
                    lambdas: lambdas.clone(),
                    n: if *dim == 1 { 401 } else { 63 },
                    ..EllipticParams::default()
                };
                run_elliptic(&params).map(|r| (*name, *dim, *g, r))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let mut ok = true;
        let mut runs = 0;
        let mut bad = Vec::new();
        for (name, dim, g, r) in &results {
            for run in &r.runs {
                runs += 1;
                let s = &run.solution;
                let good = s.lower_ok && s.upper_ok && s.v_at_center() == 1.0;
                if !good {
                    ok = false;
                    bad.push(format!("{name} d={dim} g={g} lambda={:.3}", s.lambda));
                }
            }
        }
        // closed form: -u'' + λu = 0 on (-r, r), u(±r) = e^{c√λ(±r - r)}
        let bp = barrier_params(1.0, 0.0, 0.0, 1.0, 1.0)?;
        let (r, c) = (bp.r0, bp.c0);
        let mut closed = 0.0f64;
        for &lambda in &lambdas {
            let ps = solve_profile(&EllipticCoeffs::laplacian(), &FieldFn::constant(1.0), lambda, r, c, 2047, 1)?;
            let k = lambda.sqrt();
            let (lo, hi) = ((-2.0 * c * k * r).exp(), 1.0);
            // A e^{kx} + B e^{-kx}
            let det = (-2.0 * k * r).exp() - (2.0 * k * r).exp();
            let a = (lo * (-k * r).exp() - hi * (k * r).exp()) / det;
            let b = (hi * (-k * r).exp() - lo * (k * r).exp()) / det;
            for (x, u) in ps.x.iter().zip(&ps.u) {
                closed = closed.max((u - (a * (k * x).exp() + b * (-k * x).exp())).abs());
            }
        }
        ok &= closed <= 1e-6;
        Ok(outcome(ok, format!("{runs} runs, bound failures {bad:?}; closed-form max error {closed:.2e}")))
    })
}

pub fn criterion_5() -> CriterionResult {
    timed(5, "parabolic 1D closed form", || {
        let mut rng = rng_for(5, 0);
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (b0, b2) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let lambda = rng.gen_range(0.0f64..3.0).exp();
            let horizon = 1.0;
            let t = rng.gen_range(-horizon..horizon);
            let a0 = FieldFn::parse(&format!("{:?} + {:?}*t + {:?}*t^2 + {:?}*t^3", a[0], a[1], a[2], a[3]))?;
            let g = FieldFn::parse(&format!("{b0:?} + {b2:?}*t^2"))?;
            let got = profile_1d(&a0, &g, lambda, horizon, t)?;
            let integral = a[0] * t + a[1] * t * t / 2.0 + a[2] * t.powi(3) / 3.0 + a[3] * t.powi(4) / 4.0 + lambda * (b0 * t + b2 * t.powi(3) / 3.0);
            let exact = (-integral).exp();
            worst = worst.max((got - exact).abs() / exact);
        }
        Ok(outcome(worst <= 1e-10, format!("100 draws, max relative error {worst:.2e} (limit 1e-10)")))
    })
}

pub fn criterion_6() -> CriterionResult {
    timed(6, "parabolic nD bounds", || {
        let cs = |a11: &str, a1: &str, a0: &str| CoeffSources { a11: a11.into(), a1: a1.into(), a0: a0.into(), ..CoeffSources::default() };
        let configs = [
            ("-Lap, g=1", cs("1", "0", "0"), "1"),
            ("-Lap + x1 d1 + 1", cs("1", "x1", "1"), "1"),
            ("-Lap, g=1+t^2/2", cs("1", "0", "0"), "1 + t^2/2"),
            ("-Lap - 1/2", cs("1", "0", "-0.5"), "1"),
            ("variable a11, drift t/2", cs("1 + x1^2/2", "t/2", "0"), "x1^2 + 0.1"),
            ("signed a0 = -0.3 t", cs("1", "0", "-0.3*t"), "1 + 0.5*x1"),
        ];
        let results = configs
            .par_iter()
            .map(|(name, co, g)| {
                let params = ParabolicParams {
                    coefficients: co.clone(),
                    g: g.to_string(),
                    lambdas: vec![E * E],
                    horizon: 1.0,
                    n_x: 401,
                    n_t: 2001,
                    save_every: 1000,
                    ..ParabolicParams::default()
                };
                run_parabolic(&params).map(|r| (*name, r))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, r) in &results {
            let run = &r.runs[0];
            let good = run.lower_ok && run.upper_ok;
            ok &= good;
            parts.push(format!("{name}: {}", if good { "ok" } else { "VIOLATED" }));
        }
        Ok(outcome(ok, parts.join(", ")))
    })
}

pub fn criterion_7() -> CriterionResult {
    timed(7, "Littlewood-Paley suite", || {
        let r = run_lp_suite(&LpParams::default(), 7)?;
        Ok(outcome(r.checks.iter().all(|c| c.passed), format!("n={}: {}", r.n, summarize(&r.checks))))
    })
}

pub fn criterion_8() -> CriterionResult {
    timed(8, "synthesis", || {
        let r = run_synthesis(&SynthesisParams::default(), 8)?;
        Ok(outcome(r.checks.iter().all(|c| c.passed), summarize(&r.checks)))
    })
}

pub fn criterion_9() -> CriterionResult {
    timed(9, "interpolation suite", || {
        let r = run_interp(&InterpParams::default(), 9)?;
        Ok(outcome(r.checks.iter().all(|c| c.passed), summarize(&r.checks)))
    })
}

pub fn criterion_10() -> CriterionResult {
    timed(10, "barrier suite", || {
        let mut rng = rng_for(10, 0);
        let mut worst_slack = f64::INFINITY;
        let mut failures = 0;
        for _ in 0..50 {
            let dim = rng.gen_range(1..=2usize);
            let a = rng.gen_range(0.5..2.0);
            let b = rng.gen_range(0.0..1.0);
            let c: [f64; 3] = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0)];
            let d: [f64; 2] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let e: [f64; 3] = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let coeffs = EllipticCoeffs {
                a11: FieldFn::parse(&format!("{a:?} + {b:?}*x1^2"))?,
                a1: FieldFn::parse(&format!("{:?}*x1 + {:?}*x2 + {:?}", c[0], c[1], c[2]))?,
                a0: FieldFn::parse(&format!("{:?} + {:?}*x1*x2", d[0], d[1]))?,
                ..EllipticCoeffs::laplacian()
            };
            let g = FieldFn::parse(&format!("{:?} + {:?}*x1^2 + {:?}*x2^2", e[0], e[1], e[2]))?;
            // declared norms on the unit box, which contains Q_{r₀}
            let norm_a1 = c.iter().map(|v| v.abs()).sum::<f64>();
            let norm_a0 = d.iter().map(|v| v.abs()).sum::<f64>();
            let norm_g = e.iter().sum::<f64>();
            let bp = barrier_params(a, norm_a1, norm_a0, norm_g, 1.0)?;
            let beta = ((norm_a1 + 1.0) / a).max(4.0 * norm_a0);
            let formulas = bp.beta == beta && bp.r0 == (std::f64::consts::LN_2 / (2.0 * beta)).min(1.0);
            let lambda = rng.gen_range(0.0f64..4.0).exp();
            let chk = verify_barrier(&coeffs, &g, &bp, lambda, bp.r0, 101, dim)?;
            worst_slack = worst_slack.min(chk.min_slack);
            if !(chk.holds && chk.w_ok && formulas) {
                failures += 1;
            }
        }
        Ok(outcome(failures == 0, format!("50 fields, failures {failures}, min (L1 + lambda g)w = {worst_slack:.3e}")))
    })
}

/// Runs every criterion in order, handing each result to `each` as soon
/// as it is available.
pub fn run_all(mut each: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|f| {
            let r = f();
            each(&r);
            r
        })
        .collect()
}
