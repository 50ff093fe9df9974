//! One runner per experiment kind. Parameter sweeps fan out on the rayon
//! pool; results are collected in input order so reports are deterministic.

use anyhow::Context;
use hypolab_core::coeff::{parse_coeff, CoeffFn};
use hypolab_core::elliptic::{profile_upper_check, solve_profile, verify_barrier, BarrierCheck, BarrierParams, ProfileSolution, UpperCheck};
use hypolab_core::interp::{geometric_tail, lemma_bounds_on_sequence, split_point, tail_constant, ModeSequence};
use hypolab_core::mp::{fedii_rate, mp_check, FediiReport, MpVerdict};
use hypolab_core::parabolic::{solve_profile_parabolic, table1_from_probe, ParabolicGrid, ParabolicProfile, Table1Report};
use hypolab_core::spectral::lp::{band_count, band_norms_sq, lp_project, lp_sandwich_check, psi};
use hypolab_core::spectral::{build_laplacian, build_schrodinger, full_decomposition, SpectralSurrogate};
use hypolab_core::superlog::{assess, best_constant_curve_from, lambda_min, resolution_defect, BestConstantCurve, ProbeConfig, ProbeReport, EXTENSION_STEPS, K_MAX};
use hypolab_core::synthesis::{domain_estimate, projection_exp_bound, synthesis_radius, synthesize, DomainEstimate, EllipticProfiles, ProjectionBound, SOLVER_TOL};
use hypolab_core::superlog::eps_from_target;
use hypolab_core::Verdict;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::ProfileCache;
use crate::config::{
    EllipticParams, Experiment, ExperimentConfig, InterpParams, LpParams, MpCheckParams, OperatorParams, ParabolicParams, ProbeParams, SynthesisParams,
    Table1Params, SCHEMA_VERSION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Fails,
    UnderResolved,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Fails => 2,
            Status::UnderResolved => 3,
        }
    }
}

/// A named numerical assertion: `observed ≤ limit` unless stated otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "hypolab_core::float_serde")]
    pub observed: f64,
    #[serde(with = "hypolab_core::float_serde")]
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, observed: f64, limit: f64) -> Self {
        Check { name: name.into(), observed, limit, passed: observed <= limit }
    }

    pub fn at_least(name: &str, observed: f64, limit: f64) -> Self {
        Check { name: name.into(), observed, limit, passed: observed >= limit }
    }

    /// `failures` out of `total`, passing when none failed.
    pub fn count(name: &str, failures: usize) -> Self {
        Check { name: name.into(), observed: failures as f64, limit: 0.0, passed: failures == 0 }
    }
}

fn checks_status(checks: &[Check]) -> Status {
    if checks.iter().all(|c| c.passed) {
        Status::Ok
    } else {
        Status::Fails
    }
}

/// Seeded generator for sample `i` of a sweep, independent of scheduling.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "result", rename_all = "kebab-case")]
pub enum ExperimentResult {
    MpCheck(MpCheckResult),
    SuperlogProbe(SuperlogResult),
    ProfileElliptic(EllipticResult),
    ProfileParabolic(ParabolicResult),
    LpSuite(LpResult),
    Synthesis(SynthesisResult),
    InterpVerify(InterpResult),
    Table1(Table1Report),
}

/// The JSON report written by `hypolab run`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub seed: u64,
    pub status: Status,
    pub exit_code: i32,
    pub config: Experiment,
    #[serde(flatten)]
    pub result: ExperimentResult,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let (status, result) = match &cfg.experiment {
        Experiment::MpCheck(p) => {
            let r = run_mp_check(p)?;
            (r.status(), ExperimentResult::MpCheck(r))
        }
        Experiment::SuperlogProbe(p) => {
            let r = run_probe_params(p)?;
            (r.status(), ExperimentResult::SuperlogProbe(r))
        }
        Experiment::ProfileElliptic(p) => {
            let r = run_elliptic(p)?;
            (r.status(), ExperimentResult::ProfileElliptic(r))
        }
        Experiment::ProfileParabolic(p) => {
            let r = run_parabolic(p)?;
            (r.status(), ExperimentResult::ProfileParabolic(r))
        }
        Experiment::LpSuite(p) => {
            let r = run_lp_suite(p, cfg.seed)?;
            (checks_status(&r.checks), ExperimentResult::LpSuite(r))
        }
        Experiment::Synthesis(p) => {
            let r = run_synthesis(p, cfg.seed)?;
            (checks_status(&r.checks), ExperimentResult::Synthesis(r))
        }
        Experiment::InterpVerify(p) => {
            let r = run_interp(p, cfg.seed)?;
            (checks_status(&r.checks), ExperimentResult::InterpVerify(r))
        }
        Experiment::Table1(p) => {
            let r = run_table1(p)?;
            (table1_status(&r), ExperimentResult::Table1(r))
        }
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        status,
        exit_code: status.exit_code(),
        config: cfg.experiment.clone(),
        result,
    })
}

// ---------------------------------------------------------------- mp-check

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpRow {
    pub coefficient: String,
    pub p: f64,
    pub mp: MpVerdict,
    pub rate: Option<FediiReport>,
    pub rate_error: Option<String>,
    /// Both verdicts decisive and equal.
    pub agree: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpCheckResult {
    pub rows: Vec<MpRow>,
}

impl MpCheckResult {
    fn status(&self) -> Status {
        if self.rows.iter().any(|r| r.mp.verdict == Verdict::Fails) {
            Status::Fails
        } else {
            Status::Ok
        }
    }
}

pub fn run_mp_check(params: &MpCheckParams) -> anyhow::Result<MpCheckResult> {
    let weights = params.weights()?;
    let cases: Vec<(&CoeffFn, f64)> = weights.iter().flat_map(|a| params.p.iter().map(move |&p| (a, p))).collect();
    let rows = cases
        .par_iter()
        .map(|&(a, p)| -> anyhow::Result<MpRow> {
            let mp = mp_check(a, p, params.delta0, &params.mp).with_context(|| format!("mp_check for {} at p = {p}", a.source()))?;
            let (rate, rate_error) = if params.rate {
                match fedii_rate(a, p) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                }
            } else {
                (None, None)
            };
            let agree = rate.as_ref().and_then(|r| {
                let decisive = |v: Verdict| v != Verdict::Inconclusive;
                (decisive(r.verdict) && decisive(mp.verdict)).then_some(r.verdict == mp.verdict)
            });
            Ok(MpRow { coefficient: a.canonical(), p, mp, rate, rate_error, agree })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(MpCheckResult { rows })
}

// ---------------------------------------------------------- superlog-probe

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperlogResult {
    pub coefficient: String,
    pub reports: Vec<ProbeReport>,
    pub curves: Vec<BestConstantCurve>,
}

impl SuperlogResult {
    fn status(&self) -> Status {
        if self.reports.iter().any(|r| r.under_resolved) {
            Status::UnderResolved
        } else if self.reports.iter().any(|r| r.verdict == Verdict::Fails) {
            Status::Fails
        } else {
            Status::Ok
        }
    }
}

/// `Λ(e^{k/2})` for every `k`, one eigen-solve per task.
pub fn probe_lambdas(a: &CoeffFn, ks: &[u32], r_y: f64, n: usize) -> anyhow::Result<Vec<f64>> {
    ks.par_iter()
        .map(|&k| lambda_min(a, (0.5 * k as f64).exp(), r_y, n).with_context(|| format!("ground state at k = {k}")))
        .collect()
}

/// The probe at several orders from one set of ground states, with the
/// refinement check and, when `eps_list` is nonempty, the two-grid
/// best-constant curve.
pub fn run_probe(a: &CoeffFn, ps: &[f64], cfg: &ProbeConfig, eps_list: &[f64]) -> anyhow::Result<SuperlogResult> {
    cfg.validate()?;
    let k_top = if eps_list.is_empty() { cfg.k_hi } else { (cfg.k_hi + EXTENSION_STEPS).min(K_MAX) };
    let all_k: Vec<u32> = (cfg.k_lo..=k_top).collect();
    let all_l = probe_lambdas(a, &all_k, cfg.r_y, cfg.n)?;
    let nb = (cfg.k_hi - cfg.k_lo + 1) as usize;
    let (ks, lambdas) = (&all_k[..nb], &all_l[..nb]);
    let defect = if cfg.check_resolution {
        let coarse_k: Vec<u32> = ks.iter().copied().filter(|&k| k <= cfg.resolution_k).collect();
        let fine = probe_lambdas(a, &coarse_k, cfg.r_y, 2 * cfg.n + 1)?;
        Some(resolution_defect(&lambdas[..coarse_k.len()], &fine))
    } else {
        None
    };
    let zetas: Vec<f64> = all_k.iter().map(|&k| (0.5 * k as f64).exp()).collect();
    let mut reports = Vec::new();
    let mut curves = Vec::new();
    for &p in ps {
        let mut rep = assess(p, ks, lambdas, cfg)?;
        if let Some(d) = defect {
            rep.resolution_defect = Some(d);
            rep.under_resolved = d > cfg.resolution_rel;
        }
        if !eps_list.is_empty() {
            let curve = best_constant_curve_from(p, eps_list, cfg, &zetas, &all_l)?;
            rep.best_constant_curve = curve.points.iter().map(|pt| (pt.eps_prime, pt.c_base)).collect();
            curves.push(curve);
        }
        reports.push(rep);
    }
    Ok(SuperlogResult { coefficient: a.canonical(), reports, curves })
}

fn run_probe_params(params: &ProbeParams) -> anyhow::Result<SuperlogResult> {
    let a = params.weight()?;
    run_probe(&a, &params.p, &params.probe, &params.eps_prime)
}

// ------------------------------------------------------------------ table1

fn table1_status(r: &Table1Report) -> Status {
    if r.probe.under_resolved {
        Status::UnderResolved
    } else if r.consistent {
        Status::Ok
    } else {
        Status::Fails
    }
}

pub fn run_table1(params: &Table1Params) -> anyhow::Result<Table1Report> {
    let a = hypolab_core::coeff::alpha_family(params.alpha)?;
    let mut probe = run_probe(&a, &[1.0], &params.probe, &[])?;
    Ok(table1_from_probe(params.alpha, probe.reports.remove(0), &params.probe)?)
}

// -------------------------------------------------------- profile-elliptic

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticRun {
    pub barrier_check: BarrierCheck,
    pub upper: UpperCheck,
    pub solution: ProfileSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticResult {
    pub barrier: BarrierParams,
    pub r: f64,
    pub c: f64,
    pub runs: Vec<EllipticRun>,
}

impl EllipticResult {
    fn status(&self) -> Status {
        let barrier_ok = self.runs.iter().all(|r| r.barrier_check.holds && r.barrier_check.w_ok);
        let bounds_ok = self
            .runs
            .iter()
            .all(|r| r.solution.lower_ok && r.solution.upper_ok && r.upper.holds && r.solution.v_at_center() == 1.0);
        if !barrier_ok {
            Status::Fails
        } else if !bounds_ok {
            Status::UnderResolved
        } else {
            Status::Ok
        }
    }
}

pub fn run_elliptic(params: &EllipticParams) -> anyhow::Result<EllipticResult> {
    let s = params.setup()?;
    let runs = params
        .lambdas
        .par_iter()
        .map(|&lambda| -> anyhow::Result<EllipticRun> {
            let barrier_check = verify_barrier(&s.coeffs, &s.g, &s.barrier, lambda, s.r, params.barrier_grid, params.dim)?;
            let solution = solve_profile(&s.coeffs, &s.g, lambda, s.r, s.c, params.n, params.dim)
                .with_context(|| format!("profile at lambda = {lambda}"))?;
            let upper = profile_upper_check(&solution, s.barrier.c0, params.p);
            Ok(EllipticRun { barrier_check, upper, solution })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(EllipticResult { barrier: s.barrier, r: s.r, c: s.c, runs })
}

// ------------------------------------------------------- profile-parabolic

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicResult {
    pub barrier: BarrierParams,
    pub r: f64,
    pub c: f64,
    pub runs: Vec<ParabolicProfile>,
}

impl ParabolicResult {
    fn status(&self) -> Status {
        if self.runs.iter().any(|r| r.under_resolved) {
            Status::UnderResolved
        } else {
            Status::Ok
        }
    }
}

pub fn run_parabolic(params: &ParabolicParams) -> anyhow::Result<ParabolicResult> {
    let s = params.setup()?;
    let grid = ParabolicGrid { n_x: params.n_x, n_t: params.n_t, dim: params.dim, save_every: params.save_every };
    let runs = params
        .lambdas
        .par_iter()
        .map(|&lambda| {
            solve_profile_parabolic(&s.coeffs, &s.g, lambda, s.r, s.c, params.horizon, grid)
                .with_context(|| format!("parabolic profile at lambda = {lambda}"))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(ParabolicResult { barrier: s.barrier, r: s.r, c: s.c, runs })
}

// ---------------------------------------------------------------- lp-suite

pub fn build_surrogate(op: &OperatorParams) -> anyhow::Result<SpectralSurrogate> {
    let d = match &op.coefficient {
        None => build_laplacian(op.r_y, op.n)?,
        Some(src) => build_schrodinger(&parse_coeff(src)?, op.zeta, op.r_y, op.n)?,
    };
    Ok(full_decomposition(&d)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpResult {
    pub n: usize,
    pub bands: u32,
    pub lambda_range: (f64, f64),
    pub checks: Vec<Check>,
    /// `‖P_j u‖²` of the first sample.
    pub band_norms_first: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest `|Σ_j ψ_j(λ) − 1|` over log-spaced `λ ∈ [1, e^40]`.
pub fn partition_defect(samples: usize) -> f64 {
    (0..samples)
        .map(|i| {
            let l = (40.0 * i as f64 / (samples - 1) as f64).exp();
            ((0..=44u32).map(|j| psi(j, l)).sum::<f64>() - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

struct LpSample {
    reconstruction: f64,
    orthogonality: f64,
    sandwich_failures: usize,
    band_failures: usize,
    bands: Vec<f64>,
}

fn lp_sample(s: &SpectralSurrogate, seed: u64, i: u64) -> anyhow::Result<LpSample> {
    let mut rng = rng_for(seed, i);
    let u = random_vector(s.n, &mut rng);
    let v = random_vector(s.n, &mut rng);
    let nb = band_count(s);
    let pu: Vec<Vec<f64>> = (0..nb).map(|j| lp_project(s, j, &u)).collect::<Result<_, _>>()?;
    let pv: Vec<Vec<f64>> = (0..nb).map(|j| lp_project(s, j, &v)).collect::<Result<_, _>>()?;
    let mut rest = u.clone();
    for p in &pu {
        for (r, x) in rest.iter_mut().zip(p) {
            *r -= x;
        }
    }
    let mut orth = 0.0f64;
    for j in 0..nb as usize {
        for k in 0..nb as usize {
            if j.abs_diff(k) > 1 {
                orth = orth.max(dot(&pu[j], &pv[k]).abs());
            }
        }
    }
    let mut sandwich_failures = 0;
    if !lp_sandwich_check(s, f64::sqrt, &u)?.holds {
        sandwich_failures += 1;
    }
    if !lp_sandwich_check(s, |l: f64| (0.1 * l.sqrt()).exp(), &u)?.holds {
        sandwich_failures += 1;
    }
    let bands = band_norms_sq(s, &u)?;
    let total: f64 = bands.iter().sum();
    let nu = dot(&u, &u);
    let band_failures = usize::from(!(0.5 * nu <= total * (1.0 + 1e-12) && total <= nu * (1.0 + 1e-12)));
    Ok(LpSample { reconstruction: norm(&rest), orthogonality: orth, sandwich_failures, band_failures, bands })
}

pub fn run_lp_suite(params: &LpParams, seed: u64) -> anyhow::Result<LpResult> {
    let s = build_surrogate(&params.operator)?;
    let samples = (0..params.samples as u64)
        .into_par_iter()
        .map(|i| lp_sample(&s, seed, i))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let max = |f: &dyn Fn(&LpSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("partition of unity |sum psi_j - 1|", partition_defect(params.partition_samples), 1e-12),
        Check::at_most("reconstruction |u - sum P_j u|", max(&|x| x.reconstruction), 1e-10),
        Check::at_most("orthogonality |<P_j u, P_k v>|, |j-k| > 1", max(&|x| x.orthogonality), 1e-12),
        Check::count("sandwich violations (sqrt, exp(0.1 sqrt))", samples.iter().map(|x| x.sandwich_failures).sum()),
        Check::count("band-sum bound violations", samples.iter().map(|x| x.band_failures).sum()),
        Check::at_most("eigenvector orthonormality defect", s.orthonormality_defect(), 1e-10),
    ];
    Ok(LpResult {
        n: s.n,
        bands: band_count(&s),
        lambda_range: (s.eigenvalues[0], *s.eigenvalues.last().unwrap_or(&1.0)),
        checks,
        band_norms_first: samples.first().map(|x| x.bands.clone()).unwrap_or_default(),
    })
}

// --------------------------------------------------------------- synthesis

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRow {
    pub j: u32,
    pub u_norm_sq: f64,
    pub trace_defect: f64,
    pub max_residual: f64,
    pub estimate: DomainEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub eps: f64,
    pub p: f64,
    pub r: f64,
    pub c0: f64,
    pub barrier: BarrierParams,
    pub profiles_solved: usize,
    pub rows: Vec<SynthesisRow>,
    pub projection: Vec<ProjectionBound>,
    pub checks: Vec<Check>,
}

pub fn run_synthesis(params: &SynthesisParams, seed: u64) -> anyhow::Result<SynthesisResult> {
    let s = build_surrogate(&params.operator)?;
    let setup = params.setup(s.eigenvalues[0])?;
    let bp = setup.barrier;
    let inner = EllipticProfiles::for_eps(setup.coeffs, setup.g, &bp, params.eps, params.n_x, params.dim);
    let cache = ProfileCache::new();
    let prov = cache.provider(&inner);
    prov.prefetch(&s.eigenvalues)?;
    let rows = (0..=params.j_max)
        .into_par_iter()
        .map(|j| -> anyhow::Result<SynthesisRow> {
            let mut rng = rng_for(seed, j as u64);
            let u = lp_project(&s, j, &random_vector(s.n, &mut rng))?;
            let sol = synthesize(&s, &prov, &u, params.eps, params.p)?;
            Ok(SynthesisRow {
                j,
                u_norm_sq: dot(&u, &u),
                trace_defect: sol.trace_defect,
                max_residual: sol.residuals.iter().cloned().fold(0.0, f64::max),
                estimate: domain_estimate(&sol, &s),
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut rng = rng_for(seed, u64::MAX);
    let u = random_vector(s.n, &mut rng);
    let projection = (0..band_count(&s))
        .map(|j| projection_exp_bound(&s, j, params.eps, params.p, &u))
        .collect::<Result<Vec<_>, _>>()?;
    let checks = vec![
        Check::at_most("trace |w(0,.) - u|", rows.iter().map(|r| r.trace_defect).fold(0.0, f64::max), 1e-10),
        Check::at_most("per-mode relative residual", rows.iter().map(|r| r.max_residual).fold(0.0, f64::max), SOLVER_TOL),
        Check::count("domain estimate violations", rows.iter().filter(|r| !r.estimate.holds).count()),
        Check::at_least(
            "min slack of the corrected projection bound",
            projection.iter().map(|b| b.slack).fold(f64::INFINITY, f64::min),
            0.0,
        ),
    ];
    Ok(SynthesisResult {
        eps: params.eps,
        p: params.p,
        r: synthesis_radius(&bp, params.eps),
        c0: bp.c0,
        barrier: bp,
        profiles_solved: cache.len(),
        rows,
        projection,
        checks,
    })
}

// ----------------------------------------------------------- interp-verify

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpResult {
    pub draws: usize,
    pub sequences: usize,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy)]
struct Draw {
    xi: f64,
    eps: f64,
    p: f64,
    s2: f64,
}

fn draw(rng: &mut ChaCha8Rng, xi_max: f64) -> Draw {
    let xi = if rng.gen_bool(0.05) { 0.0 } else { rng.gen_range(0.0..xi_max.ln()).exp() };
    Draw { xi, eps: rng.gen_range(0.01..2.0), p: rng.gen_range(0.25..3.0), s2: rng.gen_range(0.1..3.0) }
}

pub fn run_interp(params: &InterpParams, seed: u64) -> anyhow::Result<InterpResult> {
    let mut rng = rng_for(seed, 0);
    let mut identity = 0.0f64;
    let mut tail_diff = 0.0f64;
    let mut tail_fail = 0usize;
    let mut inversion = 0.0f64;
    for _ in 0..params.draws {
        let d = draw(&mut rng, params.xi_max);
        let sp = split_point(d.xi, d.eps, d.p, d.s2)?;
        identity = identity.max(sp.defect_r).max(sp.defect_xi);
        let t = geometric_tail(&sp);
        tail_diff = tail_diff.max(t.rel_diff);
        tail_fail += usize::from(!t.holds);
        let target = tail_constant(d.p, d.s2) * std::f64::consts::E * d.eps.powf(2.0 * d.p);
        let back = eps_from_target(target, d.p, d.s2)?;
        inversion = inversion.max((back - d.eps).abs() / d.eps);
    }
    let mut rng = rng_for(seed, 1);
    let mut high_fail = 0usize;
    let mut low_fail = 0usize;
    for _ in 0..params.sequences {
        let d = draw(&mut rng, params.xi_max);
        let m = rng.gen_range(1..=8);
        let modes = rng.gen_range(1..=24);
        let xi: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..params.xi_max.ln()).exp()).collect();
        let weights: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        let amplitudes = (0..modes)
            .map(|_| (0..m).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) }).collect())
            .collect();
        let rep = lemma_bounds_on_sequence(&ModeSequence { xi, weights, amplitudes }, d.eps, d.p, d.s2)?;
        high_fail += usize::from(!rep.high_holds);
        low_fail += usize::from(!rep.low_holds);
    }
    let checks = vec![
        Check::at_most("identity pair defect", identity, 1e-12),
        Check::at_most("geometric tail closed vs direct", tail_diff, 1e-12),
        Check::count("tail bound violations", tail_fail),
        Check::count("high-band inequality violations", high_fail),
        Check::count("low-band chain violations", low_fail),
        Check::at_most("eps_from_target inversion", inversion, 1e-14),
    ];
    Ok(InterpResult { draws: params.draws, sequences: params.sequences, checks })
}
