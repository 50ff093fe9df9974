//! Experiment configuration: one JSON document per run.

use std::fmt;
use std::path::{Path, PathBuf};

use hypolab_core::coeff::{alpha_family, parse_coeff, CoeffFn, FieldFn};
use hypolab_core::elliptic::{BarrierParams, EllipticCoeffs};
use hypolab_core::mp::MpConfig;
use hypolab_core::superlog::ProbeConfig;
use serde::{Deserialize, Serialize};

/// Version of the report and config layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    MpCheck(MpCheckParams),
    SuperlogProbe(ProbeParams),
    ProfileElliptic(EllipticParams),
    ProfileParabolic(ParabolicParams),
    LpSuite(LpParams),
    Synthesis(SynthesisParams),
    InterpVerify(InterpParams),
    Table1(Table1Params),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::MpCheck(_) => "mp-check",
            Experiment::SuperlogProbe(_) => "superlog-probe",
            Experiment::ProfileElliptic(_) => "profile-elliptic",
            Experiment::ProfileParabolic(_) => "profile-parabolic",
            Experiment::LpSuite(_) => "lp-suite",
            Experiment::Synthesis(_) => "synthesis",
            Experiment::InterpVerify(_) => "interp-verify",
            Experiment::Table1(_) => "table1",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

/// One offending field and what is wrong with it.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

/// All validation failures of a config, in field order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<FieldError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for e in &self.0 {
            writeln!(f, "  {}: {}", e.field, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Default)]
struct Errors(Vec<FieldError>);

impl Errors {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldError { field: field.into(), message: message.into() });
    }

    fn check(&mut self, ok: bool, field: &str, message: impl FnOnce() -> String) {
        if !ok {
            self.push(field, message());
        }
    }

    fn finish(self) -> Result<(), ConfigErrors> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(self.0))
        }
    }
}

impl ExperimentConfig {
    /// Parses a config document. `seed`, `out` and `schema_version` are
    /// common keys; everything else belongs to the experiment kind.
    pub fn from_json(text: &str) -> Result<Self, ConfigErrors> {
        let single = |field: &str, message: String| ConfigErrors(vec![FieldError { field: field.into(), message }]);
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| single("<document>", e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| single("<document>", "expected a JSON object".into()))?;
        let seed = match obj.remove("seed") {
            None => 0,
            Some(v) => v.as_u64().ok_or_else(|| single("seed", "expected a nonnegative integer".into()))?,
        };
        let out = match obj.remove("out") {
            None | Some(serde_json::Value::Null) => None,
            Some(serde_json::Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => return Err(single("out", "expected a path string".into())),
        };
        if let Some(v) = obj.remove("schema_version") {
            if v.as_u64() != Some(SCHEMA_VERSION as u64) {
                return Err(single("schema_version", format!("unsupported version {v}, expected {SCHEMA_VERSION}")));
            }
        }
        if !obj.contains_key("kind") {
            return Err(single("kind", "missing experiment kind".into()));
        }
        let experiment: Experiment = serde_json::from_value(value).map_err(|e| single("<document>", e.to_string()))?;
        let cfg = ExperimentConfig { experiment, seed, out };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
        Ok(Self::from_json(&text)?)
    }

    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let mut errs = Errors::default();
        match &self.experiment {
            Experiment::MpCheck(p) => p.validate(&mut errs),
            Experiment::SuperlogProbe(p) => p.validate(&mut errs),
            Experiment::ProfileElliptic(p) => p.validate(&mut errs),
            Experiment::ProfileParabolic(p) => p.validate(&mut errs),
            Experiment::LpSuite(p) => p.validate(&mut errs),
            Experiment::Synthesis(p) => p.validate(&mut errs),
            Experiment::InterpVerify(p) => p.validate(&mut errs),
            Experiment::Table1(p) => p.validate(&mut errs),
        }
        errs.finish()
    }
}

fn check_positive_list(errs: &mut Errors, field: &str, v: &[f64]) {
    if v.is_empty() {
        errs.push(field, "must not be empty");
    }
    for (i, x) in v.iter().enumerate() {
        errs.check(*x > 0.0 && x.is_finite(), &format!("{field}[{i}]"), || format!("must be positive, got {x}"));
    }
}

fn check_coefficient(errs: &mut Errors, field: &str, src: &str) -> Option<CoeffFn> {
    match parse_coeff(src) {
        Ok(a) => Some(a),
        Err(e) => {
            errs.push(field, e.to_string());
            None
        }
    }
}

fn check_probe(errs: &mut Errors, field: &str, cfg: &ProbeConfig) {
    if let Err(e) = cfg.validate() {
        errs.push(field, e.to_string());
    }
}

/// `coefficient` or `alpha` (for `exp(-|y|^(-α))`), exactly one of them.
fn weight(errs: &mut Errors, coefficient: &Option<String>, alpha: &Option<f64>) -> Option<CoeffFn> {
    match (coefficient, alpha) {
        (Some(src), None) => check_coefficient(errs, "coefficient", src),
        (None, Some(a)) => match alpha_family(*a) {
            Ok(w) => Some(w),
            Err(e) => {
                errs.push("alpha", e.to_string());
                None
            }
        },
        (Some(_), Some(_)) => {
            errs.push("coefficient", "give either `coefficient` or `alpha`, not both");
            None
        }
        (None, None) => {
            errs.push("coefficient", "one of `coefficient` or `alpha` is required");
            None
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpCheckParams {
    /// Weights as expressions in `y`.
    pub coefficients: Vec<String>,
    /// Shorthand for `exp(-|y|^(-α))` weights.
    pub alpha: Vec<f64>,
    pub p: Vec<f64>,
    pub delta0: f64,
    pub mp: MpConfig,
    /// Also run the pointwise-rate criterion.
    pub rate: bool,
}

impl Default for MpCheckParams {
    fn default() -> Self {
        MpCheckParams {
            coefficients: Vec::new(),
            alpha: Vec::new(),
            p: vec![1.0],
            delta0: 0.25,
            mp: MpConfig::default(),
            rate: true,
        }
    }
}

impl MpCheckParams {
    pub fn weights(&self) -> anyhow::Result<Vec<CoeffFn>> {
        let mut out = Vec::new();
        for s in &self.coefficients {
            out.push(parse_coeff(s)?);
        }
        for &a in &self.alpha {
            out.push(alpha_family(a)?);
        }
        Ok(out)
    }

    fn validate(&self, errs: &mut Errors) {
        if self.coefficients.is_empty() && self.alpha.is_empty() {
            errs.push("coefficients", "give at least one coefficient or alpha");
        }
        for (i, s) in self.coefficients.iter().enumerate() {
            check_coefficient(errs, &format!("coefficients[{i}]"), s);
        }
        for (i, a) in self.alpha.iter().enumerate() {
            errs.check(*a > 0.0, &format!("alpha[{i}]"), || format!("must be positive, got {a}"));
        }
        check_positive_list(errs, "p", &self.p);
        errs.check(self.delta0 > 0.0 && self.delta0 < 1.0, "delta0", || {
            format!("must lie in (0, 1), got {}", self.delta0)
        });
        errs.check(self.mp.grid >= 4, "mp.grid", || "must be at least 4".into());
        errs.check(self.mp.theta_hold < self.mp.theta_fail, "mp.theta_hold", || {
            "must be smaller than mp.theta_fail".into()
        });
        errs.check(self.mp.quad_tol > 0.0 && self.mp.quad_tol < 1e-2, "mp.quad_tol", || {
            "must lie in (0, 1e-2)".into()
        });
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeParams {
    pub coefficient: Option<String>,
    pub alpha: Option<f64>,
    pub p: Vec<f64>,
    pub probe: ProbeConfig,
    /// `ε′` values for the best-constant curve, strictly decreasing.
    pub eps_prime: Vec<f64>,
}

impl Default for ProbeParams {
    fn default() -> Self {
        ProbeParams {
            coefficient: None,
            alpha: None,
            p: vec![1.0],
            probe: ProbeConfig::default(),
            eps_prime: Vec::new(),
        }
    }
}

impl ProbeParams {
    pub fn weight(&self) -> anyhow::Result<CoeffFn> {
        let mut errs = Errors::default();
        weight(&mut errs, &self.coefficient, &self.alpha).ok_or_else(|| anyhow::anyhow!(ConfigErrors(errs.0)))
    }

    fn validate(&self, errs: &mut Errors) {
        weight(errs, &self.coefficient, &self.alpha);
        check_positive_list(errs, "p", &self.p);
        check_probe(errs, "probe", &self.probe);
        for (i, e) in self.eps_prime.iter().enumerate() {
            errs.check(*e > 0.0, &format!("eps_prime[{i}]"), || format!("must be positive, got {e}"));
        }
        errs.check(self.eps_prime.windows(2).all(|w| w[1] < w[0]), "eps_prime", || {
            "must be strictly decreasing".into()
        });
    }
}

/// Expressions over `x1`, `x2`, `t` for the coefficients of `L₁`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffSources {
    pub a11: String,
    pub a22: String,
    pub a1: String,
    pub a2: String,
    pub a0: String,
}

impl Default for CoeffSources {
    fn default() -> Self {
        CoeffSources {
            a11: "1".into(),
            a22: "1".into(),
            a1: "0".into(),
            a2: "0".into(),
            a0: "0".into(),
        }
    }
}

impl CoeffSources {
    fn parse_all(&self, errs: &mut Errors, prefix: &str) -> Option<EllipticCoeffs> {
        let mut field = |name: &str, src: &str| match FieldFn::parse(src) {
            Ok(f) => Some(f),
            Err(e) => {
                errs.push(format!("{prefix}.{name}"), e.to_string());
                None
            }
        };
        let a11 = field("a11", &self.a11);
        let a22 = field("a22", &self.a22);
        let a1 = field("a1", &self.a1);
        let a2 = field("a2", &self.a2);
        let a0 = field("a0", &self.a0);
        Some(EllipticCoeffs { a11: a11?, a22: a22?, a1: a1?, a2: a2?, a0: a0? })
    }
}

fn parse_field(errs: &mut Errors, field: &str, src: &str) -> Option<FieldFn> {
    match FieldFn::parse(src) {
        Ok(f) => Some(f),
        Err(e) => {
            errs.push(field, e.to_string());
            None
        }
    }
}

/// Parsed elliptic setup with its barrier parameters.
#[derive(Debug, Clone)]
pub struct EllipticSetup {
    pub coeffs: EllipticCoeffs,
    pub g: FieldFn,
    pub barrier: BarrierParams,
    pub r: f64,
    pub c: f64,
}

#[allow(clippy::too_many_arguments)]
fn elliptic_setup(
    errs: &mut Errors,
    sources: &CoeffSources,
    g: &str,
    dim: usize,
    lambda_min: f64,
    r: Option<f64>,
    c: Option<f64>,
    samples: usize,
    ts: &[f64],
) -> Option<EllipticSetup> {
    errs.check(dim == 1 || dim == 2, "dim", || format!("must be 1 or 2, got {dim}"));
    errs.check(samples >= 3, "samples", || "must be at least 3".into());
    let coeffs = sources.parse_all(errs, "coefficients");
    let g = parse_field(errs, "g", g);
    let (coeffs, g) = (coeffs?, g?);
    if !(dim == 1 || dim == 2) || samples < 3 {
        return None;
    }
    let inputs = coeffs.sampled_inputs(&g, 1.0, dim, ts, samples);
    let (g_lo, _) = g.sampled_range(1.0, dim, ts, samples);
    errs.check(g_lo >= 0.0, "g", || format!("must be nonnegative, sampled minimum {g_lo}"));
    let barrier = match BarrierParams::from_inputs(inputs, lambda_min.max(1.0)) {
        Ok(b) => b,
        Err(e) => {
            errs.push("coefficients.a11", e.to_string());
            return None;
        }
    };
    if let Some(r) = r {
        errs.check(r > 0.0 && r <= barrier.r0, "r", || {
            format!("must satisfy 0 < r <= r0 = {:.17}, got {r}", barrier.r0)
        });
    }
    if let Some(c) = c {
        errs.check(c >= barrier.c0, "c", || format!("must satisfy c >= c0 = {:.17}, got {c}", barrier.c0));
    }
    let (r, c) = barrier.choose(r, c);
    Some(EllipticSetup { coeffs, g, barrier, r, c })
}

fn check_lambdas(errs: &mut Errors, lambdas: &[f64]) -> f64 {
    if lambdas.is_empty() {
        errs.push("lambdas", "must not be empty");
    }
    for (i, l) in lambdas.iter().enumerate() {
        errs.check(*l >= 1.0 && l.is_finite(), &format!("lambdas[{i}]"), || format!("must be >= 1, got {l}"));
    }
    lambdas.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn check_odd(errs: &mut Errors, field: &str, n: usize, max: usize) {
    errs.check(n >= 3 && n % 2 == 1 && n <= max, field, || format!("must be odd in [3, {max}], got {n}"));
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EllipticParams {
    pub coefficients: CoeffSources,
    pub g: String,
    pub dim: usize,
    pub lambdas: Vec<f64>,
    /// Interior points per axis.
    pub n: usize,
    /// Defaults to `r₀`; must not exceed it.
    pub r: Option<f64>,
    /// Defaults to `c₀`; must not be smaller.
    pub c: Option<f64>,
    /// Order used for the growth bound on `v`.
    pub p: f64,
    /// Samples per axis for the coefficient norms.
    pub samples: usize,
    /// Points per axis for the pointwise barrier check.
    pub barrier_grid: usize,
}

impl Default for EllipticParams {
    fn default() -> Self {
        EllipticParams {
            coefficients: CoeffSources::default(),
            g: "1".into(),
            dim: 1,
            lambdas: vec![1.0],
            n: 63,
            r: None,
            c: None,
            p: 1.0,
            samples: 41,
            barrier_grid: 201,
        }
    }
}

impl EllipticParams {
    pub fn setup(&self) -> Result<EllipticSetup, ConfigErrors> {
        let mut errs = Errors::default();
        let lmin = check_lambdas(&mut errs, &self.lambdas);
        let s = elliptic_setup(&mut errs, &self.coefficients, &self.g, self.dim, lmin, self.r, self.c, self.samples, &[]);
        errs.finish()?;
        s.ok_or_else(|| ConfigErrors(vec![]))
    }

    fn validate(&self, errs: &mut Errors) {
        let lmin = check_lambdas(errs, &self.lambdas);
        check_odd(errs, "n", self.n, if self.dim == 2 { 255 } else { 1 << 16 });
        errs.check(self.p > 0.0, "p", || format!("must be positive, got {}", self.p));
        errs.check(self.barrier_grid >= 2, "barrier_grid", || "must be at least 2".into());
        elliptic_setup(errs, &self.coefficients, &self.g, self.dim, lmin, self.r, self.c, self.samples, &[]);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParabolicParams {
    pub coefficients: CoeffSources,
    pub g: String,
    pub dim: usize,
    pub lambdas: Vec<f64>,
    /// `T` in `t ∈ [-T, T]`.
    pub horizon: f64,
    pub n_x: usize,
    /// Time levels, odd, at least `n_x`.
    pub n_t: usize,
    pub save_every: usize,
    pub r: Option<f64>,
    pub c: Option<f64>,
    pub samples: usize,
}

impl Default for ParabolicParams {
    fn default() -> Self {
        ParabolicParams {
            coefficients: CoeffSources::default(),
            g: "1".into(),
            dim: 1,
            lambdas: vec![1.0],
            horizon: 1.0,
            n_x: 101,
            n_t: 401,
            save_every: 50,
            r: None,
            c: None,
            samples: 41,
        }
    }
}

impl ParabolicParams {
    fn times(&self) -> Vec<f64> {
        (0..9).map(|i| self.horizon * (i as f64 / 4.0 - 1.0)).collect()
    }

    pub fn setup(&self) -> Result<EllipticSetup, ConfigErrors> {
        let mut errs = Errors::default();
        let lmin = check_lambdas(&mut errs, &self.lambdas);
        let ts = self.times();
        let s = elliptic_setup(&mut errs, &self.coefficients, &self.g, self.dim, lmin, self.r, self.c, self.samples, &ts);
        errs.finish()?;
        s.ok_or_else(|| ConfigErrors(vec![]))
    }

    fn validate(&self, errs: &mut Errors) {
        let lmin = check_lambdas(errs, &self.lambdas);
        errs.check(self.horizon > 0.0 && self.horizon.is_finite(), "horizon", || {
            format!("must be positive, got {}", self.horizon)
        });
        check_odd(errs, "n_x", self.n_x, if self.dim == 2 { 127 } else { 1 << 14 });
        errs.check(self.n_t >= 3 && self.n_t % 2 == 1, "n_t", || format!("must be odd and at least 3, got {}", self.n_t));
        errs.check(self.n_t >= self.n_x, "n_t", || format!("must be at least n_x = {}", self.n_x));
        errs.check(self.save_every >= 1, "save_every", || "must be at least 1".into());
        let ts = self.times();
        elliptic_setup(errs, &self.coefficients, &self.g, self.dim, lmin, self.r, self.c, self.samples, &ts);
    }
}

/// The self-adjoint surrogate `B`: the Dirichlet Laplacian, or `H_ζ` for a
/// weight when `coefficient` is given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OperatorParams {
    pub n: usize,
    pub r_y: f64,
    pub coefficient: Option<String>,
    pub zeta: f64,
}

impl Default for OperatorParams {
    fn default() -> Self {
        OperatorParams { n: 257, r_y: 1.0, coefficient: None, zeta: 0.0 }
    }
}

impl OperatorParams {
    fn validate(&self, errs: &mut Errors, prefix: &str) {
        check_odd(errs, &format!("{prefix}.n"), self.n, 4095);
        errs.check(self.r_y > 0.0 && self.r_y.is_finite(), &format!("{prefix}.r_y"), || "must be positive".into());
        errs.check(self.zeta >= 0.0 && self.zeta.is_finite(), &format!("{prefix}.zeta"), || {
            "must be nonnegative".into()
        });
        if let Some(c) = &self.coefficient {
            check_coefficient(errs, &format!("{prefix}.coefficient"), c);
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpParams {
    pub operator: OperatorParams,
    /// Random vectors per check.
    pub samples: usize,
    /// `λ` samples for the partition of unity.
    pub partition_samples: usize,
}

impl Default for LpParams {
    fn default() -> Self {
        LpParams { operator: OperatorParams::default(), samples: 100, partition_samples: 10_000 }
    }
}

impl LpParams {
    fn validate(&self, errs: &mut Errors) {
        self.operator.validate(errs, "operator");
        errs.check(self.samples >= 1, "samples", || "must be at least 1".into());
        errs.check(self.partition_samples >= 2, "partition_samples", || "must be at least 2".into());
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisParams {
    pub operator: OperatorParams,
    pub eps: f64,
    pub p: f64,
    /// Bands `j = 0..=j_max` used as sources.
    pub j_max: u32,
    pub coefficients: CoeffSources,
    pub g: String,
    pub dim: usize,
    /// Interior profile points per axis.
    pub n_x: usize,
    pub samples: usize,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        SynthesisParams {
            operator: OperatorParams { n: 65, ..OperatorParams::default() },
            eps: 0.5,
            p: 1.0,
            j_max: 6,
            coefficients: CoeffSources::default(),
            g: "1".into(),
            dim: 1,
            n_x: 21,
            samples: 41,
        }
    }
}

impl SynthesisParams {
    /// Setup with `λ_min` from the surrogate.
    pub fn setup(&self, lambda_min: f64) -> Result<EllipticSetup, ConfigErrors> {
        let mut errs = Errors::default();
        let s = elliptic_setup(&mut errs, &self.coefficients, &self.g, self.dim, lambda_min, None, None, self.samples, &[]);
        errs.finish()?;
        s.ok_or_else(|| ConfigErrors(vec![]))
    }

    fn validate(&self, errs: &mut Errors) {
        self.operator.validate(errs, "operator");
        errs.check(self.eps > 0.0 && self.eps.is_finite(), "eps", || format!("must be positive, got {}", self.eps));
        errs.check(self.p > 0.0, "p", || format!("must be positive, got {}", self.p));
        errs.check(self.j_max <= 40, "j_max", || "must be at most 40".into());
        check_odd(errs, "n_x", self.n_x, if self.dim == 2 { 63 } else { 4095 });
        elliptic_setup(errs, &self.coefficients, &self.g, self.dim, 1.0, None, None, self.samples, &[]);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterpParams {
    /// Random `(ξ, ε, p, s₂)` draws.
    pub draws: usize,
    /// Random mode sequences for the high-band inequality.
    pub sequences: usize,
    /// Upper end of the `ξ` range.
    pub xi_max: f64,
}

impl Default for InterpParams {
    fn default() -> Self {
        InterpParams { draws: 1000, sequences: 1000, xi_max: 1e12 }
    }
}

impl InterpParams {
    fn validate(&self, errs: &mut Errors) {
        errs.check(self.draws >= 1, "draws", || "must be at least 1".into());
        errs.check(self.sequences >= 1, "sequences", || "must be at least 1".into());
        errs.check(self.xi_max > 0.0 && self.xi_max <= 1e300, "xi_max", || "must lie in (0, 1e300]".into());
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table1Params {
    pub alpha: f64,
    pub probe: ProbeConfig,
}

impl Default for Table1Params {
    fn default() -> Self {
        Table1Params { alpha: 1.5, probe: ProbeConfig::default() }
    }
}

impl Table1Params {
    fn validate(&self, errs: &mut Errors) {
        errs.check(self.alpha > 0.0 && self.alpha.is_finite(), "alpha", || {
            format!("must be positive, got {}", self.alpha)
        });
        check_probe(errs, "probe", &self.probe);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_kinds_and_common_keys() {
        let c = ExperimentConfig::from_json(r#"{"kind": "table1", "alpha": 1.5, "seed": 7, "schema_version": 1}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.experiment.kind(), "table1");
        let c = ExperimentConfig::from_json(r#"{"kind": "lp-suite"}"#).unwrap();
        assert_eq!(c.experiment.kind(), "lp-suite");
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = ExperimentConfig::from_json(r#"{"kind": "table1", "alpha": 1.5, "bogus": 1}"#).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = ExperimentConfig::from_json(r#"{"kind": "table1", "probe": {"k_low": 3}}"#).unwrap_err();
        assert!(e.to_string().contains("k_low"), "{e}");
        assert!(ExperimentConfig::from_json(r#"{"kind": "nope"}"#).is_err());
    }

    #[test]
    fn radius_above_r0_names_r0() {
        let e = ExperimentConfig::from_json(r#"{"kind": "profile-elliptic", "r": 0.9, "lambdas": [1]}"#).unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].field, "r");
        assert!(e.0[0].message.contains("r0 = 0.3465735902799726"), "{e}");
    }

    #[test]
    fn errors_listed_per_field() {
        let e = ExperimentConfig::from_json(
            r#"{"kind": "profile-elliptic", "n": 64, "lambdas": [0.5], "dim": 3, "g": "x1 +"}"#,
        )
        .unwrap_err();
        let fields: Vec<&str> = e.0.iter().map(|f| f.field.as_str()).collect();
        for f in ["lambdas[0]", "n", "dim", "g"] {
            assert!(fields.contains(&f), "{fields:?}");
        }
    }

    #[test]
    fn weight_needs_exactly_one_source() {
        assert!(ExperimentConfig::from_json(r#"{"kind": "superlog-probe"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"kind": "superlog-probe", "alpha": 1, "coefficient": "1"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"kind": "superlog-probe", "alpha": 1}"#).is_ok());
    }
}
