use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("invalid weight: value {value:e} < 0 at {at}")]
    NegativeWeight { at: f64, value: f64 },

    #[error("{at} lies outside the domain [{lo}, {hi}]")]
    OutsideDomain { at: f64, lo: f64, hi: f64 },

    #[error("expression is not finite at {at}")]
    NotFinite { at: f64 },

    #[error("quadrature did not converge on [{lo}, {hi}] after maximum subdivision")]
    QuadratureDiverged { lo: f64, hi: f64 },

    #[error("pointwise rate undefined: a({at}) = 0 and no log form is available; use mp_check")]
    RateUndefined { at: f64 },

    #[error("requested {k} eigenvalues from an operator of size {n}")]
    TooManyEigenvalues { k: usize, n: usize },

    #[error("full decomposition budget exceeded: n = {n} > {max}")]
    BudgetExceeded { n: usize, max: usize },

    #[error("eigen solver did not converge")]
    EigenNoConvergence,

    #[error("spectral function is not finite at lambda = {lambda}")]
    NonFiniteFunction { lambda: f64 },

    #[error("linear system is singular (pivot {row})")]
    Singular { row: usize },

    #[error("coefficient bound violated: {name} = {observed} exceeds declared {declared}")]
    BoundViolated {
        name: &'static str,
        observed: f64,
        declared: f64,
    },

    #[error("no profile available at lambda = {lambda}")]
    MissingProfile { lambda: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Shorthand for precondition failures.
pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
