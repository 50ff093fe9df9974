//! Numerical core of `hypolab`.
//!
//! Everything here is `no_std` + `alloc`: coefficient expressions and
//! quadrature, the stopping-time (`M_p`) and pointwise-rate criteria,
//! tridiagonal eigen-solvers with a Littlewood–Paley spectral calculus,
//! superlogarithmic growth probes, elliptic and parabolic spectral profiles,
//! low-frequency synthesis, and the interpolation-lemma inequalities.
//!
//! IO, configuration, caching and the CLI live in the `hypolab` crate.

#![no_std]
#![deny(unsafe_code)]
// `num_traits::Float` imports go unused whenever another crate in the build
// turns on num-traits' `std` feature.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coeff;
pub mod elliptic;
mod error;
pub mod float_serde;
pub mod interp;
pub mod linalg;
pub mod mp;
pub mod parabolic;
pub mod quad;
pub mod spectral;
pub mod stats;
pub mod superlog;
pub mod synthesis;

pub use error::{Error, Result};

/// `⟨ξ⟩ = √(e² + ξ²)`, so that `log⟨ξ⟩ ≥ 1` everywhere.
pub fn japanese_bracket(xi: f64) -> f64 {
    use num_traits::Float;
    core::f64::consts::E.hypot(xi)
}

/// `log⟨ξ⟩`, evaluated without forming `ξ²` for large `ξ`.
pub fn log_japanese_bracket(xi: f64) -> f64 {
    use num_traits::Float;
    japanese_bracket(xi).ln()
}

/// Three-way outcome of the trend-based criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}
