//! Littlewood–Paley cutoffs `Φ`, bands `ψ_j`, projections `P_j = ψ_j(B)`.

use alloc::vec::Vec;
use core::f64::consts::E;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::SpectralSurrogate;
use crate::Result;

fn sigma(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `s ≤ 0`, 1 for `s ≥ 1`, `C^∞` in between.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = sigma(s);
        a / (a + sigma(1.0 - s))
    }
}

/// Even cutoff: 1 on `[-1, 1]`, 0 outside `[-e, e]`.
pub fn phi_cutoff(lambda: f64) -> f64 {
    smooth_step((E - lambda.abs()) / (E - 1.0))
}

/// `ψ_j(λ) = Φ(λe^{-j}) − Φ(λe^{-(j-1)})`, supported on
/// `e^{j-1} ≤ |λ| ≤ e^{j+1}`.
pub fn psi(j: u32, lambda: f64) -> f64 {
    let j = j as f64;
    phi_cutoff(lambda * (-j).exp()) - phi_cutoff(lambda * (1.0 - j).exp())
}

/// Number of bands needed so that `Σ_{j<J} ψ_j = 1` on the whole spectrum.
pub fn band_count(s: &SpectralSurrogate) -> u32 {
    let top = s.eigenvalues.last().copied().unwrap_or(1.0).max(1.0);
    // need e^{J-1} ≥ top, then one more band for safety
    (top.ln().ceil() as u32) + 2
}

/// `P_j u`.
pub fn lp_project(s: &SpectralSurrogate, j: u32, u: &[f64]) -> Result<Vec<f64>> {
    s.apply_function(|l| psi(j, l), u)
}

/// `‖P_j u‖²` for `j = 0..J`, computed from one coefficient pass.
pub fn band_norms_sq(s: &SpectralSurrogate, u: &[f64]) -> Result<Vec<f64>> {
    let c = s.coefficients(u)?;
    let bands = band_count(s);
    let mut out = alloc::vec![0.0; bands as usize];
    for (ck, &l) in c.iter().zip(&s.eigenvalues) {
        // only the two bands around log λ are nonzero
        let j0 = l.ln().floor().max(0.0) as u32;
        for j in j0.saturating_sub(1)..=(j0 + 1).min(bands - 1) {
            let p = psi(j, l);
            out[j as usize] += p * p * ck * ck;
        }
    }
    Ok(out)
}

/// The three members of the Littlewood–Paley sandwich
/// `Σ f(e^{j-1})²‖P_j u‖² ≤ ‖f(B)u‖² ≤ 2 Σ f(e^{j+1})²‖P_j u‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub slack_lower: f64,
    pub slack_upper: f64,
    pub holds: bool,
}

/// Evaluates the sandwich for nondecreasing `f ≥ 0`. A violation is
/// reported through `holds = false`, not as an error.
pub fn lp_sandwich_check<F: Fn(f64) -> f64>(s: &SpectralSurrogate, f: F, u: &[f64]) -> Result<SandwichReport> {
    let bands = band_norms_sq(s, u)?;
    let middle = s.function_norm_sq(&f, u)?;
    let mut lower = 0.0;
    let mut upper = 0.0;
    for (j, b) in bands.iter().enumerate() {
        let j = j as f64;
        let fl = f((j - 1.0).exp());
        let fu = f((j + 1.0).exp());
        lower += fl * fl * b;
        upper += 2.0 * fu * fu * b;
    }
    let rel = 1e-12;
    let holds = lower <= middle * (1.0 + rel) + f64::MIN_POSITIVE && middle <= upper * (1.0 + rel) + f64::MIN_POSITIVE;
    Ok(SandwichReport {
        lower,
        middle,
        upper,
        slack_lower: middle - lower,
        slack_upper: upper - middle,
        holds,
    })
}
