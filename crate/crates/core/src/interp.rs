//! Pointwise-in-`ξ` inequalities of the interpolation lemma: the frequency
//! split `R(ξ)`, the low-band Cauchy–Schwarz chain and the geometric tail.
//!
//! Index convention at the split: the low band is `0 ≤ j ≤ ⌊R⌋`, the high
//! band is `j ≥ ⌈R⌉`.

use alloc::vec::Vec;
use core::f64::consts::E;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{log_japanese_bracket, Error, Result};

/// Relative slack used when comparing two sides that may coincide.
pub const REL_TOL: f64 = 1e-12;

/// `C(s₂, p) = 3·(2/s₂)^{2p}`.
pub fn tail_constant(p: f64, s2: f64) -> f64 {
    3.0 * (2.0 / s2).powf(2.0 * p)
}

/// `1/(1 − 1/e)`.
pub fn geometric_factor() -> f64 {
    1.0 / (1.0 - 1.0 / E)
}

fn leq(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * b.abs().max(a.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPoint {
    pub xi: f64,
    pub eps: f64,
    pub p: f64,
    pub s2: f64,
    /// `log⟨ξ⟩`.
    pub log_bracket: f64,
    /// `R`, clamped at 0.
    pub r: f64,
    /// `2p(log log⟨ξ⟩ + log s₂ − log 2ε)`, possibly negative.
    pub r_raw: f64,
    /// Relative defect of `e^R = (s₂ log⟨ξ⟩/2ε)^{2p}`.
    pub defect_r: f64,
    /// Relative defect of `⟨ξ⟩^{s₂} = exp(2ε e^{R/(2p)})`, in log form.
    pub defect_xi: f64,
}

impl SplitPoint {
    /// Largest low-band index, or `None` when the low band is empty.
    pub fn low_top(&self) -> Option<u32> {
        if self.r_raw < 0.0 {
            None
        } else {
            Some(self.r_raw.floor() as u32)
        }
    }

    /// Smallest high-band index `⌈R⌉`.
    pub fn high_start(&self) -> u32 {
        self.r.ceil() as u32
    }

    /// `log^{2p}⟨ξ⟩·⟨ξ⟩^{-s₂}`, the cap on every low-band term, as a log.
    pub fn ln_cap(&self) -> f64 {
        2.0 * self.p * self.log_bracket.ln() - self.s2 * self.log_bracket
    }

    /// `ln t_j`, `t_j = log^{2p}⟨ξ⟩·⟨ξ⟩^{-2s₂}·e^{2εe^{j/(2p)}}`.
    pub fn ln_term(&self, j: u32) -> f64 {
        2.0 * self.p * self.log_bracket.ln() - 2.0 * self.s2 * self.log_bracket
            + 2.0 * self.eps * (j as f64 / (2.0 * self.p)).exp()
    }
}

/// `R(ξ)` and both forms of its defining identity.
pub fn split_point(xi: f64, eps: f64, p: f64, s2: f64) -> Result<SplitPoint> {
    if !(eps > 0.0 && p > 0.0 && s2 > 0.0) || !xi.is_finite() {
        return Err(crate::error::invalid("ε, p, s₂ must be positive and ξ finite"));
    }
    let l = log_japanese_bracket(xi);
    let r_raw = 2.0 * p * (l.ln() + s2.ln() - (2.0 * eps).ln());
    let r = r_raw.max(0.0);
    let (defect_r, defect_xi) = if r_raw >= 0.0 {
        let lhs = r.exp();
        let rhs = (s2 * l / (2.0 * eps)).powf(2.0 * p);
        let lhs2 = s2 * l;
        let rhs2 = 2.0 * eps * (r / (2.0 * p)).exp();
        ((lhs - rhs).abs() / rhs, (lhs2 - rhs2).abs() / lhs2)
    } else {
        (0.0, 0.0)
    };
    Ok(SplitPoint {
        xi,
        eps,
        p,
        s2,
        log_bracket: l,
        r,
        r_raw,
        defect_r,
        defect_xi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowBandCheck {
    pub j: u32,
    pub ln_term: f64,
    pub ln_cap: f64,
    /// `t_j ≤ cap`.
    pub term_ok: bool,
    /// `Σ_{0≤i≤⌊R⌋} t_i ≤ (⌊R⌋+1)·cap`.
    pub sum_ok: bool,
}

/// Checks the low-band term at `j` and the whole low-band sum.
pub fn low_band_term_bound(sp: &SplitPoint, j: u32) -> Result<LowBandCheck> {
    let top = match sp.low_top() {
        Some(t) if j <= t => t,
        _ => {
            return Err(crate::error::invalid(alloc::format!("index j = {j} exceeds R = {}", sp.r_raw)));
        }
    };
    let ln_cap = sp.ln_cap();
    let lt = sp.ln_term(j);
    // the sum is compared relative to the cap to stay finite for large ξ
    let sum: f64 = (0..=top).map(|i| (sp.ln_term(i) - ln_cap).exp()).sum();
    Ok(LowBandCheck {
        j,
        ln_term: lt,
        ln_cap,
        term_ok: lt <= ln_cap + REL_TOL * ln_cap.abs().max(1.0),
        sum_ok: leq(sum, (top + 1) as f64),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    /// `log^{2p}⟨ξ⟩·e^{-⌈R⌉}/(1 − 1/e)`.
    pub closed: f64,
    /// Direct sum of 200 terms from `⌈R⌉`.
    pub direct: f64,
    /// `3(2ε/s₂)^{2p}`.
    pub bound: f64,
    pub rel_diff: f64,
    pub holds: bool,
}

/// Number of terms in the direct tail sum.
pub const TAIL_TERMS: u32 = 200;

/// `Σ_{j≥⌈R⌉} log^{2p}⟨ξ⟩/e^j` in closed form and by direct summation.
pub fn geometric_tail(sp: &SplitPoint) -> TailReport {
    let l2p = sp.log_bracket.powf(2.0 * sp.p);
    let j0 = sp.high_start();
    let closed = l2p * (-(j0 as f64)).exp() * geometric_factor();
    // smallest terms first
    let direct: f64 = (0..TAIL_TERMS)
        .rev()
        .map(|k| l2p * (-((j0 + k) as f64)).exp())
        .sum();
    let bound = 3.0 * (2.0 * sp.eps / sp.s2).powf(2.0 * sp.p);
    TailReport {
        closed,
        direct,
        bound,
        rel_diff: (closed - direct).abs() / closed,
        holds: leq(closed, bound),
    }
}

/// A sequence `α_j` represented by nonnegative Fourier amplitudes
/// `|α̂_j(ξ_i)|` on a `ξ` grid with quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSequence {
    pub xi: Vec<f64>,
    pub weights: Vec<f64>,
    /// `amplitudes[j][i] = |α̂_j(ξ_i)|`.
    pub amplitudes: Vec<Vec<f64>>,
}

impl ModeSequence {
    fn validate(&self) -> Result<()> {
        let m = self.xi.len();
        if self.weights.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: self.weights.len() });
        }
        for row in &self.amplitudes {
            if row.len() != m {
                return Err(Error::LengthMismatch { expected: m, got: row.len() });
            }
            if row.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(crate::error::invalid("amplitudes must be finite and nonnegative"));
            }
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(crate::error::invalid("weights must be nonnegative"));
        }
        Ok(())
    }

    /// `‖α_j‖²_{L²}`.
    pub fn l2_sq(&self, j: usize) -> f64 {
        self.amplitudes[j].iter().zip(&self.weights).map(|(a, w)| w * a * a).sum()
    }

    /// `‖α_j‖²_{H^{s₂}} = ∫⟨ξ⟩^{2s₂}|α̂_j|²`.
    pub fn hs_sq(&self, j: usize, s2: f64) -> f64 {
        self.amplitudes[j]
            .iter()
            .zip(&self.weights)
            .zip(&self.xi)
            .map(|((a, w), &x)| w * a * a * crate::japanese_bracket(x).powf(2.0 * s2))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub eps: f64,
    pub p: f64,
    pub s2: f64,
    /// `‖Σ_{j≥R} log^p⟨ξ⟩ α̂_j‖²`.
    pub high_lhs: f64,
    /// The same after pointwise Cauchy–Schwarz, before extending the sum.
    pub high_pointwise: f64,
    /// `C(s₂,p) ε^{2p} Σ_j e^j ‖α_j‖²_{L²}`.
    pub high_rhs: f64,
    pub high_holds: bool,
    /// `‖Σ_{j≤R} log^p⟨ξ⟩ α̂_j‖²`.
    pub low_lhs: f64,
    /// After pointwise Cauchy–Schwarz.
    pub low_cauchy_schwarz: f64,
    /// Grid supremum of `(⌊R⌋+1)·log^{2p}⟨ξ⟩⟨ξ⟩^{-s₂}`.
    pub low_constant: f64,
    /// `low_constant · Σ_j e^{-2εe^{j/(2p)}} ‖α_j‖²_{H^{s₂}}`.
    pub low_rhs: f64,
    pub low_holds: bool,
}

/// Both halves of the lemma on a discrete sequence. The high half uses the
/// explicit constant; the low half checks each link of the proof's chain.
pub fn lemma_bounds_on_sequence(seq: &ModeSequence, eps: f64, p: f64, s2: f64) -> Result<SequenceReport> {
    seq.validate()?;
    let sps = seq
        .xi
        .iter()
        .map(|&x| split_point(x, eps, p, s2))
        .collect::<Result<Vec<_>>>()?;
    let nj = seq.amplitudes.len();
    let decay = |j: usize| (-2.0 * eps * (j as f64 / (2.0 * p)).exp()).exp();

    let mut high_lhs = 0.0;
    let mut high_pointwise = 0.0;
    let mut low_lhs = 0.0;
    let mut low_cs = 0.0;
    let mut low_constant = 0.0f64;
    let mut low_weighted = 0.0;
    for (i, sp) in sps.iter().enumerate() {
        let w = seq.weights[i];
        let lp = sp.log_bracket.powf(p);
        let bracket_2s = crate::japanese_bracket(sp.xi).powf(2.0 * s2);
        let j0 = sp.high_start() as usize;

        let mut s = 0.0;
        let mut ej = 0.0;
        for j in j0..nj {
            let a = seq.amplitudes[j][i];
            s += lp * a;
            ej += (j as f64).exp() * a * a;
        }
        high_lhs += w * s * s;
        let tail = sp.log_bracket.powf(2.0 * p) * (-(j0 as f64)).exp() * geometric_factor();
        high_pointwise += w * tail * ej;

        if let Some(top) = sp.low_top() {
            let mut s = 0.0;
            let mut weighted = 0.0;
            for j in 0..nj.min(top as usize + 1) {
                let a = seq.amplitudes[j][i];
                s += lp * a;
                weighted += bracket_2s * decay(j) * a * a;
            }
            let terms: f64 = (0..=top).map(|j| sp.ln_term(j).exp()).sum();
            low_lhs += w * s * s;
            low_cs += w * terms * weighted;
            low_weighted += w * weighted;
            low_constant = low_constant.max((top + 1) as f64 * sp.ln_cap().exp());
        }
    }
    let l2_weighted: f64 = (0..nj).map(|j| (j as f64).exp() * seq.l2_sq(j)).sum();
    let high_rhs = tail_constant(p, s2) * eps.powf(2.0 * p) * l2_weighted;
    let hs_weighted: f64 = (0..nj).map(|j| decay(j) * seq.hs_sq(j, s2)).sum();
    let low_rhs = low_constant * hs_weighted;
    let high_holds = leq(high_lhs, high_pointwise) && leq(high_pointwise, high_rhs);
    let low_holds = leq(low_lhs, low_cs)
        && leq(low_cs, low_constant * low_weighted)
        && leq(low_constant * low_weighted, low_rhs);
    Ok(SequenceReport {
        eps,
        p,
        s2,
        high_lhs,
        high_pointwise,
        high_rhs,
        high_holds,
        low_lhs,
        low_cauchy_schwarz: low_cs,
        low_constant,
        low_rhs,
        low_holds,
    })
}
