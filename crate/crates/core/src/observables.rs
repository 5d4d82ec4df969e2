//! Squeezing observables of a two-level emitter.
//!
//! The source field of the emitter is `E = χ (A12 e^{-iφ} + A21 e^{iφ})` with
//! `χ = 1`. Every quantity here depends only on the excitation `⟨A22⟩` and the
//! coherence `⟨A12⟩`, collected in [`QubitState`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced state of the emitter: `⟨A22⟩` and `⟨A12⟩`.
///
/// The density matrix in the `{|1⟩, |2⟩}` basis is
/// `[[1 - excitation, conj(coherence)], [coherence, excitation]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub excitation: f64,
    pub coherence: Complex64,
}

impl QubitState {
    /// Checked constructor; rejects states outside the Bloch ball.
    pub fn new(excitation: f64, coherence: Complex64) -> Result<Self> {
        let state = Self { excitation, coherence };
        if !state.is_physical(1e-12) {
            return Err(Error::InvalidState(format!(
                "excitation {excitation}, |coherence|^2 {}",
                coherence.norm_sqr()
            )));
        }
        Ok(state)
    }

    pub const fn ground() -> Self {
        Self { excitation: 0.0, coherence: Complex64::new(0.0, 0.0) }
    }

    pub fn coherence_sq(&self) -> f64 {
        self.coherence.norm_sqr()
    }

    /// `⟨A11⟩ = 1 - ⟨A22⟩`.
    pub fn ground_population(&self) -> f64 {
        1.0 - self.excitation
    }

    /// Positivity check `0 ≤ ⟨A22⟩ ≤ 1`, `|⟨A12⟩|² ≤ ⟨A11⟩⟨A22⟩` up to `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.excitation.is_finite()
            && self.coherence.re.is_finite()
            && self.coherence.im.is_finite()
            && self.excitation >= -tol
            && self.excitation <= 1.0 + tol
            && self.coherence_sq() <= self.excitation * (1.0 - self.excitation) + tol
    }
}

/// Phase-optimised squeezing of a [`QubitState`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingReport {
    pub var_min: f64,
    pub var_max: f64,
    /// Phase of minimal variance in `[0, π)`; `None` when the coherence vanishes.
    pub phase_min: Option<f64>,
    pub phase_max: Option<f64>,
    pub purity: f64,
}

/// Normally ordered field variance `⟨:(ΔE)²:⟩` at field phase `phase`.
pub fn variance_at_phase(state: &QubitState, phase: f64) -> f64 {
    let c = state.coherence;
    let rotated = c * c * Complex64::from_polar(1.0, -2.0 * phase);
    2.0 * (state.excitation - c.norm_sqr() - rotated.re)
}

pub fn optimize_phase(state: &QubitState) -> SqueezingReport {
    let c2 = state.coherence_sq();
    let var_min = 2.0 * (state.excitation - 2.0 * c2);
    let var_max = 2.0 * state.excitation;
    let (phase_min, phase_max) = if c2 > 0.0 {
        // e^{-2iφ} = conj(c²)/|c|²  ⇔  φ = arg(c) (mod π)
        let phi = reduce_phase(state.coherence.arg());
        (Some(phi), Some(reduce_phase(phi + 0.5 * PI)))
    } else {
        (None, None)
    };
    SqueezingReport { var_min, var_max, phase_min, phase_max, purity: purity(state) }
}

/// `Tr{σ²} = 1 - 2(⟨A22⟩ - ⟨A22⟩² - |⟨A12⟩|²)`.
pub fn purity(state: &QubitState) -> f64 {
    let p = state.excitation;
    1.0 - 2.0 * (p - p * p - state.coherence_sq())
}

/// Minimal variance at maximal coherence for a given excitation,
/// `2 p (2 p - 1)`. Its minimum over `p` is `-1/4` at `p = 1/4`.
pub fn variance_envelope(excitation: f64) -> f64 {
    2.0 * excitation * (2.0 * excitation - 1.0)
}

/// Absolute lower bound of the normally ordered variance of a two-level emitter.
pub const ABSOLUTE_MIN_VARIANCE: f64 = -0.25;

fn reduce_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}
