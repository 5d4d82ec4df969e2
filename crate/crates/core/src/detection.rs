//! Homodyne cross-correlation detection of squeezing.
//!
//! The signal is superposed with a coherent local oscillator (LO) on a 50:50
//! beam splitter and the intensity cross-correlation of both outputs is
//! recorded with detector efficiency `η`. The LO amplitude is taken real; its
//! phase is applied to the signal instead, so that the relevant signal
//! variance is `variance_at_phase(state, φ_LO)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{variance_at_phase, QubitState};

/// Signal moments entering the correlation functions (units `|χ|²`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalMoments {
    /// `⟨Î⟩ = ⟨E⁻E⁺⟩`
    pub intensity: f64,
    /// `⟨E⁺⟩`
    pub amplitude: Complex64,
    /// `⟨E⁺²⟩`
    pub squared_amplitude: Complex64,
    /// `⟨:Î²:⟩`
    pub normally_ordered_intensity_sq: f64,
}

impl SignalMoments {
    /// Fluorescence of a single-photon emitter seen at field phase `phase`:
    /// `E⁺ = A12 e^{-iφ}`, so `⟨E⁺²⟩ = 0` and `⟨:Î²:⟩ = 0`.
    pub fn single_photon_emitter(state: &QubitState, phase: f64) -> Self {
        Self {
            intensity: state.excitation,
            amplitude: state.coherence * Complex64::from_polar(1.0, -phase),
            squared_amplitude: Complex64::new(0.0, 0.0),
            normally_ordered_intensity_sq: 0.0,
        }
    }

    /// Coherent state of amplitude `alpha`.
    pub fn coherent(alpha: Complex64) -> Self {
        let i = alpha.norm_sqr();
        Self { intensity: i, amplitude: alpha, squared_amplitude: alpha * alpha, normally_ordered_intensity_sq: i * i }
    }

    /// `⟨:(ΔE)²:⟩` of the field `E⁺ + E⁻` built from these moments.
    pub fn field_variance(&self) -> f64 {
        2.0 * (self.intensity - self.amplitude.norm_sqr())
            + 2.0 * (self.squared_amplitude - self.amplitude * self.amplitude).re
    }

    /// `⟨:(ΔÎ)²:⟩ = ⟨:Î²:⟩ − ⟨Î⟩²`
    pub fn intensity_variance(&self) -> f64 {
        self.normally_ordered_intensity_sq - self.intensity * self.intensity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalOscillator {
    /// `I_LO = E_LO²`
    pub intensity: f64,
    pub phase: f64,
    /// Classical amplitude variance of the LO.
    pub classical_variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub delta_g: f64,
    pub classical_floor: f64,
    pub detectable: bool,
    pub efficiency: f64,
}

impl DetectionResult {
    pub fn margin(&self) -> f64 {
        self.delta_g - self.classical_floor
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "eta", reason: format!("{eta} not in (0, 1]") })
    }
}

/// Equal-time correlation `G(t,t) = η²/4 [⟨:Î²:⟩ + I_LO² − 2 I_LO Re⟨E⁺²⟩]`.
pub fn g22_equal_time(sig: &SignalMoments, lo: &LocalOscillator, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(eta * eta / 4.0
        * (sig.normally_ordered_intensity_sq + lo.intensity * lo.intensity
            - 2.0 * lo.intensity * sig.squared_amplitude.re))
}

/// Long-delay limit `⟨Î₁⟩⟨Î₂⟩ = η²/4 [⟨Î⟩² + I_LO² − 2 I_LO (Re⟨E⁺⟩² + |⟨E⁺⟩|² − ⟨Î⟩)]`.
pub fn g22_uncorrelated(sig: &SignalMoments, lo: &LocalOscillator, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let a = sig.amplitude;
    Ok(eta * eta / 4.0
        * (sig.intensity * sig.intensity + lo.intensity * lo.intensity
            - 2.0 * lo.intensity * ((a * a).re + a.norm_sqr() - sig.intensity)))
}

/// `ΔG = η²/4 (⟨:(ΔÎ)²:⟩ − I_LO ⟨:(ΔE)²:⟩)` against the classical LO noise
/// `ΔG_cl = η² I_LO ⟨δE_LO²⟩`; squeezing is detected when `ΔG > ΔG_cl`.
pub fn delta_g22(sig: &SignalMoments, lo: &LocalOscillator, eta: f64, variance_sig: f64) -> Result<DetectionResult> {
    check_eta(eta)?;
    let e2 = eta * eta;
    let delta_g = e2 / 4.0 * (sig.intensity_variance() - lo.intensity * variance_sig);
    let classical_floor = e2 * lo.intensity * lo.classical_variance;
    Ok(DetectionResult { delta_g, classical_floor, detectable: delta_g > classical_floor, efficiency: eta })
}

/// What [`optimal_lo_scan`] maximises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LoObjective {
    /// `ΔG − ΔG_cl`.
    #[default]
    Margin,
    /// `(ΔG − ΔG_cl) / G(t,t)`: the margin relative to the recorded
    /// coincidence signal. This one has an interior optimum at an LO
    /// intensity of the order of the signal intensity.
    Contrast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoScanBest {
    pub result: DetectionResult,
    pub lo: LocalOscillator,
    pub objective: f64,
}

/// Evaluates the criterion for every LO intensity and phase in the grid and
/// returns the best setting under `objective`.
pub fn optimal_lo_scan(
    state: &QubitState,
    intensities: &[f64],
    phases: &[f64],
    eta: f64,
    classical_variance: f64,
    objective: LoObjective,
) -> Result<LoScanBest> {
    if intensities.is_empty() {
        return Err(Error::EmptyGrid("LO intensities"));
    }
    if phases.is_empty() {
        return Err(Error::EmptyGrid("LO phases"));
    }
    check_eta(eta)?;
    let mut best: Option<LoScanBest> = None;
    for &phase in phases {
        let sig = SignalMoments::single_photon_emitter(state, phase);
        let var = variance_at_phase(state, phase);
        for &intensity in intensities {
            let lo = LocalOscillator { intensity, phase, classical_variance };
            let result = delta_g22(&sig, &lo, eta, var)?;
            let score = match objective {
                LoObjective::Margin => result.margin(),
                LoObjective::Contrast => {
                    let g = g22_equal_time(&sig, &lo, eta)?;
                    if g > 0.0 {
                        result.margin() / g
                    } else {
                        f64::NEG_INFINITY
                    }
                }
            };
            if best.map_or(true, |b| score > b.objective) {
                best = Some(LoScanBest { result, lo, objective: score });
            }
        }
    }
    Ok(best.expect("non-empty grid"))
}
