//! Analytical approximation of cavity-assisted purification.
//!
//! Dropping `⟨A22 a⟩` from the exact steady-state relations leaves the
//! emitter with the free-space structure, modified by a complex rate `V` and
//! a purification rate `R = κ⟨a†a⟩/Γ` that diverts excitation into the cavity.
//! `⟨a†a⟩` is not predicted here; it is taken from the numerical solver.
//!
//! Environmental channels change `V`, `z̃` and `R` per [`Scenario`]:
//!
//! | scenario      | V                                         | effective rate          |
//! |---------------|-------------------------------------------|-------------------------|
//! | `Base`        | `iδx + Γ/2 + g²/(iδc + κ/2)`              | `κ n/Γ`                 |
//! | `Dephasing`   | `V_base + Γ_D/2`                          | `κ n/Γ`                 |
//! | `SpePump`     | `iδx + (Γ+P_x)/2 + g²/(iδc + κ/2)`        | `(κ n − P_x)/(Γ+P_x)`   |
//! | `CavityPump`  | `iδx + Γ/2 + g²/(iδc + (κ−P_c)/2)`        | `((κ−P_c) n − P_c)/Γ`   |
//!
//! The approximate moments use `Re V` and `z̃` at their free-space (`g = 0`)
//! values, which is what keeps `R = 0` identical to the free-space solution.
//!
//! The cavity-resonance sign convention (`δx` on the same side as `δc`, the
//! cavity sitting on the lower Rabi sideband) is inferred from the reference
//! setup `δc = −34 g`, `δx ≈ −19.3 g`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::SystemParams;
use crate::error::{Error, Result};
use crate::observables::QubitState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Base,
    Dephasing,
    SpePump,
    CavityPump,
}

impl Scenario {
    /// Picks the scenario from whichever incoherent rate is present
    /// (cavity pump, then emitter pump, then dephasing).
    pub fn from_params(params: &SystemParams) -> Self {
        if params.p_c > 0.0 {
            Scenario::CavityPump
        } else if params.p_x > 0.0 {
            Scenario::SpePump
        } else if params.gamma_d > 0.0 {
            Scenario::Dephasing
        } else {
            Scenario::Base
        }
    }

    /// More than one incoherent channel is active; the approximation only
    /// covers one at a time.
    pub fn is_ambiguous(params: &SystemParams) -> bool {
        [params.gamma_d, params.p_x, params.p_c].iter().filter(|&&r| r > 0.0).count() > 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxContext {
    pub scenario: Scenario,
    pub v_factor: Complex64,
    /// `z̃` evaluated with the full `V` (including the cavity term).
    pub z_tilde: f64,
    pub purification_rate: f64,
    /// Signed: negative values impurify the emitter.
    pub effective_rate: f64,
}

pub fn v_factor(params: &SystemParams, scenario: Scenario) -> Complex64 {
    let i = Complex64::i();
    let kappa = match scenario {
        Scenario::CavityPump => params.kappa - params.p_c,
        _ => params.kappa,
    };
    let width = match scenario {
        Scenario::Base | Scenario::CavityPump => params.gamma,
        Scenario::Dephasing => params.gamma + params.gamma_d,
        Scenario::SpePump => params.gamma + params.p_x,
    };
    let cavity = i * params.delta_c + 0.5 * kappa;
    let purcell = if params.g == 0.0 { Complex64::new(0.0, 0.0) } else { params.g * params.g / cavity };
    i * params.delta_x + 0.5 * width + purcell
}

/// Rate normalising `z̃`: Γ, or Γ + P_x for the emitter pump.
fn z_norm(params: &SystemParams, scenario: Scenario) -> f64 {
    match scenario {
        Scenario::SpePump => params.gamma + params.p_x,
        _ => params.gamma,
    }
}

/// `z̃ = 2Ω² Re V / (Γ' |V|²)`.
pub fn z_tilde(params: &SystemParams, scenario: Scenario) -> f64 {
    let v = v_factor(params, scenario);
    2.0 * params.rabi * params.rabi * v.re / (z_norm(params, scenario) * v.norm_sqr())
}

/// `z̃` with the cavity term removed from `V`.
pub fn z_free(params: &SystemParams, scenario: Scenario) -> f64 {
    z_tilde(&SystemParams { g: 0.0, ..*params }, scenario)
}

/// Returns `(raw, effective)` purification rates for cavity occupation `n_cav`.
pub fn purification_rate(params: &SystemParams, n_cav: f64, scenario: Scenario) -> (f64, f64) {
    match scenario {
        Scenario::Base | Scenario::Dephasing => {
            let r = params.kappa * n_cav / params.gamma;
            (r, r)
        }
        Scenario::SpePump => {
            let total = params.gamma + params.p_x;
            let raw = params.kappa * n_cav / total;
            (raw, raw - params.p_x / total)
        }
        Scenario::CavityPump => {
            let raw = (params.kappa - params.p_c) * n_cav / params.gamma;
            (raw, raw - params.p_c / params.gamma)
        }
    }
}

pub fn context(params: &SystemParams, n_cav: f64, scenario: Scenario) -> ApproxContext {
    let (purification_rate, effective_rate) = purification_rate(params, n_cav, scenario);
    ApproxContext {
        scenario,
        v_factor: v_factor(params, scenario),
        z_tilde: z_tilde(params, scenario),
        purification_rate,
        effective_rate,
    }
}

/// Coherence prefactor `Γ/(2 Re V)` at `g = 0`: `1/(1 + Γ_D/Γ)` under
/// dephasing, 1 otherwise.
fn coherence_prefactor(params: &SystemParams, scenario: Scenario) -> f64 {
    match scenario {
        Scenario::Dephasing => 1.0 / (1.0 + params.gamma_d / params.gamma),
        _ => 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxMoments {
    pub state: QubitState,
    /// The predicted excitation is negative: the rate is outside the range
    /// where the approximation means anything.
    pub out_of_domain: bool,
}

pub fn approx_moments(params: &SystemParams, rate_effective: f64, scenario: Scenario) -> ApproxMoments {
    let z = z_free(params, scenario);
    let r = rate_effective;
    let denom = 1.0 + 2.0 * z;
    let excitation = (z - r) / denom;
    let coherence_sq = coherence_prefactor(params, scenario) * z * (1.0 + 2.0 * r).powi(2) / (denom * denom);
    // Phase of -iΩ(1 - 2⟨A22⟩)/V at g = 0.
    let v0 = v_factor(&SystemParams { g: 0.0, ..*params }, scenario);
    let direction = Complex64::new(0.0, -params.rabi) * (1.0 - 2.0 * excitation) / v0;
    let coherence = if direction.norm() > 0.0 {
        direction / direction.norm() * coherence_sq.sqrt()
    } else {
        Complex64::new(coherence_sq.sqrt(), 0.0)
    };
    ApproxMoments { state: QubitState { excitation, coherence }, out_of_domain: excitation < 0.0 }
}

/// Approximate phase-optimised variance,
/// `var_fs − 2R/(1+2z) · (1 + 8 c z (1+R)/(1+2z))` with `c` the coherence
/// prefactor.
pub fn approx_variance(params: &SystemParams, rate_effective: f64, scenario: Scenario) -> f64 {
    let z = z_free(params, scenario);
    let c = coherence_prefactor(params, scenario);
    let r = rate_effective;
    let denom = 1.0 + 2.0 * z;
    let unpurified = 2.0 * z / denom - 4.0 * c * z / (denom * denom);
    unpurified - 2.0 * r / denom * (1.0 + 8.0 * c * z * (1.0 + r) / denom)
}

/// Emitter detuning at which the lower Rabi sideband hits the cavity,
/// `δc² = (2Ω)² + δx²`, with `δx` taking the sign of `δc`.
pub fn cavity_resonance_detuning(params: &SystemParams) -> Result<f64> {
    let disc = params.delta_c * params.delta_c - 4.0 * params.rabi * params.rabi;
    if disc < 0.0 {
        return Err(Error::NoResonance);
    }
    Ok(params.delta_c.signum() * disc.sqrt())
}
