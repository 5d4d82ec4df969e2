//! Laser-driven emitter without a cavity.
//!
//! Master equation in the laser frame:
//! `dσ/dt = -i[δx A22 + Ω(A12 + A21), σ] + Γ/2 L[A12] + Γ_D/2 L[A22] + P_x/2 L[A21]`.
//!
//! The coherence obeys `V ⟨A12⟩ = -iΩ(1 - 2⟨A22⟩)` with
//! `V = iδx + (Γ + Γ_D + P_x)/2`, and the population balance
//! `0 = -2Ω Im⟨A12⟩ - Γ⟨A22⟩ + P_x(1 - ⟨A22⟩)` closes the system.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_non_negative, check_positive, Error, Result};
use crate::observables::{optimize_phase, QubitState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeSpaceParams {
    /// Spontaneous emission rate Γ.
    pub gamma: f64,
    /// Pure dephasing rate Γ_D.
    #[serde(default)]
    pub gamma_d: f64,
    /// Incoherent pump rate P_x.
    #[serde(default)]
    pub p_x: f64,
    /// Rabi frequency Ω_R.
    pub rabi: f64,
    /// Emitter detuning δx = ωx − ωL.
    pub delta_x: f64,
}

impl FreeSpaceParams {
    pub fn new(gamma: f64, rabi: f64, delta_x: f64) -> Self {
        Self { gamma, gamma_d: 0.0, p_x: 0.0, rabi, delta_x }
    }

    pub fn with_dephasing(mut self, gamma_d: f64) -> Self {
        self.gamma_d = gamma_d;
        self
    }

    pub fn with_pump(mut self, p_x: f64) -> Self {
        self.p_x = p_x;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("gamma", self.gamma)?;
        check_non_negative("gamma_d", self.gamma_d)?;
        check_non_negative("p_x", self.p_x)?;
        check_non_negative("rabi", self.rabi)?;
        check_finite("delta_x", self.delta_x)
    }

    /// Total decay rate of the coherence, `Γ + Γ_D + P_x`.
    fn coherence_decay(&self) -> f64 {
        self.gamma + self.gamma_d + self.p_x
    }

    /// `V = iδx + (Γ + Γ_D + P_x)/2`.
    pub fn v_factor(&self) -> Complex64 {
        Complex64::new(0.5 * self.coherence_decay(), self.delta_x)
    }
}

/// Saturation parameter of the closed-form solutions: `z`, `z_D` or `z_x`
/// depending on which incoherent rate is present.
pub fn saturation_z(params: &FreeSpaceParams) -> Result<f64> {
    params.validate()?;
    if params.gamma_d > 0.0 && params.p_x > 0.0 {
        return Err(Error::NoClosedForm);
    }
    let width = 0.5 * params.coherence_decay();
    let lorentz = params.rabi * params.rabi / (width * width + params.delta_x * params.delta_x);
    Ok((1.0 + params.gamma_d / params.gamma) * lorentz)
}

/// Steady state of the emitter, valid for any combination of Γ_D and P_x.
///
/// With `w = 2Ω² Re V/|V|²` the population is `(w + P_x)/(2w + Γ + P_x)`,
/// which reduces to the textbook `z/(1+2z)` forms when only one incoherent
/// rate is present.
pub fn steady_state(params: &FreeSpaceParams) -> Result<QubitState> {
    params.validate()?;
    let v = params.v_factor();
    let w = 2.0 * params.rabi * params.rabi * v.re / v.norm_sqr();
    let excitation = (w + params.p_x) / (2.0 * w + params.gamma + params.p_x);
    let coherence = Complex64::new(0.0, -params.rabi) * (1.0 - 2.0 * excitation) / v;
    Ok(QubitState { excitation, coherence })
}

/// Phase-optimised minimal variance of the free-space fluorescence.
pub fn freespace_variance(params: &FreeSpaceParams) -> Result<f64> {
    Ok(optimize_phase(&steady_state(params)?).var_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::purity;

    /// Bloch equations for (Re s, Im s, p), s = ⟨A12⟩, solved by Gaussian
    /// elimination. Assembled directly from the Lindblad terms:
    /// ds/dt = -(iδ + γ2) s - iΩ(1 - 2p),  γ2 = (Γ + Γ_D + P_x)/2
    /// dp/dt = -2Ω Im s - Γ p + P_x (1 - p)
    fn bloch_oracle(p: &FreeSpaceParams) -> (f64, Complex64) {
        let g2 = 0.5 * (p.gamma + p.gamma_d + p.p_x);
        let (d, om) = (p.delta_x, p.rabi);
        // Re: -g2 u + d v = 0
        // Im: -d u - g2 v - om + 2 om p = 0
        // pop: -2 om v - (Γ + P_x) p + P_x = 0
        let mut a = [
            [-g2, d, 0.0, 0.0],
            [-d, -g2, 2.0 * om, om],
            [0.0, -2.0 * om, -(p.gamma + p.p_x), -p.p_x],
        ];
        for col in 0..3 {
            let piv = (col..3).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
            a.swap(col, piv);
            for r in 0..3 {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..4 {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        let x: Vec<f64> = (0..3).map(|r| a[r][3] / a[r][r]).collect();
        (x[2], Complex64::new(x[0], x[1]))
    }

    #[test]
    fn z_direct() {
        let p = FreeSpaceParams::new(1.0, 0.5, 0.0);
        assert!((saturation_z(&p).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn z_at_cavity_resonance_detuning() {
        // The quoted z = 0.54 belongs to the rounded resonance at -19 g.
        let p = FreeSpaceParams::new(1.0 / 23.0, 14.0, -19.0);
        assert!((saturation_z(&p).unwrap() - 0.543).abs() < 1e-3);
        let p = FreeSpaceParams::new(1.0 / 23.0, 14.0, -19.29);
        assert!((saturation_z(&p).unwrap() - 0.5267).abs() < 1e-3);
    }

    #[test]
    fn z_dephasing_matches_bloch_oracle() {
        let p = FreeSpaceParams::new(1.0, 1.0, 10.0).with_dephasing(1.0);
        let zd = saturation_z(&p).unwrap();
        assert!((zd - 2.0 / 101.0).abs() < 1e-15);
        let (exc, _) = bloch_oracle(&p);
        // exc = zD/(1+2zD)  ⇒  zD = exc/(1-2exc)
        assert!((exc / (1.0 - 2.0 * exc) - zd).abs() < 1e-13);
    }

    #[test]
    fn z_rejects_both_rates() {
        let p = FreeSpaceParams::new(1.0, 1.0, 0.0).with_dephasing(1.0).with_pump(0.5);
        assert!(matches!(saturation_z(&p), Err(Error::NoClosedForm)));
    }

    #[test]
    fn maximal_free_space_squeezing() {
        // z = 1/6 at resonance: Ω² = (Γ/2)²/6
        let p = FreeSpaceParams::new(1.0, (0.25f64 / 6.0).sqrt(), 0.0);
        let s = steady_state(&p).unwrap();
        assert!((s.excitation - 0.125).abs() < 1e-15);
        assert!((s.coherence_sq() - 3.0 / 32.0).abs() < 1e-15);
        assert!((freespace_variance(&p).unwrap() + 0.125).abs() < 1e-15);
    }

    #[test]
    fn no_drive() {
        let s = steady_state(&FreeSpaceParams::new(1.0, 0.0, 3.0)).unwrap();
        assert_eq!(s.excitation, 0.0);
        assert_eq!(s.coherence_sq(), 0.0);
        let s = steady_state(&FreeSpaceParams::new(1.0, 0.0, 3.0).with_pump(0.25)).unwrap();
        assert!((s.excitation - 0.2).abs() < 1e-15);
    }

    #[test]
    fn combined_rates_match_bloch_oracle() {
        let p = FreeSpaceParams::new(1.0, 3.0, 5.0).with_dephasing(2.0).with_pump(0.5);
        let s = steady_state(&p).unwrap();
        let (exc, coh) = bloch_oracle(&p);
        assert!((s.excitation - exc).abs() < 1e-12);
        assert!((s.coherence - coh).norm() < 1e-12);
    }

    #[test]
    fn closed_forms_per_channel() {
        for &(gd, px) in &[(0.0, 0.0), (0.7, 0.0), (0.0, 0.4)] {
            let p = FreeSpaceParams::new(1.0, 0.8, -1.3).with_dephasing(gd).with_pump(px);
            let z = saturation_z(&p).unwrap();
            let s = steady_state(&p).unwrap();
            let big_p = px / (1.0 + px);
            let exc = (z + big_p) / (1.0 + 2.0 * z);
            let coh = z * (1.0 - 2.0 * big_p).powi(2) / ((1.0 + gd) * (1.0 + 2.0 * z).powi(2));
            assert!((s.excitation - exc).abs() < 1e-14, "{gd} {px}");
            assert!((s.coherence_sq() - coh).abs() < 1e-14, "{gd} {px}");
        }
    }

    #[test]
    fn free_space_purity_identity() {
        for &(om, d) in &[(0.3, 0.0), (2.0, -1.0), (10.0, 4.0)] {
            let s = steady_state(&FreeSpaceParams::new(1.0, om, d)).unwrap();
            assert!((purity(&s) - (1.0 - 2.0 * s.excitation * s.excitation)).abs() < 1e-12);
        }
    }

    #[test]
    fn saturated_pump_kills_coherence() {
        for om in [0.1, 1.0, 30.0] {
            let s = steady_state(&FreeSpaceParams::new(1.0, om, 2.0).with_pump(1.0)).unwrap();
            assert!((s.excitation - 0.5).abs() < 1e-15);
            assert!(s.coherence.norm() < 1e-15);
            assert!((freespace_variance(&FreeSpaceParams::new(1.0, om, 2.0).with_pump(1.0)).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn dephasing_equal_to_gamma_is_unsqueezed() {
        let p = FreeSpaceParams::new(1.0, 0.9, 1.5).with_dephasing(1.0);
        let zd = saturation_z(&p).unwrap();
        let expected = (2.0 * zd / (1.0 + 2.0 * zd)).powi(2);
        let v = freespace_variance(&p).unwrap();
        assert!(v > 0.0);
        assert!((v - expected).abs() < 1e-14);
    }

    #[test]
    fn squeezing_iff_z_below_half() {
        for z in [0.05, 0.2, 0.45, 0.55, 1.0, 5.0] {
            let p = FreeSpaceParams::new(1.0, (0.25f64 * z).sqrt(), 0.0);
            let v = freespace_variance(&p).unwrap();
            assert!((v - 2.0 * z * (2.0 * z - 1.0) / (1.0 + 2.0 * z).powi(2)).abs() < 1e-14);
            assert_eq!(v < 0.0, z < 0.5);
        }
        let half = FreeSpaceParams::new(1.0, 0.125f64.sqrt(), 0.0);
        assert!(freespace_variance(&half).unwrap().abs() < 1e-15);
    }

    #[test]
    fn dephasing_monotonicity() {
        // large-detuning regime, |δx| ≫ (Γ + Γ_D)/2
        let mut last = steady_state(&FreeSpaceParams::new(1.0, 6.0, -20.0)).unwrap();
        for k in 1..40 {
            let s = steady_state(&FreeSpaceParams::new(1.0, 6.0, -20.0).with_dephasing(0.25 * k as f64)).unwrap();
            assert!(s.excitation >= last.excitation - 1e-15);
            assert!(s.coherence_sq() <= last.coherence_sq() + 1e-15);
            last = s;
        }
    }
}
