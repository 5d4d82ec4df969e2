//! Driven emitter coupled to a lossy single-mode cavity.
//!
//! The joint density matrix `ρ_{n,i;m,j} = ⟨n,i|ρ|m,j⟩` is truncated at
//! cavity photon number `N`. Elements are stored row-major over
//! `(n, i, m, j)` with `i, j ∈ {0, 1}` standing for the emitter levels
//! `|1⟩` (ground) and `|2⟩` (excited):
//!
//! ```text
//! index(n, i, m, j) = ((n * 2 + i) * (N + 1) + m) * 2 + j
//! ```
//!
//! The detuning written `δ_a` in some references of the element equations is
//! the emitter detuning `δx`; the Hamiltonian only contains `δx` and `δc`.

mod liouvillian;
mod solver;

pub use liouvillian::{build_liouvillian, generator, Generator, ReducedSystem};
pub use solver::{
    converged_steady_state, exact_relation_residuals, steady_state, ExactResiduals, SolveReport,
    SolverOptions, DEFAULT_N_CAP, DEFAULT_TOLERANCE, TRUNCATION_SCHEDULE,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_non_negative, check_positive, Error, Result};
use crate::freespace::FreeSpaceParams;
use crate::observables::QubitState;

/// All rates and detunings of the emitter-cavity system, in a common unit
/// (by default the coupling `g`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Spontaneous emission Γ.
    pub gamma: f64,
    /// Pure dephasing Γ_D.
    #[serde(default)]
    pub gamma_d: f64,
    /// Incoherent emitter pump P_x.
    #[serde(default)]
    pub p_x: f64,
    /// Incoherent cavity pump P_c.
    #[serde(default)]
    pub p_c: f64,
    /// Cavity loss κ.
    pub kappa: f64,
    /// Emitter-cavity coupling.
    pub g: f64,
    /// Rabi frequency Ω_R.
    pub rabi: f64,
    /// δx = ωx − ωL.
    pub delta_x: f64,
    /// δc = ωc − ωL.
    pub delta_c: f64,
}

impl SystemParams {
    /// Strongly and off-resonantly driven emitter in a moderate cavity, in
    /// units of `g`: `Ω_R = 14`, `κ = 1.58`, `Γ = 1/23`, `δc = -34`, with
    /// `δx` at the lower-sideband cavity resonance.
    pub fn purification_setup() -> Self {
        let mut p = Self {
            gamma: 1.0 / 23.0,
            gamma_d: 0.0,
            p_x: 0.0,
            p_c: 0.0,
            kappa: 1.58,
            g: 1.0,
            rabi: 14.0,
            delta_x: 0.0,
            delta_c: -34.0,
        };
        p.delta_x = crate::approx::cavity_resonance_detuning(&p).expect("resonance exists");
        p
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("gamma", self.gamma)?;
        check_non_negative("gamma_d", self.gamma_d)?;
        check_non_negative("p_x", self.p_x)?;
        check_non_negative("p_c", self.p_c)?;
        check_positive("kappa", self.kappa)?;
        check_non_negative("g", self.g)?;
        check_non_negative("rabi", self.rabi)?;
        check_finite("delta_x", self.delta_x)?;
        check_finite("delta_c", self.delta_c)?;
        if self.p_c >= self.kappa {
            return Err(Error::InvalidParameter {
                name: "p_c",
                reason: format!("cavity pump {} must stay below kappa {}", self.p_c, self.kappa),
            });
        }
        if self.p_c > 0.1 * self.kappa {
            log::warn!("p_c/kappa = {:.3} is not small; cavity occupation grows quickly", self.p_c / self.kappa);
        }
        Ok(())
    }

    /// The same emitter without the cavity.
    pub fn free_space(&self) -> FreeSpaceParams {
        FreeSpaceParams {
            gamma: self.gamma,
            gamma_d: self.gamma_d,
            p_x: self.p_x,
            rabi: self.rabi,
            delta_x: self.delta_x,
        }
    }
}

/// Expectation values extracted from the joint density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// ⟨A22⟩
    pub excitation: f64,
    /// ⟨A12⟩
    pub coherence: Complex64,
    /// ⟨a⟩
    pub field: Complex64,
    /// ⟨a†a⟩
    pub photon_number: f64,
    /// ⟨A22 a⟩
    pub excited_field: Complex64,
}

impl Moments {
    pub fn qubit(&self) -> QubitState {
        QubitState { excitation: self.excitation, coherence: self.coherence }
    }

    /// Largest absolute difference over all tracked moments.
    pub fn max_abs_diff(&self, other: &Moments) -> f64 {
        [
            (self.excitation - other.excitation).abs(),
            (self.coherence - other.coherence).norm(),
            (self.field - other.field).norm(),
            (self.photon_number - other.photon_number).abs(),
            (self.excited_field - other.excited_field).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Truncated joint density matrix with its moments.
#[derive(Debug, Clone)]
pub struct JointState {
    n_max: usize,
    rho: Vec<Complex64>,
    pub moments: Moments,
}

impl JointState {
    pub(crate) fn from_elements(n_max: usize, rho: Vec<Complex64>) -> Self {
        debug_assert_eq!(rho.len(), element_count(n_max));
        let moments = compute_moments(n_max, &rho);
        Self { n_max, rho, moments }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Flat element vector in the documented index layout.
    pub fn elements(&self) -> &[Complex64] {
        &self.rho
    }

    /// `ρ_{n,i;m,j}` with `i, j ∈ {0, 1}` for emitter levels 1, 2.
    pub fn element(&self, n: usize, i: usize, m: usize, j: usize) -> Complex64 {
        self.rho[index(self.n_max, n, i, m, j)]
    }

    pub fn qubit(&self) -> QubitState {
        self.moments.qubit()
    }

    pub fn trace(&self) -> Complex64 {
        (0..=self.n_max).flat_map(|n| (0..2).map(move |i| (n, i))).map(|(n, i)| self.element(n, i, n, i)).sum()
    }

    /// max |ρ_{a;b} − conj(ρ_{b;a})|
    pub fn hermiticity_error(&self) -> f64 {
        let dim = 2 * (self.n_max + 1);
        let mut err = 0.0f64;
        for a in 0..dim {
            for b in a..dim {
                let ab = self.rho[a * dim + b];
                let ba = self.rho[b * dim + a];
                err = err.max((ab - ba.conj()).norm());
            }
        }
        err
    }

    /// Density matrix as a dense `2(N+1)` square matrix over the `(n, i)` basis.
    pub fn matrix(&self) -> faer::Mat<Complex64> {
        let dim = 2 * (self.n_max + 1);
        faer::Mat::from_fn(dim, dim, |a, b| self.rho[a * dim + b])
    }

    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub fn min_eigenvalue(&self) -> f64 {
        let dim = 2 * (self.n_max + 1);
        let herm = faer::Mat::from_fn(dim, dim, |a, b| 0.5 * (self.rho[a * dim + b] + self.rho[b * dim + a].conj()));
        herm.self_adjoint_eigenvalues(faer::Side::Lower)
            .map(|ev| ev.into_iter().fold(f64::INFINITY, f64::min))
            .unwrap_or(f64::NAN)
    }

    /// Photon-number distribution of the cavity.
    pub fn photon_distribution(&self) -> Vec<f64> {
        (0..=self.n_max).map(|n| self.element(n, 0, n, 0).re + self.element(n, 1, n, 1).re).collect()
    }
}

pub(crate) fn element_count(n_max: usize) -> usize {
    4 * (n_max + 1) * (n_max + 1)
}

#[inline]
pub(crate) fn index(n_max: usize, n: usize, i: usize, m: usize, j: usize) -> usize {
    ((n * 2 + i) * (n_max + 1) + m) * 2 + j
}

fn compute_moments(n_max: usize, rho: &[Complex64]) -> Moments {
    let el = |n, i, m, j| rho[index(n_max, n, i, m, j)];
    let mut excitation = 0.0;
    let mut coherence = Complex64::new(0.0, 0.0);
    let mut field = Complex64::new(0.0, 0.0);
    let mut photon_number = 0.0;
    let mut excited_field = Complex64::new(0.0, 0.0);
    for n in 0..=n_max {
        excitation += el(n, 1, n, 1).re;
        // ⟨A12⟩ = Tr(ρ |1⟩⟨2|) = Σ ρ_{n,2;n,1}
        coherence += el(n, 1, n, 0);
        photon_number += n as f64 * (el(n, 0, n, 0).re + el(n, 1, n, 1).re);
        if n >= 1 {
            let sq = (n as f64).sqrt();
            // Tr(ρ a) = Σ √n ρ_{n,i;n-1,i}
            field += (el(n, 0, n - 1, 0) + el(n, 1, n - 1, 1)) * sq;
            excited_field += el(n, 1, n - 1, 1) * sq;
        }
    }
    Moments { excitation, coherence, field, photon_number, excited_field }
}
