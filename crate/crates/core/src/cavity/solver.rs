//! Steady-state solve and truncation control.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{build_liouvillian, generator, JointState, Moments, SystemParams};
use crate::error::{Error, Result};

/// Truncations tried in order by [`converged_steady_state`].
pub const TRUNCATION_SCHEDULE: [usize; 6] = [2, 4, 8, 16, 32, 64];
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_N_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Convergence threshold on the change of every tracked moment between
    /// consecutive truncations; also the bound on the generator residual.
    pub tolerance: f64,
    pub n_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE, n_cap: DEFAULT_N_CAP }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub state: JointState,
    pub n_used: usize,
    /// `‖L ρ‖₂` of the full generator at `n_used`.
    pub residual: f64,
    /// Moment change between the last two truncations.
    pub moment_change: f64,
    pub converged: bool,
}

impl SolveReport {
    pub fn into_converged(self, n_cap: usize) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged { n_cap, last_change: self.moment_change })
        }
    }
}

/// Steady state at a fixed truncation, with the residual of the full
/// generator.
pub fn steady_state(params: &SystemParams, n_max: usize) -> Result<(JointState, f64)> {
    let system = build_liouvillian(params, n_max)?;
    let triplets: Vec<Triplet<usize, usize, Complex64>> =
        system.entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let matrix = SparseColMat::<usize, Complex64>::try_new_from_triplets(system.dim, system.dim, &triplets)
        .map_err(|e| Error::Singular(format!("matrix assembly: {e:?}")))?;
    let lu = matrix.sp_lu().map_err(|e| Error::Singular(format!("{e:?}")))?;
    let rhs = faer::Mat::from_fn(system.dim, 1, |r, _| system.rhs[r]);
    let sol = lu.solve(&rhs);
    let reduced: Vec<Complex64> = (0..system.dim).map(|r| sol[(r, 0)]).collect();
    if reduced.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Singular("non-finite solution".into()));
    }
    let rho = system.expand(&reduced);

    let gen = generator(params, n_max)?;
    let residual = gen.apply(&rho).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    // A singular factorisation can still yield finite garbage.
    if residual > 1e-6 * (1.0 + max_abs_entry(&gen.entries)) {
        return Err(Error::Singular(format!("residual {residual:e} after solve")));
    }
    Ok((JointState::from_elements(n_max, rho), residual))
}

fn max_abs_entry(entries: &[(usize, usize, Complex64)]) -> f64 {
    entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
}

fn schedule(n_cap: usize) -> Vec<usize> {
    let mut s: Vec<usize> = TRUNCATION_SCHEDULE.iter().copied().filter(|&n| n <= n_cap).collect();
    if s.last() != Some(&n_cap) && n_cap >= 1 {
        s.push(n_cap);
    }
    s
}

/// Solves at increasing truncation until all tracked moments change by less
/// than `options.tolerance`. Returns an unconverged report (never an error)
/// when the cap is reached first.
pub fn converged_steady_state(params: &SystemParams, options: &SolverOptions) -> Result<SolveReport> {
    if !(options.tolerance > 0.0) {
        return Err(Error::InvalidParameter { name: "tolerance", reason: format!("{} must be > 0", options.tolerance) });
    }
    params.validate()?;
    let mut previous: Option<Moments> = None;
    let mut last = None;
    let mut change = f64::INFINITY;
    for n in schedule(options.n_cap) {
        let (state, residual) = steady_state(params, n)?;
        if let Some(prev) = previous {
            change = state.moments.max_abs_diff(&prev);
            if change < options.tolerance {
                let converged = residual <= options.tolerance;
                return Ok(SolveReport { state, n_used: n, residual, moment_change: change, converged });
            }
        }
        previous = Some(state.moments);
        last = Some((state, residual, n));
    }
    let (state, residual, n_used) = last.ok_or(Error::Truncation(options.n_cap))?;
    Ok(SolveReport { state, n_used, residual, moment_change: change, converged: false })
}

/// Deviations from the exact steady-state relations of the base system
/// (no dephasing, no incoherent pumping).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactResiduals {
    /// `|⟨a⟩ + ig⟨A12⟩/(iδc + κ/2)|`
    pub purcell: f64,
    /// `|(iδx + Γ/2)⟨A12⟩ − ig(2⟨A22 a⟩ − ⟨a⟩) + iΩ(1 − 2⟨A22⟩)|`
    pub coherence: f64,
    /// `|⟨A22⟩ − (2Ω/Γ) Im⟨A21⟩ + (κ/Γ)⟨a†a⟩|`
    pub energy: f64,
}

impl ExactResiduals {
    pub fn max(&self) -> f64 {
        self.purcell.max(self.coherence).max(self.energy)
    }
}

pub fn exact_relation_residuals(state: &JointState, params: &SystemParams) -> ExactResiduals {
    let m = &state.moments;
    let i = Complex64::i();
    let cavity = i * params.delta_c + 0.5 * params.kappa;
    let purcell = (m.field - (-i * params.g / cavity) * m.coherence).norm();
    let lhs = (i * params.delta_x + 0.5 * params.gamma) * m.coherence;
    let rhs = i * params.g * (2.0 * m.excited_field - m.field) - i * params.rabi * (1.0 - 2.0 * m.excitation);
    let coherence = (lhs - rhs).norm();
    let energy = (m.excitation - 2.0 * params.rabi / params.gamma * m.coherence.conj().im
        + params.kappa / params.gamma * m.photon_number)
        .abs();
    ExactResiduals { purcell, coherence, energy }
}
