use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{thread_pool, ScanConfig, SweepAxis};
use crate::approx::cavity_resonance_detuning;
use crate::cavity::{converged_steady_state, SolverOptions, SystemParams};
use crate::error::{Error, Result};
use crate::observables::optimize_phase;

/// δx points of the resonance sub-scan (and of its single refinement).
pub const INNER_POINTS: usize = 61;
/// Half width of the sub-scan around the predicted resonance, in units of g.
pub const INNER_HALF_WIDTH: f64 = 3.0;
pub const RELATIVE_TOLERANCE: f64 = 1e-3;

/// "Minimal squeezing variance near the cavity resonance is below `level`".
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPredicate {
    pub level: f64,
}

impl ThresholdPredicate {
    pub fn holds(&self, min_variance: f64) -> bool {
        min_variance < self.level
    }
}

/// What is compared against the predicate at each bisection trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InnerEvaluation {
    /// Minimum of `var_min` over a δx sub-scan around the predicted resonance.
    #[default]
    ResonanceMinimum,
    /// `var_min` at the config's own δx, i.e. a fixed operating point.
    FixedDetuning,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceMinimum {
    pub delta_x: f64,
    pub var_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub value: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

fn var_min_at(params: &SystemParams, delta_x: f64, options: &SolverOptions) -> Result<f64> {
    let p = SystemParams { delta_x, ..*params };
    let rep = converged_steady_state(&p, options)?.into_converged(options.n_cap)?;
    Ok(optimize_phase(&rep.state.qubit()).var_min)
}

fn grid_min(params: &SystemParams, lo: f64, hi: f64, options: &SolverOptions) -> Result<(usize, Vec<f64>, Vec<f64>)> {
    let xs: Vec<f64> = (0..INNER_POINTS).map(|k| lo + (hi - lo) * k as f64 / (INNER_POINTS - 1) as f64).collect();
    let vs = xs.par_iter().map(|&x| var_min_at(params, x, options)).collect::<Result<Vec<f64>>>()?;
    let k = (0..vs.len()).min_by(|&a, &b| vs[a].total_cmp(&vs[b])).expect("non-empty grid");
    Ok((k, xs, vs))
}

/// Minimum of `var_min` over δx within ±3 g of the predicted cavity
/// resonance, refined once around the coarse minimum.
pub fn min_variance_near_resonance(params: &SystemParams, options: &SolverOptions) -> Result<ResonanceMinimum> {
    let center = cavity_resonance_detuning(params)?;
    let half = INNER_HALF_WIDTH * if params.g > 0.0 { params.g } else { 1.0 };
    let (k, xs, _) = grid_min(params, center - half, center + half, options)?;
    let lo = xs[k.saturating_sub(1)];
    let hi = xs[(k + 1).min(xs.len() - 1)];
    let (k, xs, vs) = grid_min(params, lo, hi, options)?;
    Ok(ResonanceMinimum { delta_x: xs[k], var_min: vs[k] })
}

/// Bisects the config's sweep axis for the point where the predicate on the
/// inner quantity changes truth value.
pub fn find_threshold(
    config: &ScanConfig,
    predicate: ThresholdPredicate,
    bracket: (f64, f64),
    inner: InnerEvaluation,
) -> Result<ThresholdResult> {
    config.validate()?;
    let axis = config.sweep.axis;
    if axis == SweepAxis::DeltaX {
        return Err(Error::Config("threshold search needs an outer axis other than delta_x".into()));
    }
    let options = config.solver.options();
    let pool = thread_pool(config.solver.workers)?;
    let eval = |x: f64| -> Result<f64> {
        let mut p = config.params;
        axis.apply(&mut p, x);
        p.validate()?;
        match inner {
            InnerEvaluation::ResonanceMinimum => Ok(pool.install(|| min_variance_near_resonance(&p, &options))?.var_min),
            InnerEvaluation::FixedDetuning => var_min_at(&p, p.delta_x, &options),
        }
    };

    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Config(format!("bad bracket [{lo}, {hi}]")));
    }
    let (f_lo, f_hi) = (eval(lo)?, eval(hi)?);
    let (t_lo, t_hi) = (predicate.holds(f_lo), predicate.holds(f_hi));
    if t_lo == t_hi {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let mut iterations = 0;
    while hi - lo > RELATIVE_TOLERANCE * 0.5 * (lo.abs() + hi.abs()).max(f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        if predicate.holds(eval(mid)?) == t_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        log::debug!("{} bracket [{lo}, {hi}]", axis.name());
    }
    Ok(ThresholdResult { value: 0.5 * (lo + hi), bracket: (lo, hi), iterations })
}
