//! Parameter sweeps, threshold search and data emission.
//!
//! Every sweep point is solved independently: the converged cavity steady
//! state, the free-space closed form at the same emitter parameters and the
//! analytical approximation fed with the solver's cavity occupation. A point
//! that fails is kept as a flagged row; the scan itself carries on.

mod config;
mod emit;
mod threshold;

pub use config::{Column, Emit, Format, PointConfig, ScanConfig, SolverSection, Sweep, SweepAxis, Units};
pub use emit::{emit, format_value, parse_json_rows, to_csv, to_json, Metadata};
pub use threshold::{
    find_threshold, min_variance_near_resonance, InnerEvaluation, ResonanceMinimum, ThresholdPredicate,
    ThresholdResult,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{self, Scenario};
use crate::cavity::{converged_steady_state, SolverOptions, SystemParams};
use crate::error::{Error, Result};
use crate::freespace;
use crate::observables::{optimize_phase, ABSOLUTE_MIN_VARIANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    NotConverged,
    /// The solve produced a state violating the observable invariants.
    Invalid,
    Error,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::NotConverged => "not_converged",
            RowStatus::Invalid => "invalid",
            RowStatus::Error => "error",
        }
    }
}

/// One sweep point. Cavity and approximation values are `None` for flagged
/// rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub axis_value: f64,
    pub status: RowStatus,
    pub n_used: Option<usize>,
    pub excitation: Option<f64>,
    pub coherence_sq: Option<f64>,
    pub purity: Option<f64>,
    pub var_min: Option<f64>,
    pub var_max: Option<f64>,
    pub phase_min: Option<f64>,
    pub n_cav: Option<f64>,
    pub residual: Option<f64>,
    pub r_raw: Option<f64>,
    pub r_effective: Option<f64>,
    pub approx_excitation: Option<f64>,
    pub approx_coherence_sq: Option<f64>,
    pub approx_var_min: Option<f64>,
    pub fs_excitation: Option<f64>,
    pub fs_coherence_sq: Option<f64>,
    pub fs_purity: Option<f64>,
    pub fs_var_min: Option<f64>,
}

impl ScanRow {
    fn empty(axis_value: f64, status: RowStatus) -> Self {
        Self {
            axis_value,
            status,
            n_used: None,
            excitation: None,
            coherence_sq: None,
            purity: None,
            var_min: None,
            var_max: None,
            phase_min: None,
            n_cav: None,
            residual: None,
            r_raw: None,
            r_effective: None,
            approx_excitation: None,
            approx_coherence_sq: None,
            approx_var_min: None,
            fs_excitation: None,
            fs_coherence_sq: None,
            fs_purity: None,
            fs_var_min: None,
        }
    }

    /// Numeric value of a column; `None` for status or missing values.
    pub fn value(&self, column: Column) -> Option<f64> {
        match column {
            Column::Status => None,
            Column::NUsed => self.n_used.map(|n| n as f64),
            Column::Excitation => self.excitation,
            Column::CoherenceSq => self.coherence_sq,
            Column::Purity => self.purity,
            Column::VarMin => self.var_min,
            Column::VarMax => self.var_max,
            Column::PhaseMin => self.phase_min,
            Column::NCav => self.n_cav,
            Column::Residual => self.residual,
            Column::RRaw => self.r_raw,
            Column::REffective => self.r_effective,
            Column::ApproxExcitation => self.approx_excitation,
            Column::ApproxCoherenceSq => self.approx_coherence_sq,
            Column::ApproxVarMin => self.approx_var_min,
            Column::FsExcitation => self.fs_excitation,
            Column::FsCoherenceSq => self.fs_coherence_sq,
            Column::FsPurity => self.fs_purity,
            Column::FsVarMin => self.fs_var_min,
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.status != RowStatus::Ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStatus {
    Complete,
    /// Some rows are flagged.
    Partial,
    /// Every row is flagged.
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub axis: SweepAxis,
    pub units: Units,
    pub columns: Vec<Column>,
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    pub fn status(&self) -> ScanStatus {
        let flagged = self.rows.iter().filter(|r| r.is_flagged()).count();
        if flagged == 0 {
            ScanStatus::Complete
        } else if flagged == self.rows.len() {
            ScanStatus::Failed
        } else {
            ScanStatus::Partial
        }
    }

    /// Row with the smallest cavity `var_min`.
    pub fn min_variance_row(&self) -> Option<&ScanRow> {
        self.rows
            .iter()
            .filter(|r| r.var_min.is_some())
            .min_by(|a, b| a.var_min.unwrap().total_cmp(&b.var_min.unwrap()))
    }
}

/// Evaluates one parameter point.
pub fn evaluate_point(params: &SystemParams, axis_value: f64, options: &SolverOptions) -> ScanRow {
    let mut row = ScanRow::empty(axis_value, RowStatus::Ok);
    if let Ok(fs) = freespace::steady_state(&params.free_space()) {
        let rep = optimize_phase(&fs);
        row.fs_excitation = Some(fs.excitation);
        row.fs_coherence_sq = Some(fs.coherence_sq());
        row.fs_purity = Some(rep.purity);
        row.fs_var_min = Some(rep.var_min);
    }

    let report = match converged_steady_state(params, options) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("{}: solve failed: {e}", axis_value);
            row.status = RowStatus::Error;
            return row;
        }
    };
    row.n_used = Some(report.n_used);
    row.residual = Some(report.residual);
    if !report.converged {
        row.status = RowStatus::NotConverged;
        return row;
    }

    let qubit = report.state.qubit();
    let sq = optimize_phase(&qubit);
    let tol = 1e-8;
    if !qubit.is_physical(tol) || sq.var_min < ABSOLUTE_MIN_VARIANCE - tol || !(0.5 - tol..=1.0 + tol).contains(&sq.purity) {
        row.status = RowStatus::Invalid;
        return row;
    }
    let n_cav = report.state.moments.photon_number;
    row.excitation = Some(qubit.excitation);
    row.coherence_sq = Some(qubit.coherence_sq());
    row.purity = Some(sq.purity);
    row.var_min = Some(sq.var_min);
    row.var_max = Some(sq.var_max);
    row.phase_min = sq.phase_min;
    row.n_cav = Some(n_cav);

    let scenario = Scenario::from_params(params);
    let (raw, effective) = approx::purification_rate(params, n_cav, scenario);
    let am = approx::approx_moments(params, effective, scenario);
    row.r_raw = Some(raw);
    row.r_effective = Some(effective);
    row.approx_excitation = Some(am.state.excitation);
    row.approx_coherence_sq = Some(am.state.coherence_sq());
    row.approx_var_min = Some(approx::approx_variance(params, effective, scenario));
    row
}

pub(crate) fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(format!("worker pool: {e}")))
}

pub fn run_scan(config: &ScanConfig) -> Result<ScanResult> {
    config.validate()?;
    if Scenario::is_ambiguous(&config.params) {
        log::warn!("several incoherent channels active; approximation columns use {:?}", Scenario::from_params(&config.params));
    }
    let options = config.solver.options();
    let axis = config.sweep.axis;
    let values = config.sweep.values();
    let pool = thread_pool(config.solver.workers)?;
    let rows = pool.install(|| {
        values
            .par_iter()
            .map(|&v| {
                let mut p = config.params;
                axis.apply(&mut p, v);
                match p.validate() {
                    Ok(()) => evaluate_point(&p, v, &options),
                    Err(e) => {
                        log::warn!("{}={v}: {e}", axis.name());
                        ScanRow::empty(v, RowStatus::Error)
                    }
                }
            })
            .collect::<Vec<_>>()
    });
    Ok(ScanResult { axis, units: config.units, columns: config.columns(), rows })
}
