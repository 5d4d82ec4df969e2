use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid qubit state: {0}")]
    InvalidState(String),

    #[error("Fock truncation must be at least 1, got {0}")]
    Truncation(usize),

    #[error("no closed form for simultaneous dephasing and incoherent pumping; use the general steady state")]
    NoClosedForm,

    #[error("singular steady-state system: {0}")]
    Singular(String),

    #[error("steady state not converged up to N = {n_cap} (last moment change {last_change:e})")]
    NotConverged { n_cap: usize, last_change: f64 },

    #[error("cavity sideband resonance has no real solution: delta_c^2 < 4 rabi^2")]
    NoResonance,

    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),

    #[error("predicate does not change across bracket [{lo}, {hi}] (values {f_lo}, {f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite, got {value}") })
    }
}

pub(crate) fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    check_finite(name, value)?;
    if value < 0.0 {
        return Err(Error::InvalidParameter { name, reason: format!("must be >= 0, got {value}") });
    }
    Ok(())
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    check_finite(name, value)?;
    if value <= 0.0 {
        return Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {value}") });
    }
    Ok(())
}
