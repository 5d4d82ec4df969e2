use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::cavity::{SolverOptions, SystemParams};
use crate::error::{Error, Result};

/// Unit in which every rate and detuning of a config is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    G,
    Gamma,
}

impl Units {
    pub fn as_str(&self) -> &'static str {
        match self {
            Units::G => "g",
            Units::Gamma => "gamma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    DeltaX,
    GammaD,
    PX,
    PC,
    Rabi,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::DeltaX => "delta_x",
            SweepAxis::GammaD => "gamma_d",
            SweepAxis::PX => "p_x",
            SweepAxis::PC => "p_c",
            SweepAxis::Rabi => "rabi",
        }
    }

    pub fn apply(&self, params: &mut SystemParams, value: f64) {
        match self {
            SweepAxis::DeltaX => params.delta_x = value,
            SweepAxis::GammaD => params.gamma_d = value,
            SweepAxis::PX => params.p_x = value,
            SweepAxis::PC => params.p_c = value,
            SweepAxis::Rabi => params.rabi = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    /// Axis values in ascending order.
    pub fn values(&self) -> Vec<f64> {
        let (lo, hi) = if self.start <= self.stop { (self.start, self.stop) } else { (self.stop, self.start) };
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { hi } else { lo + (hi - lo) * k as f64 / last })
            .collect()
    }
}

/// Output columns, in emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    Status,
    NUsed,
    Excitation,
    CoherenceSq,
    Purity,
    VarMin,
    VarMax,
    PhaseMin,
    NCav,
    Residual,
    RRaw,
    REffective,
    ApproxExcitation,
    ApproxCoherenceSq,
    ApproxVarMin,
    FsExcitation,
    FsCoherenceSq,
    FsPurity,
    FsVarMin,
}

impl Column {
    pub const ALL: [Column; 19] = [
        Column::Status,
        Column::NUsed,
        Column::Excitation,
        Column::CoherenceSq,
        Column::Purity,
        Column::VarMin,
        Column::VarMax,
        Column::PhaseMin,
        Column::NCav,
        Column::Residual,
        Column::RRaw,
        Column::REffective,
        Column::ApproxExcitation,
        Column::ApproxCoherenceSq,
        Column::ApproxVarMin,
        Column::FsExcitation,
        Column::FsCoherenceSq,
        Column::FsPurity,
        Column::FsVarMin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Column::Status => "status",
            Column::NUsed => "n_used",
            Column::Excitation => "excitation",
            Column::CoherenceSq => "coherence_sq",
            Column::Purity => "purity",
            Column::VarMin => "var_min",
            Column::VarMax => "var_max",
            Column::PhaseMin => "phase_min",
            Column::NCav => "n_cav",
            Column::Residual => "residual",
            Column::RRaw => "r_raw",
            Column::REffective => "r_effective",
            Column::ApproxExcitation => "approx_excitation",
            Column::ApproxCoherenceSq => "approx_coherence_sq",
            Column::ApproxVarMin => "approx_var_min",
            Column::FsExcitation => "fs_excitation",
            Column::FsCoherenceSq => "fs_coherence_sq",
            Column::FsPurity => "fs_purity",
            Column::FsVarMin => "fs_var_min",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Emit {
    pub format: Format,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tolerance: f64,
    pub n_cap: usize,
    /// Worker threads; `None` uses all available cores.
    pub workers: Option<usize>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self { tolerance: o.tolerance, n_cap: o.n_cap, workers: None }
    }
}

impl SolverSection {
    pub fn options(&self) -> SolverOptions {
        SolverOptions { tolerance: self.tolerance, n_cap: self.n_cap }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default)]
    pub units: Units,
    pub params: SystemParams,
    pub sweep: Sweep,
    /// Empty selects every column.
    #[serde(default)]
    pub outputs: Vec<Column>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub emit: Emit,
}

impl ScanConfig {
    /// Parses a TOML config and applies `key=value` overrides. Keys are
    /// dotted paths (`sweep.points=31`); bare parameter names address the
    /// `params` table (`rabi=10`).
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let doc = parse_with_overrides(text, overrides)?;
        let cfg: ScanConfig = toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if !s.start.is_finite() || !s.stop.is_finite() {
            return Err(Error::Config(format!("sweep range [{}, {}] must be finite", s.start, s.stop)));
        }
        if s.points < 2 {
            return Err(Error::Config(format!("sweep needs at least 2 points, got {}", s.points)));
        }
        if !(self.solver.tolerance > 0.0) {
            return Err(Error::Config(format!("solver tolerance must be > 0, got {}", self.solver.tolerance)));
        }
        if self.solver.n_cap < 1 {
            return Err(Error::Config("solver n_cap must be >= 1".into()));
        }
        if self.solver.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        // Base parameters with the sweep's first value must be valid.
        let mut p = self.params;
        s.axis.apply(&mut p, s.values()[0]);
        p.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn columns(&self) -> Vec<Column> {
        if self.outputs.is_empty() {
            Column::ALL.to_vec()
        } else {
            let mut c = self.outputs.clone();
            c.sort();
            c.dedup();
            c
        }
    }
}

/// Single-point view of a config: only `units`, `params` and `solver` are
/// read, so a sweep section may be present or absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointConfig {
    pub units: Units,
    pub params: SystemParams,
    pub solver: SolverSection,
}

impl PointConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc = parse_with_overrides(text, overrides)?;
        fn take<T: serde::de::DeserializeOwned + Default>(doc: &mut toml::Table, key: &str, required: bool) -> Result<T> {
            match doc.remove(key) {
                Some(v) => v.try_into().map_err(|e: toml::de::Error| Error::Config(format!("{key}: {e}"))),
                None if required => Err(Error::Config(format!("missing [{key}] table"))),
                None => Ok(T::default()),
            }
        }
        let params: SystemParams = match doc.remove("params") {
            Some(v) => v.try_into().map_err(|e: toml::de::Error| Error::Config(format!("params: {e}")))?,
            None => return Err(Error::Config("missing [params] table".into())),
        };
        let cfg = Self { units: take(&mut doc, "units", false)?, params, solver: take(&mut doc, "solver", false)? };
        cfg.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(cfg.solver.tolerance > 0.0) || cfg.solver.n_cap < 1 || cfg.solver.workers == Some(0) {
            return Err(Error::Config("invalid [solver] settings".into()));
        }
        Ok(cfg)
    }
}

fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<toml::Table> {
    let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    for ov in overrides {
        apply_override(&mut doc, ov)?;
    }
    Ok(doc)
}

const PARAM_KEYS: [&str; 9] = ["gamma", "gamma_d", "p_x", "p_c", "kappa", "g", "rabi", "delta_x", "delta_c"];

fn apply_override(doc: &mut toml::Table, ov: &str) -> Result<()> {
    let (key, raw) = ov.split_once('=').ok_or_else(|| Error::Config(format!("override {ov:?} is not KEY=VALUE")))?;
    let key = key.trim();
    let raw = raw.trim();
    let path: Vec<&str> = if !key.contains('.') && PARAM_KEYS.contains(&key) {
        vec!["params", key]
    } else {
        key.split('.').collect()
    };
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key {key:?}")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut table = doc;
    for p in parents {
        let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| Error::Config(format!("{p} is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}
