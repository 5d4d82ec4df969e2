use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use super::{Column, Format, ScanConfig, ScanResult, ScanStatus};
use crate::cavity::{SolverOptions, SystemParams};
use crate::error::Result;

const SIGNIFICANT_DIGITS: usize = 12;

fn round_significant(x: f64) -> f64 {
    let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let y: f64 = s.parse().expect("formatted float parses");
    if y == 0.0 { 0.0 } else { y }
}

/// Text form of a CSV cell: 12 significant digits, plain notation between
/// 1e-4 and 1e15, empty for missing or non-finite values.
pub fn format_value(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => {
            let y = round_significant(v);
            let a = y.abs();
            if y == 0.0 || (1e-4..1e15).contains(&a) {
                format!("{y}")
            } else {
                format!("{y:e}")
            }
        }
        _ => String::new(),
    }
}

fn header(result: &ScanResult) -> Vec<&'static str> {
    std::iter::once(result.axis.name()).chain(result.columns.iter().map(|c| c.name())).collect()
}

pub fn to_csv(result: &ScanResult) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header(result))?;
    for row in &result.rows {
        let mut rec = vec![format_value(Some(row.axis_value))];
        for &c in &result.columns {
            rec.push(match c {
                Column::Status => row.status.as_str().to_string(),
                _ => format_value(row.value(c)),
            });
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn json_number(x: Option<f64>) -> Value {
    match x {
        Some(v) if v.is_finite() => Value::from(round_significant(v)),
        _ => Value::Null,
    }
}

fn pretty(value: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Array of row objects, keys in column order.
pub fn to_json(result: &ScanResult) -> Result<String> {
    let rows = result
        .rows
        .iter()
        .map(|row| {
            let mut m = Map::new();
            m.insert(result.axis.name().into(), json_number(Some(row.axis_value)));
            for &c in &result.columns {
                let v = match c {
                    Column::Status => Value::from(row.status.as_str()),
                    Column::NUsed => row.n_used.map_or(Value::Null, Value::from),
                    _ => json_number(row.value(c)),
                };
                m.insert(c.name().into(), v);
            }
            Value::Object(m)
        })
        .collect();
    pretty(&Value::Array(rows))
}

/// Parses emitted JSON and writes it back out; the result is byte-identical
/// to the input for anything produced by [`to_json`].
pub fn parse_json_rows(text: &str) -> Result<String> {
    let v: Value = serde_json::from_str(text)?;
    pretty(&v)
}

/// Sidecar describing how a data file was produced.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub units: &'static str,
    pub axis: &'static str,
    pub points: usize,
    pub status: ScanStatus,
    pub solver: SolverOptions,
    pub params: SystemParams,
    pub columns: Vec<&'static str>,
}

impl Metadata {
    pub fn new(result: &ScanResult, config: &ScanConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            units: result.units.as_str(),
            axis: result.axis.name(),
            points: result.rows.len(),
            status: result.status(),
            solver: config.solver.options(),
            params: config.params,
            columns: result.columns.iter().map(|c| c.name()).collect(),
        }
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Writes the data to `path` (plus a `.meta.json` sidecar) or to stdout.
pub fn emit(result: &ScanResult, config: &ScanConfig, format: Format, path: Option<&Path>) -> Result<()> {
    let text = match format {
        Format::Csv => to_csv(result)?,
        Format::Json => to_json(result)?,
    };
    match path {
        Some(p) => {
            std::fs::write(p, &text)?;
            let meta = serde_json::to_value(Metadata::new(result, config))?;
            std::fs::write(sidecar_path(p), pretty(&meta)?)?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
