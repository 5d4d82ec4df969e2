use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use spe_squeeze::cavity::{build_liouvillian, converged_steady_state};
use spe_squeeze::detection::{optimal_lo_scan, LoObjective};
use spe_squeeze::observables::optimize_phase;
use spe_squeeze::scan::{
    emit, find_threshold, run_scan, Format, InnerEvaluation, PointConfig, ScanConfig, ScanStatus, ThresholdPredicate,
};
use spe_squeeze::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

/// Steady-state squeezing of a driven single-photon emitter in a cavity.
#[derive(Debug, Parser)]
#[command(name = "spe-squeeze", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Truncation convergence tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Largest photon-number truncation.
    #[arg(long, global = true)]
    n_cap: Option<usize>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Config override, e.g. `rabi=10` or `sweep.points=31`. Repeatable.
    #[arg(long = "param", global = true, value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InnerArg {
    /// Minimum over a detuning sub-scan around the cavity resonance.
    Minimum,
    /// The config's own detuning.
    Fixed,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Margin,
    Contrast,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the configured sweep.
    Scan,
    /// Bisect the sweep axis for a squeezing threshold.
    Threshold {
        /// Variance level of the predicate `min var_min < level`.
        #[arg(long, allow_hyphen_values = true)]
        level: f64,
        /// Bracket on the sweep axis, `LO,HI`.
        #[arg(long, value_parser = parse_bracket, allow_hyphen_values = true)]
        bracket: (f64, f64),
        #[arg(long, value_enum, default_value = "minimum")]
        inner: InnerArg,
    },
    /// Homodyne correlation criterion on the solved state of the config's parameters.
    Detect {
        /// Detection efficiency in (0, 1].
        #[arg(long)]
        eta: f64,
        /// Classical amplitude variance of the local oscillator.
        #[arg(long)]
        classical_variance: f64,
        #[arg(long, default_value_t = 1e-3)]
        lo_min: f64,
        #[arg(long, default_value_t = 1e3)]
        lo_max: f64,
        /// Log-spaced LO intensities.
        #[arg(long, default_value_t = 61)]
        lo_points: usize,
        /// LO phases in [0, π).
        #[arg(long, default_value_t = 180)]
        phase_points: usize,
        #[arg(long, value_enum, default_value = "margin")]
        objective: ObjectiveArg,
    },
    /// Write the reduced steady-state system in coordinate format.
    DumpLiouvillian {
        #[arg(long)]
        n_max: usize,
    },
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
            _ => EXIT_CONFIG,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

impl Cli {
    /// `--param` overrides first, then the dedicated flags.
    fn overrides(&self) -> Vec<String> {
        let mut ov = self.params.clone();
        if let Some(t) = self.tol {
            ov.push(format!("solver.tolerance={t:e}"));
        }
        if let Some(n) = self.n_cap {
            ov.push(format!("solver.n_cap={n}"));
        }
        if let Some(w) = self.workers {
            ov.push(format!("solver.workers={w}"));
        }
        ov
    }

    fn config_text(&self) -> Result<String, Failure> {
        let path = self.config.as_ref().ok_or_else(|| Failure { code: EXIT_CONFIG, message: "--config is required".into() })?;
        std::fs::read_to_string(path)
            .map_err(|e| Failure { code: EXIT_CONFIG, message: format!("{}: {e}", path.display()) })
    }

    fn scan_config(&self) -> Result<ScanConfig, Failure> {
        Ok(ScanConfig::from_toml(&self.config_text()?, &self.overrides())?)
    }

    fn point_config(&self) -> Result<PointConfig, Failure> {
        Ok(PointConfig::from_toml(&self.config_text()?, &self.overrides())?)
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialise");
    s.push('\n');
    s
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Scan => {
            let cfg = cli.scan_config()?;
            let result = run_scan(&cfg)?;
            let format = match cli.format {
                Some(FormatArg::Csv) => Format::Csv,
                Some(FormatArg::Json) => Format::Json,
                None => cfg.emit.format,
            };
            let path = cli.out.as_deref().or(cfg.emit.path.as_deref());
            emit(&result, &cfg, format, path)?;
            let flagged = result.rows.iter().filter(|r| r.is_flagged()).count();
            Ok(match result.status() {
                ScanStatus::Complete => 0,
                ScanStatus::Partial => {
                    log::warn!("{flagged} of {} rows flagged", result.rows.len());
                    EXIT_PARTIAL
                }
                ScanStatus::Failed => {
                    log::error!("every row flagged");
                    EXIT_NOT_CONVERGED
                }
            })
        }
        Command::Threshold { level, bracket, inner } => {
            let cfg = cli.scan_config()?;
            let inner = match inner {
                InnerArg::Minimum => InnerEvaluation::ResonanceMinimum,
                InnerArg::Fixed => InnerEvaluation::FixedDetuning,
            };
            let t = find_threshold(&cfg, ThresholdPredicate { level: *level }, *bracket, inner)?;
            let out = json!({
                "units": cfg.units.as_str(),
                "axis": cfg.sweep.axis.name(),
                "level": level,
                "inner": inner,
                "value": t.value,
                "bracket": [t.bracket.0, t.bracket.1],
                "iterations": t.iterations,
            });
            write_output(cli.out.as_deref(), &pretty(&out))?;
            Ok(0)
        }
        Command::Detect { eta, classical_variance, lo_min, lo_max, lo_points, phase_points, objective } => {
            let cfg = cli.point_config()?;
            if !(*lo_min > 0.0 && lo_max >= lo_min && *lo_points >= 1 && *phase_points >= 1) {
                return Err(Failure { code: EXIT_CONFIG, message: "LO grid needs 0 < lo-min <= lo-max and at least one point".into() });
            }
            let report = converged_steady_state(&cfg.params, &cfg.solver.options())?.into_converged(cfg.solver.n_cap)?;
            let state = report.state.qubit();
            let step = if *lo_points > 1 { (lo_max / lo_min).ln() / (*lo_points - 1) as f64 } else { 0.0 };
            let intensities: Vec<f64> = (0..*lo_points).map(|k| lo_min * (step * k as f64).exp()).collect();
            let phases: Vec<f64> =
                (0..*phase_points).map(|k| std::f64::consts::PI * k as f64 / *phase_points as f64).collect();
            let objective = match objective {
                ObjectiveArg::Margin => LoObjective::Margin,
                ObjectiveArg::Contrast => LoObjective::Contrast,
            };
            let best = optimal_lo_scan(&state, &intensities, &phases, *eta, *classical_variance, objective)?;
            let out = json!({
                "units": cfg.units.as_str(),
                "n_used": report.n_used,
                "state": state,
                "squeezing": optimize_phase(&state),
                "objective": objective,
                "best": best,
            });
            write_output(cli.out.as_deref(), &pretty(&out))?;
            Ok(0)
        }
        Command::DumpLiouvillian { n_max } => {
            let cfg = cli.point_config()?;
            let system = build_liouvillian(&cfg.params, *n_max)?;
            let mut buf = Vec::new();
            system.write_coordinates(&mut buf)?;
            write_output(cli.out.as_deref(), &String::from_utf8(buf).expect("coordinate dump is ascii"))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
