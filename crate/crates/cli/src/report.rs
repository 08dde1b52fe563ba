use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use lattice_pdo::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Global;

/// Exit codes shared by every command.
pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Serialize, Debug, Clone)]
pub struct Tolerances {
    pub solve_tol: f64,
    pub rank_tol: f64,
    pub min_gap: f64,
}

/// Fully resolved settings of one invocation.
#[derive(Serialize, Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub half_width: usize,
    #[serde(rename = "M")]
    pub grid_points: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub params: Value,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Lib(e) if e.is_input_error() => EXIT_USAGE,
            Failure::Lib(_) => EXIT_NUMERIC,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message, details) = match self {
            Failure::Usage(m) => ("usage", m.clone(), Value::Null),
            Failure::Lib(e) => (e.kind(), e.to_string(), details(e)),
        };
        json!({ "error": kind, "message": message, "exit_code": self.exit_code(), "details": details })
    }
}

fn details(e: &Error) -> Value {
    match e {
        Error::Parse { position, .. } => json!({ "position": position }),
        Error::VariableOutOfRange { name, axis, n } => json!({ "name": name, "axis": axis, "n": n }),
        Error::DimensionMismatch { expected, found } => json!({ "expected": expected, "found": found }),
        Error::Aliasing { points, half_width, required } => json!({ "M": points, "N": half_width, "required": required }),
        Error::OutOfWindow { point, half_width } => json!({ "point": point, "N": half_width }),
        Error::NotElliptic { order, report } => json!({ "order": order, "ellipticity": report }),
        Error::NonConvergence { iterations, best_residual, history, .. } => {
            json!({ "iterations": iterations, "best_residual": best_residual, "history": history })
        }
        _ => Value::Null,
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    report: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_seconds: Option<f64>,
}

/// Prints the report envelope on stdout and mirrors it to `--json` when given.
pub fn emit<R: Serialize>(global: &Global, config: &RunConfig, started: Instant, report: R) -> CliResult<()> {
    let (timestamp, elapsed_seconds) = if global.no_timestamp {
        (None, None)
    } else {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        (Some(now), Some(started.elapsed().as_secs_f64()))
    };
    let envelope = Envelope {
        command: &config.command,
        config,
        report,
        timestamp,
        elapsed_seconds,
    };
    let text = serde_json::to_string_pretty(&envelope).map_err(Error::from)?;
    println!("{text}");
    if let Some(path) = &global.json {
        write_text(path, &format!("{text}\n"))?;
    }
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| Failure::Lib(Error::Io(e)))
}

/// Writes `series,x,y` rows (the series column only when some label is non-empty).
pub fn write_plot(path: &Path, rows: &[(String, f64, f64)]) -> CliResult<()> {
    let labelled = rows.iter().any(|(label, _, _)| !label.is_empty());
    let mut text = String::from(if labelled { "series,x,y\n" } else { "x,y\n" });
    for (label, x, y) in rows {
        if labelled {
            let _ = write!(text, "{label},");
        }
        let _ = writeln!(text, "{x:?},{y:?}");
    }
    write_text(path, &text)
}
