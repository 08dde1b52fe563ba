use thiserror::Error;

use crate::symbol::EllipticityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected n = {expected}, got n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("grid of {points} points per axis aliases a window of half-width {half_width} (need at least {required})")]
    Aliasing {
        points: usize,
        half_width: usize,
        required: usize,
    },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("variable {name} refers to axis {axis}, but the symbol has dimension {n}")]
    VariableOutOfRange { name: String, axis: usize, n: usize },

    #[error("lattice point {point:?} lies outside the window of half-width {half_width}")]
    OutOfWindow { point: Vec<i64>, half_width: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("symbol is not elliptic of order {order} on the sampled window")]
    NotElliptic {
        order: f64,
        report: Box<EllipticityReport>,
    },

    #[error("iterative solve did not reach the tolerance after {iterations} iterations (best residual {best_residual:e})")]
    NonConvergence {
        iterations: usize,
        best_residual: f64,
        best_iterate: Vec<[f64; 2]>,
        history: Vec<f64>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid file format: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Errors caused by bad input files or text, as opposed to numerical preconditions.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::VariableOutOfRange { .. }
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
                | Error::Format(_)
        )
    }

    /// Short machine-readable tag used in error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::Aliasing { .. } => "aliasing",
            Error::Parse { .. } => "parse",
            Error::VariableOutOfRange { .. } => "variable_out_of_range",
            Error::OutOfWindow { .. } => "out_of_window",
            Error::NonFinite(_) => "non_finite",
            Error::Domain(_) => "domain",
            Error::NotElliptic { .. } => "not_elliptic",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Format(_) => "format",
        }
    }
}
