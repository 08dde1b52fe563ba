use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "lpdo", version, about = "Pseudo-difference operators on truncated lattices")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Lattice dimension (taken from the inputs when omitted).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Window half-width.
    #[arg(long = "N", global = true)]
    pub half_width: Option<usize>,
    /// Grid points per axis; defaults to 2N+3.
    #[arg(long = "M", global = true)]
    pub grid_points: Option<usize>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Primary data output (sequence CSV, symbol JSON or matrix file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Plot-ready CSV for spectra and decay profiles.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Leave wall-clock fields out of the report.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Solver tolerance on the relative residual.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Relative singular-value level treated as zero.
    #[arg(long, global = true)]
    pub rank_tol: Option<f64>,
    /// Required spectral gap for a stable index.
    #[arg(long, global = true)]
    pub min_gap: Option<f64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Apply the operator of a symbol to a sequence.
    Apply {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Lattice sequence to torus samples.
    Ft {
        #[arg(long)]
        input: PathBuf,
    },
    /// Torus samples back to a lattice sequence.
    Invft {
        #[arg(long)]
        input: PathBuf,
    },
    /// Symbol of the composition `T_left T_right`.
    Compose {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
    /// Symbol of the adjoint operator.
    Adjoint {
        #[arg(long)]
        symbol: PathBuf,
    },
    /// Sobolev norm of a sequence.
    Norm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
    },
    /// Order estimate, ellipticity and S^0 difference decay.
    Classify {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<f64>,
        #[arg(long, default_value_t = 2)]
        alpha_max: usize,
    },
    /// Neumann-refined parametrix and its residual report.
    Parametrix {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<f64>,
        #[arg(long, default_value_t = 3)]
        steps: usize,
        #[arg(long, default_value_t = 3)]
        max_power: usize,
    },
    /// Parametrix-preconditioned solve of `T_sigma u = f`.
    Solve {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<f64>,
        /// Right-hand side CSV; a seeded random interior-supported f otherwise.
        #[arg(long)]
        rhs: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        max_iterations: usize,
        #[arg(long, default_value_t = 3)]
        steps: usize,
    },
    /// Singular-value spectra of the compact model operators.
    Spectrum {
        #[arg(value_enum)]
        kind: SpectrumKind,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        s: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 2.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        threshold: f64,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        windows: Vec<usize>,
    },
    /// Fredholm index by null spaces and by trace.
    Index {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "16,32")]
        windows: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        steps: usize,
    },
    /// Graph-norm versus Sobolev-norm constants.
    Adn {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        order: Option<f64>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Assemble the finite-section matrix.
    Matrix {
        #[arg(long)]
        symbol: PathBuf,
    },
    /// Run the property suites.
    Verify {
        /// Suite name, or `all`.
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long, value_delimiter = ',', default_value = "16,32")]
        windows: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Inclusion,
    Smoothing,
}
