use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "ptorsion", version, about = "p-torsion solves and symmetry diagnostics on planar domains")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Domain as a JSON file or inline JSON, e.g. '{"kind":"disk","r":1}'.
    #[arg(long, global = true)]
    pub domain: Option<String>,

    /// Exponent in (1,2].
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub p: Option<f64>,

    /// Target mesh edge length.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub h: Option<f64>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Absolute tolerance on the deficit; defaults to max(1e-3, C h).
    #[arg(long, global = true)]
    pub tol_deficit: Option<f64>,

    /// Gradient cutoff, relative to the maximum, for the critical set.
    #[arg(long, global = true)]
    pub delta_crit: Option<f64>,

    /// Recorded in outputs. No step of the pipeline is randomized.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Solver overrides as a JSON file or inline JSON (fields of the solver config).
    #[arg(long, global = true)]
    pub solver: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve on a domain; writes u.csv and solve.json.
    Solve,
    /// Closed-form values for the ball and the annulus.
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
    },
    /// Diagnostic report for a solution, read from CSV or solved on the spot.
    Deficit {
        /// Solution CSV written by `solve`; the mesh is rebuilt from --domain and --h.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// One report per grid point plus an aggregate CSV.
    Sweep {
        #[command(subcommand)]
        family: SweepFamily,
    },
    /// Check report files against the schema and summarize them.
    Report {
        /// Report JSON files.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleKind {
    /// Ball of radius r.
    Ball {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// Annulus r1 < |x| < r2.
    Annulus {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
    },
}

#[derive(Debug, Subcommand)]
pub enum SweepFamily {
    /// Ellipses of fixed area over a range of eccentricities.
    Eccentricity {
        #[command(flatten)]
        range: Range,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        area: f64,
    },
    /// A range of exponents on --domain.
    P {
        #[command(flatten)]
        range: Range,
    },
}

/// Either an explicit list or `--from/--to/--steps` (endpoints included).
#[derive(Debug, Clone, Args)]
pub struct Range {
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["from", "to", "steps"])]
    pub values: Option<Vec<f64>>,
    #[arg(long, requires_all = ["to", "steps"])]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}
