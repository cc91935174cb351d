use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "jacobi-spectra",
    version,
    about = "Spectral diagnostics for semi-infinite Jacobi matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write output files and run_config.json into this directory instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Table format for data output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvector and commutator traces at one or more spectral parameters.
    Analyze(AnalyzeArgs),
    /// Grade the hypotheses of a theorem numerically.
    Check(CheckArgs),
    /// Eigenvalues, Gauss weights and eigenvalue counts of a finite section.
    Spectrum(SpectrumArgs),
    /// Derived coefficient tables.
    Transform(TransformArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Sequence family, e.g. `pow:alpha=0.5` or `table:coeffs.csv`.
    #[arg(long)]
    pub seq: String,

    /// Spectral parameters (comma separated or repeated).
    #[arg(
        long = "lambda",
        required = true,
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub lambdas: Vec<f64>,

    /// Last index N of the trace.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,

    /// Weight sequence: `a`, `one`, `iterlog:K` or `table:FILE`.
    #[arg(long, default_value = "a")]
    pub alpha: String,

    /// Initial pair: `p` for the orthonormal polynomials or `u0,u1`.
    #[arg(long, default_value = "p", allow_hyphen_values = true)]
    pub init: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Theorem {
    #[value(name = "A")]
    A,
    #[value(name = "B")]
    B,
    #[value(name = "C")]
    C,
    #[value(name = "42")]
    T42,
    #[value(name = "43")]
    T43,
    #[value(name = "51")]
    T51,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub theorem: Theorem,

    /// Sequence family (all theorems except 51).
    #[arg(long)]
    pub seq: Option<String>,

    /// Birth–death rates for theorem 51: `lam=..,mu=..` text or a CSV file.
    #[arg(long, alias = "bd")]
    pub rates: Option<String>,

    /// Number of terms used by the checker (at least 100).
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(100..))]
    pub n: u64,

    /// Weight sequence for theorem A.
    #[arg(long, default_value = "a")]
    pub alpha: String,

    /// Iterated-logarithm depth K for theorem 43.
    #[arg(long, default_value_t = 1)]
    pub k: u32,

    /// JSON file overriding heuristic thresholds.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub seq: String,

    /// Order N of the truncation.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub size: u64,

    /// Absolute bisection tolerance (default 1e-12 · max(1, spectral radius bound), or machine precision with --weights).
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,

    /// Also compute Gauss weights.
    #[arg(long)]
    pub weights: bool,

    /// Eigenvalue-count window `lo,hi`.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<(f64, f64)>,

    /// Bin width for the window.
    #[arg(long, default_value_t = 0.5)]
    pub bin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Flip,
    Even,
    Odd,
    Bd,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(value_enum)]
    pub kind: TransformKind,

    /// Sequence family (flip, even, odd).
    #[arg(long)]
    pub seq: Option<String>,

    /// Birth–death rates (bd): `lam=..,mu=..` text or a CSV file.
    #[arg(long, alias = "bd")]
    pub rates: Option<String>,

    /// Number of rows.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
}

fn parse_window(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{text}`"))?;
    let number = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((number(lo)?, number(hi)?))
}
