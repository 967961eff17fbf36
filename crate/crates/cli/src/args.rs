use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kquant::ua::PNorm;

/// Best L^p approximation by simple functions with at most k values.
#[derive(Debug, Parser)]
#[command(name = "kquant", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal step map with at most k levels for one input.
    Quantize(QuantizeArgs),
    /// k-th total p-variation and its comparison with the distance D_{p,k}.
    Variation(VariationArgs),
    /// Uniform-approximability diagnostics for a family of inputs.
    Ua(UaCommand),
    /// Covering numbers of the essential range.
    Covering(CoveringArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Dp,
    Lloyd,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Finite,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Write the report here (atomically) instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Measure mode: `infinite` adds an infinite-mass region where f = 0.
    #[arg(long, value_enum, default_value = "finite")]
    pub mode: Mode,
    /// Gaps at most this wide are fused when building the essential range.
    #[arg(long, default_value_t = 0.0)]
    pub merge_tol: f64,
    /// Add a wall-clock timestamp to JSON reports.
    #[arg(long)]
    pub stamp: bool,
}

#[derive(Debug, Clone, Args)]
pub struct QuantizeArgs {
    /// CSV file of `value,weight` rows.
    #[arg(long)]
    pub input: PathBuf,
    /// Exponent: a real >= 1 or `inf`.
    #[arg(long, value_parser = parse_p)]
    pub p: PNorm,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "dp")]
    pub solver: Solver,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Number of first-boundary candidates for the sweep solver.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct VariationArgs {
    /// CSV file, or a directory of CSV files for batch mode.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_p)]
    pub p: PNorm,
    /// Single k (default 1 unless --k-max is given).
    #[arg(long)]
    pub k: Option<usize>,
    /// Table for k = 1..=k_max.
    #[arg(long)]
    pub k_max: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(args_conflicts_with_subcommands = true)]
pub struct UaCommand {
    #[command(subcommand)]
    pub action: Option<UaAction>,
    #[command(flatten)]
    pub family: UaArgs,
}

#[derive(Debug, Clone, Subcommand)]
pub enum UaAction {
    /// Builds the adversarial member f_N and checks its lower bound.
    Adversarial(AdversarialArgs),
}

#[derive(Debug, Clone, Args)]
pub struct UaArgs {
    /// Family members: CSV files or directories of CSV files.
    #[arg(long)]
    pub input: Vec<PathBuf>,
    #[arg(long, value_parser = parse_p)]
    pub p: Option<PNorm>,
    /// Largest k of the decay curves (default: largest member size).
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub eps: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct AdversarialArgs {
    #[arg(long)]
    pub r: u32,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_parser = parse_p)]
    pub p: PNorm,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CoveringArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, required = true)]
    pub eps: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

fn parse_p(s: &str) -> Result<PNorm, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(PNorm::Infinity);
    }
    let p: f64 = s.parse().map_err(|_| format!("`{s}` is not a number or `inf`"))?;
    if p.is_finite() && p >= 1.0 {
        Ok(PNorm::Finite(p))
    } else if p == f64::INFINITY {
        Ok(PNorm::Infinity)
    } else {
        Err(format!("p must be at least 1, got {s}"))
    }
}
