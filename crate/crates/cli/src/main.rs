//! `elemsub`: enumeration, orbit censuses and checks for elementary subalgebras.
//!
//! Exit codes: 0 success, 1 mathematical check failure, 2 usage or
//! configuration error, 3 budget or resource error.

mod cache;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use elemsub::evariety::{DEFAULT_FORM_CAP, DEFAULT_LINE_BUDGET};
use elemsub::Family;

/// Seed used by every randomized command unless `--seed` is given.
pub const DEFAULT_SEED: u64 = 24301;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Seeded search when the family supports it, otherwise naive.
    Auto,
    Naive,
    Seeded,
}

#[derive(Debug, Parser)]
#[command(name = "elemsub", version, about = "Elementary subalgebras of matrix Lie algebras over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Randomized checks of the exponential, logarithm and generalized powers.
    VerifySpringer,
    /// Lists the points of E(r, g)(F_q) as JSON lines.
    Enumerate,
    /// Partitions E(r, g)(F_q) into conjugation orbits.
    Orbits,
    /// Per-prime censuses matched across primes, with fitted polynomials.
    Census,
    /// Round trip and injectivity of the subalgebra-to-subgroup bijection.
    Bridge,
    /// Largest rank of a nonempty E(r, g), tabulated or by enumeration.
    Rmax,
    /// Summary tables from every cached census.
    Report,
}

#[derive(Debug, clap::Args)]
pub struct Opts {
    #[arg(long, global = true, default_value = "gl")]
    pub family: Family,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub r: Option<usize>,
    #[arg(long, global = true)]
    pub p: Option<u32>,
    /// Extension degree: work over F_q with q = p^d.
    #[arg(long, global = true, default_value_t = 1)]
    pub d: u32,
    #[arg(long, global = true, value_delimiter = ',')]
    pub primes: Vec<u32>,
    /// Trials for verify-springer (default 1000) and for the class-merge probe (default 20000).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_LINE_BUDGET)]
    pub budget_lines: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_FORM_CAP)]
    pub budget_forms: u64,
    #[arg(long, global = true, env = "ELEMSUB_CACHE_DIR", default_value = "elemsub-cache")]
    pub cache_dir: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Recompute even when a cached census exists.
    #[arg(long, global = true)]
    pub force: bool,
    #[arg(long, global = true, value_enum, default_value = "auto")]
    pub method: MethodArg,
    /// Root system for rmax, e.g. E8, A3, gl4.
    #[arg(long = "type", global = true)]
    pub root_type: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
