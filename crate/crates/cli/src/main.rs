//! `checknn`: exact inference, verification and model transforms for small
//! ReLU networks.
//!
//! Exit codes: 0 property holds (or command succeeded), 1 counterexample
//! found, 2 timeout or unknown, 64 usage error, 65 malformed input data.

mod bench;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use checknn::matrix::Backend;
use checknn::verify::Engine;
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

#[derive(Parser)]
#[command(name = "checknn", version, about = "Exact inference and verification for ReLU networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one exact forward pass and print the outputs
    Infer(InferArgs),
    /// Check a property file against a model
    Verify(VerifyArgs),
    /// Zero the smallest-magnitude non-bias weights
    Prune(PruneArgs),
    /// Convert a rational model to integer weights
    Quantize(QuantizeArgs),
    /// Re-encode a model as sparse JSON or NNet text
    Convert(ConvertArgs),
    /// Time forward passes and verification across backends and engines
    Bench(BenchArgs),
}

#[derive(Args)]
pub struct ModelArgs {
    /// Model file (`.nnet` or sparse JSON)
    #[arg(long)]
    pub model: PathBuf,
    /// Matrix backend: dense, lazy or record
    #[arg(long, default_value = "dense", value_parser = parse_backend)]
    pub backend: Backend,
}

#[derive(Args)]
pub struct RenderArgs {
    /// Print exact rationals (`num/den`) instead of rounded decimals
    #[arg(long)]
    pub exact: bool,
    /// Significant digits for decimal output
    #[arg(long, default_value_t = 6)]
    pub precision: usize,
}

#[derive(Args)]
pub struct InferArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated input values (decimals or `p/q`)
    #[arg(long, allow_hyphen_values = true)]
    pub input: String,
    /// Class label file, one label per line
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Apply the NNet file's input normalisation first
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub render: RenderArgs,
}

/// Search and engine settings shared by `verify` and `bench`.
#[derive(Args, Clone)]
pub struct RunConfig {
    /// Branch-and-bound split budget
    #[arg(long, default_value_t = 10_000)]
    pub max_splits: usize,
    /// Branch-and-bound depth limit
    #[arg(long, default_value_t = 1_000)]
    pub max_depth: usize,
    /// Wall-clock limit in seconds
    #[arg(long, default_value_t = 300)]
    pub timeout_secs: u64,
    /// Grid step for the exhaustive engine
    #[arg(long, default_value_t = 1)]
    pub grid_step: u64,
    /// Sample count for the random engine
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Seed for the random engine
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for branch and bound
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Property file
    #[arg(long)]
    pub property: PathBuf,
    /// Engine: interval, exhaustive or random
    #[arg(long, default_value = "interval", value_parser = parse_engine)]
    pub engine: Engine,
    #[command(flatten)]
    pub run: RunConfig,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args)]
pub struct PruneArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Fraction of non-bias weights to zero, in [0, 1)
    #[arg(long)]
    pub fraction: String,
    /// Output JSON model
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct QuantizeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Positive integer scale
    #[arg(long)]
    pub scale: String,
    /// Output JSON model
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output file; `.nnet` writes NNet text, anything else sparse JSON
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Property file; adds verification rows
    #[arg(long)]
    pub property: Option<PathBuf>,
    /// Comma-separated backends
    #[arg(long, default_value = "dense,lazy,record")]
    pub backends: String,
    /// Comma-separated engines for verification rows
    #[arg(long, default_value = "interval")]
    pub engines: String,
    /// Forward-pass input; defaults to the property box center, else all ones
    #[arg(long, allow_hyphen_values = true)]
    pub input: Option<String>,
    /// Timed runs per row
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[command(flatten)]
    pub run: RunConfig,
    /// Write CSV here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse()
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Infer(args) => commands::infer(&args),
        Command::Verify(args) => commands::verify(&args),
        Command::Prune(args) => commands::prune(&args),
        Command::Quantize(args) => commands::quantize(&args),
        Command::Convert(args) => commands::convert(&args),
        Command::Bench(args) => bench::run(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("checknn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
