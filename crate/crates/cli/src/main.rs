//! `gpcn`: batch driver for training, diagnostics, bound evaluation and
//! synthetic data generation.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numeric failure.

mod commands;
mod config;
mod manifest;

use clap::{Args, Parser, Subcommand};
use gpcn::data::Format;
use gpcn::graph::Symmetrize;
use gpcn::models::Coefficients;
use gpcn::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "gpcn", version, about = "Graph polynomial convolution networks")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

/// Flags accepted by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Experiment configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the split seeds with a single seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for grid and ablation runs.
    #[arg(long, global = true, env = "PGCN_THREADS")]
    pub jobs: Option<usize>,
    /// Output directory (or file for `synth`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Dataset file format.
    #[arg(long, global = true, value_parser = parse_from_str::<Format>)]
    pub format: Option<Format>,
    #[arg(long, global = true, value_parser = parse_from_str::<Symmetrize>)]
    pub symmetrize: Option<Symmetrize>,
    /// Expansion coefficients for the polynomial form and the fixed-γ bound.
    #[arg(long, global = true, value_parser = parse_from_str::<Coefficients>)]
    pub coefficients: Option<Coefficients>,
    /// Round forward values to single precision during training.
    #[arg(long, global = true)]
    pub f32: bool,
    /// Divide each feature row by its L1 norm.
    #[arg(long, global = true)]
    pub row_normalize: bool,
    /// Record wall-clock times in result tables (otherwise written as 0 so
    /// tables are byte-identical across runs).
    #[arg(long, global = true)]
    pub timing: bool,
}

fn parse_from_str<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train over every configured split; writes results.csv and checkpoints.
    Train,
    /// Edge and class-corrected homophily of a dataset.
    Homophily { dataset: PathBuf },
    /// Eigenvalues of the normalized adjacency.
    Spectrum {
        dataset: PathBuf,
        /// Number of largest eigenvalues, or `all`.
        #[arg(long, default_value = "all")]
        k: String,
    },
    /// Evaluate a generalization bound for a trained checkpoint.
    Bound(commands::BoundArgs),
    /// One-factor-at-a-time sweep over γ, L and dropout.
    Ablate {
        /// Sweep spec (TOML); defaults to the config's `[sweep]` or the
        /// standard sweep.
        #[arg(long)]
        sweep: Option<PathBuf>,
    },
    /// Hyperparameter grid search.
    Grid {
        /// Grid spec (TOML); defaults to the config's `[grid]`.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Generate a stochastic block model dataset.
    Synth(commands::SynthArgs),
    /// Run the built-in invariant suite.
    Verify,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::SpectrumTooLarge { .. } => 1,
        Error::Numeric(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let g = &cli.global;
    let result = match cli.command {
        Command::Train => commands::train(g),
        Command::Homophily { dataset } => commands::homophily(g, &dataset),
        Command::Spectrum { dataset, k } => commands::spectrum(g, &dataset, &k),
        Command::Bound(args) => commands::bound(g, &args),
        Command::Ablate { sweep } => commands::ablate(g, sweep.as_deref()),
        Command::Grid { grid } => commands::grid(g, grid.as_deref()),
        Command::Synth(args) => commands::synth(g, &args),
        Command::Verify => commands::verify(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
