mod config;
mod data;
mod dr;
mod inputs;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::FileConfig;

/// Day-ahead load forecasting and PSO/DE demand-response scheduling.
#[derive(Debug, Parser)]
#[command(name = "gridshift", version)]
struct Cli {
    /// Master seed; every component derives its own seed from it
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// TOML file with problem keys: w1, w2, alpha, gamma_lo, gamma_hi, peak_cap
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic hourly dataset
    Synth(data::SynthArgs),
    /// Train the load forecaster
    Train(data::TrainArgs),
    /// Forecast one day with a trained model
    Predict(data::PredictArgs),
    /// Optimize one day's schedule with PSO or DE
    Optimize(dr::OptimizeArgs),
    /// PSO over a grid of (w1, w2) pairs
    Sweep(dr::SweepArgs),
    /// PSO and DE on the same problem with matched budgets
    Compare(dr::CompareArgs),
    /// Check PSO and DE against exhaustive grid search on a few free hours
    Verify(dr::VerifyArgs),
}

pub struct Globals {
    pub seed: u64,
    pub out: PathBuf,
    pub config: FileConfig,
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let g = Globals {
        seed: cli.seed,
        out: cli.out,
        config,
    };
    match cli.command {
        Command::Synth(a) => data::synth(&g, &a),
        Command::Train(a) => data::train(&g, &a),
        Command::Predict(a) => data::predict(&g, &a),
        Command::Optimize(a) => dr::optimize(&g, &a),
        Command::Sweep(a) => dr::sweep(&g, &a),
        Command::Compare(a) => dr::compare(&g, &a),
        Command::Verify(a) => dr::verify(&g, &a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
