//! `qemlab`: fit, profile, cost, validate and synthesize Gaussian mixtures
//! from the command line.

mod commands;
mod config;
mod error;
mod io;

use clap::{Parser, Subcommand};

use commands::{CostArgs, FitArgs, ProfileArgs, SynthArgs, ValidateArgs};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "qemlab", version, about = "Classical emulation of quantum EM for Gaussian mixtures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a mixture, optionally through the noisy channel. Writes model.json and trace.csv.
    Fit(FitArgs),
    /// Measure the runtime parameters of data and model. Writes profile.json and table.txt.
    Profile(ProfileArgs),
    /// Evaluate the per-iteration cost terms. Writes cost.json and curves.csv.
    Cost(CostArgs),
    /// Run a Monte-Carlo validation suite. Writes validation.json.
    Validate(ValidateArgs),
    /// Sample a ground-truth mixture and a dataset. Writes dataset.csv and truth.json.
    Synth(SynthArgs),
}

/// `QEMLAB_THREADS` caps the rayon pool.
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("QEMLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config(format!("QEMLAB_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Fit(a) => commands::cmd_fit(&a),
        Command::Profile(a) => commands::cmd_profile(&a),
        Command::Cost(a) => commands::cmd_cost(&a),
        Command::Validate(a) => commands::cmd_validate(&a),
        Command::Synth(a) => commands::cmd_synth(&a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
