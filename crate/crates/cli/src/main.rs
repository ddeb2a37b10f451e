//! `wclt`: command-line front end for the Wasserstein cost estimators.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "wclt",
    version,
    about = "Estimate Wasserstein costs from paired samples and quantify their uncertainty"
)]
struct Cli {
    /// Write the main output here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Cap the number of worker threads.
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point estimate from a CSV sample or a generated one.
    Estimate(commands::EstimateArgs),
    /// Asymptotic variance of the estimator.
    Variance(commands::VarianceArgs),
    /// Check the tail and cost conditions behind the CLT.
    Check(commands::CheckArgs),
    /// Draw a paired sample and write it as CSV.
    Sample(commands::SampleArgs),
    /// Monte Carlo study of the CLT from a JSON config.
    Mc(commands::McArgs),
}

fn run(cli: Cli) -> Result<u8, CliError> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Estimate(a) => commands::estimate(a, out),
        Command::Variance(a) => commands::variance(a, out),
        Command::Check(a) => commands::check(a, out),
        Command::Sample(a) => commands::sample(a, out),
        Command::Mc(a) => commands::mc(a, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
