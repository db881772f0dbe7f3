//! `musnoise`: musical-noise measures from the command line.
//!
//! Exit status: 0 on success, 1 when the inputs were valid but nothing could
//! be computed, 2 on usage or I/O errors. Data goes to stdout, diagnostics
//! to stderr.

mod common;
mod correlate;
mod distort;
mod measure;
mod respond;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use common::Uncomputable;

#[derive(Debug, Parser)]
#[command(name = "musnoise", version, about = "Kurtosis-based musical-noise measures")]
struct Cli {
    /// Worker threads for batch work.
    #[arg(long, global = true, env = "MUSNOISE_JOBS", value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare a processed signal against its reference.
    Measure(measure::MeasureArgs),
    /// Zero a random share of STFT bins and resynthesize.
    Distort(distort::DistortArgs),
    /// Response of the measures to increasing bin zeroing.
    Respond(respond::RespondArgs),
    /// Correlate measure values with listening-test scores.
    Correlate(correlate::CorrelateArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(usize::from(n)).build_global()?;
    }
    match cli.command {
        Command::Measure(a) => measure::run(a),
        Command::Distort(a) => distort::run(a),
        Command::Respond(a) => respond::run(a),
        Command::Correlate(a) => correlate::run(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Uncomputable>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
