//! `regchange`: synthesize unregistered change-detection corpora, run the
//! network, evaluate predictions, tabulate corpora and render panels.
//!
//! Exit status is 0 on success, 1 when any item failed and 2 for invalid
//! configuration.

mod config;
mod eval;
mod fixture;
mod forward;
mod inspect;
mod pred;
mod stats;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Failed(String),
}

impl From<regchange::Error> for CliError {
    fn from(e: regchange::Error) -> Self {
        match e {
            regchange::Error::Config(msg) => CliError::Config(msg),
            other => CliError::Failed(other.to_string()),
        }
    }
}

/// Number of items that failed while the command as a whole ran.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: usize,
}

/// Flags shared by every subcommand.
#[derive(Debug, Default, clap::Args)]
pub struct Common {
    /// `key = value` settings file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

impl Common {
    pub fn output_str(&self) -> Option<String> {
        self.output.as_ref().map(|p| p.display().to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "regchange", version, about = "Change detection on unregistered image pairs")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an unregistered corpus with flow, validity and change labels.
    Synth(synth::SynthArgs),
    /// Predict flow and change probabilities for every sample of a corpus.
    Forward(forward::ForwardArgs),
    /// Score predictions against ground truth.
    Eval(eval::EvalArgs),
    /// Tabulate images and changed / unchanged pixels per event and split.
    Stats(stats::StatsArgs),
    /// Render source, target, warped and change panels.
    Inspect(inspect::InspectArgs),
    /// Write the small procedurally generated registered corpus.
    MakeFixture {
        /// Side length of the square images.
        #[arg(long)]
        size: Option<usize>,
    },
    /// Write freshly initialized weights.
    InitWeights {
        #[arg(long)]
        arch: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let c = &cli.common;
    let result = match &cli.command {
        Command::Synth(a) => synth::run(c, a),
        Command::Forward(a) => forward::run(c, a),
        Command::Eval(a) => eval::run(c, a),
        Command::Stats(a) => stats::run(c, a),
        Command::Inspect(a) => inspect::run(c, a),
        Command::MakeFixture { size } => fixture::make_fixture(c, *size),
        Command::InitWeights { arch } => fixture::init(c, arch.as_deref()),
    };
    match result {
        Ok(Outcome { failures: 0 }) => ExitCode::SUCCESS,
        Ok(Outcome { failures }) => {
            log::error!("{failures} item(s) failed");
            ExitCode::from(1)
        }
        Err(e @ CliError::Config(_)) => {
            log::error!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(1)
        }
    }
}
