//! `repcount`: count repetitions in pose traces and frame sequences,
//! generate synthetic data, and score predictions against ground truth.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{count, eval, flow, synth};

#[derive(Debug, Parser)]
#[command(name = "repcount", version, about = "Exercise repetition counter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay a pose trace and/or frame sequence and report the count.
    Count(count::Args),
    /// Score predicted counts against ground truth.
    Eval(eval::Args),
    /// Generate synthetic traces, frames and a ground-truth manifest.
    Synth(synth::Args),
    /// Per-frame optical-flow diagnostics for a frame sequence.
    Flow(flow::Args),
}

/// Failure classes map to distinct exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or malformed input, or an output that cannot be written.
    Input(anyhow::Error),
    /// Invalid configuration or arguments.
    Config(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Config(_) => 2,
        }
    }
}

pub type Outcome = Result<(), Failure>;

pub fn input_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

pub fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Count(args) => count::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Synth(args) => synth::run(args),
        Command::Flow(args) => flow::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (Failure::Input(e) | Failure::Config(e)) = &failure;
            eprintln!("error: {e:#}");
            ExitCode::from(failure.code())
        }
    }
}
