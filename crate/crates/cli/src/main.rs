//! `graphns` command line: ingestion, training, evaluation, theory
//! verification, and synthetic graph generation.
//!
//! Exit codes: 0 success, 1 data or runtime error, 2 usage error.

mod commands;
mod runconfig;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "graphns",
    about = "Graph embeddings with pluggable negative sampling",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train node embeddings and write emb.txt, loss.csv, meta.json.
    Train(Box<commands::train::TrainArgs>),
    /// Evaluate embeddings on a downstream task.
    #[command(subcommand)]
    Eval(commands::eval::EvalCommand),
    /// Hold out edges for link prediction (residual.tsv + split.json).
    Split(commands::split::SplitArgs),
    /// Run the theory verification suite and print a JSON report.
    VerifyTheory(commands::theory::VerifyArgs),
    /// Generate a synthetic edge list.
    #[command(subcommand)]
    Synth(commands::synth::SynthCommand),
}

/// An error that should surface as a usage problem (exit 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => commands::train::run(*args),
        Command::Eval(cmd) => commands::eval::run(cmd),
        Command::Split(args) => commands::split::run(args),
        Command::VerifyTheory(args) => commands::theory::run(args),
        Command::Synth(cmd) => commands::synth::run(cmd),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = if err.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            };
            std::process::exit(code);
        }
    }
}
