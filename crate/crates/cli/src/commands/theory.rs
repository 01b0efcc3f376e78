//! `graphns verify-theory`: run the numerical verification suite.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use graphns_core::theory::{verify_theory, VerifyConfig};

use crate::commands::{ensure_dir, write_json};
use crate::UsageError;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Random pairs for the optimum check.
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    /// Positive draws per refit.
    #[arg(long, default_value_t = 1000)]
    pub t: usize,
    /// Monte-Carlo refit trials.
    #[arg(long, default_value_t = 500)]
    pub trials: usize,
    /// Sub-linear exponent, in (0,1).
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    /// Negatives per positive.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Also write report.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: VerifyArgs) -> Result<i32> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(UsageError(format!("--alpha must lie in (0,1), got {}", args.alpha)).into());
    }
    if args.k == 0 {
        return Err(UsageError("--k must be at least 1".into()).into());
    }
    let cfg = VerifyConfig {
        pairs: args.pairs,
        max_n: 20,
        t: args.t,
        trials: args.trials,
        alpha: args.alpha,
        k: args.k,
        seed: args.seed,
    };
    let report = verify_theory(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        write_json(&dir.join("report.json"), &report)?;
    }
    Ok(if report.pass { 0 } else { 1 })
}
