//! `graphns synth`: synthetic edge-list fixtures.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Subcommand};

use graphns_core::graph::synth;

use crate::UsageError;

#[derive(Subcommand, Debug)]
pub enum SynthCommand {
    /// Path graph 0-1-...-(n-1).
    Path(SizeArgs),
    /// Star with center 0.
    Star(SizeArgs),
    /// Barabasi-Albert preferential attachment.
    Ba(BaArgs),
    /// Random bipartite user-item graph; also writes <out>.parts.
    Bipartite(BipartiteArgs),
}

#[derive(Args, Debug)]
pub struct SizeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BaArgs {
    #[arg(long)]
    pub n: usize,
    /// Edges attached per new node.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BipartiteArgs {
    #[arg(long)]
    pub users: usize,
    #[arg(long)]
    pub items: usize,
    #[arg(long)]
    pub num_edges: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn write_edges(path: &Path, edges: &[(usize, usize)]) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    for &(a, b) in edges {
        writeln!(out, "{a}\t{b}")?;
    }
    Ok(())
}

pub fn run(cmd: SynthCommand) -> Result<i32> {
    match cmd {
        SynthCommand::Path(args) => {
            if args.n < 2 {
                return Err(UsageError("--n must be at least 2".into()).into());
            }
            write_edges(&args.out, &synth::path_edges(args.n))?;
        }
        SynthCommand::Star(args) => {
            if args.n < 2 {
                return Err(UsageError("--n must be at least 2".into()).into());
            }
            write_edges(&args.out, &synth::star_edges(args.n))?;
        }
        SynthCommand::Ba(args) => {
            let edges = synth::barabasi_albert_edges(args.n, args.m, args.seed)?;
            write_edges(&args.out, &edges)?;
        }
        SynthCommand::Bipartite(args) => {
            let edges = synth::bipartite_edges(args.users, args.items, args.num_edges, args.seed)?;
            write_edges(&args.out, &edges)?;
            let parts = args.out.with_extension("parts");
            use std::io::Write;
            let mut out = std::io::BufWriter::new(std::fs::File::create(&parts)?);
            for u in 0..args.users {
                writeln!(out, "{u}\tU")?;
            }
            for i in args.users..args.users + args.items {
                writeln!(out, "{i}\tI")?;
            }
        }
    }
    Ok(0)
}
