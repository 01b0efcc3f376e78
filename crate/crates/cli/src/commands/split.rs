//! `graphns split`: hold out edges for link prediction.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;

use graphns_core::graph::{load_edge_list, split_link_prediction};

use crate::commands::{ensure_dir, write_json};
use crate::UsageError;

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Fraction of edges to hold out, in (0,1).
    #[arg(long, default_value_t = 0.3)]
    pub holdout: f64,
    /// Work on the largest connected component when the input graph is
    /// disconnected (the split itself requires a connected graph).
    #[arg(long)]
    pub giant: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory (residual.tsv + split.json).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: SplitArgs) -> Result<i32> {
    if !(args.holdout > 0.0 && args.holdout < 1.0) {
        return Err(UsageError(format!(
            "--holdout must lie in (0,1), got {}",
            args.holdout
        ))
        .into());
    }
    let mut graph =
        load_edge_list(&args.edges, false, args.partition.as_deref()).context("loading edges")?;
    if args.giant && !graph.is_connected() {
        graph = graph.giant_component();
    }
    let split = split_link_prediction(&graph, args.holdout, args.seed)?;
    ensure_dir(&args.out)?;

    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(args.out.join("residual.tsv"))?);
    for (a, b) in split.residual.edges() {
        writeln!(out, "{}\t{}", graph.label(a), graph.label(b))?;
    }
    out.flush()?;

    let labelled = |pairs: &[(usize, usize)]| -> Vec<[String; 2]> {
        pairs
            .iter()
            .map(|&(a, b)| [graph.label(a).to_string(), graph.label(b).to_string()])
            .collect()
    };
    write_json(
        &args.out.join("split.json"),
        &json!({
            "edges": args.edges.display().to_string(),
            "holdout": args.holdout,
            "achieved_fraction": split.achieved_fraction,
            "seed": args.seed,
            "giant_component": args.giant,
            "num_nodes": graph.num_nodes(),
            "residual_edges": split.residual.num_edges(),
            "test_pos": labelled(&split.test_pos),
            "test_neg": labelled(&split.test_neg),
        }),
    )?;
    Ok(0)
}
