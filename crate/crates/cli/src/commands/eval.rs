//! `graphns eval`: score saved embeddings on a downstream task.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Subcommand};

use graphns_core::encoder::EmbeddingTable;
use graphns_core::eval::{
    auc_rank_sum, eval_classification, eval_recommendation, CandidateCount, MetricsReport,
};
use graphns_core::graph::{load_edge_list, load_label_file, read_edge_list};

use crate::commands::{ensure_dir, write_json};
use crate::UsageError;

#[derive(Subcommand, Debug)]
pub enum EvalCommand {
    /// Recommendation ranking: MRR and Hits@k against sampled candidates.
    Rec(RecArgs),
    /// Link prediction AUC over a split produced by `graphns split`.
    Lp(LpArgs),
    /// Multi-label node classification with one-vs-rest logistic regression.
    Classify(ClassifyArgs),
}

#[derive(Args, Debug)]
pub struct RecArgs {
    /// Embedding file written by `graphns train`.
    #[arg(long)]
    pub emb: PathBuf,
    /// Training edge list (defines candidate items and per-user exclusions).
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Test pair file "user<TAB>item".
    #[arg(long)]
    pub test: PathBuf,
    /// Additional pair files to exclude from candidates (e.g. validation).
    #[arg(long)]
    pub exclude: Vec<PathBuf>,
    /// Candidates per pair: a number or ALL.
    #[arg(long, default_value = "ALL")]
    pub m: String,
    /// Comma-separated Hits@k cutoffs.
    #[arg(long, default_value = "10,30", value_delimiter = ',')]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write metrics.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LpArgs {
    #[arg(long)]
    pub emb: PathBuf,
    /// split.json from `graphns split`.
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub emb: PathBuf,
    /// Edge list that defines the node vocabulary.
    #[arg(long)]
    pub edges: PathBuf,
    /// Label file "node<TAB>label1,label2,...".
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    pub train_ratio: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn emit(report: &MetricsReport, out: Option<&PathBuf>) -> Result<i32> {
    println!("{}", report.to_json_string());
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_json(&dir.join("metrics.json"), report)?;
    }
    Ok(0)
}

pub fn run(cmd: EvalCommand) -> Result<i32> {
    match cmd {
        EvalCommand::Rec(args) => {
            let m = if args.m.eq_ignore_ascii_case("all") {
                CandidateCount::All
            } else {
                let n: usize = args
                    .m
                    .parse()
                    .map_err(|_| UsageError(format!("--m must be a number or ALL, got '{}'", args.m)))?;
                CandidateCount::M(n)
            };
            let mut data =
                read_edge_list(&args.edges, None).context("loading training edges")?;
            let train_edges = data.edges.clone();
            let test = data
                .read_pairs_extending(&args.test)
                .context("loading test pairs")?;
            let mut extra = Vec::new();
            for path in &args.exclude {
                extra.extend(
                    data.read_pairs_extending(path)
                        .context("loading exclude pairs")?,
                );
            }
            if let Some(partition) = &args.partition {
                data.attach_partition(partition)
                    .context("loading partition file")?;
            }
            let graph = data.graph_from(&train_edges, false)?;
            let table = EmbeddingTable::read(&args.emb).context("loading embeddings")?;
            let bound = table.bind(&graph).context("matching embeddings to graph")?;
            let report =
                eval_recommendation(&bound, &graph, &test, &extra, m, &args.k, args.seed)?;
            emit(&report, args.out.as_ref())
        }
        EvalCommand::Lp(args) => {
            let table = EmbeddingTable::read(&args.emb).context("loading embeddings")?;
            let split: serde_json::Value = serde_json::from_str(
                &std::fs::read_to_string(&args.split)
                    .with_context(|| format!("reading {}", args.split.display()))?,
            )
            .context("parsing split.json")?;
            let score_pairs = |key: &str| -> Result<Vec<f64>> {
                let pairs = split
                    .get(key)
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| anyhow::anyhow!("split.json is missing '{key}'"))?;
                pairs
                    .iter()
                    .map(|pair| {
                        let a = pair[0].as_str().unwrap_or_default();
                        let b = pair[1].as_str().unwrap_or_default();
                        let va = table
                            .vector(a)
                            .ok_or_else(|| anyhow::anyhow!("no embedding for node '{a}'"))?;
                        let vb = table
                            .vector(b)
                            .ok_or_else(|| anyhow::anyhow!("no embedding for node '{b}'"))?;
                        Ok(va.iter().zip(vb).map(|(x, y)| x * y).sum())
                    })
                    .collect()
            };
            let pos = score_pairs("test_pos")?;
            let neg = score_pairs("test_neg")?;
            if pos.is_empty() || neg.is_empty() {
                return Err(anyhow::anyhow!("split.json has empty test sets"));
            }
            let auc = auc_rank_sum(&pos, &neg);
            let mut report = MetricsReportBuilder::link_prediction(auc, pos.len(), neg.len());
            report.config = serde_json::json!({
                "task": "link_prediction",
                "split": args.split.display().to_string(),
            });
            emit(&report, args.out.as_ref())
        }
        EvalCommand::Classify(args) => {
            let graph =
                load_edge_list(&args.edges, false, None).context("loading vocabulary edges")?;
            let table = EmbeddingTable::read(&args.emb).context("loading embeddings")?;
            let bound = table.bind(&graph).context("matching embeddings to graph")?;
            let (labels, vocab) =
                load_label_file(&args.labels, &graph).context("loading labels")?;
            let dim = table.dim();
            let flat: Vec<f64> = (0..graph.num_nodes())
                .flat_map(|v| bound.row(v).to_vec())
                .collect();
            let report = eval_classification(
                &flat,
                dim,
                &labels,
                vocab.len(),
                args.train_ratio,
                args.seed,
            )?;
            emit(&report, args.out.as_ref())
        }
    }
}

/// Small helper because `MetricsReport` fields are crate-built elsewhere.
struct MetricsReportBuilder;

impl MetricsReportBuilder {
    fn link_prediction(auc: f64, pos: usize, neg: usize) -> MetricsReport {
        let mut metrics = std::collections::BTreeMap::new();
        metrics.insert("auc".to_string(), auc);
        let mut counts = std::collections::BTreeMap::new();
        counts.insert("test_pos".to_string(), pos as u64);
        counts.insert("test_neg".to_string(), neg as u64);
        MetricsReport {
            metrics,
            counts,
            config: serde_json::Value::Null,
            seed: 0,
        }
    }
}
