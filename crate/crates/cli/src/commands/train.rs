//! `graphns train`: wire a graph, an encoder, a positive sampler, and a
//! negative sampling strategy into one training run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde_json::json;

use graphns_core::encoder::{write_embeddings, Encoder, LookupEncoder, LookupMode, SageEncoder};
use graphns_core::eval::{eval_recommendation, CandidateCount};
use graphns_core::graph::{read_edge_list, EdgeListData, Graph};
use graphns_core::rng;
use graphns_core::sampling::{
    ExcludeRule, McnsParams, NegativeSampler, NegativeSamplerKind, PositiveKind, PositiveSampler,
};
use graphns_core::train::{train_mcns, train_sampled_nce, LossKind, TrainConfig, TrainReport};

use crate::commands::{ensure_dir, write_json};
use crate::runconfig::{resolve, IniConfig};
use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EncoderChoice {
    Lookup,
    Sage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerChoice {
    Uniform,
    DegreePower,
    Dns,
    Warp,
    InverseDns,
    Mcns,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PositiveChoice {
    Edge,
    Walk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossChoice {
    Nce,
    Hinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreChoice {
    /// Raw inner products.
    Dot,
    /// Unit-normalized inner products (lookup encoder only).
    Cosine,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training edge list ("src<TAB>dst", '#' comments, optional weight).
    #[arg(long)]
    pub edges: PathBuf,
    /// Partition file tagging every node "node<TAB>U|I".
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Validation pair file for early stopping.
    #[arg(long)]
    pub valid: Option<PathBuf>,
    /// Held-out test pair file; copied next to the outputs for `eval`.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Cross-validation fold index; partitions --edges into --folds parts,
    /// holds out this part as test and the last part as validation.
    #[arg(long)]
    pub fold: Option<usize>,
    /// Number of parts for --fold (the last is always validation).
    #[arg(long)]
    pub folds: Option<usize>,
    /// Seed for the fold partition (kept apart from --seed so different
    /// training seeds share folds).
    #[arg(long)]
    pub fold_seed: Option<u64>,

    #[arg(long, value_enum, default_value_t = EncoderChoice::Lookup)]
    pub encoder: EncoderChoice,
    #[arg(long, value_enum)]
    pub sampler: Option<SamplerChoice>,
    #[arg(long, value_enum)]
    pub positive: Option<PositiveChoice>,

    /// Embedding dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Margin for the hinge loss and WARP.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Negatives per positive.
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, value_enum)]
    pub loss: Option<LossChoice>,
    /// Pair score form for the lookup encoder.
    #[arg(long, value_enum)]
    pub score: Option<ScoreChoice>,
    /// Add a trainable per-node context bias to training scores (lookup
    /// encoder only); ranking embeddings never include it.
    #[arg(long)]
    pub bias: bool,
    #[arg(long)]
    pub seed: Option<u64>,

    /// Degree exponent for --sampler degree-power.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Sub-linear exponent for --sampler mcns, in (0,1).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Positive clamp floor for the chain target.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Nearby-candidate list size for the chain proposal.
    #[arg(long)]
    pub k_local: Option<usize>,
    /// Chain warm-up steps per pass.
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Candidate draws for --sampler dns / inverse-dns.
    #[arg(long)]
    pub dns_candidates: Option<usize>,
    #[arg(long)]
    pub warp_max_tries: Option<usize>,
    /// Also reject direct neighbors of the central node when drawing
    /// negatives.
    #[arg(long)]
    pub exclude_neighbors: bool,

    /// Window, walk count, and length for --positive walk.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub walks_per_node: Option<usize>,
    #[arg(long)]
    pub walk_length: Option<usize>,

    /// Mean-aggregator options (--encoder sage).
    #[arg(long)]
    pub feature_dim: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub neighbor_samples: Option<usize>,

    /// Validation candidates per pair (recommendation MRR early stopping).
    #[arg(long)]
    pub valid_m: Option<usize>,
    /// Epochs between validation evaluations (0 disables).
    #[arg(long)]
    pub eval_every: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    /// Optimizer step per negative instead of per positive group.
    #[arg(long)]
    pub literal_updates: bool,
    #[arg(long)]
    pub workers: Option<usize>,

    /// Flat "key = value" config file; CLI flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (emb.txt, loss.csv, meta.json).
    #[arg(long)]
    pub out: PathBuf,
}

struct ResolvedRun {
    train_config: TrainConfig,
    sampler: SamplerChoice,
    positive: PositiveKind,
    score: ScoreChoice,
    bias: bool,
    beta: f64,
    mcns: McnsParams,
    dns_candidates: usize,
    warp_max_tries: usize,
    exclude: ExcludeRule,
    valid_m: usize,
    fold: Option<(usize, usize, u64)>,
    feature_dim: usize,
    layers: usize,
    neighbor_samples: usize,
}

fn resolve_args(args: &TrainArgs) -> Result<ResolvedRun> {
    let ini = match &args.config {
        Some(path) => IniConfig::load(path)?,
        None => IniConfig::default(),
    };
    let sampler = match args.sampler {
        Some(s) => s,
        None => match ini.get::<String>("sampler")? {
            Some(name) => SamplerChoice::from_str(&name, true)
                .map_err(|_| UsageError(format!("unknown sampler '{name}' in config")))?,
            None => SamplerChoice::Mcns,
        },
    };
    let positive_choice = match args.positive {
        Some(p) => p,
        None => match ini.get::<String>("positive")? {
            Some(name) => PositiveChoice::from_str(&name, true)
                .map_err(|_| UsageError(format!("unknown positive sampler '{name}' in config")))?,
            None => PositiveChoice::Edge,
        },
    };
    let loss = match args.loss {
        Some(l) => l,
        None => match ini.get::<String>("loss")? {
            Some(name) => LossChoice::from_str(&name, true)
                .map_err(|_| UsageError(format!("unknown loss '{name}' in config")))?,
            // The chain loop is defined with the margin loss; everything
            // else defaults to the cross-entropy form.
            None => match sampler {
                SamplerChoice::Mcns => LossChoice::Hinge,
                _ => LossChoice::Nce,
            },
        },
    };

    let dim = resolve(&args.dim, &ini, "dim", 256)?;
    let seed = resolve(&args.seed, &ini, "seed", 1)?;
    let alpha = resolve(&args.alpha, &ini, "alpha", 0.75)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(UsageError(format!("--alpha must lie in (0,1), got {alpha}")).into());
    }
    let epsilon = resolve(&args.epsilon, &ini, "epsilon", 1e-4)?;
    if epsilon <= 0.0 {
        return Err(UsageError(format!("--epsilon must be positive, got {epsilon}")).into());
    }
    let gamma = resolve(&args.gamma, &ini, "gamma", 0.1)?;
    if gamma < 0.0 {
        return Err(UsageError(format!("--gamma must be non-negative, got {gamma}")).into());
    }

    let train_config = TrainConfig {
        learning_rate: resolve(&args.lr, &ini, "lr", 1e-3)?,
        dim,
        margin: gamma,
        batch_size: resolve(&args.batch_size, &ini, "batch_size", 256)?,
        negatives_per_positive: resolve(&args.negatives, &ini, "negatives", 1)?,
        epochs: resolve(&args.epochs, &ini, "epochs", 10)?,
        loss: match loss {
            LossChoice::Nce => LossKind::Nce,
            LossChoice::Hinge => LossKind::Hinge,
        },
        seed,
        eval_every: resolve(&args.eval_every, &ini, "eval_every", 1)?,
        patience: resolve(&args.patience, &ini, "patience", 5)?,
        literal_updates: args.literal_updates
            || ini.get::<bool>("literal_updates")?.unwrap_or(false),
        workers: resolve(&args.workers, &ini, "workers", 1)?,
    };

    let positive = match positive_choice {
        PositiveChoice::Edge => PositiveKind::DirectEdge,
        PositiveChoice::Walk => PositiveKind::WalkWindow {
            window: resolve(&args.window, &ini, "window", 5)?,
            walks_per_node: resolve(&args.walks_per_node, &ini, "walks_per_node", 10)?,
            walk_length: resolve(&args.walk_length, &ini, "walk_length", 40)?,
        },
    };

    let fold = match args.fold {
        None => None,
        Some(f) => {
            let folds = resolve(&args.folds, &ini, "folds", 11)?;
            if folds < 3 {
                return Err(UsageError("--folds must be at least 3".into()).into());
            }
            if f >= folds - 1 {
                return Err(UsageError(format!(
                    "--fold must lie in 0..{} (the last part is validation)",
                    folds - 1
                ))
                .into());
            }
            Some((f, folds, resolve(&args.fold_seed, &ini, "fold_seed", 42)?))
        }
    };

    let score = match args.score {
        Some(s) => s,
        None => match ini.get::<String>("score")? {
            Some(name) => ScoreChoice::from_str(&name, true)
                .map_err(|_| UsageError(format!("unknown score form '{name}' in config")))?,
            None => ScoreChoice::Dot,
        },
    };
    Ok(ResolvedRun {
        train_config,
        sampler,
        positive,
        score,
        bias: args.bias || ini.get::<bool>("bias")?.unwrap_or(false),
        beta: resolve(&args.beta, &ini, "beta", 0.75)?,
        mcns: McnsParams {
            alpha,
            epsilon,
            k_local: resolve(&args.k_local, &ini, "k_local", 10)?,
            warmup: resolve(&args.warmup, &ini, "warmup", 20)?,
        },
        dns_candidates: resolve(&args.dns_candidates, &ini, "dns_candidates", 5)?,
        warp_max_tries: resolve(&args.warp_max_tries, &ini, "warp_max_tries", 100)?,
        exclude: if args.exclude_neighbors || ini.get::<bool>("exclude_neighbors")?.unwrap_or(false)
        {
            ExcludeRule::CentralAndNeighbors
        } else {
            ExcludeRule::CentralOnly
        },
        valid_m: resolve(&args.valid_m, &ini, "valid_m", 200)?,
        fold,
        feature_dim: resolve(&args.feature_dim, &ini, "feature_dim", dim)?,
        layers: resolve(&args.layers, &ini, "layers", 1)?,
        neighbor_samples: resolve(&args.neighbor_samples, &ini, "neighbor_samples", 10)?,
    })
}

struct PreparedData {
    graph: Graph,
    valid_pairs: Vec<(usize, usize)>,
    test_pairs: Vec<(usize, usize)>,
}

fn prepare_data(args: &TrainArgs, run: &ResolvedRun) -> Result<PreparedData> {
    let mut data: EdgeListData =
        read_edge_list(&args.edges, None).context("loading training edges")?;
    let (train_edges, valid_pairs, test_pairs) = match run.fold {
        Some((fold, folds, fold_seed)) => {
            if args.valid.is_some() || args.test.is_some() {
                return Err(UsageError(
                    "--fold derives validation and test internally; drop --valid/--test".into(),
                )
                .into());
            }
            let slices = graphns_core::graph::fold_partition(data.edges.len(), folds, fold_seed);
            let test: Vec<(usize, usize)> =
                slices[fold].iter().map(|&i| data.edges[i]).collect();
            let valid: Vec<(usize, usize)> =
                slices[folds - 1].iter().map(|&i| data.edges[i]).collect();
            let held: std::collections::HashSet<usize> = slices[fold]
                .iter()
                .chain(slices[folds - 1].iter())
                .copied()
                .collect();
            let train: Vec<(usize, usize)> = data
                .edges
                .iter()
                .enumerate()
                .filter(|(i, _)| !held.contains(i))
                .map(|(_, &e)| e)
                .collect();
            (train, valid, test)
        }
        None => {
            let valid = match &args.valid {
                Some(path) => data.read_pairs_extending(path).context("loading --valid")?,
                None => Vec::new(),
            };
            let test = match &args.test {
                Some(path) => data.read_pairs_extending(path).context("loading --test")?,
                None => Vec::new(),
            };
            (data.edges.clone(), valid, test)
        }
    };
    if let Some(partition) = &args.partition {
        data.attach_partition(partition)
            .context("loading partition file")?;
    }
    let graph = data.graph_from(&train_edges, false)?;
    Ok(PreparedData {
        graph,
        valid_pairs,
        test_pairs,
    })
}

fn train_encoder<E: Encoder>(
    encoder: &mut E,
    graph: &Graph,
    run: &ResolvedRun,
    valid_pairs: &[(usize, usize)],
) -> Result<TrainReport> {
    let config = &run.train_config;
    let mut positive = PositiveSampler::new(graph, run.positive, config.seed)?;
    let valid_m = run.valid_m;
    type Validator<'a, E> = Box<dyn FnMut(&E) -> f64 + 'a>;
    let mut validator: Option<Validator<E>> = if valid_pairs.is_empty() {
        None
    } else {
        let pairs = valid_pairs.to_vec();
        let seed = config.seed;
        Some(Box::new(move |enc: &E| {
            eval_recommendation(
                enc,
                graph,
                &pairs,
                &[],
                CandidateCount::M(valid_m),
                &[],
                rng::derive(seed, 0x7a1),
            )
            .map(|r| r.get("mrr").unwrap_or(0.0))
            .unwrap_or(0.0)
        }))
    };
    let validate: Option<&mut dyn FnMut(&E) -> f64> =
        validator.as_mut().map(|b| b.as_mut() as &mut dyn FnMut(&E) -> f64);

    let report = match run.sampler {
        SamplerChoice::Mcns => {
            train_mcns(graph, encoder, &mut positive, &run.mcns, config, validate)?
        }
        other => {
            let kind = match other {
                SamplerChoice::Uniform => NegativeSamplerKind::Uniform,
                SamplerChoice::DegreePower => NegativeSamplerKind::DegreePower { beta: run.beta },
                SamplerChoice::Dns => NegativeSamplerKind::Dns {
                    candidate_size: run.dns_candidates,
                },
                SamplerChoice::InverseDns => NegativeSamplerKind::InverseDns {
                    candidate_size: run.dns_candidates,
                },
                SamplerChoice::Warp => NegativeSamplerKind::Warp {
                    max_tries: run.warp_max_tries,
                },
                SamplerChoice::Mcns => unreachable!(),
            };
            let negative = NegativeSampler::new(graph, kind, run.exclude)?;
            train_sampled_nce(graph, encoder, &mut positive, &negative, config, validate)?
        }
    };
    Ok(report)
}

fn write_pairs(path: &Path, graph: &Graph, pairs: &[(usize, usize)]) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for &(a, b) in pairs {
        writeln!(out, "{}\t{}", graph.label(a), graph.label(b))?;
    }
    Ok(())
}

pub fn run(args: TrainArgs) -> Result<i32> {
    let run = resolve_args(&args)?;
    let prepared = prepare_data(&args, &run)?;
    let graph = &prepared.graph;
    ensure_dir(&args.out)?;

    let config = &run.train_config;
    let (report, export): (TrainReport, Vec<u8>) = match args.encoder {
        EncoderChoice::Lookup => {
            let mut encoder =
                LookupEncoder::init(graph.num_nodes(), config.dim, LookupMode::Dual, config.seed)?
                    .with_cosine_scores(run.score == ScoreChoice::Cosine)
                    .with_context_bias(run.bias);
            let report = train_encoder(&mut encoder, graph, &run, &prepared.valid_pairs)?;
            let mut buf = Vec::new();
            write_embeddings(&mut buf, graph, &encoder)?;
            (report, buf)
        }
        EncoderChoice::Sage => {
            if run.score == ScoreChoice::Cosine || run.bias {
                return Err(UsageError(
                    "--score cosine and --bias are only supported by the lookup encoder".into(),
                )
                .into());
            }
            let layer_dims: Vec<usize> = match run.layers {
                1 => vec![config.dim],
                2 => vec![config.dim, config.dim],
                n => {
                    return Err(UsageError(format!("--layers must be 1 or 2, got {n}")).into());
                }
            };
            let mut encoder = SageEncoder::init(
                graph.num_nodes(),
                run.feature_dim,
                &layer_dims,
                run.neighbor_samples,
                config.seed,
            )?;
            let report = train_encoder(&mut encoder, graph, &run, &prepared.valid_pairs)?;
            let mut buf = Vec::new();
            write_embeddings(&mut buf, graph, &encoder)?;
            (report, buf)
        }
    };

    std::fs::write(args.out.join("emb.txt"), export)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    std::fs::write(args.out.join("loss.csv"), csv)?;
    if !prepared.test_pairs.is_empty() {
        write_pairs(&args.out.join("test.tsv"), graph, &prepared.test_pairs)?;
    }
    if !prepared.valid_pairs.is_empty() {
        write_pairs(&args.out.join("valid.tsv"), graph, &prepared.valid_pairs)?;
    }
    if run.fold.is_some() {
        // The training graph is an internal subset in fold mode; persist it
        // so `eval rec` can rebuild the same exclusions.
        let train_edges: Vec<(usize, usize)> = graph.edges().collect();
        write_pairs(&args.out.join("train.tsv"), graph, &train_edges)?;
    }

    let mut meta: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    meta.insert("task".into(), json!("train"));
    meta.insert("edges".into(), json!(args.edges.display().to_string()));
    meta.insert(
        "partition".into(),
        json!(args.partition.as_ref().map(|p| p.display().to_string())),
    );
    meta.insert("encoder".into(), json!(format!("{:?}", args.encoder).to_lowercase()));
    meta.insert("sampler".into(), json!(format!("{:?}", run.sampler).to_lowercase()));
    meta.insert("positive".into(), json!(format!("{:?}", run.positive)));
    meta.insert("loss".into(), json!(run.train_config.loss.to_string()));
    meta.insert("score".into(), json!(format!("{:?}", run.score).to_lowercase()));
    meta.insert("context_bias".into(), json!(run.bias));
    meta.insert("dim".into(), json!(config.dim));
    meta.insert("learning_rate".into(), json!(config.learning_rate));
    meta.insert("gamma".into(), json!(config.margin));
    meta.insert("batch_size".into(), json!(config.batch_size));
    meta.insert("negatives".into(), json!(config.negatives_per_positive));
    meta.insert("epochs".into(), json!(config.epochs));
    meta.insert("epochs_run".into(), json!(report.epochs_run));
    meta.insert("seed".into(), json!(config.seed));
    meta.insert("beta".into(), json!(run.beta));
    meta.insert("alpha".into(), json!(run.mcns.alpha));
    meta.insert("epsilon".into(), json!(run.mcns.epsilon));
    meta.insert("k_local".into(), json!(run.mcns.k_local));
    meta.insert("warmup".into(), json!(run.mcns.warmup));
    meta.insert("dns_candidates".into(), json!(run.dns_candidates));
    meta.insert("warp_max_tries".into(), json!(run.warp_max_tries));
    meta.insert(
        "exclude_neighbors".into(),
        json!(matches!(run.exclude, ExcludeRule::CentralAndNeighbors)),
    );
    meta.insert("workers".into(), json!(config.workers));
    meta.insert("literal_updates".into(), json!(config.literal_updates));
    meta.insert("eval_every".into(), json!(config.eval_every));
    meta.insert("patience".into(), json!(config.patience));
    meta.insert("valid_m".into(), json!(run.valid_m));
    meta.insert(
        "fold".into(),
        json!(run.fold.map(|(f, folds, seed)| json!({
            "index": f, "parts": folds, "fold_seed": seed
        }))),
    );
    meta.insert("num_nodes".into(), json!(graph.num_nodes()));
    meta.insert("num_train_edges".into(), json!(graph.num_edges()));
    meta.insert("valid_pairs".into(), json!(prepared.valid_pairs.len()));
    meta.insert("test_pairs".into(), json!(prepared.test_pairs.len()));
    meta.insert("stopped_early".into(), json!(report.stopped_early));
    meta.insert("best_validation_mrr".into(), json!(report.best_validation));
    meta.insert("skipped_pairs".into(), json!(report.skipped_pairs));
    meta.insert("negatives_drawn".into(), json!(report.negatives_drawn));
    // Dual-table encoders export each node's scoring-role table.
    meta.insert(
        "exported_table".into(),
        json!(if graph.is_bipartite() {
            "central(U)/context(I)"
        } else {
            "central"
        }),
    );
    write_json(&args.out.join("meta.json"), &meta)?;
    Ok(0)
}
