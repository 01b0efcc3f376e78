//! Evaluation protocols: recommendation ranking, link-prediction AUC, and
//! multi-label node classification.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::encoder::Scorer;
use crate::graph::Graph;
use crate::linalg::{dot, sigmoid};
use crate::rng;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty test set")]
    EmptyTestSet,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Named scalar results plus run metadata. Keys serialize in sorted order.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub metrics: BTreeMap<String, f64>,
    pub counts: BTreeMap<String, u64>,
    pub config: serde_json::Value,
    pub seed: u64,
}

impl MetricsReport {
    fn new(seed: u64, config: serde_json::Value) -> Self {
        MetricsReport {
            metrics: BTreeMap::new(),
            counts: BTreeMap::new(),
            config,
            seed,
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Rank of the true item among the candidates, counting ties against it:
/// `1 + #{score > true} + #{score == true}`. An empty candidate list ranks 1.
pub fn rank_against<S: Scorer>(
    scorer: &S,
    graph: &Graph,
    v: usize,
    u_true: usize,
    candidates: &[usize],
) -> usize {
    let central = scorer.central_embedding(graph, v);
    let true_score = dot(&central, &scorer.context_embedding(graph, u_true));
    let mut rank = 1;
    for &c in candidates {
        let s = dot(&central, &scorer.context_embedding(graph, c));
        if s >= true_score {
            rank += 1;
        }
    }
    rank
}

/// How many sampled candidates each test pair ranks against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateCount {
    /// Every valid item (the MovieLens convention).
    All,
    M(usize),
}

/// Recommendation evaluation: for each test pair `(user, item)` draw
/// candidate items that the user is not linked to anywhere (training graph,
/// test pairs, or extra exclusions), rank the true item by inner product,
/// and report MRR and Hits@k.
pub fn eval_recommendation<S: Scorer>(
    scorer: &S,
    graph: &Graph,
    test_pairs: &[(usize, usize)],
    extra_exclude: &[(usize, usize)],
    m: CandidateCount,
    ks: &[usize],
    seed: u64,
) -> Result<MetricsReport, EvalError> {
    if test_pairs.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let items = graph.candidate_nodes();
    let item_slot: HashMap<usize, usize> =
        items.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let dim = scorer.dim();

    // All context embeddings once; ranking is then one pass per pair.
    let mut context = vec![0.0; items.len() * dim];
    context
        .par_chunks_mut(dim)
        .zip(items.par_iter())
        .for_each(|(row, &item)| {
            row.copy_from_slice(&scorer.context_embedding(graph, item));
        });

    let mut excluded: HashMap<usize, HashSet<usize>> = HashMap::new();
    for &(u, v) in test_pairs.iter().chain(extra_exclude) {
        excluded.entry(u).or_default().insert(v);
    }
    // Items linked to the user in the training graph are never candidates.
    let users: HashSet<usize> = test_pairs.iter().map(|&(u, _)| u).collect();
    for &u in &users {
        excluded
            .entry(u)
            .or_default()
            .extend(graph.neighbors(u).iter().copied());
    }
    let empty = HashSet::new();

    struct PairOutcome {
        reciprocal: f64,
        rank: usize,
        shortfall: bool,
        candidates: usize,
    }

    let outcomes: Vec<PairOutcome> = test_pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(user, item))| {
            let banned = excluded.get(&user).unwrap_or(&empty);
            let central = scorer.central_embedding(graph, user);
            let true_slot = item_slot[&item];
            let true_score = dot(&central, &context[true_slot * dim..(true_slot + 1) * dim]);
            let mut worse_or_tied = 0usize;
            let mut scored = |slot: usize| {
                let s = dot(&central, &context[slot * dim..(slot + 1) * dim]);
                if s >= true_score {
                    worse_or_tied += 1;
                }
            };
            let mut shortfall = false;
            let used;
            match m {
                CandidateCount::All => {
                    used = items
                        .iter()
                        .enumerate()
                        .filter(|(_, &it)| it != item && !banned.contains(&it))
                        .map(|(slot, _)| slot)
                        .inspect(|&slot| scored(slot))
                        .count();
                }
                CandidateCount::M(want) => {
                    let valid: Vec<usize> = items
                        .iter()
                        .enumerate()
                        .filter(|(_, &it)| it != item && !banned.contains(&it))
                        .map(|(slot, _)| slot)
                        .collect();
                    if valid.len() <= want {
                        shortfall = valid.len() < want;
                        used = valid.len();
                        valid.into_iter().for_each(&mut scored);
                    } else {
                        let mut pool = valid;
                        let mut prng = rng::stream_rng(seed, idx as u64);
                        pool.partial_shuffle(&mut prng, want);
                        used = want;
                        pool.into_iter().take(want).for_each(&mut scored);
                    }
                }
            }
            let rank = 1 + worse_or_tied;
            PairOutcome {
                reciprocal: 1.0 / rank as f64,
                rank,
                shortfall,
                candidates: used,
            }
        })
        .collect();

    let n = outcomes.len() as f64;
    let mrr = outcomes.iter().map(|o| o.reciprocal).sum::<f64>() / n;
    let mut report = MetricsReport::new(
        seed,
        serde_json::json!({
            "task": "recommendation",
            "m": match m { CandidateCount::All => "ALL".to_string(), CandidateCount::M(v) => v.to_string() },
            "ks": ks,
        }),
    );
    report.metrics.insert("mrr".into(), mrr);
    for &k in ks {
        let hits = outcomes.iter().filter(|o| o.rank <= k).count() as f64 / n;
        report.metrics.insert(format!("hits@{k}"), hits);
    }
    report.counts.insert("test_pairs".into(), outcomes.len() as u64);
    report.counts.insert(
        "candidate_shortfalls".into(),
        outcomes.iter().filter(|o| o.shortfall).count() as u64,
    );
    report.counts.insert(
        "mean_candidates".into(),
        (outcomes.iter().map(|o| o.candidates).sum::<usize>() as f64 / n).round() as u64,
    );
    Ok(report)
}

/// Link-prediction AUC by the rank-sum formulation; tied scores contribute
/// one half.
pub fn eval_link_prediction<S: Scorer>(
    scorer: &S,
    graph: &Graph,
    test_pos: &[(usize, usize)],
    test_neg: &[(usize, usize)],
) -> Result<MetricsReport, EvalError> {
    if test_pos.is_empty() || test_neg.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let score_pairs = |pairs: &[(usize, usize)]| -> Vec<f64> {
        pairs
            .par_iter()
            .map(|&(a, b)| scorer.score(graph, a, b))
            .collect()
    };
    let pos = score_pairs(test_pos);
    let neg = score_pairs(test_neg);
    let auc = auc_rank_sum(&pos, &neg);
    let mut report = MetricsReport::new(0, serde_json::json!({ "task": "link_prediction" }));
    report.metrics.insert("auc".into(), auc);
    report.counts.insert("test_pos".into(), pos.len() as u64);
    report.counts.insert("test_neg".into(), neg.len() as u64);
    Ok(report)
}

/// AUC from positive and negative score samples.
pub fn auc_rank_sum(pos: &[f64], neg: &[f64]) -> f64 {
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("scores are not NaN"));
    // Average ranks over tie groups.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for item in &all[i..j] {
            if item.1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let np = pos.len() as f64;
    let nn = neg.len() as f64;
    (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn)
}

/// One-vs-rest logistic regression on fixed embeddings with the standard
/// multi-label protocol: at test time each node predicts as many labels as
/// it truly has. Full-batch gradient descent, 500 epochs, learning rate 0.1,
/// L2 1e-4 on weights (bias unpenalized).
pub fn eval_classification(
    embeddings: &[f64],
    dim: usize,
    labels: &[Vec<usize>],
    num_labels: usize,
    train_ratio: f64,
    seed: u64,
) -> Result<MetricsReport, EvalError> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(EvalError::InvalidArgument(format!(
            "train ratio must lie in (0,1), got {train_ratio}"
        )));
    }
    if dim == 0 || !embeddings.len().is_multiple_of(dim) {
        return Err(EvalError::InvalidArgument("bad embedding shape".into()));
    }
    let labeled: Vec<usize> = (0..labels.len()).filter(|&v| !labels[v].is_empty()).collect();
    if labeled.len() < 2 {
        return Err(EvalError::InvalidArgument(
            "need at least two labeled nodes".into(),
        ));
    }
    let mut order = labeled.clone();
    let mut split_rng = rng::stream_rng(seed, 0xc1a);
    order.shuffle(&mut split_rng);
    let n_train = ((order.len() as f64 * train_ratio).round() as usize)
        .clamp(1, order.len() - 1);
    let (train_nodes, test_nodes) = order.split_at(n_train);

    const EPOCHS: usize = 500;
    const LR: f64 = 0.1;
    const L2: f64 = 1e-4;

    let row = |v: usize| &embeddings[v * dim..(v + 1) * dim];
    // Per-label binary classifiers, trained independently.
    let weights: Vec<Vec<f64>> = (0..num_labels)
        .into_par_iter()
        .map(|label| {
            let targets: Vec<f64> = train_nodes
                .iter()
                .map(|&v| if labels[v].contains(&label) { 1.0 } else { 0.0 })
                .collect();
            if targets.iter().all(|&t| t == 0.0) {
                // No training examples: this classifier never fires.
                return vec![f64::NEG_INFINITY; dim + 1];
            }
            let mut w = vec![0.0; dim + 1];
            let n = train_nodes.len() as f64;
            for _ in 0..EPOCHS {
                let mut grad = vec![0.0; dim + 1];
                for (&v, &t) in train_nodes.iter().zip(&targets) {
                    let x = row(v);
                    let z = dot(&w[..dim], x) + w[dim];
                    let err = sigmoid(z) - t;
                    for i in 0..dim {
                        grad[i] += err * x[i];
                    }
                    grad[dim] += err;
                }
                for i in 0..dim {
                    w[i] -= LR * (grad[i] / n + L2 * w[i]);
                }
                w[dim] -= LR * grad[dim] / n;
            }
            w
        })
        .collect();

    // Predict top-L_i labels per test node.
    let mut tp = vec![0u64; num_labels];
    let mut fp = vec![0u64; num_labels];
    let mut fnc = vec![0u64; num_labels];
    for &v in test_nodes {
        let x = row(v);
        let mut scored: Vec<(f64, usize)> = (0..num_labels)
            .map(|l| {
                let w = &weights[l];
                let s = if w[0] == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    dot(&w[..dim], x) + w[dim]
                };
                (s, l)
            })
            .collect();
        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let truth: HashSet<usize> = labels[v].iter().copied().collect();
        let predicted: HashSet<usize> = scored
            .iter()
            .take(truth.len())
            .filter(|(s, _)| *s > f64::NEG_INFINITY)
            .map(|&(_, l)| l)
            .collect();
        for l in 0..num_labels {
            match (truth.contains(&l), predicted.contains(&l)) {
                (true, true) => tp[l] += 1,
                (false, true) => fp[l] += 1,
                (true, false) => fnc[l] += 1,
                (false, false) => {}
            }
        }
    }

    let micro = f1(
        tp.iter().sum::<u64>(),
        fp.iter().sum::<u64>(),
        fnc.iter().sum::<u64>(),
    );
    // Macro averages over labels present in the test split (or spuriously
    // predicted there).
    let mut macro_sum = 0.0;
    let mut macro_count = 0usize;
    for l in 0..num_labels {
        if tp[l] + fnc[l] + fp[l] == 0 {
            continue;
        }
        macro_sum += f1(tp[l], fp[l], fnc[l]);
        macro_count += 1;
    }
    let macro_f1 = if macro_count > 0 {
        macro_sum / macro_count as f64
    } else {
        0.0
    };

    let mut report = MetricsReport::new(
        seed,
        serde_json::json!({
            "task": "classification",
            "train_ratio": train_ratio,
            "num_labels": num_labels,
        }),
    );
    report.metrics.insert("micro_f1".into(), micro);
    report.metrics.insert("macro_f1".into(), macro_f1);
    report.counts.insert("train_nodes".into(), train_nodes.len() as u64);
    report.counts.insert("test_nodes".into(), test_nodes.len() as u64);
    Ok(report)
}

fn f1(tp: u64, fp: u64, fn_: u64) -> f64 {
    if tp == 0 {
        return 0.0;
    }
    let p = tp as f64 / (tp + fp) as f64;
    let r = tp as f64 / (tp + fn_) as f64;
    2.0 * p * r / (p + r)
}
