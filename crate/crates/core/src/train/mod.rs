//! Losses, optimizer, and the two training loops.
//!
//! [`train_sampled_nce`] is the generic contrastive loop: batches of
//! degree-proportional positives, `k` negatives each from a pluggable
//! strategy, one optimizer step per batch. [`train_mcns`] trains along a DFS
//! schedule with a persistent Metropolis-Hastings chain supplying negatives
//! under the margin loss.
//!
//! With `workers > 1`, tuple production (sampling and scoring) runs on
//! worker threads against a frozen encoder, then a single consumer applies
//! the updates; sampling reads never overlap parameter writes. Each worker
//! owns its sampler state (walk cache or chain). Results are deterministic
//! only in single-worker mode, and the per-negative `literal_updates` mode
//! applies only there.

pub mod adam;
mod loss;

pub use loss::{hinge_loss, nce_loss, LossKind};

use rand::rngs::StdRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::{Encoder, EncoderError, Role};
use crate::graph::{Graph, NeighborOrder};
use crate::linalg::{axpy, dot};
use crate::rng;
use crate::sampling::{
    chain_schedule, CandidatePool, McnsChain, McnsParams, NegativeSampler, PositiveSampler,
    ProposalDistribution, SamplingError,
};
use adam::AdamState;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub dim: usize,
    pub margin: f64,
    pub batch_size: usize,
    pub negatives_per_positive: usize,
    pub epochs: usize,
    pub loss: LossKind,
    pub seed: u64,
    /// Epochs between validation evaluations; 0 disables early stopping.
    pub eval_every: usize,
    /// Validation evaluations without improvement before stopping.
    pub patience: usize,
    /// Apply an optimizer step per negative instead of per positive group.
    pub literal_updates: bool,
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            dim: 256,
            margin: 0.1,
            batch_size: 256,
            negatives_per_positive: 1,
            epochs: 10,
            loss: LossKind::Nce,
            seed: 1,
            eval_every: 1,
            patience: 5,
            literal_updates: false,
            workers: 1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), TrainError> {
        // Zero learning rate is allowed as a frozen-encoder diagnostic.
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::InvalidConfig(format!(
                "learning rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.negatives_per_positive == 0 {
            return Err(TrainError::InvalidConfig(
                "need at least one negative per positive".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch size must be positive".into()));
        }
        if self.margin < 0.0 {
            return Err(TrainError::InvalidConfig(format!(
                "margin must be non-negative, got {}",
                self.margin
            )));
        }
        if self.workers == 0 {
            return Err(TrainError::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Chain acceptance rate over the epoch (Markov-chain loop only).
    pub accept_rate: Option<f64>,
    pub validation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub trace: Vec<EpochStats>,
    pub skipped_pairs: u64,
    pub negatives_drawn: u64,
    pub epochs_run: usize,
    pub stopped_early: bool,
    pub best_validation: Option<f64>,
}

impl TrainReport {
    /// `epoch,loss,accept_rate` rows; the accept-rate column is empty for
    /// loops without a chain.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "epoch,loss,accept_rate")?;
        for row in &self.trace {
            match row.accept_rate {
                Some(a) => writeln!(out, "{},{:.6},{:.6}", row.epoch, row.mean_loss, a)?,
                None => writeln!(out, "{},{:.6},", row.epoch, row.mean_loss)?,
            }
        }
        Ok(())
    }
}

/// A sampled training tuple: central, positive, negatives.
struct Tuple {
    v: usize,
    u: usize,
    negs: Vec<usize>,
}

/// Per-tuple loss and score gradients under the configured loss. Hinge
/// pairs every negative score with the positive score.
fn tuple_loss(config: &TrainConfig, s_pos: f64, s_negs: &[f64]) -> (f64, f64, Vec<f64>) {
    match config.loss {
        LossKind::Nce => nce_loss(s_pos, s_negs),
        LossKind::Hinge => {
            let mut total = 0.0;
            let mut d_pos = 0.0;
            let mut d_negs = Vec::with_capacity(s_negs.len());
            for &s_neg in s_negs {
                let (l, gp, gn) = hinge_loss(s_pos, s_neg, config.margin);
                total += l;
                d_pos += gp;
                d_negs.push(gn);
            }
            (total, d_pos, d_negs)
        }
    }
}

/// One contrastive step's loss and parameter gradients for the pair
/// `(v, u)` against `negs`, under the configured loss. This is the unit the
/// training loops accumulate; exposed so gradient checks can difference the
/// exact quantity the loops descend.
pub fn contrastive_step_gradients<E: Encoder>(
    encoder: &E,
    graph: &Graph,
    config: &TrainConfig,
    v: usize,
    u: usize,
    negs: &[usize],
    rng: &mut StdRng,
) -> (f64, E::Grads) {
    let mut grads = encoder.new_grads();
    let tuple = Tuple {
        v,
        u,
        negs: negs.to_vec(),
    };
    let loss = accumulate_tuple(encoder, graph, config, &tuple, &mut grads, rng);
    (loss, grads)
}

/// Forward the tuple, accumulate parameter gradients, return the loss.
fn accumulate_tuple<E: Encoder>(
    encoder: &E,
    graph: &Graph,
    config: &TrainConfig,
    tuple: &Tuple,
    grads: &mut E::Grads,
    rng: &mut StdRng,
) -> f64 {
    let (e_v, tape_v) = encoder.forward(graph, tuple.v, Role::Central, rng);
    let (e_u, tape_u) = encoder.forward(graph, tuple.u, Role::Context, rng);
    let s_pos = dot(&e_v, &e_u);
    let mut neg_out = Vec::with_capacity(tuple.negs.len());
    let mut s_negs = Vec::with_capacity(tuple.negs.len());
    for &n in &tuple.negs {
        let (e_n, tape_n) = encoder.forward(graph, n, Role::Context, rng);
        s_negs.push(dot(&e_v, &e_n));
        neg_out.push((e_n, tape_n));
    }
    let (loss, d_pos, d_negs) = tuple_loss(config, s_pos, &s_negs);

    let mut up_central = vec![0.0; e_v.len()];
    axpy(d_pos, &e_u, &mut up_central);
    for (g, (e_n, _)) in d_negs.iter().zip(&neg_out) {
        axpy(*g, e_n, &mut up_central);
    }
    encoder.backward(&tape_v, &up_central, grads);

    let mut up_pos = vec![0.0; e_v.len()];
    axpy(d_pos, &e_v, &mut up_pos);
    encoder.backward(&tape_u, &up_pos, grads);

    for (g, (_, tape_n)) in d_negs.iter().zip(&neg_out) {
        let mut up_neg = vec![0.0; e_v.len()];
        axpy(*g, &e_v, &mut up_neg);
        encoder.backward(tape_n, &up_neg, grads);
    }
    loss
}

/// Early-stopping bookkeeping; snapshots the best encoder seen.
struct BestTracker<E: Encoder> {
    best: Option<(f64, E)>,
    misses: usize,
}

impl<E: Encoder> BestTracker<E> {
    fn new() -> Self {
        BestTracker {
            best: None,
            misses: 0,
        }
    }

    /// Returns true once patience is exhausted.
    fn observe(&mut self, score: f64, encoder: &E, patience: usize) -> bool {
        match &self.best {
            Some((b, _)) if score <= *b => {
                self.misses += 1;
                self.misses > patience
            }
            _ => {
                self.best = Some((score, encoder.clone()));
                self.misses = 0;
                false
            }
        }
    }

    fn restore(self, encoder: &mut E) -> Option<f64> {
        match self.best {
            Some((score, snapshot)) => {
                *encoder = snapshot;
                Some(score)
            }
            None => None,
        }
    }
}

/// Shared per-epoch counters.
#[derive(Default)]
struct Counters {
    skipped: u64,
    negatives_drawn: u64,
    loss: f64,
    tuples: u64,
}

/// Contrastive training with batched positives and a pluggable negative
/// strategy (uniform / degree-power / DNS / inverseDNS / WARP).
pub fn train_sampled_nce<E: Encoder>(
    graph: &Graph,
    encoder: &mut E,
    positive: &mut PositiveSampler,
    negative: &NegativeSampler,
    config: &TrainConfig,
    mut validate: Option<&mut dyn FnMut(&E) -> f64>,
) -> Result<TrainReport, TrainError> {
    config.validate()?;
    let pairs_per_epoch = if graph.is_bipartite() {
        graph.num_edges()
    } else {
        graph.num_directed_edges()
    };
    let iterations = pairs_per_epoch.div_ceil(config.batch_size).max(1);
    let mut adam = AdamState::new(&encoder.adam_shapes());
    let mut rng = rng::stream_rng(config.seed, 0x7e41);
    let mut worker_positives: Vec<PositiveSampler> = if config.workers > 1 {
        (0..config.workers)
            .map(|w| {
                PositiveSampler::new(graph, positive.kind(), rng::derive(config.seed, 0xea + w as u64))
            })
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };

    let mut trace = Vec::with_capacity(config.epochs);
    let mut totals = Counters::default();
    let mut tracker = BestTracker::new();
    let mut stopped_early = false;
    let mut epochs_run = 0;

    for epoch in 0..config.epochs {
        let mut epoch_counters = Counters::default();
        for _ in 0..iterations {
            let tuples = if config.workers > 1 {
                produce_batch_parallel(
                    graph,
                    encoder,
                    &mut worker_positives,
                    negative,
                    config,
                    epoch,
                    &mut epoch_counters.skipped,
                )?
            } else {
                produce_batch(
                    graph,
                    encoder,
                    positive,
                    negative,
                    config,
                    config.batch_size,
                    &mut rng,
                    &mut epoch_counters.skipped,
                )?
            };
            if tuples.is_empty() {
                continue;
            }
            epoch_counters.negatives_drawn +=
                tuples.iter().map(|t| t.negs.len() as u64).sum::<u64>();
            let mut grads = encoder.new_grads();
            let mut pending = false;
            for t in &tuples {
                epoch_counters.loss +=
                    accumulate_tuple(encoder, graph, config, t, &mut grads, &mut rng);
                epoch_counters.tuples += 1;
                pending = true;
                if config.literal_updates {
                    adam.begin_step();
                    encoder.apply_grads(&grads, &mut adam, config.learning_rate)?;
                    grads = encoder.new_grads();
                    pending = false;
                }
            }
            if pending {
                adam.begin_step();
                encoder.apply_grads(&grads, &mut adam, config.learning_rate)?;
            }
        }
        epochs_run = epoch + 1;
        let mut stats = EpochStats {
            epoch,
            mean_loss: epoch_counters.mean_loss(),
            accept_rate: None,
            validation: None,
        };
        totals.absorb(&epoch_counters);
        if config.eval_every > 0 && (epoch + 1) % config.eval_every == 0 {
            if let Some(f) = validate.as_mut() {
                let score = f(encoder);
                stats.validation = Some(score);
                if tracker.observe(score, encoder, config.patience) {
                    trace.push(stats);
                    stopped_early = true;
                    break;
                }
            }
        }
        trace.push(stats);
    }
    let best_validation = tracker.restore(encoder);
    Ok(TrainReport {
        trace,
        skipped_pairs: totals.skipped,
        negatives_drawn: totals.negatives_drawn,
        epochs_run,
        stopped_early,
        best_validation,
    })
}

impl Counters {
    fn mean_loss(&self) -> f64 {
        if self.tuples > 0 {
            self.loss / self.tuples as f64
        } else {
            f64::NAN
        }
    }

    fn absorb(&mut self, other: &Counters) {
        self.skipped += other.skipped;
        self.negatives_drawn += other.negatives_drawn;
        self.loss += other.loss;
        self.tuples += other.tuples;
    }
}

#[allow(clippy::too_many_arguments)]
fn produce_batch<E: Encoder>(
    graph: &Graph,
    encoder: &E,
    positive: &mut PositiveSampler,
    negative: &NegativeSampler,
    config: &TrainConfig,
    count: usize,
    rng: &mut StdRng,
    skipped: &mut u64,
) -> Result<Vec<Tuple>, TrainError> {
    let mut tuples = Vec::with_capacity(count);
    for _ in 0..count {
        let (v, u) = positive.sample(graph, rng)?;
        let mut negs = Vec::with_capacity(config.negatives_per_positive);
        let mut dropped = false;
        for _ in 0..config.negatives_per_positive {
            match negative.sample(encoder, graph, v, u, config.margin, rng)? {
                Some(n) => negs.push(n),
                None => {
                    dropped = true;
                    break;
                }
            }
        }
        if dropped {
            *skipped += 1;
            continue;
        }
        tuples.push(Tuple { v, u, negs });
    }
    Ok(tuples)
}

/// Worker-parallel batch production against the frozen encoder.
fn produce_batch_parallel<E: Encoder>(
    graph: &Graph,
    encoder: &E,
    worker_positives: &mut [PositiveSampler],
    negative: &NegativeSampler,
    config: &TrainConfig,
    epoch: usize,
    skipped: &mut u64,
) -> Result<Vec<Tuple>, TrainError> {
    let per_worker = config.batch_size.div_ceil(worker_positives.len());
    let results: Vec<Result<(Vec<Tuple>, u64), TrainError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = worker_positives
            .iter_mut()
            .enumerate()
            .map(|(w, pos)| {
                scope.spawn(move || {
                    let mut local_skipped = 0u64;
                    let mut rng = rng::stream_rng(
                        config.seed,
                        0x9000 + (epoch * config.workers + w) as u64,
                    );
                    let tuples = produce_batch(
                        graph,
                        encoder,
                        pos,
                        negative,
                        config,
                        per_worker,
                        &mut rng,
                        &mut local_skipped,
                    )?;
                    Ok((tuples, local_skipped))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut tuples = Vec::new();
    for r in results {
        let (mut t, s) = r?;
        tuples.append(&mut t);
        *skipped += s;
    }
    Ok(tuples)
}

/// Markov-chain training: centrals visited in DFS order, one positive each,
/// `k` chain-step negatives each, the chain state carried across the whole
/// pass and across passes. Each pass begins with `params.warmup` throwaway
/// steps against its first central. A chain state that coincides with the
/// central is not used as a negative for it.
pub fn train_mcns<E: Encoder>(
    graph: &Graph,
    encoder: &mut E,
    positive: &mut PositiveSampler,
    params: &McnsParams,
    config: &TrainConfig,
    mut validate: Option<&mut dyn FnMut(&E) -> f64>,
) -> Result<TrainReport, TrainError> {
    config.validate()?;
    let pool = CandidatePool::from_graph(graph)?;
    let q = ProposalDistribution::build(
        graph,
        &pool,
        params.k_local,
        rng::derive(config.seed, 0x9),
    )?;
    let mut rng = rng::stream_rng(config.seed, 0x3c);
    let workers = config.workers.min(pool.len()).max(1);
    let mut chains: Vec<McnsChain> = (0..workers)
        .map(|_| McnsChain::init_random(&pool, params, &mut rng))
        .collect::<Result<_, _>>()?;
    let mut adam = AdamState::new(&encoder.adam_shapes());

    let mut trace = Vec::with_capacity(config.epochs);
    let mut totals = Counters::default();
    let mut tracker = BestTracker::new();
    let mut stopped_early = false;
    let mut epochs_run = 0;

    for epoch in 0..config.epochs {
        let schedule = chain_schedule(
            graph,
            NeighborOrder::Shuffled(rng::derive(config.seed, 0xd5 + epoch as u64)),
        );
        if schedule.is_empty() {
            return Err(TrainError::InvalidConfig("no central nodes to train".into()));
        }
        let steps_before: u64 = chains.iter().map(McnsChain::steps).sum();
        let accepted_before: u64 = chains.iter().map(McnsChain::accepted).sum();
        let mut epoch_counters = Counters::default();

        if workers == 1 {
            mcns_epoch_single(
                graph,
                encoder,
                positive,
                params,
                config,
                &pool,
                &q,
                &schedule,
                &mut chains[0],
                &mut adam,
                &mut rng,
                &mut epoch_counters,
            )?;
        } else {
            mcns_epoch_parallel(
                graph,
                encoder,
                positive,
                params,
                config,
                &pool,
                &q,
                &schedule,
                &mut chains,
                &mut adam,
                &mut rng,
                epoch,
                &mut epoch_counters,
            )?;
        }

        epochs_run = epoch + 1;
        let steps_after: u64 = chains.iter().map(McnsChain::steps).sum();
        let accepted_after: u64 = chains.iter().map(McnsChain::accepted).sum();
        let accept_rate = if steps_after > steps_before {
            (accepted_after - accepted_before) as f64 / (steps_after - steps_before) as f64
        } else {
            0.0
        };
        let mut stats = EpochStats {
            epoch,
            mean_loss: epoch_counters.mean_loss(),
            accept_rate: Some(accept_rate),
            validation: None,
        };
        totals.absorb(&epoch_counters);
        if config.eval_every > 0 && (epoch + 1) % config.eval_every == 0 {
            if let Some(f) = validate.as_mut() {
                let score = f(encoder);
                stats.validation = Some(score);
                if tracker.observe(score, encoder, config.patience) {
                    trace.push(stats);
                    stopped_early = true;
                    break;
                }
            }
        }
        trace.push(stats);
    }
    let best_validation = tracker.restore(encoder);
    Ok(TrainReport {
        trace,
        skipped_pairs: totals.skipped,
        negatives_drawn: totals.negatives_drawn,
        epochs_run,
        stopped_early,
        best_validation,
    })
}

#[allow(clippy::too_many_arguments)]
fn mcns_epoch_single<E: Encoder>(
    graph: &Graph,
    encoder: &mut E,
    positive: &mut PositiveSampler,
    params: &McnsParams,
    config: &TrainConfig,
    pool: &CandidatePool,
    q: &ProposalDistribution,
    schedule: &[usize],
    chain: &mut McnsChain,
    adam: &mut AdamState,
    rng: &mut StdRng,
    counters: &mut Counters,
) -> Result<(), TrainError> {
    for _ in 0..params.warmup {
        chain.step(encoder, graph, schedule[0], q, pool, rng);
    }
    let mut idx = 0;
    while idx < schedule.len() {
        let upper = (idx + config.batch_size).min(schedule.len());
        let mut grads = encoder.new_grads();
        let mut pending = false;
        for &v in &schedule[idx..upper] {
            let Some(u) = positive.sample_for(graph, v, rng) else {
                counters.skipped += 1;
                continue;
            };
            let mut negs = Vec::with_capacity(config.negatives_per_positive);
            for _ in 0..config.negatives_per_positive {
                let n = chain.step(encoder, graph, v, q, pool, rng);
                if n != v {
                    negs.push(n);
                }
            }
            counters.negatives_drawn += negs.len() as u64;
            if negs.is_empty() {
                counters.skipped += 1;
                continue;
            }
            let tuple = Tuple { v, u, negs };
            counters.loss += accumulate_tuple(encoder, graph, config, &tuple, &mut grads, rng);
            counters.tuples += 1;
            pending = true;
            if config.literal_updates {
                adam.begin_step();
                encoder.apply_grads(&grads, adam, config.learning_rate)?;
                grads = encoder.new_grads();
                pending = false;
            }
        }
        if pending {
            adam.begin_step();
            encoder.apply_grads(&grads, adam, config.learning_rate)?;
        }
        idx = upper;
    }
    Ok(())
}

/// Phase-parallel variant: each worker owns one chain and one contiguous
/// slice of the schedule, produces a sub-batch against the frozen encoder,
/// then the consumer applies all updates serially.
#[allow(clippy::too_many_arguments)]
fn mcns_epoch_parallel<E: Encoder>(
    graph: &Graph,
    encoder: &mut E,
    positive: &PositiveSampler,
    params: &McnsParams,
    config: &TrainConfig,
    pool: &CandidatePool,
    q: &ProposalDistribution,
    schedule: &[usize],
    chains: &mut [McnsChain],
    adam: &mut AdamState,
    rng: &mut StdRng,
    epoch: usize,
    counters: &mut Counters,
) -> Result<(), TrainError> {
    let workers = chains.len();
    let chunk = schedule.len().div_ceil(workers);
    let slices: Vec<&[usize]> = schedule.chunks(chunk).collect();
    let mut cursors = vec![0usize; slices.len()];
    let per_phase = config.batch_size.div_ceil(workers).max(1);

    loop {
        let mut produced: Vec<(usize, Vec<Tuple>, u64, u64)> = Vec::new();
        {
            let frozen: &E = encoder;
            std::thread::scope(|scope| {
                let handles: Vec<_> = chains
                    .iter_mut()
                    .enumerate()
                    .take(slices.len())
                    .filter(|(w, _)| cursors[*w] < slices[*w].len())
                    .map(|(w, chain)| {
                        let slice = slices[w];
                        let start = cursors[w];
                        scope.spawn(move || {
                            let mut wrng = rng::stream_rng(
                                config.seed,
                                0xb000 + (epoch * workers + w) as u64 + ((start as u64) << 20),
                            );
                            if start == 0 {
                                for _ in 0..params.warmup {
                                    chain.step(frozen, graph, slice[0], q, pool, &mut wrng);
                                }
                            }
                            let mut tuples = Vec::new();
                            let mut local_skipped = 0u64;
                            let mut drawn = 0u64;
                            let upper = (start + per_phase).min(slice.len());
                            for &v in &slice[start..upper] {
                                let Some(u) = positive.sample_for(graph, v, &mut wrng) else {
                                    local_skipped += 1;
                                    continue;
                                };
                                let mut negs = Vec::with_capacity(config.negatives_per_positive);
                                for _ in 0..config.negatives_per_positive {
                                    let n = chain.step(frozen, graph, v, q, pool, &mut wrng);
                                    if n != v {
                                        negs.push(n);
                                    }
                                }
                                drawn += negs.len() as u64;
                                if negs.is_empty() {
                                    local_skipped += 1;
                                    continue;
                                }
                                tuples.push(Tuple { v, u, negs });
                            }
                            (w, tuples, local_skipped, drawn)
                        })
                    })
                    .collect();
                for h in handles {
                    produced.push(h.join().unwrap());
                }
            });
        }
        if produced.is_empty() {
            break;
        }
        produced.sort_by_key(|(w, ..)| *w);
        let mut grads = encoder.new_grads();
        let mut pending = false;
        for (w, tuples, local_skipped, drawn) in produced {
            cursors[w] = (cursors[w] + per_phase).min(slices[w].len());
            counters.skipped += local_skipped;
            counters.negatives_drawn += drawn;
            for t in &tuples {
                counters.loss += accumulate_tuple(encoder, graph, config, t, &mut grads, rng);
                counters.tuples += 1;
                pending = true;
            }
        }
        if pending {
            adam.begin_step();
            encoder.apply_grads(&grads, adam, config.learning_rate)?;
        }
    }
    Ok(())
}
