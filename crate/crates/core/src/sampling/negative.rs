//! Static and score-driven negative samplers.

use rand::rngs::StdRng;
use rand::Rng;

use super::{CandidatePool, SamplingError};
use crate::encoder::Scorer;
use crate::graph::Graph;

/// Which nodes a draw rejects besides non-candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExcludeRule {
    /// Reject only the central node itself.
    #[default]
    CentralOnly,
    /// Reject the central node and its direct neighbors.
    CentralAndNeighbors,
}

impl ExcludeRule {
    fn rejects(&self, graph: &Graph, v: usize, candidate: usize) -> bool {
        match self {
            ExcludeRule::CentralOnly => candidate == v,
            ExcludeRule::CentralAndNeighbors => candidate == v || graph.has_edge(v, candidate),
        }
    }
}

/// Uniform draw from the pool, rejecting excluded nodes.
pub fn uniform_sample(
    pool: &CandidatePool,
    graph: &Graph,
    v: usize,
    rule: ExcludeRule,
    rng: &mut StdRng,
) -> Result<usize, SamplingError> {
    // The pool is never a subset of {v} ∪ neighbors(v) in practice, but cap
    // the rejection loop so degenerate inputs fail loudly.
    for _ in 0..100 * pool.len().max(16) {
        let c = pool.nodes()[rng.gen_range(0..pool.len())];
        if !rule.rejects(graph, v, c) {
            return Ok(c);
        }
    }
    Err(SamplingError::EmptyCandidates)
}

/// `deg(v)^beta`-proportional sampling over a candidate pool.
#[derive(Debug, Clone)]
pub struct DegreeDist {
    nodes: Vec<usize>,
    /// Normalized cumulative weights, ending at 1.
    cumulative: Vec<f64>,
    beta: f64,
}

impl DegreeDist {
    pub fn build(graph: &Graph, beta: f64, pool: &CandidatePool) -> Result<Self, SamplingError> {
        if pool.is_empty() {
            return Err(SamplingError::EmptyCandidates);
        }
        let mut weights = Vec::with_capacity(pool.len());
        for &v in pool.nodes() {
            let d = graph.degree(v) as f64;
            let w = if beta == 0.0 { 1.0 } else { d.powf(beta) };
            if !w.is_finite() {
                return Err(SamplingError::DegenerateWeights(format!(
                    "deg({v})^{beta} is not finite"
                )));
            }
            weights.push(w);
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(SamplingError::DegenerateWeights(
                "all weights are zero".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w / total;
            cumulative.push(acc);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(DegreeDist {
            nodes: pool.nodes().to_vec(),
            cumulative,
            beta,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Probability assigned to the pool entry at `idx`.
    pub fn prob(&self, idx: usize) -> f64 {
        let prev = if idx == 0 { 0.0 } else { self.cumulative[idx - 1] };
        self.cumulative[idx] - prev
    }

    pub fn sample(&self, rng: &mut StdRng) -> usize {
        let r: f64 = rng.gen();
        let idx = self
            .cumulative
            .partition_point(|&c| c <= r)
            .min(self.nodes.len() - 1);
        self.nodes[idx]
    }

    pub fn sample_excluding(
        &self,
        graph: &Graph,
        v: usize,
        rule: ExcludeRule,
        rng: &mut StdRng,
    ) -> Result<usize, SamplingError> {
        for _ in 0..100 * self.nodes.len().max(16) {
            let c = self.sample(rng);
            if !rule.rejects(graph, v, c) {
                return Ok(c);
            }
        }
        Err(SamplingError::EmptyCandidates)
    }
}

/// Draw `candidate_size` uniform candidates and keep the one the encoder
/// scores highest against `v`; ties break toward the lowest node id.
pub fn dns_sample<S: Scorer>(
    scorer: &S,
    graph: &Graph,
    v: usize,
    candidate_size: usize,
    pool: &CandidatePool,
    rule: ExcludeRule,
    rng: &mut StdRng,
) -> Result<usize, SamplingError> {
    pick_extreme(scorer, graph, v, candidate_size, pool, rule, rng, true)
}

/// As [`dns_sample`] but keeps the lowest-scoring candidate.
pub fn inverse_dns_sample<S: Scorer>(
    scorer: &S,
    graph: &Graph,
    v: usize,
    candidate_size: usize,
    pool: &CandidatePool,
    rule: ExcludeRule,
    rng: &mut StdRng,
) -> Result<usize, SamplingError> {
    pick_extreme(scorer, graph, v, candidate_size, pool, rule, rng, false)
}

#[allow(clippy::too_many_arguments)]
fn pick_extreme<S: Scorer>(
    scorer: &S,
    graph: &Graph,
    v: usize,
    candidate_size: usize,
    pool: &CandidatePool,
    rule: ExcludeRule,
    rng: &mut StdRng,
    maximize: bool,
) -> Result<usize, SamplingError> {
    if candidate_size == 0 {
        return Err(SamplingError::InvalidArgument(
            "candidate size must be at least 1".into(),
        ));
    }
    let mut best: Option<(f64, usize)> = None;
    for _ in 0..candidate_size {
        let c = uniform_sample(pool, graph, v, rule, rng)?;
        let s = scorer.score(graph, v, c);
        let better = match best {
            None => true,
            Some((bs, bc)) => {
                if maximize {
                    s > bs || (s == bs && c < bc)
                } else {
                    s < bs || (s == bs && c < bc)
                }
            }
        };
        if better {
            best = Some((s, c));
        }
    }
    Ok(best.expect("candidate_size >= 1").1)
}

/// Rejection sampling for a margin-violating negative: uniform draws until
/// `score(v, cand) - score(v, u_pos) + margin > 0`, or `None` after
/// `max_tries`.
#[allow(clippy::too_many_arguments)]
pub fn warp_sample<S: Scorer>(
    scorer: &S,
    graph: &Graph,
    v: usize,
    u_pos: usize,
    margin: f64,
    max_tries: usize,
    pool: &CandidatePool,
    rule: ExcludeRule,
    rng: &mut StdRng,
) -> Result<Option<(usize, usize)>, SamplingError> {
    let pos_score = scorer.score(graph, v, u_pos);
    for tries in 1..=max_tries {
        let c = uniform_sample(pool, graph, v, rule, rng)?;
        if scorer.score(graph, v, c) - pos_score + margin > 0.0 {
            return Ok(Some((c, tries)));
        }
    }
    Ok(None)
}

/// Negative sampling strategy selection for the sampled-contrast training
/// loop. The Markov-chain strategy has its own loop and is configured there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NegativeSamplerKind {
    Uniform,
    DegreePower { beta: f64 },
    Dns { candidate_size: usize },
    InverseDns { candidate_size: usize },
    Warp { max_tries: usize },
}

/// A strategy bound to a graph's candidate pool.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    kind: NegativeSamplerKind,
    pool: CandidatePool,
    degree: Option<DegreeDist>,
    rule: ExcludeRule,
}

impl NegativeSampler {
    pub fn new(
        graph: &Graph,
        kind: NegativeSamplerKind,
        rule: ExcludeRule,
    ) -> Result<Self, SamplingError> {
        let pool = CandidatePool::from_graph(graph)?;
        let degree = match kind {
            NegativeSamplerKind::DegreePower { beta } => {
                Some(DegreeDist::build(graph, beta, &pool)?)
            }
            _ => None,
        };
        Ok(NegativeSampler {
            kind,
            pool,
            degree,
            rule,
        })
    }

    pub fn kind(&self) -> NegativeSamplerKind {
        self.kind
    }

    pub fn pool(&self) -> &CandidatePool {
        &self.pool
    }

    /// Draw one negative for the pair `(v, u_pos)`. `None` means the pair
    /// should be skipped (WARP exhausted its tries).
    pub fn sample<S: Scorer>(
        &self,
        scorer: &S,
        graph: &Graph,
        v: usize,
        u_pos: usize,
        margin: f64,
        rng: &mut StdRng,
    ) -> Result<Option<usize>, SamplingError> {
        match self.kind {
            NegativeSamplerKind::Uniform => {
                uniform_sample(&self.pool, graph, v, self.rule, rng).map(Some)
            }
            NegativeSamplerKind::DegreePower { .. } => self
                .degree
                .as_ref()
                .expect("degree dist built at construction")
                .sample_excluding(graph, v, self.rule, rng)
                .map(Some),
            NegativeSamplerKind::Dns { candidate_size } => {
                dns_sample(scorer, graph, v, candidate_size, &self.pool, self.rule, rng).map(Some)
            }
            NegativeSamplerKind::InverseDns { candidate_size } => {
                inverse_dns_sample(scorer, graph, v, candidate_size, &self.pool, self.rule, rng)
                    .map(Some)
            }
            NegativeSamplerKind::Warp { max_tries } => Ok(warp_sample(
                scorer, graph, v, u_pos, margin, max_tries, &self.pool, self.rule, rng,
            )?
            .map(|(c, _)| c)),
        }
    }
}
