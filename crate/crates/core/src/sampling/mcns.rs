//! Metropolis-Hastings negative sampling.
//!
//! The chain targets the self-contrast distribution over candidates `u`,
//! `w(u) = max(score(v, u), epsilon)^alpha`, where `v` is the central node
//! currently being trained. The clamp keeps the power-form target positive
//! everywhere (an MH requirement) and preserves the score ordering above the
//! clamp. Proposals mix uniform candidates with nearby candidates at equal
//! probability, and the chain state is reused across consecutive centrals of
//! a DFS traversal so burn-in is paid once per pass instead of per node.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{CandidatePool, SamplingError};
use crate::encoder::Scorer;
use crate::graph::{dfs_sequence, Graph, NeighborOrder, Part};
use crate::rng;

/// Chain hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct McnsParams {
    /// Sub-linear exponent in (0,1).
    pub alpha: f64,
    /// Positive clamp floor for the score before exponentiation.
    pub epsilon: f64,
    /// Nearby-candidate list size per node.
    pub k_local: usize,
    /// Chain steps run at the start of each DFS pass before samples count.
    pub warmup: usize,
}

impl Default for McnsParams {
    fn default() -> Self {
        McnsParams {
            alpha: 0.75,
            epsilon: 1e-4,
            k_local: 10,
            warmup: 20,
        }
    }
}

/// Mixture proposal `q(y|x)`: with probability 1/2 a uniform candidate, with
/// probability 1/2 one of up to `k_local` candidates near `x`. Nearby means
/// one-hop neighbors restricted to the candidate pool; when that is empty
/// (item nodes of a bipartite graph neighbor only users) the two-hop
/// neighborhood is used instead. Nodes with no nearby candidates fold the
/// local mass into the uniform component, so `q(y|x) > 0` everywhere.
#[derive(Debug, Clone)]
pub struct ProposalDistribution {
    /// Sorted nearby-candidate list per node id (empty for non-candidates).
    locals: Vec<Vec<u32>>,
    pool_size: usize,
}

impl ProposalDistribution {
    pub fn build(
        graph: &Graph,
        pool: &CandidatePool,
        k_local: usize,
        seed: u64,
    ) -> Result<Self, SamplingError> {
        if pool.is_empty() {
            return Err(SamplingError::EmptyCandidates);
        }
        let mut locals = vec![Vec::new(); graph.num_nodes()];
        for &x in pool.nodes() {
            let mut nearby: Vec<usize> = graph
                .neighbors(x)
                .iter()
                .copied()
                .filter(|&y| pool.contains(y))
                .collect();
            if nearby.is_empty() {
                let mut seen = std::collections::HashSet::new();
                for &mid in graph.neighbors(x) {
                    for &y in graph.neighbors(mid) {
                        if y != x && pool.contains(y) {
                            seen.insert(y);
                        }
                    }
                }
                nearby = seen.into_iter().collect();
                nearby.sort_unstable();
            }
            if nearby.len() > k_local {
                let mut r = rng::stream_rng(seed, x as u64);
                nearby.shuffle(&mut r);
                nearby.truncate(k_local);
            }
            nearby.sort_unstable();
            locals[x] = nearby.into_iter().map(|y| y as u32).collect();
        }
        Ok(ProposalDistribution {
            locals,
            pool_size: pool.len(),
        })
    }

    pub fn local(&self, x: usize) -> &[u32] {
        &self.locals[x]
    }

    /// `q(y|x)` over the candidate pool.
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        let n = self.pool_size as f64;
        let local = &self.locals[x];
        if local.is_empty() {
            return 1.0 / n;
        }
        let mut p = 0.5 / n;
        if local.binary_search(&(y as u32)).is_ok() {
            p += 0.5 / local.len() as f64;
        }
        p
    }

    pub fn sample(&self, x: usize, pool: &CandidatePool, rng: &mut StdRng) -> usize {
        let local = &self.locals[x];
        if !local.is_empty() && rng.gen_bool(0.5) {
            local[rng.gen_range(0..local.len())] as usize
        } else {
            pool.nodes()[rng.gen_range(0..pool.len())]
        }
    }
}

/// One Metropolis-Hastings chain over the candidate pool.
#[derive(Debug, Clone)]
pub struct McnsChain {
    current: usize,
    alpha: f64,
    epsilon: f64,
    accept_count: u64,
    step_count: u64,
}

impl McnsChain {
    pub fn new(start: usize, params: &McnsParams) -> Result<Self, SamplingError> {
        if !(params.alpha > 0.0 && params.alpha < 1.0) {
            return Err(SamplingError::InvalidAlpha(params.alpha));
        }
        if params.epsilon <= 0.0 {
            return Err(SamplingError::InvalidEpsilon(params.epsilon));
        }
        Ok(McnsChain {
            current: start,
            alpha: params.alpha,
            epsilon: params.epsilon,
            accept_count: 0,
            step_count: 0,
        })
    }

    /// Start the chain at a uniform candidate.
    pub fn init_random(
        pool: &CandidatePool,
        params: &McnsParams,
        rng: &mut StdRng,
    ) -> Result<Self, SamplingError> {
        let start = pool.nodes()[rng.gen_range(0..pool.len())];
        Self::new(start, params)
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.step_count == 0 {
            0.0
        } else {
            self.accept_count as f64 / self.step_count as f64
        }
    }

    pub fn steps(&self) -> u64 {
        self.step_count
    }

    pub fn accepted(&self) -> u64 {
        self.accept_count
    }

    /// Unnormalized target weight of `u` for central `v`.
    pub fn target_weight<S: Scorer>(&self, scorer: &S, graph: &Graph, v: usize, u: usize) -> f64 {
        scorer.score(graph, v, u).max(self.epsilon).powf(self.alpha)
    }

    /// One propose/accept transition against central `v`. Returns the chain
    /// state after the step, which is the negative sample for this iteration
    /// whether or not the proposal was accepted.
    pub fn step<S: Scorer>(
        &mut self,
        scorer: &S,
        graph: &Graph,
        v: usize,
        q: &ProposalDistribution,
        pool: &CandidatePool,
        rng: &mut StdRng,
    ) -> usize {
        let x = self.current;
        let y = q.sample(x, pool, rng);
        let w_x = self.target_weight(scorer, graph, v, x);
        let w_y = self.target_weight(scorer, graph, v, y);
        let ratio = (w_y / w_x) * (q.prob(y, x) / q.prob(x, y));
        let accept = ratio.min(1.0);
        self.step_count += 1;
        if rng.gen::<f64>() < accept {
            self.current = y;
            self.accept_count += 1;
        }
        self.current
    }
}

/// Central-node visit order for chain reuse: the DFS traversal sequence,
/// restricted to the `U` side on bipartite graphs. Consecutive entries are
/// adjacent (or share an item neighbor), which is what lets one chain serve
/// the whole pass.
pub fn chain_schedule(graph: &Graph, order: NeighborOrder) -> Vec<usize> {
    let seq = dfs_sequence(graph, 0, order);
    match graph.is_bipartite() {
        false => seq,
        true => seq
            .into_iter()
            .filter(|&v| graph.part(v) == Some(Part::U))
            .collect(),
    }
}
