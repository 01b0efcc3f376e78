//! Positive pair sampling and negative sampling strategies.
//!
//! Negative candidates come from a [`CandidatePool`]: the `I` partition on
//! bipartite graphs, all nodes otherwise. Every strategy rejects the current
//! central node (and optionally its neighbors) at draw time.

mod mcns;
mod negative;
mod positive;

pub use mcns::{chain_schedule, McnsChain, McnsParams, ProposalDistribution};
pub use negative::{
    dns_sample, inverse_dns_sample, uniform_sample, warp_sample, DegreeDist, ExcludeRule,
    NegativeSampler, NegativeSamplerKind,
};
pub use positive::{PositiveKind, PositiveSampler};

use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("graph has no edges to sample positives from")]
    NoEdges,
    #[error("candidate pool is empty")]
    EmptyCandidates,
    #[error("degree-power weights are degenerate: {0}")]
    DegenerateWeights(String),
    #[error("alpha must lie in (0,1), got {0}")]
    InvalidAlpha(f64),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// The node set a negative sampler may emit.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    nodes: Vec<usize>,
    member: Vec<bool>,
}

impl CandidatePool {
    pub fn from_graph(graph: &Graph) -> Result<Self, SamplingError> {
        Self::from_nodes(graph.num_nodes(), graph.candidate_nodes())
    }

    pub fn from_nodes(num_nodes: usize, nodes: Vec<usize>) -> Result<Self, SamplingError> {
        if nodes.is_empty() {
            return Err(SamplingError::EmptyCandidates);
        }
        let mut member = vec![false; num_nodes];
        for &v in &nodes {
            member[v] = true;
        }
        Ok(CandidatePool { nodes, member })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn contains(&self, v: usize) -> bool {
        self.member.get(v).copied().unwrap_or(false)
    }
}
