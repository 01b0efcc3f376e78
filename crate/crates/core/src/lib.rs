//! Graph representation learning with pluggable negative sampling.
//!
//! The crate trains node embeddings by contrasting sampled positive node
//! pairs against sampled negative nodes, scores pairs by embedding inner
//! products, and ships the machinery around that loop:
//!
//! * [`graph`] — compressed adjacency storage, edge-list ingestion, DFS and
//!   random-walk traversals, and the link-prediction split protocol.
//! * [`encoder`] — lookup-table and mean-aggregator encoders with manual
//!   gradient support.
//! * [`sampling`] — positive samplers plus the negative sampling strategies:
//!   uniform, degree-power, dynamic (max/min of scored candidates), rejection
//!   (WARP), and a Metropolis-Hastings chain over the current model scores.
//! * [`train`] — losses, a sparse-aware Adam, and the two training loops.
//! * [`theory`] — closed-form optimal logits and risk for explicit
//!   categorical distributions, with Monte-Carlo verification harnesses.
//! * [`eval`] — recommendation (MRR / Hits@k), link-prediction AUC, and
//!   multi-label classification protocols.

pub mod encoder;
pub mod eval;
pub mod graph;
pub(crate) mod linalg;
pub mod rng;
pub mod sampling;
pub mod theory;
pub mod train;

pub use graph::{Graph, LinkSplit, NeighborOrder};
pub use encoder::{LookupEncoder, Role, SageEncoder};
pub use eval::MetricsReport;
pub use sampling::{McnsChain, NegativeSampler, PositiveSampler, ProposalDistribution};
pub use train::TrainConfig;
pub use theory::CategoricalPair;
