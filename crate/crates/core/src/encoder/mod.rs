//! Node-to-vector encoders with score computation and gradient support.
//!
//! Scores are unnormalized inner products between a *central* embedding of
//! the left node and a *context* embedding of the right node. The lookup
//! encoder keeps either two independent tables (dual mode) or a single
//! shared one (unique mode); the mean-aggregator encoder computes embeddings
//! from sampled neighborhoods and always behaves as unique.

mod io;
mod lookup;
mod sage;

pub use io::{write_embeddings, BoundEmbeddings, EmbeddingTable};
pub use lookup::{LookupEncoder, LookupMode};
pub use sage::{sage_embed, SageEncoder};

use rand::rngs::StdRng;
use thiserror::Error;

use crate::graph::Graph;
use crate::linalg::dot;
use crate::train::adam::{AdamError, AdamState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Central,
    Context,
}

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("node id {0} out of range (encoder covers {1} nodes)")]
    NodeOutOfRange(usize, usize),
    #[error("embedding dimension must be at least 1")]
    ZeroDim,
    #[error("invalid layer configuration: {0}")]
    BadLayers(String),
    #[error("embedding file {path}: {msg}")]
    BadEmbeddingFile { path: String, msg: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Adam(#[from] AdamError),
}

/// Read-only scoring interface shared by trainable encoders and embedding
/// tables loaded from disk.
pub trait Scorer: Sync {
    fn dim(&self) -> usize;
    fn num_nodes(&self) -> usize;
    fn central_embedding(&self, graph: &Graph, node: usize) -> Vec<f64>;
    fn context_embedding(&self, graph: &Graph, node: usize) -> Vec<f64>;

    /// Inner product of the central embedding of `v` and the context
    /// embedding of `u`.
    fn score(&self, graph: &Graph, v: usize, u: usize) -> f64 {
        dot(
            &self.central_embedding(graph, v),
            &self.context_embedding(graph, u),
        )
    }
}

/// A trainable encoder: forward passes leave a tape, tapes are replayed into
/// a sparse gradient accumulator, and accumulated gradients are applied with
/// Adam.
pub trait Encoder: Scorer + Clone + Send {
    type Tape: Send;
    type Grads: Send;

    /// Embedding of `node` in `role` plus the tape needed to push gradients
    /// back through this particular forward pass.
    fn forward(
        &self,
        graph: &Graph,
        node: usize,
        role: Role,
        rng: &mut StdRng,
    ) -> (Vec<f64>, Self::Tape);

    fn new_grads(&self) -> Self::Grads;

    /// Accumulate `d loss / d params` given `upstream = d loss / d embedding`
    /// for the forward pass recorded on `tape`.
    fn backward(&self, tape: &Self::Tape, upstream: &[f64], grads: &mut Self::Grads);

    fn merge_grads(into: &mut Self::Grads, from: Self::Grads);

    /// Flat length of each parameter tensor, in slot order, for sizing the
    /// optimizer state.
    fn adam_shapes(&self) -> Vec<usize>;

    /// Read-only flat views of every parameter tensor, in slot order.
    fn param_slices(&self) -> Vec<&[f64]>;

    /// Mutable flat views of every parameter tensor, in slot order.
    fn param_slices_mut(&mut self) -> Vec<&mut [f64]>;

    /// Accumulated gradients densified per slot (same shapes as
    /// [`Encoder::param_slices`]); a verification helper.
    fn dense_grads(&self, grads: &Self::Grads) -> Vec<Vec<f64>>;

    /// One optimizer step over the touched parameters.
    fn apply_grads(
        &mut self,
        grads: &Self::Grads,
        adam: &mut AdamState,
        lr: f64,
    ) -> Result<(), EncoderError>;
}

/// Row-sparse gradient accumulator over one `(rows x dim)` table.
#[derive(Debug, Clone, Default)]
pub struct RowGrads {
    rows: std::collections::HashMap<usize, Vec<f64>>,
}

impl RowGrads {
    pub fn add(&mut self, row: usize, dim: usize, upstream: &[f64], scale: f64) {
        let entry = self.rows.entry(row).or_insert_with(|| vec![0.0; dim]);
        crate::linalg::axpy(scale, upstream, entry);
    }

    pub fn merge(&mut self, other: RowGrads) {
        for (row, grad) in other.rows {
            match self.rows.entry(row) {
                std::collections::hash_map::Entry::Occupied(mut e) => {
                    crate::linalg::axpy(1.0, &grad, e.get_mut());
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(grad);
                }
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows in ascending order, so parameter updates apply in a fixed order.
    pub fn sorted_rows(&self) -> Vec<(usize, &Vec<f64>)> {
        let mut rows: Vec<_> = self.rows.iter().map(|(&r, g)| (r, g)).collect();
        rows.sort_unstable_by_key(|(r, _)| *r);
        rows
    }

    /// Scatter into a dense flat tensor of `rows * dim` entries.
    pub fn to_dense(&self, rows: usize, dim: usize) -> Vec<f64> {
        let mut dense = vec![0.0; rows * dim];
        for (row, grad) in &self.rows {
            dense[row * dim..(row + 1) * dim].copy_from_slice(grad);
        }
        dense
    }
}
