//! Mean-aggregator encoder over sampled neighborhoods.
//!
//! Each layer samples up to `neighbor_sample_size` neighbors (all of them
//! when the degree is small enough, with replacement otherwise), averages
//! the previous layer's vectors of the node and its sampled neighbors, and
//! applies an affine map. Hidden layers take a ReLU; the output layer stays
//! linear. Base features default to free learnable per-node vectors.

use rand::rngs::StdRng;
use rand::Rng;
use rand::SeedableRng;

use super::{Encoder, EncoderError, Role, RowGrads, Scorer};
use crate::graph::Graph;
use crate::rng;
use crate::train::adam::AdamState;

#[derive(Debug, Clone)]
struct Layer {
    /// Row-major `(out_dim x in_dim)`.
    w: Vec<f64>,
    b: Vec<f64>,
    in_dim: usize,
    out_dim: usize,
}

#[derive(Debug, Clone)]
pub struct SageEncoder {
    num_nodes: usize,
    feature_dim: usize,
    base: Vec<f64>,
    layers: Vec<Layer>,
    neighbor_sample_size: usize,
    eval_seed: u64,
}

/// One forward pass through the aggregation tree.
#[derive(Debug)]
pub enum SageTape {
    Leaf {
        node: usize,
    },
    Agg {
        layer: usize,
        children: Vec<SageTape>,
        mean: Vec<f64>,
        pre: Vec<f64>,
    },
}

#[derive(Debug, Clone)]
pub struct SageGrads {
    pub base: RowGrads,
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl SageEncoder {
    /// `layer_dims` holds the output width of each layer (one or two
    /// layers); the final entry is the embedding dimension.
    pub fn init(
        num_nodes: usize,
        feature_dim: usize,
        layer_dims: &[usize],
        neighbor_sample_size: usize,
        seed: u64,
    ) -> Result<Self, EncoderError> {
        if feature_dim == 0 || layer_dims.contains(&0) {
            return Err(EncoderError::ZeroDim);
        }
        if layer_dims.is_empty() || layer_dims.len() > 2 {
            return Err(EncoderError::BadLayers(format!(
                "expected 1 or 2 layers, got {}",
                layer_dims.len()
            )));
        }
        if neighbor_sample_size == 0 {
            return Err(EncoderError::BadLayers(
                "neighbor_sample_size must be at least 1".into(),
            ));
        }
        let mut rng = StdRng::seed_from_u64(seed);
        let half = 0.5 / feature_dim as f64;
        let base = (0..num_nodes * feature_dim)
            .map(|_| rng.gen_range(-half..half))
            .collect();
        let mut layers = Vec::with_capacity(layer_dims.len());
        let mut in_dim = feature_dim;
        for &out_dim in layer_dims {
            let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
            let w = (0..out_dim * in_dim)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            layers.push(Layer {
                w,
                b: vec![0.0; out_dim],
                in_dim,
                out_dim,
            });
            in_dim = out_dim;
        }
        Ok(SageEncoder {
            num_nodes,
            feature_dim,
            base,
            layers,
            neighbor_sample_size,
            eval_seed: rng::derive(seed, 0x5a9e),
        })
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    fn base_row(&self, node: usize) -> &[f64] {
        &self.base[node * self.feature_dim..(node + 1) * self.feature_dim]
    }

    fn sample_neighbors(&self, graph: &Graph, node: usize, rng: &mut StdRng) -> Vec<usize> {
        let nbrs = graph.neighbors(node);
        if nbrs.is_empty() {
            return Vec::new();
        }
        if nbrs.len() <= self.neighbor_sample_size {
            nbrs.to_vec()
        } else {
            (0..self.neighbor_sample_size)
                .map(|_| nbrs[rng.gen_range(0..nbrs.len())])
                .collect()
        }
    }

    fn forward_layer(
        &self,
        graph: &Graph,
        node: usize,
        layer: usize,
        rng: &mut StdRng,
    ) -> (Vec<f64>, SageTape) {
        if layer == 0 {
            return (self.base_row(node).to_vec(), SageTape::Leaf { node });
        }
        let spec = &self.layers[layer - 1];
        let mut members = vec![node];
        members.extend(self.sample_neighbors(graph, node, rng));
        let mut mean = vec![0.0; spec.in_dim];
        let mut children = Vec::with_capacity(members.len());
        for m in members {
            let (out, tape) = self.forward_layer(graph, m, layer - 1, rng);
            crate::linalg::axpy(1.0, &out, &mut mean);
            children.push(tape);
        }
        let scale = 1.0 / children.len() as f64;
        mean.iter_mut().for_each(|x| *x *= scale);
        let mut pre = spec.b.clone();
        for o in 0..spec.out_dim {
            pre[o] += crate::linalg::dot(&spec.w[o * spec.in_dim..(o + 1) * spec.in_dim], &mean);
        }
        let out = if layer == self.layers.len() {
            pre.clone()
        } else {
            pre.iter().map(|&z| z.max(0.0)).collect()
        };
        (
            out,
            SageTape::Agg {
                layer,
                children,
                mean,
                pre,
            },
        )
    }

    fn backward_layer(&self, tape: &SageTape, upstream: &[f64], grads: &mut SageGrads) {
        match tape {
            SageTape::Leaf { node } => {
                grads.base.add(*node, self.feature_dim, upstream, 1.0);
            }
            SageTape::Agg {
                layer,
                children,
                mean,
                pre,
            } => {
                let spec = &self.layers[layer - 1];
                let dz: Vec<f64> = if *layer == self.layers.len() {
                    upstream.to_vec()
                } else {
                    upstream
                        .iter()
                        .zip(pre)
                        .map(|(&u, &z)| if z > 0.0 { u } else { 0.0 })
                        .collect()
                };
                let (dw, db) = (&mut grads.w[layer - 1], &mut grads.b[layer - 1]);
                for o in 0..spec.out_dim {
                    db[o] += dz[o];
                    crate::linalg::axpy(
                        dz[o],
                        mean,
                        &mut dw[o * spec.in_dim..(o + 1) * spec.in_dim],
                    );
                }
                let mut dmean = vec![0.0; spec.in_dim];
                for o in 0..spec.out_dim {
                    crate::linalg::axpy(
                        dz[o],
                        &spec.w[o * spec.in_dim..(o + 1) * spec.in_dim],
                        &mut dmean,
                    );
                }
                let share = 1.0 / children.len() as f64;
                dmean.iter_mut().for_each(|x| *x *= share);
                for child in children {
                    self.backward_layer(child, &dmean, grads);
                }
            }
        }
    }
}

/// Embedding of `node` under a caller-controlled sampling seed.
pub fn sage_embed(encoder: &SageEncoder, graph: &Graph, node: usize, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    encoder
        .forward_layer(graph, node, encoder.layers.len(), &mut rng)
        .0
}

impl Scorer for SageEncoder {
    fn dim(&self) -> usize {
        self.layers.last().map(|l| l.out_dim).unwrap_or(self.feature_dim)
    }

    fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    fn central_embedding(&self, graph: &Graph, node: usize) -> Vec<f64> {
        // Per-node derived stream keeps scorer output independent of call
        // order.
        sage_embed(self, graph, node, rng::derive(self.eval_seed, node as u64))
    }

    fn context_embedding(&self, graph: &Graph, node: usize) -> Vec<f64> {
        self.central_embedding(graph, node)
    }
}

impl Encoder for SageEncoder {
    type Tape = SageTape;
    type Grads = SageGrads;

    fn forward(
        &self,
        graph: &Graph,
        node: usize,
        _role: Role,
        rng: &mut StdRng,
    ) -> (Vec<f64>, SageTape) {
        self.forward_layer(graph, node, self.layers.len(), rng)
    }

    fn new_grads(&self) -> SageGrads {
        SageGrads {
            base: RowGrads::default(),
            w: self.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            b: self.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    fn backward(&self, tape: &SageTape, upstream: &[f64], grads: &mut SageGrads) {
        self.backward_layer(tape, upstream, grads);
    }

    fn merge_grads(into: &mut SageGrads, from: SageGrads) {
        into.base.merge(from.base);
        for (a, b) in into.w.iter_mut().zip(from.w) {
            crate::linalg::axpy(1.0, &b, a);
        }
        for (a, b) in into.b.iter_mut().zip(from.b) {
            crate::linalg::axpy(1.0, &b, a);
        }
    }

    fn adam_shapes(&self) -> Vec<usize> {
        let mut shapes = vec![self.base.len()];
        for l in &self.layers {
            shapes.push(l.w.len());
            shapes.push(l.b.len());
        }
        shapes
    }

    fn param_slices(&self) -> Vec<&[f64]> {
        let mut slices: Vec<&[f64]> = vec![&self.base];
        for l in &self.layers {
            slices.push(&l.w);
            slices.push(&l.b);
        }
        slices
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut slices: Vec<&mut [f64]> = vec![&mut self.base];
        for l in &mut self.layers {
            slices.push(&mut l.w);
            slices.push(&mut l.b);
        }
        slices
    }

    fn dense_grads(&self, grads: &SageGrads) -> Vec<Vec<f64>> {
        let mut dense = vec![grads.base.to_dense(self.num_nodes, self.feature_dim)];
        for i in 0..self.layers.len() {
            dense.push(grads.w[i].clone());
            dense.push(grads.b[i].clone());
        }
        dense
    }

    fn apply_grads(
        &mut self,
        grads: &SageGrads,
        adam: &mut AdamState,
        lr: f64,
    ) -> Result<(), EncoderError> {
        for (row, grad) in grads.base.sorted_rows() {
            adam.update_row(0, &mut self.base, self.feature_dim, row, grad, lr)?;
        }
        for (i, layer) in self.layers.iter_mut().enumerate() {
            adam.update_dense(1 + 2 * i, &mut layer.w, &grads.w[i], lr)?;
            adam.update_dense(2 + 2 * i, &mut layer.b, &grads.b[i], lr)?;
        }
        Ok(())
    }
}
