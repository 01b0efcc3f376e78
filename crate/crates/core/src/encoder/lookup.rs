//! Embedding lookup tables (dual or shared central/context parameters).

use rand::rngs::StdRng;
use rand::Rng;
use rand::SeedableRng;

use super::{Encoder, EncoderError, Role, RowGrads, Scorer};
use crate::graph::Graph;
use crate::train::adam::AdamState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LookupMode {
    /// Independent central and context tables.
    Dual,
    /// One shared table; central and context reads alias it.
    Unique,
}

#[derive(Debug, Clone)]
pub struct LookupEncoder {
    num_nodes: usize,
    dim: usize,
    central: Vec<f64>,
    /// `None` in unique mode.
    context: Option<Vec<f64>>,
    /// Score with unit-normalized rows (cosine) instead of raw dots.
    cosine: bool,
    /// Trainable per-node context bias added to training scores and
    /// excluded from ranking embeddings; `None` when disabled.
    context_bias: Option<Vec<f64>>,
}

impl LookupEncoder {
    /// Fresh tables with entries i.i.d. uniform in `[-0.5/dim, +0.5/dim]`.
    pub fn init(
        num_nodes: usize,
        dim: usize,
        mode: LookupMode,
        seed: u64,
    ) -> Result<Self, EncoderError> {
        if dim == 0 {
            return Err(EncoderError::ZeroDim);
        }
        let mut rng = StdRng::seed_from_u64(seed);
        let half = 0.5 / dim as f64;
        let table = |rng: &mut StdRng| -> Vec<f64> {
            (0..num_nodes * dim).map(|_| rng.gen_range(-half..half)).collect()
        };
        let central = table(&mut rng);
        let context = match mode {
            LookupMode::Dual => Some(table(&mut rng)),
            LookupMode::Unique => None,
        };
        Ok(LookupEncoder {
            num_nodes,
            dim,
            central,
            context,
            cosine: false,
            context_bias: None,
        })
    }

    /// Switch pair scores to cosine: every embedding this encoder emits is
    /// unit-normalized and gradients are projected through the
    /// normalization. Raw dots stay the default; the cosine form bounds
    /// scores to [-1, 1], which removes the norm channel from ranking.
    pub fn with_cosine_scores(mut self, on: bool) -> Self {
        self.cosine = on;
        self
    }

    pub fn cosine_scores(&self) -> bool {
        self.cosine
    }

    /// Attach a zero-initialized per-node context bias. During training the
    /// bias rides along as an extra score term (the popularity channel); the
    /// embeddings handed to evaluation and export never include it.
    pub fn with_context_bias(mut self, on: bool) -> Self {
        self.context_bias = if on {
            Some(vec![0.0; self.num_nodes])
        } else {
            None
        };
        self
    }

    pub fn has_context_bias(&self) -> bool {
        self.context_bias.is_some()
    }

    fn unit_row(&self, node: usize, role: Role) -> (Vec<f64>, f64) {
        let raw = self.row(node, role);
        let norm = crate::linalg::dot(raw, raw).sqrt().max(1e-12);
        (raw.iter().map(|&x| x / norm).collect(), norm)
    }

    pub fn mode(&self) -> LookupMode {
        if self.context.is_some() {
            LookupMode::Dual
        } else {
            LookupMode::Unique
        }
    }

    fn table(&self, role: Role) -> &[f64] {
        match (role, &self.context) {
            (Role::Context, Some(ctx)) => ctx,
            _ => &self.central,
        }
    }

    pub(crate) fn row(&self, node: usize, role: Role) -> &[f64] {
        &self.table(role)[node * self.dim..(node + 1) * self.dim]
    }

    /// Bounds-checked row access.
    pub fn embed(&self, node: usize, role: Role) -> Result<&[f64], EncoderError> {
        if node >= self.num_nodes {
            return Err(EncoderError::NodeOutOfRange(node, self.num_nodes));
        }
        Ok(self.row(node, role))
    }

    pub fn row_mut(&mut self, node: usize, role: Role) -> &mut [f64] {
        let dim = self.dim;
        let table = match (role, &mut self.context) {
            (Role::Context, Some(ctx)) => ctx,
            _ => &mut self.central,
        };
        &mut table[node * dim..(node + 1) * dim]
    }
}

#[derive(Debug, Clone, Default)]
pub struct LookupGrads {
    pub central: RowGrads,
    pub context: RowGrads,
    pub bias: RowGrads,
}

impl Scorer for LookupEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    fn central_embedding(&self, _graph: &Graph, node: usize) -> Vec<f64> {
        if self.cosine {
            self.unit_row(node, Role::Central).0
        } else {
            self.row(node, Role::Central).to_vec()
        }
    }

    fn context_embedding(&self, _graph: &Graph, node: usize) -> Vec<f64> {
        if self.cosine {
            self.unit_row(node, Role::Context).0
        } else {
            self.row(node, Role::Context).to_vec()
        }
    }

    fn score(&self, graph: &Graph, v: usize, u: usize) -> f64 {
        if self.cosine {
            crate::linalg::dot(
                &self.central_embedding(graph, v),
                &self.context_embedding(graph, u),
            )
        } else {
            crate::linalg::dot(self.row(v, Role::Central), self.row(u, Role::Context))
        }
    }
}

/// Forward-pass record: in cosine mode the emitted unit vector and the raw
/// norm are kept for the backward projection; `biased` marks a context
/// forward that carried the bias coordinate.
#[derive(Debug, Clone)]
pub struct LookupTape {
    node: usize,
    role: Role,
    unit: Option<(Vec<f64>, f64)>,
    biased: bool,
}

impl Encoder for LookupEncoder {
    type Tape = LookupTape;
    type Grads = LookupGrads;

    fn forward(
        &self,
        _graph: &Graph,
        node: usize,
        role: Role,
        _rng: &mut StdRng,
    ) -> (Vec<f64>, Self::Tape) {
        let (mut out, unit) = if self.cosine {
            let (unit, norm) = self.unit_row(node, role);
            (unit.clone(), Some((unit, norm)))
        } else {
            (self.row(node, role).to_vec(), None)
        };
        // The bias rides as one extra coordinate: 1 on the central side,
        // b_node on the context side, so pair scores pick up +b_context.
        let biased = self.context_bias.is_some();
        if let Some(bias) = &self.context_bias {
            out.push(match role {
                Role::Central => 1.0,
                Role::Context => bias[node],
            });
        }
        (
            out,
            LookupTape {
                node,
                role,
                unit,
                biased,
            },
        )
    }

    fn new_grads(&self) -> LookupGrads {
        LookupGrads::default()
    }

    fn backward(&self, tape: &Self::Tape, upstream: &[f64], grads: &mut LookupGrads) {
        let (upstream, bias_grad) = if tape.biased {
            (&upstream[..self.dim], Some(upstream[self.dim]))
        } else {
            (upstream, None)
        };
        // In unique mode both roles hit the shared table, tracked as central.
        let target = match (tape.role, &self.context) {
            (Role::Context, Some(_)) => &mut grads.context,
            _ => &mut grads.central,
        };
        match &tape.unit {
            None => target.add(tape.node, self.dim, upstream, 1.0),
            Some((unit, norm)) => {
                // d(u / |u|) pushes the tangential component through:
                // (g - (g . u_hat) u_hat) / |u|.
                let radial = crate::linalg::dot(upstream, unit);
                let projected: Vec<f64> = upstream
                    .iter()
                    .zip(unit)
                    .map(|(&g, &e)| (g - radial * e) / norm)
                    .collect();
                target.add(tape.node, self.dim, &projected, 1.0);
            }
        }
        // The central side's constant 1 carries no parameter gradient.
        if let (Some(g), Role::Context) = (bias_grad, tape.role) {
            grads.bias.add(tape.node, 1, &[g], 1.0);
        }
    }

    fn merge_grads(into: &mut LookupGrads, from: LookupGrads) {
        into.central.merge(from.central);
        into.context.merge(from.context);
        into.bias.merge(from.bias);
    }

    fn adam_shapes(&self) -> Vec<usize> {
        let mut shapes = vec![self.central.len()];
        if let Some(ctx) = &self.context {
            shapes.push(ctx.len());
        }
        if let Some(bias) = &self.context_bias {
            shapes.push(bias.len());
        }
        shapes
    }

    fn param_slices(&self) -> Vec<&[f64]> {
        let mut slices: Vec<&[f64]> = vec![&self.central];
        if let Some(ctx) = &self.context {
            slices.push(ctx);
        }
        if let Some(bias) = &self.context_bias {
            slices.push(bias);
        }
        slices
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        let mut slices: Vec<&mut [f64]> = vec![&mut self.central];
        if let Some(ctx) = &mut self.context {
            slices.push(ctx);
        }
        if let Some(bias) = &mut self.context_bias {
            slices.push(bias);
        }
        slices
    }

    fn dense_grads(&self, grads: &LookupGrads) -> Vec<Vec<f64>> {
        let mut dense = vec![grads.central.to_dense(self.num_nodes, self.dim)];
        if self.context.is_some() {
            dense.push(grads.context.to_dense(self.num_nodes, self.dim));
        }
        if self.context_bias.is_some() {
            dense.push(grads.bias.to_dense(self.num_nodes, 1));
        }
        dense
    }

    fn apply_grads(
        &mut self,
        grads: &LookupGrads,
        adam: &mut AdamState,
        lr: f64,
    ) -> Result<(), EncoderError> {
        for (row, grad) in grads.central.sorted_rows() {
            adam.update_row(0, &mut self.central, self.dim, row, grad, lr)?;
        }
        let mut slot = 1;
        if let Some(ctx) = &mut self.context {
            for (row, grad) in grads.context.sorted_rows() {
                adam.update_row(slot, ctx, self.dim, row, grad, lr)?;
            }
            slot += 1;
        } else {
            debug_assert!(grads.context.is_empty());
        }
        if let Some(bias) = &mut self.context_bias {
            for (row, grad) in grads.bias.sorted_rows() {
                adam.update_row(slot, bias, 1, row, grad, lr)?;
            }
        } else {
            debug_assert!(grads.bias.is_empty());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn tiny_graph() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)], false, None).unwrap()
    }

    #[test]
    fn init_respects_range_and_seed() {
        let e = LookupEncoder::init(3, 2, LookupMode::Dual, 7).unwrap();
        for &x in e.central.iter().chain(e.context.as_ref().unwrap()) {
            assert!(x.abs() <= 0.25);
        }
        let e2 = LookupEncoder::init(3, 2, LookupMode::Dual, 7).unwrap();
        assert_eq!(e.central, e2.central);
        assert_eq!(e.context, e2.context);
        assert!(LookupEncoder::init(3, 0, LookupMode::Dual, 7).is_err());
    }

    #[test]
    fn unique_mode_aliases_roles() {
        let e = LookupEncoder::init(4, 3, LookupMode::Unique, 1).unwrap();
        assert_eq!(
            e.embed(0, Role::Central).unwrap(),
            e.embed(0, Role::Context).unwrap()
        );
        assert_eq!(e.embed(2, Role::Central).unwrap().len(), 3);
    }

    #[test]
    fn dual_mode_roles_diverge_after_writes() {
        let mut e = LookupEncoder::init(2, 2, LookupMode::Dual, 3).unwrap();
        e.row_mut(0, Role::Central).copy_from_slice(&[1.0, 0.0]);
        e.row_mut(0, Role::Context).copy_from_slice(&[0.5, 2.0]);
        assert_ne!(
            e.embed(0, Role::Central).unwrap(),
            e.embed(0, Role::Context).unwrap()
        );
        let g = tiny_graph();
        assert!((e.score(&g, 0, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_node_errors() {
        let e = LookupEncoder::init(2, 2, LookupMode::Dual, 3).unwrap();
        assert!(matches!(
            e.embed(2, Role::Central),
            Err(EncoderError::NodeOutOfRange(2, 2))
        ));
    }

    #[test]
    fn unique_equals_dual_with_copied_tables() {
        let g = tiny_graph();
        let unique = LookupEncoder::init(3, 4, LookupMode::Unique, 11).unwrap();
        let mut dual = LookupEncoder::init(3, 4, LookupMode::Dual, 12).unwrap();
        dual.central.copy_from_slice(&unique.central);
        dual.context.as_mut().unwrap().copy_from_slice(&unique.central);
        for v in 0..3 {
            for u in 0..3 {
                assert_eq!(unique.score(&g, v, u), dual.score(&g, v, u));
            }
        }
        // Unique mode with symmetric roles: score is symmetric.
        assert_eq!(unique.score(&g, 0, 2), unique.score(&g, 2, 0));
    }

    #[test]
    fn cosine_mode_bounds_scores_and_matches_finite_differences() {
        use rand::SeedableRng;
        let g = tiny_graph();
        let e = LookupEncoder::init(3, 4, LookupMode::Dual, 2)
            .unwrap()
            .with_cosine_scores(true);
        for v in 0..3 {
            for u in 0..3 {
                assert!(e.score(&g, v, u).abs() <= 1.0 + 1e-12);
            }
        }
        // Gradient of the cosine score w.r.t. the raw central row.
        let mut rng = StdRng::seed_from_u64(0);
        let (e_v, tape_v) = e.forward(&g, 0, Role::Central, &mut rng);
        let (e_u, _) = e.forward(&g, 1, Role::Context, &mut rng);
        let mut grads = e.new_grads();
        e.backward(&tape_v, &e_u, &mut grads);
        let dense = e.dense_grads(&grads);
        let base = crate::linalg::dot(&e_v, &e_u);
        let h = 1e-7;
        for i in 0..4 {
            let mut plus = e.clone();
            plus.row_mut(0, Role::Central)[i] += h;
            let mut minus = e.clone();
            minus.row_mut(0, Role::Central)[i] -= h;
            let fd = (plus.score(&g, 0, 1) - minus.score(&g, 0, 1)) / (2.0 * h);
            let an = dense[0][i];
            assert!(
                (an - fd).abs() / fd.abs().max(1e-8) < 1e-4,
                "coord {i}: {an} vs {fd} (score {base})"
            );
        }
    }

    #[test]
    fn bias_channel_trains_but_never_reaches_ranking_embeddings() {
        use rand::SeedableRng;
        let g = tiny_graph();
        let e = LookupEncoder::init(3, 4, LookupMode::Dual, 5)
            .unwrap()
            .with_cosine_scores(true)
            .with_context_bias(true);
        let mut rng = StdRng::seed_from_u64(0);
        let (e_v, tape_v) = e.forward(&g, 0, Role::Central, &mut rng);
        let (e_u, tape_u) = e.forward(&g, 1, Role::Context, &mut rng);
        // Forward carries the extra coordinate; ranking embeddings do not.
        assert_eq!(e_v.len(), 5);
        assert_eq!(e_u.len(), 5);
        assert_eq!(e_v[4], 1.0);
        assert_eq!(e.central_embedding(&g, 0).len(), 4);
        // Training score includes the bias, the ranking score does not.
        let train_score = crate::linalg::dot(&e_v, &e_u);
        assert!((train_score - (e.score(&g, 0, 1) + e_u[4])).abs() < 1e-12);

        // d train_score / d bias[1] is exactly 1 through the backward pass.
        let mut grads = e.new_grads();
        e.backward(&tape_u, &e_v, &mut grads);
        e.backward(&tape_v, &e_u, &mut grads);
        let dense = e.dense_grads(&grads);
        assert_eq!(dense.len(), 3);
        assert!((dense[2][1] - 1.0).abs() < 1e-12);
        assert_eq!(dense[2][0], 0.0);
    }

    #[test]
    fn zero_tables_score_zero() {
        let mut e = LookupEncoder::init(3, 2, LookupMode::Dual, 0).unwrap();
        e.central.fill(0.0);
        e.context.as_mut().unwrap().fill(0.0);
        let g = tiny_graph();
        for v in 0..3 {
            for u in 0..3 {
                assert_eq!(e.score(&g, v, u), 0.0);
            }
        }
    }
}
