//! Link-prediction edge holdout with guaranteed residual connectivity.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Graph, GraphError};
use crate::rng;

/// Result of holding out test edges from a connected graph.
#[derive(Debug, Clone)]
pub struct LinkSplit {
    pub residual: Graph,
    pub test_pos: Vec<(usize, usize)>,
    pub test_neg: Vec<(usize, usize)>,
    /// Fraction of edges actually removed; at most the requested fraction.
    pub achieved_fraction: f64,
}

/// Remove a `holdout_fraction` of edges uniformly at random while keeping the
/// residual graph connected by protecting a seeded random spanning tree, then
/// draw the same number of uniform non-edges as test negatives.
pub fn split_link_prediction(
    graph: &Graph,
    holdout_fraction: f64,
    seed: u64,
) -> Result<LinkSplit, GraphError> {
    if !(holdout_fraction > 0.0 && holdout_fraction < 1.0) {
        return Err(GraphError::InvalidArgument(format!(
            "holdout fraction must lie in (0,1), got {holdout_fraction}"
        )));
    }
    if !graph.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let n = graph.num_nodes();
    let m = graph.num_edges();
    // Floor keeps the achieved fraction at or below the request; the epsilon
    // absorbs cases like (1/3) * 3 landing just under an integer.
    let target = (holdout_fraction * m as f64 + 1e-9).floor() as usize;
    if target == 0 {
        return Err(GraphError::EmptyHoldout);
    }

    // Randomized DFS spanning tree; its edges are never removed, so the
    // residual stays connected for every seed.
    let mut tree: HashSet<(usize, usize)> = HashSet::with_capacity(n.saturating_sub(1));
    let mut tree_rng = rng::stream_rng(seed, 1);
    let root = tree_rng.gen_range(0..n);
    let mut visited = vec![false; n];
    visited[root] = true;
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        let mut nbrs = graph.neighbors(v).to_vec();
        nbrs.shuffle(&mut tree_rng);
        for u in nbrs {
            if !visited[u] {
                visited[u] = true;
                tree.insert(norm(v, u));
                stack.push(v);
                stack.push(u);
                break;
            }
        }
    }

    let mut removable: Vec<(usize, usize)> = graph
        .edges()
        .filter(|&(u, v)| !tree.contains(&norm(u, v)))
        .collect();
    let mut pick_rng = rng::stream_rng(seed, 2);
    removable.shuffle(&mut pick_rng);
    let take = target.min(removable.len());
    let test_pos: Vec<(usize, usize)> = removable[..take].to_vec();

    let needed = test_pos.len();
    let possible_non_edges = n * (n - 1) / 2 - m;
    if possible_non_edges < needed {
        return Err(GraphError::NotEnoughNonEdges {
            needed,
            available: possible_non_edges,
        });
    }
    let mut neg_rng = rng::stream_rng(seed, 3);
    let mut chosen: HashSet<(usize, usize)> = HashSet::with_capacity(needed);
    let mut test_neg = Vec::with_capacity(needed);
    while test_neg.len() < needed {
        let a = neg_rng.gen_range(0..n);
        let b = neg_rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let pair = norm(a, b);
        if graph.has_edge(pair.0, pair.1) || chosen.contains(&pair) {
            continue;
        }
        chosen.insert(pair);
        test_neg.push(pair);
    }

    let held: HashSet<(usize, usize)> = test_pos.iter().copied().collect();
    let residual_edges: Vec<(usize, usize)> =
        graph.edges().filter(|e| !held.contains(e)).collect();
    let partition = if graph.is_bipartite() {
        Some((0..n).map(|v| graph.part(v).unwrap()).collect())
    } else {
        None
    };
    let residual = Graph::build(
        n,
        &residual_edges,
        graph.directed_source(),
        partition,
        (0..n).map(|v| graph.label(v).to_string()).collect(),
    )?;
    debug_assert!(residual.is_connected());

    Ok(LinkSplit {
        residual,
        test_pos,
        test_neg,
        achieved_fraction: take as f64 / m as f64,
    })
}

fn norm(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Deterministic cross-validation partition of `0..num_items`: one seeded
/// shuffle cut into `parts` nearly equal slices. Used to fold edge sets; the
/// convention is that the last part serves as the validation slice.
pub fn fold_partition(num_items: usize, parts: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..num_items).collect();
    order.shuffle(&mut rng::stream_rng(seed, 0xf01d));
    (0..parts)
        .map(|part| {
            let lo = part * num_items / parts;
            let hi = (part + 1) * num_items / parts;
            order[lo..hi].to_vec()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges, false, None).unwrap()
    }

    #[test]
    fn triangle_has_no_non_edges_so_split_errors() {
        let g = cycle(3);
        let err = split_link_prediction(&g, 1.0 / 3.0, 0).unwrap_err();
        assert!(matches!(
            err,
            GraphError::NotEnoughNonEdges {
                needed: 1,
                available: 0
            }
        ));
    }

    #[test]
    fn four_cycle_quarter_split() {
        let g = cycle(4);
        let split = split_link_prediction(&g, 0.25, 11).unwrap();
        assert_eq!(split.test_pos.len(), 1);
        assert_eq!(split.test_neg.len(), 1);
        assert_eq!(split.residual.num_edges(), 3);
        assert!(split.residual.is_connected());
        assert!((split.achieved_fraction - 0.25).abs() < 1e-12);
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)], false, None).unwrap();
        assert!(matches!(
            split_link_prediction(&g, 0.5, 0),
            Err(GraphError::Disconnected)
        ));
    }

    #[test]
    fn zero_target_is_rejected() {
        let g = cycle(4);
        assert!(matches!(
            split_link_prediction(&g, 0.01, 0),
            Err(GraphError::EmptyHoldout)
        ));
    }

    #[test]
    fn held_out_edges_leave_residual_and_negatives_are_non_edges() {
        let g = super::super::synth::barabasi_albert_graph(60, 3, 5).unwrap();
        let split = split_link_prediction(&g, 0.3, 17).unwrap();
        assert_eq!(split.test_pos.len(), split.test_neg.len());
        for &(u, v) in &split.test_pos {
            assert!(!split.residual.has_edge(u, v));
            assert!(g.has_edge(u, v));
        }
        for &(u, v) in &split.test_neg {
            assert!(!g.has_edge(u, v));
            assert_ne!(u, v);
        }
    }

    #[test]
    fn residual_connected_and_fraction_bounded_over_seeds() {
        let g = super::super::synth::barabasi_albert_graph(40, 2, 9).unwrap();
        for seed in 0..100 {
            let split = split_link_prediction(&g, 0.3, seed).unwrap();
            assert!(split.residual.is_connected(), "seed {seed}");
            assert!(split.achieved_fraction <= 0.3 + 1e-9);
        }
    }

    #[test]
    fn caps_at_available_non_tree_edges() {
        // Path graph: the spanning tree is the whole graph, so nothing is
        // removable and the split reports an achieved fraction of zero...
        // which means no positives and no negatives.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)], false, None).unwrap();
        let split = split_link_prediction(&g, 0.5, 3).unwrap();
        assert_eq!(split.test_pos.len(), 0);
        assert_eq!(split.achieved_fraction, 0.0);
    }
}
