//! DFS traversal sequences and uniform random walks.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;

use super::{Graph, GraphError};
use crate::rng;

/// Neighbor visit order for DFS. `Sorted` is the fixed convention used by
/// hand-traceable tests; `Shuffled` reshuffles per node under the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborOrder {
    Sorted,
    Shuffled(u64),
}

/// Traversal sequence in which consecutive entries are adjacent: append the
/// current node on entry, recurse into each unvisited neighbor, and append
/// the current node again after each return. Unvisited components restart
/// from the lowest-id unvisited node.
pub fn dfs_sequence(graph: &Graph, start: usize, order: NeighborOrder) -> Vec<usize> {
    let n = graph.num_nodes();
    let mut seq = Vec::with_capacity(2 * n);
    if n == 0 {
        return seq;
    }
    let mut rng = match order {
        NeighborOrder::Sorted => None,
        NeighborOrder::Shuffled(seed) => Some(StdRng::seed_from_u64(seed)),
    };
    let mut visited = vec![false; n];
    let ordered = |v: usize, rng: &mut Option<StdRng>| -> Vec<usize> {
        let mut nbrs = graph.neighbors(v).to_vec();
        if let Some(r) = rng {
            nbrs.shuffle(r);
        }
        nbrs
    };

    let mut roots = vec![start];
    roots.extend((0..n).filter(|&v| v != start));
    for root in roots {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        seq.push(root);
        // (node, ordered neighbor list, cursor)
        let mut stack = vec![(root, ordered(root, &mut rng), 0usize)];
        while let Some(top) = stack.last_mut() {
            let mut next = None;
            while top.2 < top.1.len() {
                let y = top.1[top.2];
                top.2 += 1;
                if !visited[y] {
                    next = Some(y);
                    break;
                }
            }
            match next {
                Some(y) => {
                    visited[y] = true;
                    seq.push(y);
                    let ord = ordered(y, &mut rng);
                    stack.push((y, ord, 0));
                }
                None => {
                    stack.pop();
                    if let Some(parent) = stack.last() {
                        seq.push(parent.0);
                    }
                }
            }
        }
    }
    seq
}

/// A batch of uniform-neighbor random walks.
#[derive(Debug, Clone)]
pub struct Walks {
    pub walks: Vec<Vec<usize>>,
    /// Degree-zero nodes that could not start a walk.
    pub isolated_skipped: usize,
}

/// `walks_per_node` uniform-neighbor walks of `walk_length` nodes from every
/// non-isolated node. Deterministic under `seed`.
pub fn random_walks(
    graph: &Graph,
    walks_per_node: usize,
    walk_length: usize,
    seed: u64,
) -> Result<Walks, GraphError> {
    if walk_length < 2 {
        return Err(GraphError::InvalidArgument(format!(
            "walk_length must be at least 2, got {walk_length}"
        )));
    }
    let mut walks = Vec::new();
    let mut isolated = 0usize;
    let mut rng = rng::stream_rng(seed, 0x77a1);
    for start in 0..graph.num_nodes() {
        if graph.degree(start) == 0 {
            isolated += 1;
            continue;
        }
        for _ in 0..walks_per_node {
            let mut walk = Vec::with_capacity(walk_length);
            walk.push(start);
            let mut cur = start;
            for _ in 1..walk_length {
                let nbrs = graph.neighbors(cur);
                cur = nbrs[rng.gen_range(0..nbrs.len())];
                walk.push(cur);
            }
            walks.push(walk);
        }
    }
    Ok(Walks {
        walks,
        isolated_skipped: isolated,
    })
}
