//! Synthetic graph generators used as test fixtures and by the CLI.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Graph, GraphError, Part};
use crate::rng;

/// Path 0-1-...-(n-1).
pub fn path_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect()
}

/// Star with center 0 and leaves 1..n.
pub fn star_edges(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| (0, i)).collect()
}

/// Barabási–Albert preferential attachment: nodes join one at a time and
/// attach to `m` distinct existing nodes picked proportionally to degree.
/// The seed graph is a star over the first `m + 1` nodes, so the result is
/// connected.
pub fn barabasi_albert_edges(n: usize, m: usize, seed: u64) -> Result<Vec<(usize, usize)>, GraphError> {
    if m < 1 {
        return Err(GraphError::InvalidArgument("m must be at least 1".into()));
    }
    if n < m + 1 {
        return Err(GraphError::InvalidArgument(format!(
            "need at least m+1={} nodes, got {n}",
            m + 1
        )));
    }
    let mut rng = rng::stream_rng(seed, 0xba);
    let mut edges: Vec<(usize, usize)> = (1..=m).map(|i| (0, i)).collect();
    // One entry per edge endpoint; sampling an entry uniformly is sampling a
    // node proportionally to its degree.
    let mut endpoints: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    for v in (m + 1)..n {
        let mut targets = Vec::with_capacity(m);
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            edges.push((v, t));
            endpoints.push(v);
            endpoints.push(t);
        }
    }
    Ok(edges)
}

pub fn barabasi_albert_graph(n: usize, m: usize, seed: u64) -> Result<Graph, GraphError> {
    Graph::from_edges(n, &barabasi_albert_edges(n, m, seed)?, false, None)
}

/// Random bipartite user-item edges. Every user and every item receives at
/// least one edge, the remainder are uniform distinct pairs.
pub fn bipartite_edges(
    users: usize,
    items: usize,
    num_edges: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>, GraphError> {
    if users == 0 || items == 0 {
        return Err(GraphError::InvalidArgument(
            "need at least one user and one item".into(),
        ));
    }
    if num_edges < users.max(items) {
        return Err(GraphError::InvalidArgument(format!(
            "need at least max(users, items)={} edges to cover every node",
            users.max(items)
        )));
    }
    if num_edges > users * items {
        return Err(GraphError::InvalidArgument(format!(
            "at most users*items={} distinct edges exist",
            users * items
        )));
    }
    let mut rng = rng::stream_rng(seed, 0xb1);
    let mut chosen = std::collections::HashSet::with_capacity(num_edges);
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(num_edges);
    let mut item_covered = vec![false; items];
    let mut item_order: Vec<usize> = (0..items).collect();
    item_order.shuffle(&mut rng);
    for u in 0..users {
        let i = item_order[u % items];
        if chosen.insert((u, i)) {
            edges.push((u, users + i));
            item_covered[i] = true;
        }
    }
    for i in 0..items {
        if item_covered[i] {
            continue;
        }
        let u = rng.gen_range(0..users);
        if chosen.insert((u, i)) {
            edges.push((u, users + i));
        }
    }
    while edges.len() < num_edges {
        let u = rng.gen_range(0..users);
        let i = rng.gen_range(0..items);
        if chosen.insert((u, i)) {
            edges.push((u, users + i));
        }
    }
    Ok(edges)
}

/// Bipartite graph with partition tags: users `0..users`, items
/// `users..users+items`.
pub fn bipartite_graph(
    users: usize,
    items: usize,
    num_edges: usize,
    seed: u64,
) -> Result<Graph, GraphError> {
    let edges = bipartite_edges(users, items, num_edges, seed)?;
    let mut partition = vec![Part::U; users + items];
    partition[users..].fill(Part::I);
    Graph::from_edges(users + items, &edges, false, Some(partition))
}
