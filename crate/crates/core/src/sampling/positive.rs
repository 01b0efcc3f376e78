//! Positive pair samplers: direct edges or co-window random-walk pairs.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use super::SamplingError;
use crate::graph::{random_walks, Graph, Part};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositiveKind {
    /// Uniform over stored edges; on bipartite graphs the pair is oriented
    /// `U -> I`, otherwise the orientation is a fair coin.
    DirectEdge,
    /// Uniform over co-window pairs of a cached walk set, regenerated with a
    /// fresh stream once exhausted.
    WalkWindow {
        window: usize,
        walks_per_node: usize,
        walk_length: usize,
    },
}

#[derive(Debug, Clone)]
pub struct PositiveSampler {
    kind: PositiveKind,
    seed: u64,
    edges: Vec<(u32, u32)>,
    cache: Vec<(u32, u32)>,
    cursor: usize,
    generation: u64,
    by_center: Vec<Vec<u32>>,
}

impl PositiveSampler {
    pub fn new(graph: &Graph, kind: PositiveKind, seed: u64) -> Result<Self, SamplingError> {
        if graph.num_edges() == 0 {
            return Err(SamplingError::NoEdges);
        }
        if let PositiveKind::WalkWindow { window, .. } = kind {
            if window == 0 {
                return Err(SamplingError::InvalidArgument(
                    "window must be at least 1".into(),
                ));
            }
        }
        let mut sampler = PositiveSampler {
            kind,
            seed,
            edges: Vec::new(),
            cache: Vec::new(),
            cursor: 0,
            generation: 0,
            by_center: Vec::new(),
        };
        match kind {
            PositiveKind::DirectEdge => {
                sampler.edges = graph
                    .edges()
                    .map(|(a, b)| (a as u32, b as u32))
                    .collect();
            }
            PositiveKind::WalkWindow { .. } => sampler.regenerate(graph)?,
        }
        Ok(sampler)
    }

    pub fn kind(&self) -> PositiveKind {
        self.kind
    }

    fn regenerate(&mut self, graph: &Graph) -> Result<(), SamplingError> {
        let PositiveKind::WalkWindow {
            window,
            walks_per_node,
            walk_length,
        } = self.kind
        else {
            return Ok(());
        };
        let walk_seed = rng::derive(self.seed, self.generation);
        self.generation += 1;
        let walks = random_walks(graph, walks_per_node, walk_length, walk_seed)?;
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut by_center = vec![Vec::new(); graph.num_nodes()];
        for walk in &walks.walks {
            for (i, &center) in walk.iter().enumerate() {
                let lo = i.saturating_sub(window);
                let hi = (i + window).min(walk.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    // On bipartite graphs only U-side centers make pairs.
                    if graph.part(center) == Some(Part::I) {
                        continue;
                    }
                    pairs.push((center as u32, walk[j] as u32));
                    by_center[center].push(walk[j] as u32);
                }
            }
        }
        if pairs.is_empty() {
            return Err(SamplingError::NoEdges);
        }
        let mut shuffle_rng = rng::stream_rng(walk_seed, 0x5f);
        pairs.shuffle(&mut shuffle_rng);
        self.cache = pairs;
        self.by_center = by_center;
        self.cursor = 0;
        Ok(())
    }

    /// One `(central, context)` pair; centrals fall out proportional to
    /// degree (direct edges) or walk occupancy (windows).
    pub fn sample(&mut self, graph: &Graph, rng: &mut StdRng) -> Result<(usize, usize), SamplingError> {
        match self.kind {
            PositiveKind::DirectEdge => {
                let &(a, b) = &self.edges[rng.gen_range(0..self.edges.len())];
                let (a, b) = (a as usize, b as usize);
                let pair = match graph.part(a) {
                    Some(Part::U) => (a, b),
                    Some(Part::I) => (b, a),
                    None => {
                        if rng.gen_bool(0.5) {
                            (a, b)
                        } else {
                            (b, a)
                        }
                    }
                };
                Ok(pair)
            }
            PositiveKind::WalkWindow { .. } => {
                if self.cursor >= self.cache.len() {
                    self.regenerate(graph)?;
                }
                let pair = self.cache[self.cursor];
                self.cursor += 1;
                Ok((pair.0 as usize, pair.1 as usize))
            }
        }
    }

    /// A positive partner for a given central node, or `None` when the node
    /// has none (isolated, or never visited by a walk).
    pub fn sample_for(&self, graph: &Graph, v: usize, rng: &mut StdRng) -> Option<usize> {
        match self.kind {
            PositiveKind::DirectEdge => {
                let nbrs = graph.neighbors(v);
                if nbrs.is_empty() {
                    None
                } else {
                    Some(nbrs[rng.gen_range(0..nbrs.len())])
                }
            }
            PositiveKind::WalkWindow { .. } => {
                let partners = &self.by_center[v];
                if partners.is_empty() {
                    None
                } else {
                    Some(partners[rng.gen_range(0..partners.len())] as usize)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_edge_on_single_edge() {
        let g = Graph::from_edges(2, &[(0, 1)], false, None).unwrap();
        let mut s = PositiveSampler::new(&g, PositiveKind::DirectEdge, 0).unwrap();
        let mut rng = rng::stream_rng(1, 0);
        for _ in 0..50 {
            let (v, u) = s.sample(&g, &mut rng).unwrap();
            assert!((v, u) == (0, 1) || (v, u) == (1, 0));
        }
    }

    #[test]
    fn direct_edge_frequencies_are_uniform() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)], false, None).unwrap();
        let mut s = PositiveSampler::new(&g, PositiveKind::DirectEdge, 0).unwrap();
        let mut rng = rng::stream_rng(2, 0);
        let mut counts = std::collections::HashMap::new();
        let n = 100_000;
        for _ in 0..n {
            let (v, u) = s.sample(&g, &mut rng).unwrap();
            *counts.entry((v.min(u), v.max(u))).or_insert(0usize) += 1;
        }
        for (_, c) in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02);
        }
    }

    #[test]
    fn walk_window_one_yields_adjacent_pairs() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)], false, None).unwrap();
        let mut s = PositiveSampler::new(
            &g,
            PositiveKind::WalkWindow {
                window: 1,
                walks_per_node: 2,
                walk_length: 5,
            },
            3,
        )
        .unwrap();
        let mut rng = rng::stream_rng(4, 0);
        for _ in 0..200 {
            let (v, u) = s.sample(&g, &mut rng).unwrap();
            assert!(g.has_edge(v, u), "({v},{u}) not an edge");
        }
    }

    #[test]
    fn walk_cache_regenerates_when_exhausted() {
        let g = Graph::from_edges(2, &[(0, 1)], false, None).unwrap();
        let mut s = PositiveSampler::new(
            &g,
            PositiveKind::WalkWindow {
                window: 1,
                walks_per_node: 1,
                walk_length: 2,
            },
            3,
        )
        .unwrap();
        let cache_len = s.cache.len();
        let mut rng = rng::stream_rng(5, 0);
        for _ in 0..(3 * cache_len) {
            s.sample(&g, &mut rng).unwrap();
        }
        assert!(s.generation >= 2);
    }

    #[test]
    fn bipartite_pairs_are_oriented_u_to_i() {
        let g = crate::graph::synth::bipartite_graph(4, 6, 14, 0).unwrap();
        let mut s = PositiveSampler::new(&g, PositiveKind::DirectEdge, 0).unwrap();
        let mut rng = rng::stream_rng(6, 0);
        for _ in 0..100 {
            let (v, u) = s.sample(&g, &mut rng).unwrap();
            assert_eq!(g.part(v), Some(Part::U));
            assert_eq!(g.part(u), Some(Part::I));
        }
    }

    #[test]
    fn sample_for_returns_neighbors() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)], false, None).unwrap();
        let s = PositiveSampler::new(&g, PositiveKind::DirectEdge, 0).unwrap();
        let mut rng = rng::stream_rng(7, 0);
        for _ in 0..20 {
            let u = s.sample_for(&g, 1, &mut rng).unwrap();
            assert!(u == 0 || u == 2);
        }
        let lone = Graph::from_edges(3, &[(0, 1)], false, None).unwrap();
        let s = PositiveSampler::new(&lone, PositiveKind::DirectEdge, 0).unwrap();
        assert!(s.sample_for(&lone, 2, &mut rng).is_none());
    }

    #[test]
    fn empty_graph_is_an_error() {
        let g = Graph::from_edges(3, &[], false, None).unwrap();
        assert!(PositiveSampler::new(&g, PositiveKind::DirectEdge, 0).is_err());
    }
}
