//! Graph storage and graph-level protocols.
//!
//! [`Graph`] is an immutable compressed-sparse-row adjacency over contiguous
//! node ids `0..N`. Storage is always symmetrized; a flag records whether the
//! source declared itself directed. Original (external) node ids are kept in
//! a label table so outputs can be written in the caller's vocabulary.

mod load;
mod split;
pub mod synth;
mod traverse;

pub use load::{
    load_edge_list, load_label_file, load_pair_file, read_edge_list, EdgeListData, LoadStats,
};
pub use split::{fold_partition, split_link_prediction, LinkSplit};
pub use traverse::{dfs_sequence, random_walks, NeighborOrder, Walks};

use std::collections::HashMap;
use std::collections::VecDeque;

use thiserror::Error;

/// Side of a bipartite partition: `U` holds central nodes, `I` holds the
/// candidate (context / item) nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    U,
    I,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("partition file references unknown node '{0}'")]
    UnknownPartitionNode(String),
    #[error("partition file does not tag node '{0}'")]
    UntaggedNode(String),
    #[error("edge {0}-{1} does not cross the U/I partition")]
    PartitionViolation(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("holdout target rounds to zero edges")]
    EmptyHoldout,
    #[error("need {needed} non-edges for negatives but only {available} exist")]
    NotEnoughNonEdges { needed: usize, available: usize },
    #[error("node id {0} out of range (graph has {1} nodes)")]
    NodeOutOfRange(usize, usize),
}

/// Immutable symmetrized adjacency with optional bipartite tags.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    partition: Option<Vec<Part>>,
    directed_source: bool,
    labels: Vec<String>,
    stats: LoadStats,
}

impl Graph {
    /// Build a graph over `num_nodes` nodes from raw edges. Self-loops are
    /// dropped, duplicates deduplicated, and adjacency symmetrized; neighbor
    /// lists come out sorted ascending.
    pub fn from_edges(
        num_nodes: usize,
        edges: &[(usize, usize)],
        directed_source: bool,
        partition: Option<Vec<Part>>,
    ) -> Result<Graph, GraphError> {
        let labels = (0..num_nodes).map(|i| i.to_string()).collect();
        Self::build(num_nodes, edges, directed_source, partition, labels)
    }

    pub(crate) fn build(
        num_nodes: usize,
        edges: &[(usize, usize)],
        directed_source: bool,
        partition: Option<Vec<Part>>,
        labels: Vec<String>,
    ) -> Result<Graph, GraphError> {
        if let Some(p) = &partition {
            assert_eq!(p.len(), num_nodes, "partition length must match node count");
        }
        assert_eq!(labels.len(), num_nodes, "label table must match node count");

        let mut self_loops = 0usize;
        let mut duplicates = 0usize;
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= num_nodes {
                return Err(GraphError::NodeOutOfRange(a, num_nodes));
            }
            if b >= num_nodes {
                return Err(GraphError::NodeOutOfRange(b, num_nodes));
            }
            if a == b {
                self_loops += 1;
                continue;
            }
            pairs.push((a.min(b), a.max(b)));
        }
        pairs.sort_unstable();
        pairs.dedup_by(|a, b| {
            if a == b {
                duplicates += 1;
                true
            } else {
                false
            }
        });

        if let Some(p) = &partition {
            for &(a, b) in &pairs {
                if p[a] == p[b] {
                    return Err(GraphError::PartitionViolation(a, b));
                }
            }
        }

        let mut degrees = vec![0usize; num_nodes];
        for &(a, b) in &pairs {
            degrees[a] += 1;
            degrees[b] += 1;
        }
        let mut offsets = vec![0usize; num_nodes + 1];
        for v in 0..num_nodes {
            offsets[v + 1] = offsets[v] + degrees[v];
        }
        let mut neighbors = vec![0usize; offsets[num_nodes]];
        let mut cursor = offsets.clone();
        for &(a, b) in &pairs {
            neighbors[cursor[a]] = b;
            cursor[a] += 1;
            neighbors[cursor[b]] = a;
            cursor[b] += 1;
        }
        // Insertion order over sorted unique pairs leaves each list sorted.
        debug_assert!((0..num_nodes).all(|v| {
            let s = &neighbors[offsets[v]..offsets[v + 1]];
            s.windows(2).all(|w| w[0] < w[1])
        }));

        Ok(Graph {
            offsets,
            neighbors,
            partition,
            directed_source,
            labels,
            stats: LoadStats {
                self_loops_dropped: self_loops,
                duplicate_edges_dropped: duplicates,
            },
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of stored undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Number of ordered adjacency pairs (twice [`Self::num_edges`]).
    pub fn num_directed_edges(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn directed_source(&self) -> bool {
        self.directed_source
    }

    pub fn part(&self, v: usize) -> Option<Part> {
        self.partition.as_ref().map(|p| p[v])
    }

    pub fn is_bipartite(&self) -> bool {
        self.partition.is_some()
    }

    /// External label of an internal node id.
    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    /// Internal id of an external label, by linear scan over the label table.
    /// Loaders that need repeated lookups keep their own map.
    pub fn node_by_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn label_index(&self) -> HashMap<&str, usize> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect()
    }

    pub fn load_stats(&self) -> &LoadStats {
        &self.stats
    }

    /// Nodes a negative sampler may emit: the `I` side when bipartite,
    /// otherwise all nodes.
    pub fn candidate_nodes(&self) -> Vec<usize> {
        match &self.partition {
            Some(p) => (0..self.num_nodes()).filter(|&v| p[v] == Part::I).collect(),
            None => (0..self.num_nodes()).collect(),
        }
    }

    /// Nodes used as centrals: the `U` side when bipartite, otherwise all.
    pub fn central_nodes(&self) -> Vec<usize> {
        match &self.partition {
            Some(p) => (0..self.num_nodes()).filter(|&v| p[v] == Part::U).collect(),
            None => (0..self.num_nodes()).collect(),
        }
    }

    /// Undirected edges as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| u < v)
                .map(move |&v| (u, v))
        })
    }

    /// All ordered adjacency pairs `(v, neighbor)`.
    pub fn ordered_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes())
            .flat_map(move |v| self.neighbors(v).iter().map(move |&u| (v, u)))
    }

    /// BFS connectivity over the symmetrized storage. The empty graph counts
    /// as connected.
    pub fn is_connected(&self) -> bool {
        let n = self.num_nodes();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == n
    }

    /// Largest connected component as a graph over re-compacted ids, keeping
    /// original labels and partition tags. Ties break toward the component
    /// containing the lowest node id.
    pub fn giant_component(&self) -> Graph {
        let n = self.num_nodes();
        let mut component = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        for start in 0..n {
            if component[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut size = 0usize;
            let mut stack = vec![start];
            component[start] = id;
            while let Some(v) = stack.pop() {
                size += 1;
                for &u in self.neighbors(v) {
                    if component[u] == usize::MAX {
                        component[u] = id;
                        stack.push(u);
                    }
                }
            }
            sizes.push(size);
        }
        let best = sizes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let keep: Vec<usize> = (0..n).filter(|&v| component[v] == best).collect();
        let mut remap = vec![usize::MAX; n];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let edges: Vec<(usize, usize)> = self
            .edges()
            .filter(|&(a, b)| component[a] == best && component[b] == best)
            .map(|(a, b)| (remap[a], remap[b]))
            .collect();
        let partition = self
            .partition
            .as_ref()
            .map(|p| keep.iter().map(|&v| p[v]).collect());
        let labels = keep.iter().map(|&v| self.labels[v].clone()).collect();
        Graph::build(keep.len(), &edges, self.directed_source, partition, labels)
            .expect("component subgraph is valid")
    }

    /// Split every node `i` into a central copy `i` and a context copy
    /// `N + i`; each stored ordered pair `i -> j` becomes an edge between
    /// central `i` and context `j`. The result carries `U` tags on centrals
    /// and `I` tags on contexts.
    pub fn to_bipartite_contrast(&self) -> Graph {
        let n = self.num_nodes();
        let edges: Vec<(usize, usize)> = self
            .ordered_pairs()
            .map(|(i, j)| (i, n + j))
            .collect();
        let mut partition = vec![Part::U; 2 * n];
        partition[n..].fill(Part::I);
        let mut labels: Vec<String> = self.labels.clone();
        labels.extend(self.labels.iter().map(|l| format!("{l}~ctx")));
        Graph::build(2 * n, &edges, self.directed_source, Some(partition), labels)
            .expect("contrast transform preserves validity")
    }
}
