//! Edge-list, partition, label, and pair file ingestion.
//!
//! Edge lists are UTF-8 text, one edge per line, tab- or space-separated,
//! with an optional third weight column (parsed for validity, then ignored)
//! and `#` comment lines. Node ids are arbitrary strings, compacted to
//! `0..N-1` in first-appearance order.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{Graph, GraphError, Part};

/// Counters recorded while constructing a graph.
#[derive(Debug, Clone, Copy, Default)]
pub struct LoadStats {
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
}

fn open(path: &Path) -> Result<BufReader<File>, GraphError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })
}

fn read_line(
    line: std::io::Result<String>,
    path: &Path,
    lineno: usize,
) -> Result<String, GraphError> {
    line.map_err(|source| GraphError::Io {
        path: format!("{}:{}", path.display(), lineno),
        source,
    })
}

/// Raw parsed edge list: interned labels, edges over internal ids, optional
/// partition tags. Lets callers re-split edges while keeping one vocabulary.
#[derive(Debug, Clone)]
pub struct EdgeListData {
    pub labels: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    pub partition: Option<Vec<Part>>,
}

impl EdgeListData {
    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    /// Assemble a graph over the full vocabulary from a subset of edges.
    pub fn graph_from(&self, edges: &[(usize, usize)], directed: bool) -> Result<Graph, GraphError> {
        Graph::build(
            self.num_nodes(),
            edges,
            directed,
            self.partition.clone(),
            self.labels.clone(),
        )
    }

    /// Read a `u<TAB>v` pair file, interning unseen node ids into this
    /// vocabulary. Lets evaluation pairs mention nodes absent from the
    /// training edges.
    pub fn read_pairs_extending(&mut self, path: &Path) -> Result<Vec<(usize, usize)>, GraphError> {
        let mut index: HashMap<String, usize> = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        let mut pairs = Vec::new();
        for (lineno, line) in open(path)?.lines().enumerate() {
            let lineno = lineno + 1;
            let line = read_line(line, path, lineno)?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(GraphError::Parse {
                    path: path.display().to_string(),
                    line: lineno,
                    msg: format!("expected 2 fields, found {}", fields.len()),
                });
            }
            let mut resolve = |tok: &str| -> usize {
                if let Some(&id) = index.get(tok) {
                    id
                } else {
                    let id = self.labels.len();
                    self.labels.push(tok.to_string());
                    index.insert(tok.to_string(), id);
                    id
                }
            };
            let a = resolve(fields[0]);
            let b = resolve(fields[1]);
            pairs.push((a, b));
        }
        Ok(pairs)
    }

    /// Attach a partition file to this vocabulary; call after all pair files
    /// have been interned so every node is known.
    pub fn attach_partition(&mut self, path: &Path) -> Result<(), GraphError> {
        let index: HashMap<String, usize> = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        self.partition = Some(load_partition(path, &index, self.labels.len())?);
        Ok(())
    }
}

/// Parse an edge list (and optional partition file) without building the
/// graph.
pub fn read_edge_list(
    path: &Path,
    partition_path: Option<&Path>,
) -> Result<EdgeListData, GraphError> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    let intern = |token: &str, labels: &mut Vec<String>, ids: &mut HashMap<String, usize>| {
        if let Some(&id) = ids.get(token) {
            id
        } else {
            let id = labels.len();
            labels.push(token.to_string());
            ids.insert(token.to_string(), id);
            id
        }
    };

    for (lineno, line) in open(path)?.lines().enumerate() {
        let lineno = lineno + 1;
        let line = read_line(line, path, lineno)?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match fields.len() {
            2 => {}
            3 => {
                fields[2].parse::<f64>().map_err(|_| GraphError::Parse {
                    path: path.display().to_string(),
                    line: lineno,
                    msg: format!("weight column '{}' is not a number", fields[2]),
                })?;
            }
            n => {
                return Err(GraphError::Parse {
                    path: path.display().to_string(),
                    line: lineno,
                    msg: format!("expected 2 or 3 fields, found {n}"),
                })
            }
        }
        let src = intern(fields[0], &mut labels, &mut ids);
        let dst = intern(fields[1], &mut labels, &mut ids);
        edges.push((src, dst));
    }

    let partition = match partition_path {
        Some(ppath) => Some(load_partition(ppath, &ids, labels.len())?),
        None => None,
    };
    Ok(EdgeListData {
        labels,
        edges,
        partition,
    })
}

/// Load an edge list, compacting ids by first appearance. The partition
/// file, when given, must tag every node with `U` or `I` and every edge must
/// cross the partition.
pub fn load_edge_list(
    path: &Path,
    directed: bool,
    partition_path: Option<&Path>,
) -> Result<Graph, GraphError> {
    let data = read_edge_list(path, partition_path)?;
    Graph::build(
        data.labels.len(),
        &data.edges,
        directed,
        data.partition,
        data.labels,
    )
}

fn load_partition(
    path: &Path,
    ids: &HashMap<String, usize>,
    num_nodes: usize,
) -> Result<Vec<Part>, GraphError> {
    let mut tags: Vec<Option<Part>> = vec![None; num_nodes];
    for (lineno, line) in open(path)?.lines().enumerate() {
        let lineno = lineno + 1;
        let line = read_line(line, path, lineno)?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (node, tag) = match (fields.next(), fields.next(), fields.next()) {
            (Some(n), Some(t), None) => (n, t),
            _ => {
                return Err(GraphError::Parse {
                    path: path.display().to_string(),
                    line: lineno,
                    msg: "expected 'node<TAB>U|I'".to_string(),
                })
            }
        };
        let id = *ids
            .get(node)
            .ok_or_else(|| GraphError::UnknownPartitionNode(node.to_string()))?;
        tags[id] = Some(match tag {
            "U" => Part::U,
            "I" => Part::I,
            other => {
                return Err(GraphError::Parse {
                    path: path.display().to_string(),
                    line: lineno,
                    msg: format!("partition tag must be U or I, found '{other}'"),
                })
            }
        });
    }
    tags.iter()
        .enumerate()
        .map(|(v, t)| t.ok_or_else(|| GraphError::UntaggedNode(v.to_string())))
        .collect()
}

/// Load a `node<TAB>label1,label2,...` file against an existing graph.
/// Returns per-node label-id sets (empty for unlabeled nodes) and the label
/// vocabulary in first-appearance order.
pub fn load_label_file(
    path: &Path,
    graph: &Graph,
) -> Result<(Vec<Vec<usize>>, Vec<String>), GraphError> {
    let index = graph.label_index();
    let mut vocab: Vec<String> = Vec::new();
    let mut vocab_ids: HashMap<String, usize> = HashMap::new();
    let mut labels = vec![Vec::new(); graph.num_nodes()];
    for (lineno, line) in open(path)?.lines().enumerate() {
        let lineno = lineno + 1;
        let line = read_line(line, path, lineno)?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (node, tags) = match (fields.next(), fields.next(), fields.next()) {
            (Some(n), Some(t), None) => (n, t),
            _ => {
                return Err(GraphError::Parse {
                    path: path.display().to_string(),
                    line: lineno,
                    msg: "expected 'node<TAB>label1,label2,...'".to_string(),
                })
            }
        };
        let &id = index.get(node).ok_or_else(|| GraphError::Parse {
            path: path.display().to_string(),
            line: lineno,
            msg: format!("label file references unknown node '{node}'"),
        })?;
        for tag in tags.split(',').filter(|t| !t.is_empty()) {
            let lid = *vocab_ids.entry(tag.to_string()).or_insert_with(|| {
                vocab.push(tag.to_string());
                vocab.len() - 1
            });
            if !labels[id].contains(&lid) {
                labels[id].push(lid);
            }
        }
    }
    Ok((labels, vocab))
}

/// Load a `u<TAB>v` pair file (test or validation pairs) against an existing
/// graph's vocabulary.
pub fn load_pair_file(path: &Path, graph: &Graph) -> Result<Vec<(usize, usize)>, GraphError> {
    let index = graph.label_index();
    let mut pairs = Vec::new();
    for (lineno, line) in open(path)?.lines().enumerate() {
        let lineno = lineno + 1;
        let line = read_line(line, path, lineno)?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(GraphError::Parse {
                path: path.display().to_string(),
                line: lineno,
                msg: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        let resolve = |tok: &str| {
            index.get(tok).copied().ok_or_else(|| GraphError::Parse {
                path: path.display().to_string(),
                line: lineno,
                msg: format!("pair file references unknown node '{tok}'"),
            })
        };
        pairs.push((resolve(fields[0])?, resolve(fields[1])?));
    }
    Ok(pairs)
}
