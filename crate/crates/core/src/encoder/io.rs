//! Embedding text format: header `N d`, then one `<original_id> v1 .. vd`
//! line per node with six decimal places. Dual encoders export each node's
//! table for the role it is scored in: the central table, except for the `I`
//! side of a bipartite graph, whose nodes only ever act as contexts.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{EncoderError, Scorer};
use crate::graph::{Graph, Part};
use crate::linalg::dot;

/// Write one embedding per graph node under its original id.
pub fn write_embeddings<W: Write, S: Scorer>(
    out: &mut W,
    graph: &Graph,
    scorer: &S,
) -> std::io::Result<()> {
    writeln!(out, "{} {}", graph.num_nodes(), scorer.dim())?;
    for v in 0..graph.num_nodes() {
        let emb = match graph.part(v) {
            Some(Part::I) => scorer.context_embedding(graph, v),
            _ => scorer.central_embedding(graph, v),
        };
        write!(out, "{}", graph.label(v))?;
        for x in emb {
            write!(out, " {x:.6}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Embeddings read back from the text format, keyed by original id.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn read(path: &Path) -> Result<Self, EncoderError> {
        let file = std::fs::File::open(path).map_err(|source| EncoderError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut lines = BufReader::new(file).lines();
        let bad = |msg: String| EncoderError::BadEmbeddingFile {
            path: path.display().to_string(),
            msg,
        };
        let header = lines
            .next()
            .ok_or_else(|| bad("empty file".into()))?
            .map_err(|e| bad(e.to_string()))?;
        let mut parts = header.split_whitespace();
        let (n, dim) = match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(d), None) => (
                n.parse::<usize>().map_err(|_| bad(format!("bad count '{n}'")))?,
                d.parse::<usize>().map_err(|_| bad(format!("bad dim '{d}'")))?,
            ),
            _ => return Err(bad("header must be 'N d'".into())),
        };
        let mut labels = Vec::with_capacity(n);
        let mut index = HashMap::with_capacity(n);
        let mut data = Vec::with_capacity(n * dim);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let label = fields
                .next()
                .ok_or_else(|| bad(format!("row {} empty", i + 2)))?;
            let values: Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
            let values = values.map_err(|e| bad(format!("row {}: {e}", i + 2)))?;
            if values.len() != dim {
                return Err(bad(format!(
                    "row {}: expected {dim} values, found {}",
                    i + 2,
                    values.len()
                )));
            }
            index.insert(label.to_string(), labels.len());
            labels.push(label.to_string());
            data.extend(values);
        }
        if labels.len() != n {
            return Err(bad(format!(
                "header promised {n} rows, found {}",
                labels.len()
            )));
        }
        Ok(EmbeddingTable {
            labels,
            index,
            dim,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn vector(&self, label: &str) -> Option<&[f64]> {
        self.index
            .get(label)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Reorder rows to a graph's internal node ids so the table can score
    /// pairs. Every graph node must be present.
    pub fn bind(&self, graph: &Graph) -> Result<BoundEmbeddings, EncoderError> {
        let mut data = Vec::with_capacity(graph.num_nodes() * self.dim);
        for v in 0..graph.num_nodes() {
            let row = self.vector(graph.label(v)).ok_or_else(|| {
                EncoderError::BadEmbeddingFile {
                    path: "<bound table>".into(),
                    msg: format!("no embedding for node '{}'", graph.label(v)),
                }
            })?;
            data.extend_from_slice(row);
        }
        Ok(BoundEmbeddings {
            dim: self.dim,
            data,
        })
    }
}

/// An embedding table aligned to a graph's node ids; scores with the shared
/// (unique) table on both sides.
#[derive(Debug, Clone)]
pub struct BoundEmbeddings {
    dim: usize,
    data: Vec<f64>,
}

impl BoundEmbeddings {
    pub fn row(&self, node: usize) -> &[f64] {
        &self.data[node * self.dim..(node + 1) * self.dim]
    }
}

impl Scorer for BoundEmbeddings {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_nodes(&self) -> usize {
        self.data.len() / self.dim
    }

    fn central_embedding(&self, _graph: &Graph, node: usize) -> Vec<f64> {
        self.row(node).to_vec()
    }

    fn context_embedding(&self, _graph: &Graph, node: usize) -> Vec<f64> {
        self.row(node).to_vec()
    }

    fn score(&self, _graph: &Graph, v: usize, u: usize) -> f64 {
        dot(self.row(v), self.row(u))
    }
}
