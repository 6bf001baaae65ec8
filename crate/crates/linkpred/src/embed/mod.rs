//! node2vec-style embeddings: second-order biased random walks sampled
//! through alias tables, trained with skip-gram and negative sampling.

mod alias;
mod skipgram;
mod walks;

pub use alias::AliasTable;
pub use skipgram::{train_skipgram, SkipGramConfig, SkipGramOutput};
pub use walks::{generate_walks, preprocess_transition_tables, TransitionTables};

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Walk and embedding hyperparameters. Defaults mirror the reference
/// node2vec setup: 10 walks of length 80 per node, context 10, p = q = 1,
/// 128 dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub context_size: usize,
    pub return_param: f64,
    pub inout_param: f64,
    pub dimension: usize,
    /// Cache per-edge transition tables (memory O(sum of squared degrees))
    /// instead of rebuilding the distribution at every step. Both modes
    /// draw identical walks for a given seed.
    pub precompute_tables: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_node: 10,
            walk_length: 80,
            context_size: 10,
            return_param: 1.0,
            inout_param: 1.0,
            dimension: 128,
            precompute_tables: true,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_node == 0 || self.walk_length == 0 {
            return Err(Error::Config("walk.walks_per_node and walk.length must be positive".into()));
        }
        if self.context_size == 0 || self.context_size >= self.walk_length {
            return Err(Error::Config(format!(
                "walk.context must satisfy 0 < context < length, got {} vs {}",
                self.context_size, self.walk_length
            )));
        }
        if !(self.return_param > 0.0) || !(self.inout_param > 0.0) {
            return Err(Error::Config("walk.p and walk.q must be positive".into()));
        }
        if self.dimension < 2 {
            return Err(Error::Config("walk.dim must be at least 2".into()));
        }
        Ok(())
    }
}

/// Dense node-by-dimension embedding matrix, rows addressable by node index.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    node_count: usize,
    dim: usize,
    values: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(node_count: usize, dim: usize) -> Self {
        EmbeddingMatrix { node_count, dim, values: vec![0.0; node_count * dim] }
    }

    pub(crate) fn from_values(node_count: usize, dim: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), node_count * dim);
        EmbeddingMatrix { node_count, dim, values }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, u: u32) -> &[f64] {
        &self.values[u as usize * self.dim..(u as usize + 1) * self.dim]
    }

    pub fn row_mut(&mut self, u: u32) -> &mut [f64] {
        &mut self.values[u as usize * self.dim..(u as usize + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }
}

/// Write embeddings as text: `node_count dim` header, then one line per
/// node with its external label and the row at 9 significant digits.
pub fn save_embeddings<W: Write>(
    mut w: W,
    emb: &EmbeddingMatrix,
    labels: &[String],
) -> Result<()> {
    if labels.len() != emb.node_count() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} embedding rows",
            labels.len(),
            emb.node_count()
        )));
    }
    writeln!(w, "{} {}", emb.node_count(), emb.dim())?;
    for (u, label) in labels.iter().enumerate() {
        write!(w, "{label}")?;
        for x in emb.row(u as u32) {
            write!(w, " {x:.8e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Read the format written by [`save_embeddings`].
pub fn load_embeddings<R: BufRead>(r: R) -> Result<(EmbeddingMatrix, Vec<String>)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::EmptyInput("embedding file is empty".into()))??;
    let mut it = header.split_whitespace();
    let (n, dim) = match (it.next(), it.next(), it.next()) {
        (Some(n), Some(d), None) => {
            let n: usize = n.parse().map_err(|_| bad_header(&header))?;
            let d: usize = d.parse().map_err(|_| bad_header(&header))?;
            (n, d)
        }
        _ => return Err(bad_header(&header)),
    };
    let mut emb = EmbeddingMatrix::zeros(n, dim);
    let mut labels = Vec::with_capacity(n);
    for (row, line) in lines.enumerate() {
        let line = line?;
        if row >= n {
            return Err(Error::Parse {
                line: row + 2,
                message: "more rows than the header announced".into(),
            });
        }
        let mut fields = line.split_whitespace();
        let label = fields
            .next()
            .ok_or_else(|| Error::Parse { line: row + 2, message: "missing label".into() })?;
        labels.push(label.to_string());
        let out = emb.row_mut(row as u32);
        let mut count = 0;
        for field in fields {
            if count == dim {
                count += 1;
                break;
            }
            out[count] = field.parse().map_err(|_| Error::Parse {
                line: row + 2,
                message: format!("bad value {field:?}"),
            })?;
            count += 1;
        }
        if count != dim {
            return Err(Error::Parse {
                line: row + 2,
                message: format!("expected {dim} values"),
            });
        }
    }
    if labels.len() != n {
        return Err(Error::EmptyInput(format!(
            "embedding file announced {n} rows but carried {}",
            labels.len()
        )));
    }
    Ok((emb, labels))
}

fn bad_header(header: &str) -> Error {
    Error::Parse { line: 1, message: format!("expected 'node_count dim', got {header:?}") }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embeddings_round_trip_is_stable_at_nine_digits() {
        let mut emb = EmbeddingMatrix::zeros(3, 4);
        let mut x = 0.123456789f64;
        for u in 0..3u32 {
            for v in emb.row_mut(u) {
                *v = x;
                x = x * -1.7 + 0.01;
            }
        }
        let labels: Vec<String> = vec!["a".into(), "7".into(), "c".into()];
        let mut first = Vec::new();
        save_embeddings(&mut first, &emb, &labels).unwrap();
        let (back, back_labels) = load_embeddings(first.as_slice()).unwrap();
        assert_eq!(back_labels, labels);
        let mut second = Vec::new();
        save_embeddings(&mut second, &back, &back_labels).unwrap();
        assert_eq!(first, second, "second save must reproduce the file byte for byte");
    }

    #[test]
    fn truncated_or_malformed_files_are_rejected() {
        assert!(load_embeddings("2 3\nx 1 2 3\n".as_bytes()).is_err()); // missing row
        assert!(load_embeddings("2 3\nx 1 2\ny 1 2 3\n".as_bytes()).is_err()); // short row
        assert!(load_embeddings("nonsense\n".as_bytes()).is_err());
    }

    #[test]
    fn config_validation_catches_bad_values() {
        let mut cfg = WalkConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.context_size = cfg.walk_length;
        assert!(cfg.validate().is_err());
        let mut cfg = WalkConfig { return_param: 0.0, ..WalkConfig::default() };
        assert!(cfg.validate().is_err());
        cfg = WalkConfig { dimension: 1, ..WalkConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
