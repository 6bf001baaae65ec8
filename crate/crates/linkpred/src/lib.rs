//! Link prediction on undirected graphs.
//!
//! The pipeline: load an edge list, split it into a residual graph plus
//! labeled training pairs, embed nodes with biased random walks and
//! skip-gram, classify candidate edges with an MLP (or score them with
//! classical heuristics), and compare methods by rank-based AUC.

pub mod config;
pub mod embed;
pub mod error;
pub mod eval;
pub mod graph;
pub mod heuristics;
pub mod mlp;
pub mod optim;
pub mod sampler;
pub mod seed;

pub use error::{Error, Result};
pub use graph::Graph;

#[cfg(test)]
pub(crate) mod oracles;
