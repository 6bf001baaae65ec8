//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A line of an input file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The input contained no usable records.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A node index was outside `0..node_count`.
    #[error("node index {index} out of range (node count {count})")]
    IndexOutOfRange { index: usize, count: usize },

    /// An operation referenced an edge the graph does not contain.
    #[error("edge ({u}, {v}) does not exist")]
    InvalidEdge { u: usize, v: usize },

    /// Invalid configuration value or unknown key/kind.
    #[error("config error: {0}")]
    Config(String),

    /// The data violates an operation's contract (e.g. a single-class
    /// training set, or no removable edge).
    #[error("data error: {0}")]
    Data(String),

    /// Training or scoring produced a non-finite value.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the CLI: 2 config, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Numerical(_) => 4,
            _ => 3,
        }
    }
}
