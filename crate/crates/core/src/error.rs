use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: duplicate document id `{id}`")]
    DuplicateId { line: u64, id: String },

    #[error("line {line}: vector for `{id}` has zero norm")]
    ZeroNorm { line: u64, id: String },

    #[error("line {line}: non-finite entry in column {column} for `{id}`")]
    NonFinite { line: u64, id: String, column: usize },

    #[error("line {line}: expected {expected} fields, found {found}")]
    Arity {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: unknown document id `{id}`")]
    UnknownId { line: u64, id: String },

    #[error("line {line}: negative count for `{token}`")]
    NegativeCount { line: u64, token: String },

    #[error("line {line}: `{id}` labelled both `{first}` and `{second}`")]
    ConflictingLabel {
        line: u64,
        id: String,
        first: String,
        second: String,
    },

    #[error("corpus needs at least 2 documents, found {0}")]
    TooFewDocuments(usize),

    #[error("k = {k} out of range 1..={max}")]
    InvalidK { k: usize, max: usize },

    #[error("graph is disconnected: {} components ({})", .components.len(), describe_components(.components))]
    Disconnected { components: Vec<Vec<usize>> },

    #[error("node {0} has zero degree")]
    IsolatedNode(usize),

    #[error("negative edge weight {weight} on ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, weight: f64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("unknown word `{0}`")]
    UnknownWord(String),

    #[error("undefined score: {0}")]
    Undefined(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}

fn describe_components(components: &[Vec<usize>]) -> String {
    components
        .iter()
        .map(|c| {
            let shown: Vec<String> = c.iter().take(5).map(|i| i.to_string()).collect();
            if c.len() > 5 {
                format!("{{{}, ... {} nodes}}", shown.join(", "), c.len())
            } else {
                format!("{{{}}}", shown.join(", "))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}
