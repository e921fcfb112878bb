use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node not found: {0}")]
    NodeNotFound(NodeId),

    #[error("edge not found: ({0}, {1})")]
    EdgeNotFound(NodeId, NodeId),

    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(NodeId, NodeId),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("unknown attribute value: {0}")]
    UnknownValue(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("modularity requires a partition")]
    NotAPartition,

    #[error("no candidate community")]
    NoCandidateCommunity,

    #[error("not enough nodes: requested {requested}, only {available} eligible")]
    InsufficientNodes { requested: usize, available: usize },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Maps a serde_json error onto a positioned parse error.
    pub(crate) fn from_json_parse(err: serde_json::Error) -> Self {
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
