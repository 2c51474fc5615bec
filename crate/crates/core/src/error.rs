use thiserror::Error;

use crate::ingest::NodeId;

pub type Result<T> = std::result::Result<T, GpsError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { line: usize, u: NodeId, v: NodeId },

    #[error("edge stream is empty")]
    EmptyStream,

    #[error("edge ({0}, {1}) is already resident in the reservoir")]
    AlreadyResident(NodeId, NodeId),

    #[error("edge ({0}, {1}) is not resident in the reservoir")]
    NotResident(NodeId, NodeId),

    #[error("operation requires a {expected} reservoir, found {found}")]
    ModeMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no evaluable points: every truth value is zero")]
    NoEvaluablePoints,
}
