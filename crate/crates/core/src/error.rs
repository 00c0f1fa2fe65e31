use thiserror::Error;

use crate::graph::InvariantViolation;

pub type Result<T, E = HnswError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HnswError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vector component {index} is not finite")]
    NonFinite { index: usize },

    #[error("zero vector has no cosine distance")]
    ZeroVector,

    #[error("index is empty")]
    EmptyIndex,

    #[error("index is at capacity ({0} elements)")]
    Capacity(usize),

    #[error("invalid index parameters: {0}")]
    InvalidParams(String),

    #[error("invalid search parameters: {0}")]
    InvalidSearch(String),

    #[error("layer {layer} is empty (max layer {max_layer})")]
    EmptyLayer { layer: usize, max_layer: usize },

    #[error("unknown node id {0}")]
    UnknownNode(u32),

    #[error("malformed vector file at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("snapshot failed validation: {0}")]
    Invalid(#[from] InvariantViolation),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
