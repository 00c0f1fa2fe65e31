//! Approximate k-nearest-neighbor search over hierarchical navigable small
//! world graphs, with an exact brute-force oracle, vector file formats and
//! index snapshots.

pub mod dataset;
pub mod distance;
mod error;
pub mod graph;
pub mod oracle;
pub mod storage;

pub use dataset::Dataset;
pub use distance::{CountingDistance, Dissimilarity, DistanceKind};
pub use error::{HnswError, Result};
pub use graph::{
    HnswIndex, IndexParams, IndexStats, InvariantViolation, Neighbor, NodeId, SearchParams,
    Selector,
};
