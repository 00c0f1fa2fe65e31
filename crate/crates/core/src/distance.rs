//! Distance kernels.
//!
//! Vectors are stored as `f32`; every kernel accumulates in `f64` and returns
//! an `f64`, so the index and the brute-force oracle rank candidates
//! identically. Non-finite components are rejected when a vector enters an
//! index or dataset, not per call.

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use crate::error::{HnswError, Result};

/// A user-supplied dissimilarity. It must be non-negative and should be
/// symmetric; nothing else (triangle inequality included) is assumed.
pub trait Dissimilarity: Send + Sync {
    fn name(&self) -> &str;
    fn eval(&self, a: &[f32], b: &[f32]) -> f64;
}

#[derive(Clone)]
pub enum DistanceKind {
    Euclidean,
    /// `1 - cos(a, b)`. Not a metric.
    Cosine,
    Custom(Arc<dyn Dissimilarity>),
}

impl fmt::Debug for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceKind::Euclidean => f.write_str("Euclidean"),
            DistanceKind::Cosine => f.write_str("Cosine"),
            DistanceKind::Custom(d) => write!(f, "Custom({})", d.name()),
        }
    }
}

impl PartialEq for DistanceKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (DistanceKind::Euclidean, DistanceKind::Euclidean) => true,
            (DistanceKind::Cosine, DistanceKind::Cosine) => true,
            (DistanceKind::Custom(a), DistanceKind::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

impl DistanceKind {
    pub fn label(&self) -> &str {
        match self {
            DistanceKind::Euclidean => "l2",
            DistanceKind::Cosine => "cosine",
            DistanceKind::Custom(d) => d.name(),
        }
    }

    /// Checked distance: rejects dimension mismatches and, for cosine, zero
    /// vectors.
    pub fn distance(&self, a: &[f32], b: &[f32]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(HnswError::DimensionMismatch {
                expected: a.len(),
                actual: b.len(),
            });
        }
        if matches!(self, DistanceKind::Cosine) && (is_zero(a) || is_zero(b)) {
            return Err(HnswError::ZeroVector);
        }
        Ok(self.eval(a, b))
    }

    /// Unchecked kernel used on the hot path. Callers guarantee equal
    /// dimensions and admissible inputs.
    #[inline]
    pub fn eval(&self, a: &[f32], b: &[f32]) -> f64 {
        match self {
            DistanceKind::Euclidean => euclidean(a, b),
            DistanceKind::Cosine => cosine_distance(a, b),
            DistanceKind::Custom(d) => d.eval(a, b),
        }
    }

    /// Wraps this kind in a handle that counts evaluations.
    pub fn counting(&self) -> CountingDistance<'_> {
        CountingDistance::new(self)
    }

    /// Validates a vector for admission into an index or dataset of
    /// dimension `dim`.
    pub fn admit(&self, v: &[f32], dim: usize) -> Result<()> {
        if v.len() != dim {
            return Err(HnswError::DimensionMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        if let Some(index) = v.iter().position(|x| !x.is_finite()) {
            return Err(HnswError::NonFinite { index });
        }
        if matches!(self, DistanceKind::Cosine) && is_zero(v) {
            return Err(HnswError::ZeroVector);
        }
        Ok(())
    }
}

fn is_zero(v: &[f32]) -> bool {
    v.iter().all(|&x| x == 0.0)
}

#[inline]
pub fn euclidean(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[inline]
pub fn cosine_distance(a: &[f32], b: &[f32]) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    // rounding can push the ratio a hair past 1
    (1.0 - dot / (na.sqrt() * nb.sqrt())).max(0.0)
}

/// Shared evaluation interface so search code can run either plain or
/// counted.
pub trait DistanceEval {
    fn eval(&self, a: &[f32], b: &[f32]) -> f64;
}

impl DistanceEval for DistanceKind {
    #[inline]
    fn eval(&self, a: &[f32], b: &[f32]) -> f64 {
        DistanceKind::eval(self, a, b)
    }
}

/// A distance handle that counts every evaluation. One handle per search or
/// build session; it is deliberately `!Sync`.
pub struct CountingDistance<'a> {
    kind: &'a DistanceKind,
    count: Cell<u64>,
}

impl<'a> CountingDistance<'a> {
    pub fn new(kind: &'a DistanceKind) -> Self {
        Self {
            kind,
            count: Cell::new(0),
        }
    }

    pub fn kind(&self) -> &DistanceKind {
        self.kind
    }

    pub fn count(&self) -> u64 {
        self.count.get()
    }

    pub fn distance(&self, a: &[f32], b: &[f32]) -> Result<f64> {
        let d = self.kind.distance(a, b)?;
        self.count.set(self.count.get() + 1);
        Ok(d)
    }
}

impl DistanceEval for CountingDistance<'_> {
    #[inline]
    fn eval(&self, a: &[f32], b: &[f32]) -> f64 {
        self.count.set(self.count.get() + 1);
        self.kind.eval(a, b)
    }
}
