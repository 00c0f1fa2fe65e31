//! Dense vector collections: file formats and synthetic generators.

mod synthetic;
mod vecs;

pub use synthetic::{generate, generate_reporting, Family, SyntheticSpec, DEFAULT_CLUSTER_SPREAD};
pub use vecs::{
    read_bvecs, read_fvecs, read_fvecs_file, read_ivecs, read_ivecs_file, write_bvecs,
    write_fvecs, write_fvecs_file, write_ivecs, write_ivecs_file,
};

use crate::distance::DistanceKind;
use crate::error::{HnswError, Result};

/// Fixed-dimension vectors stored row-major in one buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    kind: DistanceKind,
    data: Vec<f32>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            kind: DistanceKind::Euclidean,
            data: Vec::new(),
        }
    }

    pub fn from_rows<I, R>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[f32]>,
    {
        let mut ds = Self::new(dim);
        for r in rows {
            ds.push(r.as_ref())?;
        }
        Ok(ds)
    }

    /// Takes a flat buffer; its length must be a multiple of `dim`.
    pub fn from_flat(dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 {
            if !data.is_empty() {
                return Err(HnswError::InvalidParams("zero-dimensional data".into()));
            }
        } else if !data.len().is_multiple_of(dim) {
            return Err(HnswError::InvalidParams(format!(
                "{} values do not split into rows of {dim}",
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(HnswError::NonFinite { index: index % dim.max(1) });
        }
        Ok(Self {
            dim,
            kind: DistanceKind::Euclidean,
            data,
        })
    }

    pub fn with_kind(mut self, kind: DistanceKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn kind(&self) -> &DistanceKind {
        &self.kind
    }

    /// Zero only for an empty dataset read from an empty file.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        // chunks_exact panics on 0
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn as_flat(&self) -> &[f32] {
        &self.data
    }

    pub fn push(&mut self, v: &[f32]) -> Result<()> {
        if self.dim == 0 && self.data.is_empty() {
            self.dim = v.len();
        }
        if self.dim == 0 {
            return Err(HnswError::InvalidParams("zero-dimensional vector".into()));
        }
        DistanceKind::Euclidean.admit(v, self.dim)?;
        self.data.extend_from_slice(v);
        Ok(())
    }

    /// The first `n` rows (all of them if `n >= len`).
    pub fn prefix(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Self {
            dim: self.dim,
            kind: self.kind.clone(),
            data: self.data[..n * self.dim].to_vec(),
        }
    }

    /// Splits off rows `at..`, leaving `0..at` in `self`.
    pub fn split_off(&mut self, at: usize) -> Dataset {
        let at = at.min(self.len());
        Self {
            dim: self.dim,
            kind: self.kind.clone(),
            data: self.data.split_off(at * self.dim),
        }
    }
}
