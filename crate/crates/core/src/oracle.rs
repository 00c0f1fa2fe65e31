//! Exact k-NN by full scan, and recall scoring against it.

use std::time::Instant;

use crate::dataset::Dataset;
use crate::distance::DistanceKind;
use crate::error::{HnswError, Result};
use crate::graph::{HnswIndex, Neighbor, NodeId, SearchParams};

/// The exact `k` nearest elements of `dataset` to `q`, ascending by
/// distance, ties by smaller id.
pub fn brute_force_knn(
    dataset: &Dataset,
    kind: &DistanceKind,
    q: &[f32],
    k: usize,
) -> Result<Vec<Neighbor>> {
    if q.len() != dataset.dim() {
        return Err(HnswError::DimensionMismatch {
            expected: dataset.dim(),
            actual: q.len(),
        });
    }
    let mut all: Vec<Neighbor> = dataset
        .iter()
        .enumerate()
        .map(|(i, v)| Neighbor::new(i as u32, kind.eval(q, v)))
        .collect();
    if k < all.len() {
        all.select_nth_unstable(k);
        all.truncate(k);
    }
    all.sort_unstable();
    Ok(all)
}

/// Exact neighbor lists for a batch of queries.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub k: usize,
    pub lists: Vec<Vec<Neighbor>>,
}

impl GroundTruth {
    pub fn compute(
        dataset: &Dataset,
        kind: &DistanceKind,
        queries: &Dataset,
        k: usize,
    ) -> Result<Self> {
        let lists = queries
            .iter()
            .map(|q| brute_force_knn(dataset, kind, q, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { k, lists })
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn ids(&self) -> Vec<Vec<u32>> {
        self.lists
            .iter()
            .map(|l| l.iter().map(|n| n.id.0).collect())
            .collect()
    }
}

/// `|found ∩ truth| / k` over the first `k` truth ids.
pub fn recall(found: &[NodeId], truth: &[NodeId], k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let truth = &truth[..k.min(truth.len())];
    let hits = found.iter().filter(|id| truth.contains(id)).count();
    hits.min(k) as f64 / k as f64
}

/// Recall that also credits any found element whose distance equals the
/// k-th true distance, so ties at the boundary never count as misses.
pub fn recall_tie_tolerant(found: &[Neighbor], truth: &[Neighbor], k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let truth = &truth[..k.min(truth.len())];
    let Some(boundary) = truth.last().map(|n| n.dist) else {
        return 0.0;
    };
    let hits = found
        .iter()
        .filter(|f| f.dist <= boundary || truth.iter().any(|t| t.id == f.id))
        .count();
    hits.min(k) as f64 / k as f64
}

/// Mean quality and cost of a query batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub recall: f64,
    pub mean_distance_computations: f64,
    pub mean_query_micros: f64,
}

/// Runs every query through `index` and scores it against `truth` with
/// [`recall_tie_tolerant`]. Timing covers the searches only.
pub fn evaluate(
    index: &HnswIndex,
    queries: &Dataset,
    truth: &GroundTruth,
    search: SearchParams,
) -> Result<Evaluation> {
    if truth.len() != queries.len() {
        return Err(HnswError::InvalidSearch(format!(
            "{} queries but ground truth for {}",
            queries.len(),
            truth.len()
        )));
    }
    if search.k > truth.k {
        return Err(HnswError::InvalidSearch(format!(
            "k = {} exceeds ground-truth depth {}",
            search.k, truth.k
        )));
    }
    if queries.is_empty() {
        return Ok(Evaluation {
            recall: 1.0,
            mean_distance_computations: 0.0,
            mean_query_micros: 0.0,
        });
    }
    let (mut recall_sum, mut evals, mut micros) = (0.0, 0u64, 0.0);
    for (q, t) in queries.iter().zip(&truth.lists) {
        let start = Instant::now();
        let (found, n) = index.knn_search_counted(q, search)?;
        micros += start.elapsed().as_secs_f64() * 1e6;
        evals += n;
        recall_sum += recall_tie_tolerant(&found, t, search.k.min(t.len()));
    }
    let count = queries.len() as f64;
    Ok(Evaluation {
        recall: recall_sum / count,
        mean_distance_computations: evals as f64 / count,
        mean_query_micros: micros / count,
    })
}
