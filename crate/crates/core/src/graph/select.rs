//! Neighbor selection: plain closest-M and the diversity heuristic.

use super::neighbor::{Neighbor, NodeId};

/// The `min(m, candidates.len())` closest candidates, nearest first, ties by
/// smaller id.
pub fn select_neighbors_simple(candidates: &[Neighbor], m: usize) -> Vec<Neighbor> {
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    sorted.truncate(m);
    sorted
}

/// Heuristic selection over candidates whose `dist` is measured to the base
/// element. `pair` returns the distance between two candidates.
///
/// Candidates are scanned nearest-first; one is kept only when it is strictly
/// closer to the base than to every candidate already kept. Scanning stops
/// once `m` are kept. With `keep_pruned`, rejected candidates back-fill the
/// result nearest-first up to `m`.
pub fn select_heuristic_by<F>(
    candidates: &[Neighbor],
    m: usize,
    keep_pruned: bool,
    mut pair: F,
) -> Vec<Neighbor>
where
    F: FnMut(NodeId, NodeId) -> f64,
{
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();

    let mut result: Vec<Neighbor> = Vec::with_capacity(m.min(sorted.len()));
    let mut discarded = Vec::new();
    for e in sorted {
        if result.len() >= m {
            break;
        }
        if result.iter().all(|r| e.dist < pair(e.id, r.id)) {
            result.push(e);
        } else {
            discarded.push(e);
        }
    }
    if keep_pruned {
        let room = m.saturating_sub(result.len());
        result.extend(discarded.into_iter().take(room));
    }
    result
}
