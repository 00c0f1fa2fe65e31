//! The layered proximity graph.
//!
//! Every element lives in layer 0; an element with level `l` also lives in
//! layers `1..=l`. Searches start at the enter point on the top layer, walk
//! greedily down to layer 1 and then run a beam search of width `ef` on the
//! ground layer.

mod level;
mod neighbor;
mod params;
mod select;
mod stats;
mod validate;
mod visited;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distance::{DistanceEval, DistanceKind};
use crate::error::{HnswError, Result};

pub use level::{generate_level, level_for_uniform, MAX_LEVEL};
pub use neighbor::{Neighbor, NodeId};
pub use params::{default_level_mult, IndexParams, SearchParams, Selector};
pub use select::{select_heuristic_by, select_neighbors_simple};
pub use stats::IndexStats;
pub use validate::InvariantViolation;

/// Largest number of elements an index can hold; ids are stored as `u32`.
pub const MAX_ELEMENTS: usize = u32::MAX as usize;

#[derive(Debug, Clone)]
pub struct HnswIndex {
    params: IndexParams,
    kind: DistanceKind,
    dim: usize,
    data: Vec<f32>,
    levels: Vec<u8>,
    /// `links[node][layer]`, present for `layer <= levels[node]`.
    links: Vec<Vec<Vec<NodeId>>>,
    enter_point: Option<NodeId>,
    max_layer: usize,
    rng: ChaCha8Rng,
}

impl HnswIndex {
    pub fn new(dim: usize, kind: DistanceKind, params: IndexParams) -> Result<Self> {
        params.validate()?;
        if dim == 0 {
            return Err(HnswError::InvalidParams("dimension must be positive".into()));
        }
        let rng = ChaCha8Rng::seed_from_u64(params.seed);
        Ok(Self {
            params,
            kind,
            dim,
            data: Vec::new(),
            levels: Vec::new(),
            links: Vec::new(),
            enter_point: None,
            max_layer: 0,
            rng,
        })
    }

    /// Reassembles an index from raw parts and checks every structural
    /// invariant. The level RNG is positioned as if the elements had been
    /// inserted one by one, so further inserts continue the same stream.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        params: IndexParams,
        kind: DistanceKind,
        dim: usize,
        data: Vec<f32>,
        levels: Vec<u8>,
        links: Vec<Vec<Vec<NodeId>>>,
        enter_point: Option<NodeId>,
        max_layer: usize,
    ) -> Result<Self> {
        let mut index = Self::new(dim, kind, params)?;
        index.data = data;
        index.levels = levels;
        index.links = links;
        index.enter_point = enter_point;
        index.max_layer = max_layer;
        index.check_invariants()?;
        for i in 0..index.len() {
            index.kind.admit(index.vector(NodeId(i as u32)), dim).map_err(|e| {
                HnswError::Snapshot(format!("element {i} is not admissible: {e}"))
            })?;
        }
        for _ in 0..index.len() {
            generate_level(&mut index.rng, 0.0);
        }
        Ok(index)
    }

    pub fn params(&self) -> &IndexParams {
        &self.params
    }

    pub fn kind(&self) -> &DistanceKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn enter_point(&self) -> Option<NodeId> {
        self.enter_point
    }

    pub fn max_layer(&self) -> usize {
        self.max_layer
    }

    pub fn level(&self, id: NodeId) -> usize {
        self.levels[id.index()] as usize
    }

    pub fn levels(&self) -> impl Iterator<Item = usize> + '_ {
        self.levels.iter().map(|&l| l as usize)
    }

    #[inline]
    pub fn vector(&self, id: NodeId) -> &[f32] {
        let start = id.index() * self.dim;
        &self.data[start..start + self.dim]
    }

    /// Neighbors of `id` at `layer`; empty if the node does not reach that
    /// layer.
    #[inline]
    pub fn neighbors(&self, id: NodeId, layer: usize) -> &[NodeId] {
        self.links[id.index()]
            .get(layer)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub(crate) fn raw_vectors(&self) -> &[f32] {
        &self.data
    }

    fn check_node(&self, id: NodeId) -> Result<()> {
        if id.index() < self.len() {
            Ok(())
        } else {
            Err(HnswError::UnknownNode(id.0))
        }
    }

    /// Inserts `v` and returns its id.
    pub fn insert(&mut self, v: &[f32]) -> Result<NodeId> {
        self.kind.admit(v, self.dim)?;
        if self.len() >= MAX_ELEMENTS {
            return Err(HnswError::Capacity(self.len()));
        }
        let level = generate_level(&mut self.rng, self.params.level_mult);
        Ok(self.insert_at_level(v, level))
    }

    /// Inserts with a fixed level, bypassing the RNG. The vector must already
    /// be admitted.
    pub(crate) fn insert_at_level(&mut self, v: &[f32], level: usize) -> NodeId {
        let id = NodeId(self.len() as u32);
        self.data.extend_from_slice(v);
        self.levels.push(level as u8);
        self.links.push(vec![Vec::new(); level + 1]);

        let Some(ep) = self.enter_point else {
            self.enter_point = Some(id);
            self.max_layer = level;
            return id;
        };

        let kind = self.kind.clone();
        let mut nearest = Neighbor::new(ep, kind.eval(v, self.vector(ep)));
        for layer in (level + 1..=self.max_layer).rev() {
            nearest = self.search_layer_with(&kind, v, &[nearest], 1, layer)[0];
        }

        let mut enter = vec![nearest];
        for layer in (0..=level.min(self.max_layer)).rev() {
            let found = self.search_layer_with(&kind, v, &enter, self.params.ef_construction, layer);
            let selected = match self.params.selector {
                Selector::Simple => select_neighbors_simple(&found, self.params.m),
                Selector::Heuristic => self.select_heuristic_with(
                    &kind,
                    v,
                    Some(id),
                    &found,
                    self.params.m,
                    self.params.extend_candidates,
                    self.params.keep_pruned_connections,
                    layer,
                ),
            };
            self.links[id.index()][layer] = selected.iter().map(|n| n.id).collect();
            let cap = self.params.cap(layer);
            for n in &selected {
                self.links[n.id.index()][layer].push(id);
                if self.links[n.id.index()][layer].len() > cap {
                    self.shrink_with(&kind, n.id, layer);
                }
            }
            enter = found;
        }

        if level > self.max_layer {
            self.max_layer = level;
            self.enter_point = Some(id);
        }
        id
    }

    /// Beam search of width `ef` within one layer, seeded with
    /// `enter_points`. Returns up to `ef` elements, nearest first.
    pub fn search_layer(
        &self,
        q: &[f32],
        enter_points: &[Neighbor],
        ef: usize,
        layer: usize,
    ) -> Result<Vec<Neighbor>> {
        self.kind.admit(q, self.dim)?;
        if self.is_empty() || layer > self.max_layer {
            return Err(HnswError::EmptyLayer {
                layer,
                max_layer: self.max_layer,
            });
        }
        if ef == 0 {
            return Err(HnswError::InvalidSearch("ef must be positive".into()));
        }
        if enter_points.is_empty() {
            return Err(HnswError::InvalidSearch("no enter points".into()));
        }
        for e in enter_points {
            self.check_node(e.id)?;
            if self.level(e.id) < layer {
                return Err(HnswError::InvalidSearch(format!(
                    "enter point {} does not reach layer {layer}",
                    e.id
                )));
            }
        }
        Ok(self.search_layer_with(&self.kind, q, enter_points, ef, layer))
    }

    pub(crate) fn search_layer_with<D: DistanceEval>(
        &self,
        dist: &D,
        q: &[f32],
        enter_points: &[Neighbor],
        ef: usize,
        layer: usize,
    ) -> Vec<Neighbor> {
        visited::with_visited(self.len(), |visited| {
            let mut candidates: BinaryHeap<Reverse<Neighbor>> = BinaryHeap::new();
            let mut result: BinaryHeap<Neighbor> = BinaryHeap::new();
            for &e in enter_points {
                if visited.insert(e.id.index()) {
                    candidates.push(Reverse(e));
                    result.push(e);
                }
            }
            while result.len() > ef {
                result.pop();
            }

            while let Some(Reverse(c)) = candidates.pop() {
                let furthest = result.peek().map_or(f64::INFINITY, |r| r.dist);
                if c.dist > furthest {
                    break;
                }
                for &e in self.neighbors(c.id, layer) {
                    if !visited.insert(e.index()) {
                        continue;
                    }
                    let d = dist.eval(q, self.vector(e));
                    let furthest = result.peek().map_or(f64::INFINITY, |r| r.dist);
                    if result.len() < ef || d < furthest {
                        let n = Neighbor { id: e, dist: d };
                        candidates.push(Reverse(n));
                        result.push(n);
                        if result.len() > ef {
                            result.pop();
                        }
                    }
                }
            }
            result.into_sorted_vec()
        })
    }

    /// Heuristic neighbor selection for `base` among `candidates` (distances
    /// measured to `base`). With `extend_candidates`, every layer neighbor of
    /// every candidate joins the pool first.
    #[allow(clippy::too_many_arguments)]
    pub fn select_neighbors_heuristic(
        &self,
        base: &[f32],
        candidates: &[Neighbor],
        m: usize,
        extend_candidates: bool,
        keep_pruned_connections: bool,
        layer: usize,
    ) -> Result<Vec<Neighbor>> {
        self.kind.admit(base, self.dim)?;
        for c in candidates {
            self.check_node(c.id)?;
        }
        Ok(self.select_heuristic_with(
            &self.kind,
            base,
            None,
            candidates,
            m,
            extend_candidates,
            keep_pruned_connections,
            layer,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn select_heuristic_with<D: DistanceEval>(
        &self,
        dist: &D,
        base: &[f32],
        base_id: Option<NodeId>,
        candidates: &[Neighbor],
        m: usize,
        extend_candidates: bool,
        keep_pruned_connections: bool,
        layer: usize,
    ) -> Vec<Neighbor> {
        let pair = |a: NodeId, b: NodeId| dist.eval(self.vector(a), self.vector(b));
        if !extend_candidates {
            return select_heuristic_by(candidates, m, keep_pruned_connections, pair);
        }
        let mut pool = candidates.to_vec();
        let mut seen: HashSet<NodeId> = pool.iter().map(|n| n.id).collect();
        seen.extend(base_id);
        for c in candidates {
            for &e in self.neighbors(c.id, layer) {
                if seen.insert(e) {
                    pool.push(Neighbor::new(e, dist.eval(base, self.vector(e))));
                }
            }
        }
        select_heuristic_by(&pool, m, keep_pruned_connections, pair)
    }

    /// Re-selects the layer list of `node` if it exceeds the layer cap, and
    /// removes every dropped link from the other side as well.
    pub fn shrink_connections(&mut self, node: NodeId, layer: usize) -> Result<()> {
        self.check_node(node)?;
        if layer > self.level(node) {
            return Err(HnswError::InvalidSearch(format!(
                "node {node} does not reach layer {layer}"
            )));
        }
        let kind = self.kind.clone();
        self.shrink_with(&kind, node, layer);
        Ok(())
    }

    fn shrink_with<D: DistanceEval>(&mut self, dist: &D, node: NodeId, layer: usize) {
        let cap = self.params.cap(layer);
        let current = &self.links[node.index()][layer];
        if current.len() <= cap {
            return;
        }
        let base = self.vector(node);
        let candidates: Vec<Neighbor> = current
            .iter()
            .map(|&e| Neighbor::new(e, dist.eval(base, self.vector(e))))
            .collect();
        // back-fill would undo the pruning, so it is always off here
        let kept = match self.params.selector {
            Selector::Simple => select_neighbors_simple(&candidates, cap),
            Selector::Heuristic => {
                select_heuristic_by(&candidates, cap, false, |a, b| {
                    dist.eval(self.vector(a), self.vector(b))
                })
            }
        };
        let kept: Vec<NodeId> = kept.into_iter().map(|n| n.id).collect();
        let dropped: Vec<NodeId> = candidates
            .iter()
            .map(|n| n.id)
            .filter(|id| !kept.contains(id))
            .collect();
        self.links[node.index()][layer] = kept;
        for d in dropped {
            self.links[d.index()][layer].retain(|&x| x != node);
        }
    }

    /// Approximate k nearest neighbors of `q`, nearest first.
    pub fn knn_search(&self, q: &[f32], search: SearchParams) -> Result<Vec<Neighbor>> {
        self.knn_search_with(&self.kind, q, search)
    }

    /// Like [`knn_search`](Self::knn_search), also returning the number of
    /// distance evaluations the query cost.
    pub fn knn_search_counted(
        &self,
        q: &[f32],
        search: SearchParams,
    ) -> Result<(Vec<Neighbor>, u64)> {
        let counter = self.kind.counting();
        let found = self.knn_search_with(&counter, q, search)?;
        Ok((found, counter.count()))
    }

    fn knn_search_with<D: DistanceEval>(
        &self,
        dist: &D,
        q: &[f32],
        search: SearchParams,
    ) -> Result<Vec<Neighbor>> {
        search.validate()?;
        self.kind.admit(q, self.dim)?;
        let ep = self.enter_point.ok_or(HnswError::EmptyIndex)?;
        let mut nearest = Neighbor::new(ep, dist.eval(q, self.vector(ep)));
        for layer in (1..=self.max_layer).rev() {
            nearest = self.search_layer_with(dist, q, &[nearest], 1, layer)[0];
        }
        let mut found = self.search_layer_with(dist, q, &[nearest], search.ef, 0);
        found.truncate(search.k);
        Ok(found)
    }
}
