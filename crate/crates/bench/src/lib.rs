//! Benchmark driver: builds indexes, materializes ground truth and turns
//! query sweeps into [`RunRecord`] rows.

mod record;

use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hnsw_core::graph::default_level_mult;
use hnsw_core::oracle::{evaluate, GroundTruth};
use hnsw_core::{Dataset, DistanceKind, HnswIndex, IndexParams, Neighbor, NodeId, SearchParams, Selector};

pub use record::{read_csv, write_csv, RunRecord, HEADER};

pub fn parse_distance(s: &str) -> Result<DistanceKind> {
    match s {
        "l2" | "euclidean" => Ok(DistanceKind::Euclidean),
        "cosine" => Ok(DistanceKind::Cosine),
        _ => bail!("unknown distance '{s}' (expected l2 or cosine)"),
    }
}

pub fn parse_selector(s: &str) -> Result<Selector> {
    match s {
        "simple" => Ok(Selector::Simple),
        "heuristic" => Ok(Selector::Heuristic),
        _ => bail!("unknown selector '{s}' (expected simple or heuristic)"),
    }
}

/// A level multiplier, or `auto` for `1/ln(M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelMult {
    Auto,
    Value(f64),
}

impl LevelMult {
    pub fn resolve(self, m: usize) -> f64 {
        match self {
            LevelMult::Auto => default_level_mult(m),
            LevelMult::Value(v) => v,
        }
    }
}

impl FromStr for LevelMult {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(LevelMult::Auto);
        }
        let v: f64 = s.parse().with_context(|| format!("bad level multiplier '{s}'"))?;
        Ok(LevelMult::Value(v))
    }
}

/// A ground-layer degree cap: `auto` (2M), `inf`, or a number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cap {
    Auto,
    Unbounded,
    Value(usize),
}

impl Cap {
    pub fn resolve(self, m: usize) -> usize {
        match self {
            Cap::Auto => m.saturating_mul(2),
            Cap::Unbounded => usize::MAX,
            Cap::Value(v) => v,
        }
    }
}

impl FromStr for Cap {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Cap::Auto),
            "inf" => Ok(Cap::Unbounded),
            _ => Ok(Cap::Value(s.parse().with_context(|| format!("bad degree cap '{s}'"))?)),
        }
    }
}

/// `count` distinct rows drawn from `data` with `seed`, in draw order.
pub fn sample_queries(data: &Dataset, count: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = count.min(data.len());
    let picks = sample(&mut rng, data.len(), count);
    let mut out = Dataset::new(data.dim());
    for i in picks.iter() {
        out.push(data.get(i)).expect("row from a valid dataset");
    }
    out
}

pub fn build_index(data: &Dataset, kind: &DistanceKind, params: IndexParams) -> Result<(HnswIndex, f64)> {
    ensure!(!data.is_empty(), "dataset is empty");
    let mut index = HnswIndex::new(data.dim(), kind.clone(), params)?;
    let start = Instant::now();
    for (i, v) in data.iter().enumerate() {
        index.insert(v).with_context(|| format!("inserting row {i}"))?;
    }
    Ok((index, start.elapsed().as_secs_f64() * 1e3))
}

/// Exact ground truth; `k` may not exceed the dataset size.
pub fn ground_truth(data: &Dataset, kind: &DistanceKind, queries: &Dataset, k: usize) -> Result<GroundTruth> {
    ensure!(k > 0, "k must be positive");
    ensure!(
        k <= data.len(),
        "k = {k} exceeds the dataset size {}",
        data.len()
    );
    ensure!(
        queries.is_empty() || queries.dim() == data.dim(),
        "query dimension {} differs from dataset dimension {}",
        queries.dim(),
        data.dim()
    );
    Ok(GroundTruth::compute(data, kind, queries, k)?)
}

/// Rebuilds a scored ground truth from stored id lists by measuring each id
/// against its query with the index's own kernel.
pub fn truth_from_ids(index: &HnswIndex, queries: &Dataset, ids: &[Vec<u32>], k: usize) -> Result<GroundTruth> {
    ensure!(
        ids.len() == queries.len(),
        "ground truth has {} lists for {} queries",
        ids.len(),
        queries.len()
    );
    let mut lists = Vec::with_capacity(ids.len());
    for (qi, (q, list)) in queries.iter().zip(ids).enumerate() {
        ensure!(
            list.len() >= k,
            "ground truth list {qi} has {} ids, fewer than k = {k}",
            list.len()
        );
        let scored = list
            .iter()
            .map(|&id| {
                ensure!((id as usize) < index.len(), "ground truth id {id} is not in the index");
                Ok(Neighbor::new(id, index.kind().eval(q, index.vector(NodeId(id)))))
            })
            .collect::<Result<Vec<_>>>()?;
        lists.push(scored);
    }
    Ok(GroundTruth { k, lists })
}

/// One row per `ef`, scored against `truth`.
pub fn query_rows(
    label: &str,
    index: &HnswIndex,
    queries: &Dataset,
    truth: &GroundTruth,
    k: usize,
    efs: &[usize],
    build_ms: Option<f64>,
) -> Vec<RunRecord> {
    efs.iter()
        .map(|&ef| {
            let mut row = RunRecord::new(label, index.len(), index.dim(), index.kind().label(), index.params());
            row.k = k;
            row.ef = ef;
            row.build_ms = build_ms;
            match evaluate(index, queries, truth, SearchParams::new(k, ef)) {
                Ok(e) => {
                    row.recall = Some(e.recall);
                    row.mean_query_us = Some(e.mean_query_micros);
                    row.mean_distance_computations = Some(e.mean_distance_computations);
                    row
                }
                Err(err) => row.failed(err),
            }
        })
        .collect()
}

/// Where sweep queries come from.
#[derive(Debug, Clone)]
pub enum Queries {
    Held(Dataset),
    /// Sample this many indexed elements per size, seeded.
    SelfSample { count: usize, seed: u64 },
}

/// The parameter grid of a sweep. Every combination is built once per size
/// and queried at every `ef`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub sizes: Vec<usize>,
    pub ms: Vec<usize>,
    pub level_mults: Vec<LevelMult>,
    pub mmax0s: Vec<Cap>,
    pub selectors: Vec<Selector>,
    pub efs: Vec<usize>,
    pub mmax: Option<usize>,
    pub ef_construction: usize,
    pub extend_candidates: bool,
    pub keep_pruned: bool,
    pub seed: u64,
    pub k: usize,
}

impl Grid {
    pub fn single(m: usize, efs: Vec<usize>, k: usize) -> Self {
        Self {
            sizes: Vec::new(),
            ms: vec![m],
            level_mults: vec![LevelMult::Auto],
            mmax0s: vec![Cap::Auto],
            selectors: vec![Selector::Heuristic],
            efs,
            mmax: None,
            ef_construction: 100,
            extend_candidates: false,
            keep_pruned: true,
            seed: 0,
            k,
        }
    }

    fn params(&self, m: usize, level_mult: LevelMult, mmax0: Cap, selector: Selector) -> IndexParams {
        IndexParams::new(m)
            .with_mmax(self.mmax.unwrap_or(m))
            .with_mmax0(mmax0.resolve(m))
            .with_level_mult(level_mult.resolve(m))
            .with_ef_construction(self.ef_construction)
            .with_selector(selector)
            .with_extend_candidates(self.extend_candidates)
            .with_keep_pruned_connections(self.keep_pruned)
            .with_seed(self.seed)
    }
}

/// Builds and queries every grid point. A failing point becomes a row with
/// an error status; the sweep carries on.
pub fn sweep(label: &str, data: &Dataset, kind: &DistanceKind, queries: &Queries, grid: &Grid) -> Vec<RunRecord> {
    let sizes = if grid.sizes.is_empty() {
        vec![data.len()]
    } else {
        grid.sizes.clone()
    };
    let mut rows = Vec::new();
    for &size in &sizes {
        let subset = data.prefix(size);
        let qs = match queries {
            Queries::Held(q) => q.clone(),
            Queries::SelfSample { count, seed } => sample_queries(&subset, *count, *seed),
        };
        let truth = ground_truth(&subset, kind, &qs, grid.k);
        for &m in &grid.ms {
            for &lm in &grid.level_mults {
                for &cap in &grid.mmax0s {
                    for &selector in &grid.selectors {
                        let params = grid.params(m, lm, cap, selector);
                        let failed_rows = |err: &dyn std::fmt::Display| {
                            grid.efs
                                .iter()
                                .map(|&ef| {
                                    let mut r = RunRecord::new(label, size, data.dim(), kind.label(), &params);
                                    r.k = grid.k;
                                    r.ef = ef;
                                    r.failed(err)
                                })
                                .collect::<Vec<_>>()
                        };
                        if size > data.len() {
                            let msg = format!("size {size} exceeds dataset size {}", data.len());
                            rows.extend(failed_rows(&msg));
                            continue;
                        }
                        let truth = match &truth {
                            Ok(t) => t,
                            Err(e) => {
                                rows.extend(failed_rows(e));
                                continue;
                            }
                        };
                        match build_index(&subset, kind, params.clone()) {
                            Ok((index, ms)) => {
                                rows.extend(query_rows(label, &index, &qs, truth, grid.k, &grid.efs, Some(ms)))
                            }
                            Err(e) => rows.extend(failed_rows(&format!("{e:#}"))),
                        }
                    }
                }
            }
        }
    }
    rows
}
