//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.
//!
//! `cargo test -p hnsw-core --test acceptance`

use std::sync::OnceLock;
use std::time::Instant;

use hnsw_core::dataset::{generate, SyntheticSpec};
use hnsw_core::graph::generate_level;
use hnsw_core::oracle::{evaluate, GroundTruth};
use hnsw_core::storage::{load_index, save_index};
use hnsw_core::{Dataset, DistanceKind, HnswIndex, IndexParams, Neighbor, NodeId, SearchParams, Selector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// `n` indexed points plus `queries` held-out points from the same
/// distribution.
fn split(spec: SyntheticSpec, queries: usize) -> (Dataset, Dataset) {
    let n = spec.n;
    let mut all = generate(&SyntheticSpec {
        n: n + queries,
        ..spec
    });
    let q = all.split_off(n);
    (all, q)
}

fn build(data: &Dataset, params: IndexParams) -> HnswIndex {
    let mut index = HnswIndex::new(data.dim(), DistanceKind::Euclidean, params).unwrap();
    for v in data.iter() {
        index.insert(v).unwrap();
    }
    index
}

fn truth(data: &Dataset, queries: &Dataset, k: usize) -> GroundTruth {
    GroundTruth::compute(data, &DistanceKind::Euclidean, queries, k).unwrap()
}

struct Uniform10k {
    data: Dataset,
    queries: Dataset,
    truth: GroundTruth,
    index: HnswIndex,
}

/// The N = 10,000, d = 4 setup shared by criteria 2, 10 and 11.
fn uniform_10k() -> &'static Uniform10k {
    static CELL: OnceLock<Uniform10k> = OnceLock::new();
    CELL.get_or_init(|| {
        let (data, queries) = split(SyntheticSpec::uniform(10_000, 4, 2024), 200);
        let truth = truth(&data, &queries, 10);
        let index = build(&data, IndexParams::new(6).with_ef_construction(100).with_seed(7));
        Uniform10k {
            data,
            queries,
            truth,
            index,
        }
    })
}

fn oracle_exactness() -> Outcome {
    let (data, queries) = split(SyntheticSpec::uniform(500, 4, 1), 100);
    let index = build(
        &data,
        IndexParams::new(6)
            .with_ef_construction(100)
            .with_selector(Selector::Heuristic)
            .with_seed(1),
    );
    let gt = truth(&data, &queries, 10);
    let eval = evaluate(&index, &queries, &gt, SearchParams::new(10, 500)).unwrap();
    check(eval.recall == 1.0, format!("recall = {:.4}", eval.recall))
}

fn high_recall_point() -> Outcome {
    let s = uniform_10k();
    let eval = evaluate(&s.index, &s.queries, &s.truth, SearchParams::new(10, 50)).unwrap();
    let limit = 0.1 * s.data.len() as f64;
    check(
        eval.recall >= 0.95 && eval.mean_distance_computations < limit,
        format!(
            "recall = {:.4} (>= 0.95), mean distance computations = {:.1} (< {limit})",
            eval.recall, eval.mean_distance_computations
        ),
    )
}

fn sublinear_scaling() -> Outcome {
    const EFS: [usize; 12] = [10, 15, 20, 30, 40, 60, 80, 120, 160, 240, 320, 480];
    let (all, queries) = split(SyntheticSpec::uniform(100_000, 8, 33), 200);
    let mut costs = Vec::new();
    for n in [1_000, 10_000, 100_000] {
        let data = all.prefix(n);
        let gt = truth(&data, &queries, 10);
        let index = build(&data, IndexParams::new(6).with_ef_construction(100).with_seed(3));
        let hit = EFS.iter().find_map(|&ef| {
            let e = evaluate(&index, &queries, &gt, SearchParams::new(10, ef)).unwrap();
            (e.recall >= 0.95).then_some((ef, e.mean_distance_computations))
        });
        match hit {
            Some((ef, cost)) => costs.push((n, ef, cost)),
            None => return Err(format!("N = {n}: no tested ef reached recall 0.95")),
        }
    }
    let ratio = costs[2].2 / costs[1].2;
    let table: Vec<String> = costs
        .iter()
        .map(|(n, ef, c)| format!("N={n}: ef={ef} cost={c:.0}"))
        .collect();
    check(ratio < 3.0, format!("{}; 100k/10k ratio = {ratio:.3} (< 3)", table.join(", ")))
}

fn heuristic_beats_simple_on_clusters() -> Outcome {
    let (data, queries) = split(SyntheticSpec::clusters(10_000, 10, 10, 4), 200);
    let gt = truth(&data, &queries, 10);
    let base = IndexParams::new(16).with_ef_construction(100).with_seed(5);
    let heuristic = build(&data, base.clone().with_selector(Selector::Heuristic));
    let simple = build(&data, base.with_selector(Selector::Simple));
    let mut ok = true;
    let mut best = 0.0f64;
    let mut rows = Vec::new();
    for ef in [10, 20, 50, 100, 200] {
        let sp = SearchParams::new(10, ef);
        let h = evaluate(&heuristic, &queries, &gt, sp).unwrap().recall;
        let s = evaluate(&simple, &queries, &gt, sp).unwrap().recall;
        ok &= h >= s;
        best = best.max(h);
        rows.push(format!("ef={ef}: {h:.3} vs {s:.3}"));
    }
    check(
        ok && best >= 0.90,
        format!("heuristic vs simple recall {}; best heuristic {best:.3}", rows.join(", ")),
    )
}

fn level_distribution() -> Outcome {
    let mult = 1.0 / 16f64.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(2017);
    let samples = 100_000;
    let (mut ge1, mut ge2) = (0usize, 0usize);
    for _ in 0..samples {
        let l = generate_level(&mut rng, mult);
        ge1 += (l >= 1) as usize;
        ge2 += (l >= 2) as usize;
    }
    let p1 = ge1 as f64 / samples as f64;
    let p2 = ge2 as f64 / samples as f64;
    check(
        (p1 - 1.0 / 16.0).abs() <= 0.01 && (p2 - 1.0 / 256.0).abs() <= 0.005,
        format!("P(level>=1) = {p1:.5} (0.0625 +- 0.01), P(level>=2) = {p2:.5} (0.00391 +- 0.005)"),
    )
}

fn degenerate_modes() -> Outcome {
    let datasets = [
        generate(&SyntheticSpec::uniform(3_000, 4, 8)),
        generate(&SyntheticSpec::clusters(3_000, 6, 5, 8)),
    ];
    let m = 6;
    for data in &datasets {
        let knn = build(
            data,
            IndexParams::new(m)
                .with_level_mult(0.0)
                .with_mmax0(m)
                .with_selector(Selector::Simple),
        );
        let nsw = build(data, IndexParams::new(m).with_level_mult(0.0).with_mmax0(usize::MAX));
        if knn.max_layer() != 0 || nsw.max_layer() != 0 {
            return Err(format!(
                "max layer {} / {} with levelMult = 0",
                knn.max_layer(),
                nsw.max_layer()
            ));
        }
        let worst = (0..knn.len() as u32)
            .map(|i| knn.neighbors(NodeId(i), 0).len())
            .max()
            .unwrap();
        if worst > m {
            return Err(format!("layer-0 degree {worst} exceeds M = {m}"));
        }
    }
    Ok("max layer 0 in both modes; capped mode degree <= M".into())
}

fn delaunay_chain_1d() -> Outcome {
    let data = generate(&SyntheticSpec::uniform(200, 1, 77));
    let coords: Vec<f32> = data.iter().map(|v| v[0]).collect();
    let mut sorted = coords.clone();
    sorted.sort_by(f32::total_cmp);
    sorted.dedup();
    if sorted.len() != coords.len() {
        return Err("sample has duplicate points".into());
    }
    let index = build(&data, IndexParams::new(4).with_seed(1));
    for (i, &x) in coords.iter().enumerate() {
        let candidates: Vec<Neighbor> = (0..coords.len())
            .filter(|&j| j != i)
            .map(|j| Neighbor::new(j as u32, (coords[j] as f64 - x as f64).abs()))
            .collect();
        let picked = index
            .select_neighbors_heuristic(&[x], &candidates, 200, false, false, 0)
            .unwrap();
        let mut got: Vec<f32> = picked.iter().map(|n| coords[n.id.index()]).collect();
        got.sort_by(f32::total_cmp);
        let pos = sorted.binary_search_by(|p| p.total_cmp(&x)).unwrap();
        let mut want = Vec::new();
        if pos > 0 {
            want.push(sorted[pos - 1]);
        }
        if pos + 1 < sorted.len() {
            want.push(sorted[pos + 1]);
        }
        if got != want {
            return Err(format!("point {x}: selected {got:?}, adjacent {want:?}"));
        }
    }
    Ok("200/200 points select exactly their adjacent neighbors".into())
}

fn invariants_after_every_insert() -> Outcome {
    let data = generate(&SyntheticSpec::uniform(5_000, 4, 12));
    let mut index = HnswIndex::new(
        4,
        DistanceKind::Euclidean,
        IndexParams::new(8).with_selector(Selector::Heuristic).with_seed(12),
    )
    .unwrap();
    for (i, v) in data.iter().enumerate() {
        index.insert(v).unwrap();
        if let Err(e) = index.check_invariants() {
            return Err(format!("after insert {i}: {e}"));
        }
    }
    Ok(format!("5000 inserts, max layer {}", index.max_layer()))
}

fn determinism_and_persistence() -> Outcome {
    let (data, queries) = split(SyntheticSpec::uniform(2_000, 4, 90), 50);
    let params = IndexParams::new(8).with_seed(99);
    let snapshot = |index: &HnswIndex| {
        let mut buf = Vec::new();
        save_index(index, &mut buf).unwrap();
        buf
    };
    let a = build(&data, params.clone());
    let b = build(&data, params);
    let bytes = snapshot(&a);
    if bytes != snapshot(&b) {
        return Err("identical builds produced different snapshots".into());
    }
    let loaded = load_index(&bytes[..]).map_err(|e| e.to_string())?;
    if loaded.stats() != a.stats() {
        return Err("stats changed across save/load".into());
    }
    for q in queries.iter() {
        let sp = SearchParams::new(10, 64);
        if a.knn_search(q, sp).unwrap() != loaded.knn_search(q, sp).unwrap() {
            return Err("search results changed across save/load".into());
        }
    }
    Ok(format!("{} snapshot bytes identical; 50 queries identical after reload", bytes.len()))
}

fn recall_monotone_in_ef() -> Outcome {
    let s = uniform_10k();
    let recalls: Vec<f64> = [10, 20, 50, 100, 200]
        .iter()
        .map(|&ef| {
            evaluate(&s.index, &s.queries, &s.truth, SearchParams::new(10, ef))
                .unwrap()
                .recall
        })
        .collect();
    let ok = recalls.windows(2).all(|w| w[1] >= w[0] - 0.01);
    check(ok, format!("recall by ef {{10,20,50,100,200}}: {recalls:.4?}"))
}

fn memory_accounting() -> Outcome {
    let s = uniform_10k();
    let stats = s.index.stats();
    let p = s.index.params();
    let bound = p.mmax0 as f64 + p.mmax as f64 * stats.mean_level;
    let mean = stats.mean_link_entries();
    let summary = save_index(&s.index, std::io::sink()).unwrap();
    let expected = 4 * stats.total_link_entries as u64 + 4 * stats.adjacency_lists as u64;
    check(
        mean <= bound
            && summary.adjacency_bytes == expected
            && summary.adjacency_bytes == stats.adjacency_bytes(),
        format!(
            "mean link entries {mean:.3} <= {bound:.3}; adjacency bytes {} = 4*{} + 4*{}",
            summary.adjacency_bytes, stats.total_link_entries, stats.adjacency_lists
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("oracle exactness", oracle_exactness),
        ("high-recall operating point", high_recall_point),
        ("sub-linear scaling", sublinear_scaling),
        ("heuristic vs simple on clustered data", heuristic_beats_simple_on_clusters),
        ("level distribution", level_distribution),
        ("degenerate modes", degenerate_modes),
        ("1D Delaunay chain", delaunay_chain_1d),
        ("structural invariants after every insert", invariants_after_every_insert),
        ("determinism and persistence", determinism_and_persistence),
        ("recall monotone in ef", recall_monotone_in_ef),
        ("memory accounting", memory_accounting),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("{} {name}", i + 1);
        if let Some(f) = &filter {
            if !label.contains(f.as_str()) {
                continue;
            }
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {label}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {label}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
