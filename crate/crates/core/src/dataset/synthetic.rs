use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Dataset;

/// Half-width of a cluster, as a fraction of the unit cube edge.
pub const DEFAULT_CLUSTER_SPREAD: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Components i.i.d. uniform in [0, 1).
    UniformCube,
    /// Centers uniform in the unit cube; each point is a random center plus
    /// a uniform offset in `[-spread, spread)` per component.
    Clusters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub family: Family,
    pub n: usize,
    pub dim: usize,
    pub cluster_count: usize,
    pub cluster_spread: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn uniform(n: usize, dim: usize, seed: u64) -> Self {
        Self {
            family: Family::UniformCube,
            n,
            dim,
            cluster_count: 1,
            cluster_spread: DEFAULT_CLUSTER_SPREAD,
            seed,
        }
    }

    pub fn clusters(n: usize, dim: usize, cluster_count: usize, seed: u64) -> Self {
        Self {
            family: Family::Clusters,
            n,
            dim,
            cluster_count,
            cluster_spread: DEFAULT_CLUSTER_SPREAD,
            seed,
        }
    }

    pub fn with_spread(mut self, spread: f64) -> Self {
        self.cluster_spread = spread;
        self
    }
}

pub fn generate(spec: &SyntheticSpec) -> Dataset {
    generate_reporting(spec).0
}

/// Generates the dataset and reports the seed actually used. For clusters,
/// a seed whose centers come closer than `2 * spread * sqrt(dim)` is skipped
/// in favor of the next one, so returned clusters never overlap.
pub fn generate_reporting(spec: &SyntheticSpec) -> (Dataset, u64) {
    assert!(spec.dim > 0, "dimension must be positive");
    match spec.family {
        Family::UniformCube => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let data = (0..spec.n * spec.dim).map(|_| rng.gen::<f32>()).collect();
            (Dataset::from_flat(spec.dim, data).expect("finite by construction"), spec.seed)
        }
        Family::Clusters => {
            assert!(spec.cluster_count > 0, "need at least one cluster");
            let min_gap = 2.0 * spec.cluster_spread * (spec.dim as f64).sqrt();
            let mut seed = spec.seed;
            loop {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let centers: Vec<Vec<f64>> = (0..spec.cluster_count)
                    .map(|_| (0..spec.dim).map(|_| rng.gen::<f64>()).collect())
                    .collect();
                if min_center_distance(&centers) > min_gap {
                    let mut data = Vec::with_capacity(spec.n * spec.dim);
                    for _ in 0..spec.n {
                        let c = &centers[rng.gen_range(0..centers.len())];
                        data.extend(c.iter().map(|&x| {
                            (x + rng.gen_range(-spec.cluster_spread..spec.cluster_spread)) as f32
                        }));
                    }
                    let ds = Dataset::from_flat(spec.dim, data).expect("finite by construction");
                    return (ds, seed);
                }
                seed = seed.wrapping_add(1);
            }
        }
    }
}

fn min_center_distance(centers: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            best = best.min(d.sqrt());
        }
    }
    best
}
