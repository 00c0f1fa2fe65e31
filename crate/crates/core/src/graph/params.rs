use crate::error::{HnswError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Selector {
    /// Keep the M closest candidates.
    Simple,
    /// Keep a candidate only if it is closer to the base than to every
    /// neighbor already kept.
    Heuristic,
}

impl Selector {
    pub fn label(self) -> &'static str {
        match self {
            Selector::Simple => "simple",
            Selector::Heuristic => "heuristic",
        }
    }
}

/// Construction parameters.
///
/// `mmax0` may be `usize::MAX` for an uncapped ground layer.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexParams {
    pub m: usize,
    pub mmax: usize,
    pub mmax0: usize,
    pub ef_construction: usize,
    pub level_mult: f64,
    pub selector: Selector,
    pub extend_candidates: bool,
    pub keep_pruned_connections: bool,
    pub seed: u64,
}

/// `1 / ln(M)`; zero for `M < 2`, where the logarithm degenerates.
pub fn default_level_mult(m: usize) -> f64 {
    if m < 2 {
        0.0
    } else {
        1.0 / (m as f64).ln()
    }
}

impl IndexParams {
    /// Defaults derived from `m`: `mmax = m`, `mmax0 = 2m`,
    /// `level_mult = 1/ln(m)`, heuristic selection with pruned back-fill.
    pub fn new(m: usize) -> Self {
        Self {
            m,
            mmax: m,
            mmax0: m.saturating_mul(2),
            ef_construction: 100.max(m),
            level_mult: default_level_mult(m),
            selector: Selector::Heuristic,
            extend_candidates: false,
            keep_pruned_connections: true,
            seed: 0,
        }
    }

    pub fn with_mmax(mut self, mmax: usize) -> Self {
        self.mmax = mmax;
        self
    }

    pub fn with_mmax0(mut self, mmax0: usize) -> Self {
        self.mmax0 = mmax0;
        self
    }

    pub fn with_ef_construction(mut self, ef: usize) -> Self {
        self.ef_construction = ef;
        self
    }

    pub fn with_level_mult(mut self, level_mult: f64) -> Self {
        self.level_mult = level_mult;
        self
    }

    pub fn with_selector(mut self, selector: Selector) -> Self {
        self.selector = selector;
        self
    }

    pub fn with_extend_candidates(mut self, on: bool) -> Self {
        self.extend_candidates = on;
        self
    }

    pub fn with_keep_pruned_connections(mut self, on: bool) -> Self {
        self.keep_pruned_connections = on;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Degree cap for `layer`.
    #[inline]
    pub fn cap(&self, layer: usize) -> usize {
        if layer == 0 {
            self.mmax0
        } else {
            self.mmax
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HnswError::InvalidParams(msg));
        if self.m == 0 {
            return bad("M must be positive".into());
        }
        if self.mmax < self.m {
            return bad(format!("Mmax ({}) < M ({})", self.mmax, self.m));
        }
        if self.mmax0 < self.m {
            return bad(format!("Mmax0 ({}) < M ({})", self.mmax0, self.m));
        }
        if self.ef_construction < self.m {
            return bad(format!(
                "efConstruction ({}) < M ({})",
                self.ef_construction, self.m
            ));
        }
        if !self.level_mult.is_finite() || self.level_mult < 0.0 {
            return bad(format!("levelMult must be finite and >= 0, got {}", self.level_mult));
        }
        Ok(())
    }
}

impl Default for IndexParams {
    fn default() -> Self {
        Self::new(16)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    pub k: usize,
    pub ef: usize,
}

impl SearchParams {
    pub fn new(k: usize, ef: usize) -> Self {
        Self { k, ef }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(HnswError::InvalidSearch("k must be positive".into()));
        }
        if self.ef < self.k {
            return Err(HnswError::InvalidSearch(format!(
                "ef ({}) must be >= k ({})",
                self.ef, self.k
            )));
        }
        Ok(())
    }
}
