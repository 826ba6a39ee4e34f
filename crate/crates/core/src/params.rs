use crate::error::{config, Result};

/// Which bound certifies that no closer pair was missed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundKind {
    /// Exact miss probability of the tensored pool, where repetitions share
    /// left and right half-words.
    #[default]
    Tensored,
    /// Treats every repetition as independent.
    Independent,
    /// Product of half-length prefix terms over `j div m` and `j mod m`
    /// repetitions. Overly optimistic: it vanishes at prefix length 1.
    HalfPrefix,
}

/// Inclusive range of motif dimensionalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimRange {
    pub low: usize,
    pub high: usize,
}

impl DimRange {
    pub fn single(d: usize) -> Self {
        Self { low: d, high: d }
    }

    pub fn new(low: usize, high: usize) -> Self {
        Self { low, high }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.low..=self.high
    }

    pub fn len(&self) -> usize {
        self.high + 1 - self.low
    }

    pub fn is_empty(&self) -> bool {
        self.high < self.low
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscoveryParams {
    pub window: usize,
    pub k: usize,
    pub dims: DimRange,
    pub delta: f64,
    /// Maximum number of concatenated hash symbols per word.
    pub max_k: usize,
    /// Maximum number of repetitions.
    pub max_l: usize,
    pub exclusion: usize,
    pub seed: u64,
    pub memory_limit: Option<u64>,
    /// Split δ across the k motifs so that all of them are correct together.
    pub union_bound: bool,
    /// Quantization width; estimated from the data when absent.
    pub r: Option<f64>,
    pub bound: BoundKind,
    /// Skip pairs that already collided at the next longer prefix.
    pub skip_duplicates: bool,
}

impl DiscoveryParams {
    pub fn new(window: usize, k: usize, d: usize) -> Self {
        Self {
            window,
            k,
            dims: DimRange::single(d),
            delta: 0.01,
            max_k: 8,
            max_l: 200,
            exclusion: window / 2,
            seed: 0,
            memory_limit: None,
            union_bound: false,
            r: None,
            bound: BoundKind::Tensored,
            skip_duplicates: true,
        }
    }

    pub fn with_dims(mut self, dims: DimRange) -> Self {
        self.dims = dims;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_repetitions(mut self, max_k: usize, max_l: usize) -> Self {
        self.max_k = max_k;
        self.max_l = max_l;
        self
    }

    /// The per-motif failure probability used in the stopping condition.
    pub fn effective_delta(&self) -> f64 {
        if self.union_bound {
            self.delta / self.k as f64
        } else {
            self.delta
        }
    }

    pub fn validate(&self, series_dims: usize, series_len: usize) -> Result<()> {
        if self.window == 0 || self.window > series_len {
            return config(format!(
                "window {} must be in 1..={series_len}",
                self.window
            ));
        }
        if self.k == 0 {
            return config("k must be at least 1");
        }
        if self.dims.low == 0 || self.dims.low > self.dims.high || self.dims.high > series_dims {
            return config(format!(
                "dimensionality range {}..{} must lie within 1..={series_dims}",
                self.dims.low, self.dims.high
            ));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return config(format!("delta {} must lie in (0, 1]", self.delta));
        }
        if self.max_k == 0 || self.max_l == 0 {
            return config("concatenations and repetitions must be at least 1");
        }
        if let Some(r) = self.r {
            if !(r > 0.0 && r.is_finite()) {
                return config(format!("quantization width {r} must be positive"));
            }
        }
        Ok(())
    }
}
