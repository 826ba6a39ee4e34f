//! z-normalized Euclidean distances, the subdimensional distance and trivial
//! match exclusion.

use crate::series::{StatsTable, TimeSeries};

/// Distance between the z-normalized subsequences at offsets `a` and `b` of
/// dimension `f`.
///
/// A flat subsequence (standard deviation below the flatness threshold) has
/// no z-normalized form: two flat subsequences are at distance 0, a flat and
/// a non-flat one at the maximal distance `2 * sqrt(w)`.
pub fn znorm_distance(ts: &TimeSeries, stats: &StatsTable, a: usize, b: usize, f: usize) -> f64 {
    let w = stats.window();
    if a == b {
        return 0.0;
    }
    // fixed evaluation order keeps the result symmetric in (a, b)
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    match (stats.is_flat(a, f), stats.is_flat(b, f)) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return 2.0 * (w as f64).sqrt(),
        (false, false) => {}
    }
    let inv_a = 1.0 / stats.std(a, f);
    let inv_b = 1.0 / stats.std(b, f);
    let shift = stats.mean(a, f) * inv_a - stats.mean(b, f) * inv_b;
    let x = ts.subsequence(f, a, w);
    let y = ts.subsequence(f, b, w);
    let mut acc = 0.0;
    for (&xv, &yv) in x.iter().zip(y) {
        let diff = xv * inv_a - yv * inv_b - shift;
        acc += diff * diff;
    }
    acc.sqrt()
}

/// The per-dimension distances of a pair, with dimensions ranked by
/// increasing distance (ties by lower dimension index). Ranking once serves
/// every dimensionality `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceProfile {
    per_dim: Vec<f64>,
    order: Vec<usize>,
    /// `prefix[d]` is the sum of the `d` smallest distances.
    prefix: Vec<f64>,
}

impl DistanceProfile {
    pub fn new(per_dim: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..per_dim.len()).collect();
        order.sort_by(|&x, &y| per_dim[x].total_cmp(&per_dim[y]).then(x.cmp(&y)));
        let mut prefix = Vec::with_capacity(per_dim.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &f in &order {
            acc += per_dim[f];
            prefix.push(acc);
        }
        Self {
            per_dim,
            order,
            prefix,
        }
    }

    pub fn compute(ts: &TimeSeries, stats: &StatsTable, a: usize, b: usize) -> Self {
        Self::new(
            (0..ts.dims())
                .map(|f| znorm_distance(ts, stats, a, b, f))
                .collect(),
        )
    }

    pub fn per_dim(&self) -> &[f64] {
        &self.per_dim
    }

    pub fn dims(&self) -> usize {
        self.per_dim.len()
    }

    /// Sum of the `d` smallest per-dimension distances.
    pub fn dist_d(&self, d: usize) -> f64 {
        self.prefix[d]
    }

    /// Largest distance among the `d` selected dimensions.
    pub fn dist_d_max(&self, d: usize) -> f64 {
        self.per_dim[self.order[d - 1]]
    }

    /// The `d` selected dimensions, in increasing index order.
    pub fn selected_dims(&self, d: usize) -> Vec<usize> {
        let mut dims = self.order[..d].to_vec();
        dims.sort_unstable();
        dims
    }
}

/// Result of the subdimensional distance for a single `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubdimDistance {
    pub dist_d: f64,
    pub dims: Vec<usize>,
    pub dist_d_max: f64,
    pub per_dim: Vec<f64>,
}

/// The `d`-dimensional distance of the pair `(a, b)`: the minimum, over all
/// size-`d` subsets of dimensions, of the summed per-dimension distances.
pub fn dist_d(ts: &TimeSeries, stats: &StatsTable, a: usize, b: usize, d: usize) -> SubdimDistance {
    assert!(d >= 1 && d <= ts.dims(), "d = {d} out of range");
    let profile = DistanceProfile::compute(ts, stats, a, b);
    SubdimDistance {
        dist_d: profile.dist_d(d),
        dims: profile.selected_dims(d),
        dist_d_max: profile.dist_d_max(d),
        per_dim: profile.per_dim,
    }
}

/// Whether `a` and `b` fall within the exclusion zone of each other.
pub fn is_trivial_match(a: usize, b: usize, exclusion: usize) -> bool {
    a.abs_diff(b) <= exclusion
}

/// A pair of non-trivially matching subsequences together with its
/// subdimensional distance.
#[derive(Clone, Debug, PartialEq)]
pub struct MotifPair {
    pub a: usize,
    pub b: usize,
    pub per_dim: Vec<f64>,
    pub dist_d: f64,
    pub dims: Vec<usize>,
    pub dist_d_max: f64,
    /// Bound on the probability that a closer pair was missed, at the time
    /// the pair was confirmed. Zero for exact results.
    pub failure_bound: f64,
}

impl MotifPair {
    pub fn from_profile(a: usize, b: usize, profile: &DistanceProfile, d: usize) -> Self {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Self {
            a,
            b,
            per_dim: profile.per_dim().to_vec(),
            dist_d: profile.dist_d(d),
            dims: profile.selected_dims(d),
            dist_d_max: profile.dist_d_max(d),
            failure_bound: 1.0,
        }
    }

    /// Ordering key: distance first, then offsets.
    pub fn key(&self) -> (f64, usize, usize) {
        (self.dist_d, self.a, self.b)
    }

    pub fn cmp_key(&self, other: &Self) -> std::cmp::Ordering {
        self.dist_d
            .total_cmp(&other.dist_d)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }

    /// Two pairs overlap when any endpoint of one lies within the exclusion
    /// zone of any endpoint of the other.
    pub fn overlaps(&self, other: &Self, exclusion: usize) -> bool {
        pairs_overlap((self.a, self.b), (other.a, other.b), exclusion)
    }
}

pub fn pairs_overlap(p: (usize, usize), q: (usize, usize), exclusion: usize) -> bool {
    [p.0, p.1]
        .iter()
        .any(|&x| is_trivial_match(x, q.0, exclusion) || is_trivial_match(x, q.1, exclusion))
}
