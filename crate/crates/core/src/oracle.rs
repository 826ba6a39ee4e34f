//! Brute-force ground truth: exact top-k subdimensional motifs and the
//! contrast of a dataset.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distance::{pairs_overlap, DistanceProfile, MotifPair};
use crate::error::{input, Error, Result};
use crate::params::DimRange;
use crate::series::{sliding_stats, StatsTable, TimeSeries};

/// Largest number of subsequence pairs an exact scan accepts by default.
pub const EXACT_PAIR_LIMIT: u128 = 100_000_000;

/// Number of pairs `(a, b)`, `a < b`, among `count` subsequences that are not
/// trivial matches.
pub fn non_trivial_pairs(count: usize, exclusion: usize) -> u64 {
    let span = count.saturating_sub(exclusion + 1) as u64;
    span * (span + 1) / 2
}

#[derive(Clone, Copy, Debug)]
struct Ranked {
    dist: f64,
    a: u32,
    b: u32,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ranked {}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

/// Bounded max-heaps holding the `capacity` closest pairs per dimensionality.
#[derive(Clone)]
struct Shortlist {
    capacity: usize,
    heaps: Vec<BinaryHeap<Ranked>>,
}

impl Shortlist {
    fn new(capacity: usize, count: usize) -> Self {
        Self {
            capacity,
            heaps: vec![BinaryHeap::new(); count],
        }
    }

    fn push(&mut self, slot: usize, item: Ranked) {
        let heap = &mut self.heaps[slot];
        if heap.len() < self.capacity {
            heap.push(item);
        } else if heap.peek().is_some_and(|top| item < *top) {
            heap.pop();
            heap.push(item);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (slot, heap) in other.heaps.into_iter().enumerate() {
            for item in heap {
                self.push(slot, item);
            }
        }
        self
    }
}

/// Outcome of an exhaustive scan for a range of dimensionalities.
#[derive(Clone, Debug)]
pub struct ExactScan {
    /// Top-k pairs per dimensionality, in the order of the range.
    pub motifs: Vec<Vec<MotifPair>>,
    /// Distinct non-trivial pairs whose distance was evaluated.
    pub pairs_examined: u64,
}

/// Greedy selection over pairs in increasing (distance, a, b) order: a pair
/// is kept unless it overlaps one already kept.
fn select(sorted: &[Ranked], k: usize, exclusion: usize) -> Vec<(usize, usize)> {
    let mut kept: Vec<(usize, usize)> = Vec::with_capacity(k);
    for item in sorted {
        if kept.len() == k {
            break;
        }
        let pair = (item.a as usize, item.b as usize);
        if !kept.iter().any(|&q| pairs_overlap(pair, q, exclusion)) {
            kept.push(pair);
        }
    }
    kept
}

/// Exact top-k for every `d` in `dims`, evaluating every non-trivial pair.
pub fn exhaustive_topk(
    ts: &TimeSeries,
    stats: &StatsTable,
    k: usize,
    dims: DimRange,
    exclusion: usize,
) -> ExactScan {
    let count = stats.num_subsequences();
    let ranges: Vec<usize> = dims.iter().collect();
    let span = (2 * exclusion + 1).min(count.max(1));
    let mut capacity = (4 * k * span).max(1024);
    loop {
        let shortlist = scan(ts, stats, &ranges, exclusion, capacity);
        let total = non_trivial_pairs(count, exclusion);
        let mut motifs = Vec::with_capacity(ranges.len());
        let mut saturated = false;
        for (slot, &d) in ranges.iter().enumerate() {
            let mut sorted = shortlist.heaps[slot].clone().into_vec();
            sorted.sort_unstable();
            let kept = select(&sorted, k, exclusion);
            if kept.len() < k && (sorted.len() as u64) < total {
                saturated = true;
                break;
            }
            motifs.push(
                kept.into_iter()
                    .map(|(a, b)| {
                        let profile = DistanceProfile::compute(ts, stats, a, b);
                        let mut pair = MotifPair::from_profile(a, b, &profile, d);
                        pair.failure_bound = 0.0;
                        pair
                    })
                    .collect(),
            );
        }
        if !saturated {
            return ExactScan {
                motifs,
                pairs_examined: total,
            };
        }
        capacity = capacity.saturating_mul(8);
    }
}

fn scan(
    ts: &TimeSeries,
    stats: &StatsTable,
    ranges: &[usize],
    exclusion: usize,
    capacity: usize,
) -> Shortlist {
    let count = stats.num_subsequences();
    let dims = ts.dims();
    (0..count)
        .into_par_iter()
        .fold(
            || (Shortlist::new(capacity, ranges.len()), vec![0.0; dims], vec![0usize; dims]),
            |(mut list, mut per_dim, mut order), a| {
                for b in (a + exclusion + 1)..count {
                    for (f, slot) in per_dim.iter_mut().enumerate() {
                        *slot = crate::distance::znorm_distance(ts, stats, a, b, f);
                    }
                    order.iter_mut().enumerate().for_each(|(f, o)| *o = f);
                    order.sort_by(|&x, &y| per_dim[x].total_cmp(&per_dim[y]).then(x.cmp(&y)));
                    let mut acc = 0.0;
                    let mut slot = 0;
                    for (rank, &f) in order.iter().enumerate() {
                        acc += per_dim[f];
                        if slot < ranges.len() && ranges[slot] == rank + 1 {
                            list.push(
                                slot,
                                Ranked {
                                    dist: acc,
                                    a: a as u32,
                                    b: b as u32,
                                },
                            );
                            slot += 1;
                        }
                    }
                }
                (list, per_dim, order)
            },
        )
        .map(|(list, _, _)| list)
        .reduce(|| Shortlist::new(capacity, ranges.len()), Shortlist::merge)
}

/// Exact top-k `d`-dimensional motifs by evaluating all pairs. Refuses inputs
/// with more than [`EXACT_PAIR_LIMIT`] pairs unless `allow_large` is set.
pub fn exact_topk(
    ts: &TimeSeries,
    w: usize,
    k: usize,
    d: usize,
    exclusion: usize,
    allow_large: bool,
) -> Result<Vec<MotifPair>> {
    if d == 0 || d > ts.dims() {
        return input(format!("d = {d} must lie within 1..={}", ts.dims()));
    }
    let stats = sliding_stats(ts, w)?;
    let count = stats.num_subsequences() as u128;
    let pairs = count * count.saturating_sub(1) / 2;
    if !allow_large && pairs > EXACT_PAIR_LIMIT {
        return Err(Error::TooLarge {
            pairs,
            limit: EXACT_PAIR_LIMIT,
        });
    }
    let mut scan = exhaustive_topk(ts, &stats, k, DimRange::single(d), exclusion);
    Ok(scan.motifs.remove(0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContrastReport {
    pub d: usize,
    pub k: usize,
    pub kth_dist_d_max: f64,
    pub nth_dist_d_max: f64,
    /// `nth / kth`; infinite when the k-th motif is at distance 0.
    pub contrast: f64,
    /// The reference distance was estimated from randomly sampled pairs.
    pub sampled: bool,
}

/// Median `dist_d_max` over non-trivial pairs: every pair when there are at
/// most `sample_size` of them, otherwise `sample_size` random pairs.
pub fn reference_dist_d_max(
    ts: &TimeSeries,
    stats: &StatsTable,
    d: usize,
    exclusion: usize,
    sample_size: usize,
    seed: u64,
) -> Result<(f64, bool)> {
    let count = stats.num_subsequences();
    let total = non_trivial_pairs(count, exclusion);
    if total == 0 {
        return input("no non-trivial pairs exist");
    }
    let eval = |a: usize, b: usize| DistanceProfile::compute(ts, stats, a, b).dist_d_max(d);
    let (mut values, sampled): (Vec<f64>, bool) = if total <= sample_size as u64 {
        let all = (0..count)
            .into_par_iter()
            .flat_map_iter(|a| ((a + exclusion + 1)..count).map(move |b| (a, b)))
            .map(|(a, b)| eval(a, b))
            .collect();
        (all, false)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pairs = Vec::with_capacity(sample_size);
        while pairs.len() < sample_size {
            let a = rng.gen_range(0..count);
            let b = rng.gen_range(0..count);
            let (a, b) = (a.min(b), a.max(b));
            if b - a > exclusion {
                pairs.push((a, b));
            }
        }
        (pairs.into_par_iter().map(|(a, b)| eval(a, b)).collect(), true)
    };
    values.sort_unstable_by(f64::total_cmp);
    Ok((values[values.len() / 2], sampled))
}

/// Contrast of the k-th `d`-dimensional motif, computed exactly.
pub fn contrast(
    ts: &TimeSeries,
    w: usize,
    d: usize,
    k: usize,
    sample_size: usize,
    seed: u64,
) -> Result<ContrastReport> {
    let exclusion = w / 2;
    let motifs = exact_topk(ts, w, k, d, exclusion, false)?;
    let kth = motifs
        .get(k - 1)
        .ok_or_else(|| Error::Input(format!("fewer than {k} non-overlapping pairs")))?
        .dist_d_max;
    contrast_with_kth(ts, w, d, k, kth, sample_size, seed)
}

/// Contrast against a k-th motif distance obtained elsewhere, e.g. from a
/// discovery run on an input too large for the exact scan.
pub fn contrast_with_kth(
    ts: &TimeSeries,
    w: usize,
    d: usize,
    k: usize,
    kth_dist_d_max: f64,
    sample_size: usize,
    seed: u64,
) -> Result<ContrastReport> {
    let stats = sliding_stats(ts, w)?;
    let (nth, sampled) = reference_dist_d_max(ts, &stats, d, w / 2, sample_size, seed)?;
    let contrast = if kth_dist_d_max > 0.0 {
        nth / kth_dist_d_max
    } else {
        f64::INFINITY
    };
    Ok(ContrastReport {
        d,
        k,
        kth_dist_d_max,
        nth_dist_d_max: nth,
        contrast,
        sampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::dist_d;

    fn noise(n: usize, dims: usize, seed: u64) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TimeSeries::from_columns(
            (0..dims)
                .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect(),
        )
        .unwrap()
    }

    /// Materializes every pair, sorts and selects greedily.
    fn naive(ts: &TimeSeries, w: usize, k: usize, d: usize, excl: usize) -> Vec<(usize, usize, f64)> {
        let st = sliding_stats(ts, w).unwrap();
        let count = st.num_subsequences();
        let mut all = Vec::new();
        for a in 0..count {
            for b in a + excl + 1..count {
                all.push((dist_d(ts, &st, a, b, d).dist_d, a, b));
            }
        }
        all.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let mut kept: Vec<(usize, usize, f64)> = Vec::new();
        for (dist, a, b) in all {
            if kept.len() == k {
                break;
            }
            if !kept.iter().any(|&(x, y, _)| pairs_overlap((a, b), (x, y), excl)) {
                kept.push((a, b, dist));
            }
        }
        kept
    }

    #[test]
    fn pair_count_closed_form() {
        for count in 0..40 {
            for excl in 0..10 {
                let brute = (0..count)
                    .flat_map(|a| (a + 1..count).map(move |b| (a, b)))
                    .filter(|&(a, b)| b - a > excl)
                    .count() as u64;
                assert_eq!(non_trivial_pairs(count, excl), brute);
            }
        }
    }

    #[test]
    fn matches_naive_selection() {
        for seed in 0..4 {
            let ts = noise(160, 3, seed);
            for (k, d) in [(1, 1), (3, 2), (5, 3)] {
                let got: Vec<_> = exact_topk(&ts, 12, k, d, 6, false)
                    .unwrap()
                    .into_iter()
                    .map(|p| (p.a, p.b, p.dist_d))
                    .collect();
                assert_eq!(got, naive(&ts, 12, k, d, 6));
            }
        }
    }

    #[test]
    fn shortlist_growth_keeps_exactness() {
        // a tiny shortlist forces repeated scans
        let ts = noise(120, 2, 9);
        let st = sliding_stats(&ts, 10).unwrap();
        let ranges = [1usize, 2];
        let list = scan(&ts, &st, &ranges, 5, 3);
        assert!(list.heaps.iter().all(|h| h.len() == 3));
        let exact = exhaustive_topk(&ts, &st, 6, DimRange::new(1, 2), 5);
        for (slot, &d) in ranges.iter().enumerate() {
            let got: Vec<_> = exact.motifs[slot].iter().map(|p| (p.a, p.b, p.dist_d)).collect();
            assert_eq!(got, naive(&ts, 10, 6, d, 5));
        }
        assert_eq!(exact.pairs_examined, non_trivial_pairs(111, 5));
    }

    #[test]
    fn planted_copies_are_top_one() {
        let mut ts_cols: Vec<Vec<f64>> = noise(300, 2, 1).columns().to_vec();
        for t in 0..20 {
            ts_cols[0][200 + t] = ts_cols[0][30 + t];
            ts_cols[1][200 + t] = ts_cols[1][30 + t] * 2.0 + 1.0;
        }
        let ts = TimeSeries::from_columns(ts_cols).unwrap();
        let top = exact_topk(&ts, 20, 1, 2, 10, false).unwrap();
        assert_eq!((top[0].a, top[0].b), (30, 200));
        assert!(top[0].dist_d < 1e-9);
        assert_eq!(top[0].failure_bound, 0.0);
    }

    #[test]
    fn too_few_pairs_is_partial() {
        let ts = noise(12, 1, 3);
        // 3 subsequences of length 10, exclusion 1: only (0, 2) qualifies
        let top = exact_topk(&ts, 10, 4, 1, 1, false).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!((top[0].a, top[0].b), (0, 2));
    }

    #[test]
    fn guard_refuses_large_inputs() {
        let ts = TimeSeries::from_columns(vec![vec![0.0; 20_000]]).unwrap();
        assert!(matches!(
            exact_topk(&ts, 10, 1, 1, 5, false),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn contrast_of_noise_is_near_one() {
        let ts = noise(400, 2, 5);
        let report = contrast(&ts, 16, 1, 1, 100_000, 1).unwrap();
        assert!(!report.sampled);
        assert!(report.contrast >= 1.0);
        // windows of i.i.d. noise all sit near sqrt(2w)
        let expected = (2.0f64 * 16.0).sqrt();
        assert!((report.nth_dist_d_max / expected - 1.0).abs() < 0.2);
    }

    #[test]
    fn sampled_contrast_is_stable() {
        let ts = noise(3000, 2, 6);
        let st = sliding_stats(&ts, 32).unwrap();
        let (small, sampled) = reference_dist_d_max(&ts, &st, 2, 16, 10_000, 1).unwrap();
        let (large, _) = reference_dist_d_max(&ts, &st, 2, 16, 20_000, 2).unwrap();
        assert!(sampled);
        assert!((small - large).abs() / large < 0.05);
    }

    #[test]
    fn zero_kth_distance_gives_infinite_contrast() {
        let ts = noise(200, 1, 2);
        let r = contrast_with_kth(&ts, 10, 1, 1, 0.0, 1000, 0).unwrap();
        assert!(r.contrast.is_infinite());
    }
}
