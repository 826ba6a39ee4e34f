use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{config, input, Result};
use crate::series::{StatsTable, TimeSeries};

/// Largest supported word length: two half-words of eight one-byte symbols.
pub const MAX_CONCATENATIONS: usize = 16;

const WIDTH_STREAM: u64 = 1 << 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BankSide {
    Left = 0,
    Right = 1,
}

/// Generator for the function at the given coordinates. Keyed by position,
/// so the parameters never depend on construction order.
pub(crate) fn function_rng(seed: u64, f: usize, side: BankSide, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((f as u64) << 32) | ((side as u64) << 31) | slot as u64);
    rng
}

/// One bank slot: `K/2` directions of length `w`, stored contiguously, and
/// their offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfFunction {
    pub directions: Vec<f64>,
    pub offsets: Vec<f64>,
}

impl HalfFunction {
    pub fn direction(&self, t: usize, w: usize) -> &[f64] {
        &self.directions[t * w..(t + 1) * w]
    }
}

/// The sampled hash family for every dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct HashPool {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub r: f64,
    pub seed: u64,
    pub window: usize,
    pub dims: usize,
    /// Indexed by `(f * 2 + side) * m + slot`.
    banks: Vec<HalfFunction>,
}

impl HashPool {
    pub fn half_len(&self) -> usize {
        self.k / 2
    }

    pub fn bank(&self, f: usize, side: BankSide, slot: usize) -> &HalfFunction {
        &self.banks[(f * 2 + side as usize) * self.m + slot]
    }

    /// Maps a zero-based repetition to its (left, right) bank slots.
    pub fn bank_slots(&self, j: usize) -> (usize, usize) {
        (j / self.m, j % self.m)
    }

    /// Number of distinct direction vectors held by the pool.
    pub fn num_directions(&self) -> usize {
        self.banks.iter().map(|b| b.offsets.len()).sum()
    }
}

/// Samples the hash family. `K` is rounded up to an even number and the
/// repetitions to the largest perfect square `m^2 <= max_l` whose hash words
/// (`n * D * L * K` bytes) fit the optional memory budget.
#[allow(clippy::too_many_arguments)]
pub fn build_hash_pool(
    dims: usize,
    window: usize,
    num_subsequences: usize,
    max_k: usize,
    max_l: usize,
    r: f64,
    seed: u64,
    memory_limit: Option<u64>,
) -> Result<HashPool> {
    if max_k == 0 || max_l == 0 {
        return config("concatenations and repetitions must be at least 1");
    }
    let k = max_k + max_k % 2;
    if k > MAX_CONCATENATIONS {
        return config(format!(
            "at most {MAX_CONCATENATIONS} concatenations are supported, got {max_k}"
        ));
    }
    if !(r > 0.0 && r.is_finite()) {
        return config(format!("quantization width {r} must be positive"));
    }
    let mut m = (max_l as f64).sqrt().floor() as usize;
    while (m + 1) * (m + 1) <= max_l {
        m += 1;
    }
    while m * m > max_l {
        m -= 1;
    }
    if let Some(limit) = memory_limit {
        let per_repetition = num_subsequences as u64 * dims as u64 * k as u64;
        while m > 0 && per_repetition * (m * m) as u64 > limit {
            m -= 1;
        }
        if m == 0 {
            return config(format!(
                "memory limit of {limit} bytes cannot hold a single repetition ({per_repetition} bytes)"
            ));
        }
    }
    let half = k / 2;
    let mut banks = Vec::with_capacity(dims * 2 * m);
    for f in 0..dims {
        for side in [BankSide::Left, BankSide::Right] {
            for slot in 0..m {
                let mut rng = function_rng(seed, f, side, slot);
                let directions = (0..half * window)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let offsets = (0..half).map(|_| rng.gen_range(0.0..r)).collect();
                banks.push(HalfFunction {
                    directions,
                    offsets,
                });
            }
        }
    }
    Ok(HashPool {
        k,
        l: m * m,
        m,
        r,
        seed,
        window,
        dims,
        banks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WidthEstimate {
    pub r: f64,
    /// The sampled projections had zero spread and `r` fell back to 1.
    pub degenerate: bool,
}

/// Estimates the quantization width so that the sampled projections of
/// z-normalized subsequences span 256 equal-width buckets.
pub fn estimate_quantization_width(
    ts: &TimeSeries,
    stats: &StatsTable,
    n_vectors: usize,
    n_samples: usize,
    seed: u64,
) -> Result<WidthEstimate> {
    let w = stats.window();
    let count = stats.num_subsequences();
    if count == 0 {
        return input("no subsequences to sample");
    }
    let n_samples = n_samples.min(count);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for f in 0..ts.dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(WIDTH_STREAM | f as u64);
        let offsets = sample(&mut rng, count, n_samples).into_vec();
        for _ in 0..n_vectors {
            let dir: Vec<f64> = (0..w).map(|_| rng.sample(StandardNormal)).collect();
            for &a in &offsets {
                let proj = if stats.is_flat(a, f) {
                    0.0
                } else {
                    let (mean, sd) = (stats.mean(a, f), stats.std(a, f));
                    ts.subsequence(f, a, w)
                        .iter()
                        .zip(&dir)
                        .map(|(x, d)| (x - mean) / sd * d)
                        .sum()
                };
                lo = lo.min(proj);
                hi = hi.max(proj);
            }
        }
    }
    if hi.is_nan() || lo.is_nan() || hi <= lo {
        log::warn!("quantization width estimate is degenerate, falling back to r = 1");
        return Ok(WidthEstimate {
            r: 1.0,
            degenerate: true,
        });
    }
    Ok(WidthEstimate {
        r: (hi - lo) / 256.0,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::sliding_stats;

    #[test]
    fn perfect_square_and_even_k() {
        let pool = build_hash_pool(2, 10, 100, 8, 200, 1.0, 1, None).unwrap();
        assert_eq!((pool.k, pool.m, pool.l), (8, 14, 196));
        let pool = build_hash_pool(2, 10, 100, 7, 4, 1.0, 1, None).unwrap();
        assert_eq!((pool.k, pool.m, pool.l), (8, 2, 4));
        assert_eq!(pool.bank_slots(3), (1, 1));
    }

    #[test]
    fn memory_limit_caps_repetitions() {
        let (n, dims, k) = (1000u64, 3u64, 8u64);
        let limit = n * dims * k * 100;
        let pool = build_hash_pool(3, 10, 1000, 8, 400, 1.0, 1, Some(limit)).unwrap();
        assert_eq!(pool.l, 100);
        assert!(build_hash_pool(3, 10, 1000, 8, 400, 1.0, 1, Some(10)).is_err());
    }

    #[test]
    fn rejects_oversized_words() {
        assert!(build_hash_pool(1, 10, 10, 18, 4, 1.0, 1, None).is_err());
        assert!(build_hash_pool(1, 10, 10, 16, 4, 1.0, 1, None).is_ok());
    }

    #[test]
    fn pool_is_reproducible() {
        let a = build_hash_pool(3, 20, 100, 8, 16, 0.5, 99, None).unwrap();
        let b = build_hash_pool(3, 20, 100, 8, 16, 0.5, 99, None).unwrap();
        let c = build_hash_pool(3, 20, 100, 8, 16, 0.5, 100, None).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.num_directions(), 3 * 8 * 4);
        // a slot's parameters do not depend on how many slots exist
        let d = build_hash_pool(3, 20, 100, 8, 25, 0.5, 99, None).unwrap();
        assert_eq!(a.bank(2, BankSide::Right, 3), d.bank(2, BankSide::Right, 3));
    }

    #[test]
    fn flat_series_falls_back() {
        let ts = TimeSeries::from_columns(vec![vec![3.0; 50], vec![-1.0; 50]]).unwrap();
        let st = sliding_stats(&ts, 10).unwrap();
        let est = estimate_quantization_width(&ts, &st, 8, 2000, 1).unwrap();
        assert_eq!(est, WidthEstimate { r: 1.0, degenerate: true });
    }

    #[test]
    fn width_is_deterministic() {
        let col: Vec<f64> = (0..400).map(|t| (t as f64 * 0.37).sin() + (t as f64 * 0.011).cos()).collect();
        let ts = TimeSeries::from_columns(vec![col]).unwrap();
        let st = sliding_stats(&ts, 32).unwrap();
        let a = estimate_quantization_width(&ts, &st, 8, 2000, 5).unwrap();
        let b = estimate_quantization_width(&ts, &st, 8, 2000, 5).unwrap();
        assert_eq!(a, b);
        assert!(!a.degenerate && a.r > 0.0);
        // projections of unit-variance windows of length w have spread ~ sqrt(w)
        assert!(a.r < 12.0 * (32f64).sqrt() / 256.0);
    }
}
