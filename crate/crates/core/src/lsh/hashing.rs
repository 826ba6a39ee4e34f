use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::pool::{BankSide, HashPool};
use crate::series::{StatsTable, TimeSeries};

/// Hash words of every subsequence, for every dimension and repetition.
///
/// Words are not stored expanded: each bank slot keeps one half-word per
/// subsequence, packed big-endian into a `u64` (symbol 0 in the top byte).
/// The word of repetition `j` interleaves left slot `j / m` (even positions)
/// with right slot `j % m` (odd positions).
#[derive(Clone, Debug, PartialEq)]
pub struct HashMatrix {
    pub(crate) k: usize,
    pub(crate) m: usize,
    pub(crate) dims: usize,
    pub(crate) len: usize,
    /// Indexed by `(f * 2 + side) * m + slot`, then by subsequence.
    pub(crate) halves: Vec<Vec<u64>>,
    pub(crate) directions_used: usize,
    pub(crate) window: usize,
    pub(crate) r: f64,
    pub(crate) seed: u64,
}

#[inline]
fn half_lcp(x: u64, y: u64, half: usize) -> usize {
    ((x ^ y).leading_zeros() as usize / 8).min(half)
}

impl HashMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn repetitions(&self) -> usize {
        self.m * self.m
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of hashed subsequences.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Direction vectors convolved with the series while hashing.
    pub fn directions_used(&self) -> usize {
        self.directions_used
    }

    pub fn bank_slots(&self, j: usize) -> (usize, usize) {
        (j / self.m, j % self.m)
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Quantization width the symbols were computed with.
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub(crate) fn half(&self, f: usize, side: BankSide, slot: usize) -> &[u64] {
        &self.halves[(f * 2 + side as usize) * self.m + slot]
    }

    #[inline]
    fn halves_for(&self, f: usize, j: usize) -> (&[u64], &[u64]) {
        let (l, r) = self.bank_slots(j);
        (self.half(f, BankSide::Left, l), self.half(f, BankSide::Right, r))
    }

    /// The word of subsequence `a` as a packed key: symbol `p` occupies byte
    /// `15 - p`, so integer order equals lexicographic word order.
    pub fn key(&self, f: usize, j: usize, a: usize) -> u128 {
        let (left, right) = self.halves_for(f, j);
        interleave(left[a], right[a], self.k / 2)
    }

    pub fn word(&self, f: usize, j: usize, a: usize) -> Vec<u8> {
        let key = self.key(f, j, a);
        (0..self.k).map(|p| (key >> (8 * (15 - p))) as u8).collect()
    }

    /// Length of the common prefix of the words of `a` and `b`.
    #[inline]
    pub fn lcp(&self, f: usize, j: usize, a: usize, b: usize) -> usize {
        let (left, right) = self.halves_for(f, j);
        let half = self.k / 2;
        let ll = half_lcp(left[a], left[b], half);
        let lr = half_lcp(right[a], right[b], half);
        (2 * ll).min(2 * lr + 1).min(self.k)
    }

    #[inline]
    pub fn collide(&self, f: usize, j: usize, a: usize, b: usize, prefix: usize) -> bool {
        self.lcp(f, j, a, b) >= prefix
    }
}

pub(crate) fn interleave(left: u64, right: u64, half: usize) -> u128 {
    let mut key = 0u128;
    for t in 0..half {
        let l = (left >> (56 - 8 * t)) as u8 as u128;
        let r = (right >> (56 - 8 * t)) as u8 as u128;
        key |= l << (8 * (15 - 2 * t));
        key |= r << (8 * (14 - 2 * t));
    }
    key
}

/// Sliding dot products `out[t] = sum_s dir[s] * x[t + s]` for every offset,
/// through a circular convolution of size `n.next_power_of_two()`.
pub fn sliding_dot_products(x: &[f64], dir: &[f64]) -> Vec<f64> {
    let size = x.len().next_power_of_two();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let spectrum = spectrum_of(x, size, &forward);
    let mut scratch = Vec::new();
    correlate(&spectrum, dir, x.len(), &forward, &inverse, &mut scratch)
}

fn spectrum_of(x: &[f64], size: usize, fft: &Arc<dyn Fft<f64>>) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(size, Complex::new(0.0, 0.0));
    fft.process(&mut buf);
    buf
}

fn correlate(
    spectrum: &[Complex<f64>],
    dir: &[f64],
    n: usize,
    forward: &Arc<dyn Fft<f64>>,
    inverse: &Arc<dyn Fft<f64>>,
    buf: &mut Vec<Complex<f64>>,
) -> Vec<f64> {
    let size = spectrum.len();
    let w = dir.len();
    buf.clear();
    buf.extend(dir.iter().rev().map(|&v| Complex::new(v, 0.0)));
    buf.resize(size, Complex::new(0.0, 0.0));
    forward.process(buf);
    for (b, s) in buf.iter_mut().zip(spectrum) {
        *b *= s;
    }
    inverse.process(buf);
    let scale = 1.0 / size as f64;
    // entries below w - 1 are polluted by wrap-around; they are never read
    buf[w - 1..n].iter().map(|c| c.re * scale).collect()
}

/// Hashes every subsequence of every dimension with every bank slot.
///
/// Projections of the z-normalized subsequences come from raw sliding dot
/// products: `a . z = (a . x - mean * sum(a)) / std`. Flat subsequences
/// project to 0. Each function's buckets are shifted so that its smallest
/// bucket is 0 and clamped into one byte.
pub fn compute_all_hashes(ts: &TimeSeries, stats: &StatsTable, pool: &HashPool) -> HashMatrix {
    let w = stats.window();
    let len = stats.num_subsequences();
    let half = pool.half_len();
    let n = ts.len();
    let size = n.next_power_of_two();

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    // centering each column keeps the dot products small without changing
    // the z-normalized projections
    let centers: Vec<f64> = ts
        .columns()
        .iter()
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    let spectra: Vec<Vec<Complex<f64>>> = ts
        .columns()
        .par_iter()
        .zip(&centers)
        .map(|(col, &center)| {
            let centered: Vec<f64> = col.iter().map(|v| v - center).collect();
            spectrum_of(&centered, size, &forward)
        })
        .collect();

    let jobs: Vec<(usize, BankSide, usize)> = (0..ts.dims())
        .flat_map(|f| {
            [BankSide::Left, BankSide::Right]
                .into_iter()
                .flat_map(move |side| (0..pool.m).map(move |slot| (f, side, slot)))
        })
        .collect();

    let results: Vec<(Vec<u64>, usize)> = jobs
        .par_iter()
        .map(|&(f, side, slot)| {
            let bank = pool.bank(f, side, slot);
            let means = stats.means(f);
            let stds = stats.stds(f);
            let flat = stats.flat_flags(f);
            let mut packed = vec![0u64; len];
            let mut buckets = vec![0i64; len];
            let mut buf = Vec::with_capacity(size);
            for t in 0..half {
                let dir = bank.direction(t, w);
                let dots = correlate(&spectra[f], dir, n, &forward, &inverse, &mut buf);
                let dir_sum: f64 = dir.iter().sum();
                let offset = bank.offsets[t];
                for a in 0..len {
                    let proj = if flat[a] {
                        0.0
                    } else {
                        (dots[a] - (means[a] - centers[f]) * dir_sum) / stds[a]
                    };
                    buckets[a] = ((proj + offset) / pool.r).floor() as i64;
                }
                let lowest = buckets.iter().copied().min().unwrap_or(0);
                let shift = 56 - 8 * t;
                for (p, &bucket) in packed.iter_mut().zip(&buckets) {
                    let symbol = (bucket - lowest).clamp(0, 255) as u64;
                    *p |= symbol << shift;
                }
            }
            (packed, half)
        })
        .collect();

    let directions_used = results.iter().map(|(_, c)| c).sum();
    HashMatrix {
        k: pool.k,
        m: pool.m,
        dims: ts.dims(),
        len,
        halves: results.into_iter().map(|(h, _)| h).collect(),
        directions_used,
        window: w,
        r: pool.r,
        seed: pool.seed,
    }
}
