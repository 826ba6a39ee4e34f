//! Adaptive traversal of the hash index.
//!
//! Prefix lengths go from `K` down to 1; at each length every repetition is
//! scanned. Pairs colliding in a dimension have their weight (the number of
//! dimensions where they collide) computed on the spot, and pairs of weight
//! at least `d` are verified and offered to the top-k queue of every
//! dimensionality they qualify for. After each repetition a queue holding `k`
//! pairs is confirmed once the probability of having missed a closer pair
//! drops below δ. If prefix length 1 is exhausted, the remaining
//! dimensionalities are answered by an exhaustive scan.

mod bound;
mod queue;

use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use bound::{failure_bound, failure_bound_for_probability, BoundGeometry};
pub use queue::TopKQueue;

use crate::distance::{is_trivial_match, DistanceProfile, MotifPair};
use crate::error::Result;
use crate::index::{build_index, HashIndex};
use crate::lsh::{build_hash_pool, compute_all_hashes, estimate_quantization_width, HashMatrix};
use crate::oracle::exhaustive_topk;
use crate::params::{DimRange, DiscoveryParams};
use crate::series::{sliding_stats, StatsTable, TimeSeries};

/// Sampling effort of the quantization width estimate.
pub const WIDTH_VECTORS: usize = 8;
pub const WIDTH_SAMPLES: usize = 2000;

/// Work counters. All of them are independent of the number of threads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub distance_computations: u64,
    pub hash_comparisons: u64,
    pub candidates: u64,
}

impl std::ops::AddAssign for Counters {
    fn add_assign(&mut self, rhs: Self) {
        self.distance_computations += rhs.distance_computations;
        self.hash_comparisons += rhs.hash_comparisons;
        self.candidates += rhs.candidates;
    }
}

/// Traversal coordinates: prefix length and number of repetitions completed
/// at that length (both 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StopPoint {
    pub prefix: usize,
    pub repetition: usize,
}

#[derive(Clone, Debug)]
pub struct MotifResult {
    pub d: usize,
    /// Motifs by increasing distance; each carries its own failure bound.
    pub motifs: Vec<MotifPair>,
    /// Where the stopping condition held; `None` when the exhaustive
    /// fallback produced the answer.
    pub stop: Option<StopPoint>,
    pub fallback_used: bool,
    /// Fewer than `k` non-overlapping pairs exist.
    pub partial: bool,
    pub counters: Counters,
    pub elapsed: Duration,
}

/// Result of one traversal over a range of dimensionalities.
#[derive(Clone, Debug)]
pub struct DiscoveryOutcome {
    /// One result per dimensionality, by increasing `d`.
    pub results: Vec<MotifResult>,
    /// Dimensionalities in the order they were confirmed.
    pub confirmation_order: Vec<usize>,
    pub counters: Counters,
    pub elapsed: Duration,
}

impl DiscoveryOutcome {
    pub fn result(&self, d: usize) -> Option<&MotifResult> {
        self.results.iter().find(|r| r.d == d)
    }
}

/// Number of dimensions in which `a` and `b` share their first `prefix`
/// symbols in repetition `j`.
pub fn pair_weight(hashes: &HashMatrix, a: usize, b: usize, prefix: usize, j: usize) -> usize {
    (0..hashes.dims())
        .filter(|&f| hashes.collide(f, j, a, b, prefix))
        .count()
}

/// The lowest dimension where `a` and `b` collide, which owns the pair.
pub fn lowest_colliding_dim(hashes: &HashMatrix, a: usize, b: usize, prefix: usize, j: usize) -> Option<usize> {
    (0..hashes.dims()).find(|&f| hashes.collide(f, j, a, b, prefix))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    a: u32,
    b: u32,
    /// Weight at the current prefix length.
    weight: u8,
    /// Weight at the next longer prefix length (0 at full length).
    weight_longer: u8,
}

/// Queue state after one repetition of the traversal, indexed like
/// `params.dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct RepetitionTrace {
    pub prefix: usize,
    pub repetition: usize,
    pub queue_max: Vec<Option<f64>>,
    pub queue_len: Vec<usize>,
}

/// A prepared index together with everything needed to traverse it.
pub struct Discovery<'a> {
    ts: &'a TimeSeries,
    stats: StatsTable,
    params: DiscoveryParams,
    index: HashIndex,
    width_degenerate: bool,
    build_time: Duration,
}

impl<'a> Discovery<'a> {
    /// Computes statistics, estimates `r` if needed, and builds the index.
    pub fn prepare(ts: &'a TimeSeries, params: &DiscoveryParams) -> Result<Self> {
        params.validate(ts.dims(), ts.len())?;
        let start = Instant::now();
        let stats = sliding_stats(ts, params.window)?;
        let (r, width_degenerate) = match params.r {
            Some(r) => (r, false),
            None => {
                let est = estimate_quantization_width(ts, &stats, WIDTH_VECTORS, WIDTH_SAMPLES, params.seed)?;
                (est.r, est.degenerate)
            }
        };
        let pool = build_hash_pool(
            ts.dims(),
            params.window,
            stats.num_subsequences(),
            params.max_k,
            params.max_l,
            r,
            params.seed,
            params.memory_limit,
        )?;
        let hashes = compute_all_hashes(ts, &stats, &pool);
        let index = build_index(hashes);
        Ok(Self {
            ts,
            stats,
            params: params.clone(),
            index,
            width_degenerate,
            build_time: start.elapsed(),
        })
    }

    /// Reuses an index built earlier for the same series and window.
    pub fn with_index(ts: &'a TimeSeries, params: &DiscoveryParams, index: HashIndex) -> Result<Self> {
        params.validate(ts.dims(), ts.len())?;
        let stats = sliding_stats(ts, params.window)?;
        let h = index.hashes();
        if h.dims() != ts.dims() || h.len() != stats.num_subsequences() || h.window() != params.window {
            return crate::error::config("index does not match the series and window");
        }
        Ok(Self {
            ts,
            stats,
            params: params.clone(),
            index,
            width_degenerate: false,
            build_time: Duration::ZERO,
        })
    }

    pub fn index(&self) -> &HashIndex {
        &self.index
    }

    pub fn stats(&self) -> &StatsTable {
        &self.stats
    }

    pub fn r(&self) -> f64 {
        self.index.hashes().r()
    }

    pub fn width_degenerate(&self) -> bool {
        self.width_degenerate
    }

    pub fn build_time(&self) -> Duration {
        self.build_time
    }

    pub fn geometry(&self) -> BoundGeometry {
        let h = self.index.hashes();
        BoundGeometry {
            k: h.k(),
            l: h.repetitions(),
            m: h.m(),
            r: h.r(),
            kind: self.params.bound,
        }
    }

    /// Runs the traversal, calling `on_confirm` as soon as each
    /// dimensionality's result is final.
    pub fn run<F: FnMut(&MotifResult)>(&self, on_confirm: F) -> DiscoveryOutcome {
        self.run_traced(on_confirm, |_| {})
    }

    /// Like [`Discovery::run`], additionally reporting the queue state after
    /// every processed repetition.
    pub fn run_traced<F, T>(&self, mut on_confirm: F, mut on_repetition: T) -> DiscoveryOutcome
    where
        F: FnMut(&MotifResult),
        T: FnMut(&RepetitionTrace),
    {
        let start = Instant::now();
        let params = &self.params;
        let geometry = self.geometry();
        let delta = params.effective_delta();
        let ds: Vec<usize> = params.dims.iter().collect();
        let mut queues: Vec<TopKQueue> = ds.iter().map(|_| TopKQueue::new(params.k, params.exclusion)).collect();
        let mut done: Vec<Option<MotifResult>> = vec![None; ds.len()];
        let mut confirmation_order = Vec::new();
        let mut counters = Counters::default();

        'traversal: for prefix in (1..=geometry.k).rev() {
            for j in 0..geometry.l {
                let Some(threshold) = ds.iter().zip(&done).find(|(_, r)| r.is_none()).map(|(&d, _)| d) else {
                    break 'traversal;
                };
                let (mut candidates, scan_counters) = self.scan_repetition(prefix, j, threshold);
                counters += scan_counters;
                candidates.sort_unstable();

                let wanted = |c: &Candidate, d: usize| {
                    c.weight as usize >= d
                        && !(params.skip_duplicates && prefix < geometry.k && c.weight_longer as usize >= d)
                };
                let open: Vec<usize> = (0..ds.len()).filter(|&s| done[s].is_none()).collect();
                candidates.retain(|c| open.iter().any(|&s| wanted(c, ds[s])));
                counters.distance_computations += candidates.len() as u64;
                let profiles: Vec<DistanceProfile> = candidates
                    .par_iter()
                    .map(|c| DistanceProfile::compute(self.ts, &self.stats, c.a as usize, c.b as usize))
                    .collect();
                for (c, profile) in candidates.iter().zip(&profiles) {
                    for &s in &open {
                        let d = ds[s];
                        if wanted(c, d) && queues[s].admits(profile.dist_d(d)) {
                            queues[s].offer(MotifPair::from_profile(c.a as usize, c.b as usize, profile, d));
                        }
                    }
                }

                on_repetition(&RepetitionTrace {
                    prefix,
                    repetition: j + 1,
                    queue_max: queues.iter().map(|q| q.max().map(|p| p.dist_d)).collect(),
                    queue_len: queues.iter().map(TopKQueue::len).collect(),
                });

                for &s in &open {
                    let queue = &queues[s];
                    if !queue.is_full() {
                        continue;
                    }
                    let d = ds[s];
                    let worst = queue.max().expect("full queue").dist_d_max;
                    if failure_bound(worst, d, prefix, j + 1, &geometry) <= delta {
                        let motifs = queue
                            .pairs()
                            .iter()
                            .map(|p| MotifPair {
                                failure_bound: failure_bound(p.dist_d_max, d, prefix, j + 1, &geometry),
                                ..p.clone()
                            })
                            .collect();
                        let result = MotifResult {
                            d,
                            motifs,
                            stop: Some(StopPoint {
                                prefix,
                                repetition: j + 1,
                            }),
                            fallback_used: false,
                            partial: false,
                            counters,
                            elapsed: start.elapsed(),
                        };
                        on_confirm(&result);
                        confirmation_order.push(d);
                        done[s] = Some(result);
                    }
                }
            }
        }

        let remaining: Vec<usize> = (0..ds.len()).filter(|&s| done[s].is_none()).collect();
        if !remaining.is_empty() {
            log::info!("stopping condition never held, scanning all pairs");
            let range = DimRange::new(ds[remaining[0]], ds[*remaining.last().unwrap()]);
            let exact = exhaustive_topk(self.ts, &self.stats, params.k, range, params.exclusion);
            counters.distance_computations += exact.pairs_examined;
            for &s in &remaining {
                let motifs = exact.motifs[ds[s] - range.low].clone();
                let result = MotifResult {
                    d: ds[s],
                    partial: motifs.len() < params.k,
                    motifs,
                    stop: None,
                    fallback_used: true,
                    counters,
                    elapsed: start.elapsed(),
                };
                on_confirm(&result);
                confirmation_order.push(ds[s]);
                done[s] = Some(result);
            }
        }

        DiscoveryOutcome {
            results: done.into_iter().map(|r| r.expect("every d is answered")).collect(),
            confirmation_order,
            counters,
            elapsed: start.elapsed(),
        }
    }

    /// Collects the pairs colliding in repetition `j` at `prefix` whose
    /// weight reaches `threshold`. Each pair is reported once, by the lowest
    /// dimension in which it collides.
    fn scan_repetition(&self, prefix: usize, j: usize, threshold: usize) -> (Vec<Candidate>, Counters) {
        let hashes = self.index.hashes();
        let dims = hashes.dims();
        let k = hashes.k();
        let exclusion = self.params.exclusion;
        let per_dim: Vec<(Vec<Candidate>, Counters)> = (0..dims)
            .into_par_iter()
            .map(|f| {
                let mut found = Vec::new();
                let mut counters = Counters::default();
                let entries = self.index.entries(f, j);
                for group in self.index.collision_groups(f, j, prefix) {
                    if group.len() < 2 {
                        continue;
                    }
                    let members = &entries[group];
                    for (p, &x) in members.iter().enumerate() {
                        'pairs: for &y in &members[p + 1..] {
                            let (a, b) = (x.min(y) as usize, x.max(y) as usize);
                            if is_trivial_match(a, b, exclusion) {
                                continue;
                            }
                            let mut weight = 1usize;
                            let mut weight_longer = usize::from(prefix < k && hashes.collide(f, j, a, b, prefix + 1));
                            for g in 0..dims {
                                if g == f {
                                    continue;
                                }
                                counters.hash_comparisons += 1;
                                let lcp = hashes.lcp(g, j, a, b);
                                if lcp >= prefix {
                                    if g < f {
                                        continue 'pairs;
                                    }
                                    weight += 1;
                                    if lcp > prefix {
                                        weight_longer += 1;
                                    }
                                }
                            }
                            counters.hash_comparisons += 1;
                            if weight >= threshold {
                                counters.candidates += 1;
                                found.push(Candidate {
                                    a: a as u32,
                                    b: b as u32,
                                    weight: weight as u8,
                                    weight_longer: weight_longer as u8,
                                });
                            }
                        }
                    }
                }
                (found, counters)
            })
            .collect();
        let mut all = Vec::new();
        let mut counters = Counters::default();
        for (found, c) in per_dim {
            all.extend(found);
            counters += c;
        }
        (all, counters)
    }
}

/// Finds the top-k motifs for every dimensionality in `params.dims` with a
/// single traversal.
pub fn discover_motifs_multi(ts: &TimeSeries, params: &DiscoveryParams) -> Result<DiscoveryOutcome> {
    Ok(Discovery::prepare(ts, params)?.run(|_| {}))
}

/// Finds the top-k motifs of dimensionality `params.dims.low`.
pub fn discover_motifs(ts: &TimeSeries, params: &DiscoveryParams) -> Result<MotifResult> {
    let params = DiscoveryParams {
        dims: DimRange::single(params.dims.low),
        ..params.clone()
    };
    let mut outcome = discover_motifs_multi(ts, &params)?;
    Ok(outcome.results.remove(0))
}

/// Exact top-k by evaluating every non-trivial pair, with the same ordering
/// and overlap policy as the oracle.
pub fn exhaustive_scan(ts: &TimeSeries, params: &DiscoveryParams) -> Result<DiscoveryOutcome> {
    params.validate(ts.dims(), ts.len())?;
    let start = Instant::now();
    let stats = sliding_stats(ts, params.window)?;
    let exact = exhaustive_topk(ts, &stats, params.k, params.dims, params.exclusion);
    let counters = Counters {
        distance_computations: exact.pairs_examined,
        ..Counters::default()
    };
    let results: Vec<MotifResult> = params
        .dims
        .iter()
        .zip(exact.motifs)
        .map(|(d, motifs)| MotifResult {
            d,
            partial: motifs.len() < params.k,
            motifs,
            stop: None,
            fallback_used: true,
            counters,
            elapsed: start.elapsed(),
        })
        .collect();
    Ok(DiscoveryOutcome {
        confirmation_order: params.dims.iter().collect(),
        results,
        counters,
        elapsed: start.elapsed(),
    })
}
