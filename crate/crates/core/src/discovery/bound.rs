use crate::lsh::collision_probability;
use crate::params::BoundKind;

/// Shape of the hash pool the bound is evaluated against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundGeometry {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub r: f64,
    pub kind: BoundKind,
}

/// Probability that a pair at `dist_d_max` never reached weight `d` before
/// the traversal point `(prefix, repetitions)`, where `repetitions` counts
/// the repetitions completed at the current prefix length.
pub fn failure_bound(dist_d_max: f64, d: usize, prefix: usize, repetitions: usize, geometry: &BoundGeometry) -> f64 {
    let p = collision_probability(dist_d_max, geometry.r)
        .expect("distances are non-negative and r is positive")
        .powi(d as i32);
    failure_bound_for_probability(p, prefix, repetitions, geometry)
}

/// [`failure_bound`] for a given joint collision probability `p`.
pub fn failure_bound_for_probability(p: f64, prefix: usize, repetitions: usize, geometry: &BoundGeometry) -> f64 {
    let BoundGeometry { k, l, m, kind, .. } = *geometry;
    debug_assert!(prefix >= 1 && prefix <= k);
    debug_assert!(repetitions >= 1 && repetitions <= l);
    let miss = |len: usize| 1.0 - p.powi(len as i32);
    let bound = match kind {
        BoundKind::Independent => {
            let current = miss(prefix).powi(repetitions as i32);
            if prefix == k {
                current
            } else {
                current * miss(prefix + 1).powi((l - repetitions) as i32)
            }
        }
        BoundKind::HalfPrefix => {
            // half-length prefixes: ceil and floor of len / 2
            let tensored = |len: usize, reps: usize| {
                miss(len.div_ceil(2)).powi((reps / m) as i32) * miss(len / 2).powi((reps % m) as i32)
            };
            if prefix == k {
                tensored(prefix, repetitions)
            } else {
                tensored(prefix, repetitions) * tensored(prefix + 1, l - repetitions)
            }
        }
        BoundKind::Tensored => tensored_miss_probability(p, prefix, repetitions, k, m),
    };
    bound.clamp(0.0, 1.0)
}

/// Probability that a pair is never reported, for the tensored pool.
///
/// Repetition `j` pairs left slot `j / m` with right slot `j % m`, and a
/// prefix of length `i` reads `ceil(i/2)` left symbols and `floor(i/2)` right
/// symbols. A slot matches its first `c` symbols with probability `p^c`.
/// The reported repetitions are the first `reps` at length `i` and the
/// remaining ones at length `i + 1` (below full length). Conditioning on
/// which right slots match far enough leaves the left slots independent, so
/// the miss probability is a finite sum over the states of the right slots.
fn tensored_miss_probability(p: f64, prefix: usize, reps: usize, k: usize, m: usize) -> f64 {
    let has_longer = prefix < k;
    let (left_cur, right_cur) = (prefix.div_ceil(2), prefix / 2);
    let (left_next, right_next) = ((prefix + 1).div_ceil(2), prefix.div_ceil(2));
    let reach_cur = p.powi(right_cur as i32);
    let reach_next = if has_longer { p.powi(right_next as i32) } else { 0.0 };
    let left_miss_cur = 1.0 - p.powi(left_cur as i32);
    let left_miss_next = 1.0 - p.powi(left_next as i32);

    let full_rows = reps / m;
    let split = reps % m;
    // state of a range of right slots: 0 = none reaches the current right
    // length, 1 = some reach it but none the longer one, 2 = some reach both
    let states = |size: usize| -> [f64; 3] {
        let none_cur = (1.0 - reach_cur).powi(size as i32);
        let none_next = (1.0 - reach_next).powi(size as i32);
        [none_cur, (none_next - none_cur).max(0.0), 1.0 - none_next]
    };
    let head = states(split);
    let tail = states(m - split);

    let mut total = 0.0;
    for (u, &pu) in head.iter().enumerate() {
        for (v, &pv) in tail.iter().enumerate() {
            let weight = pu * pv;
            if weight == 0.0 {
                continue;
            }
            let any_cur = u >= 1 || v >= 1;
            let any_next = u == 2 || v == 2;
            // rows fully processed at the current length
            let mut miss = if any_cur { left_miss_cur.powi(full_rows as i32) } else { 1.0 };
            if full_rows < m {
                // the row split between the current and the longer length
                let mut row = 1.0;
                if u >= 1 {
                    row = left_miss_cur;
                }
                if has_longer && v == 2 {
                    row = row.min(left_miss_next);
                }
                miss *= row;
                // rows processed only at the longer length
                if has_longer && any_next {
                    miss *= left_miss_next.powi((m - full_rows - 1) as i32);
                }
            }
            total += weight * miss;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry(k: usize, l: usize, kind: BoundKind) -> BoundGeometry {
        let m = (l as f64).sqrt() as usize;
        BoundGeometry { k, l, m, r: 1.0, kind }
    }

    #[test]
    fn certain_collision_gives_zero() {
        for kind in [BoundKind::Independent, BoundKind::Tensored] {
            let g = geometry(8, 196, kind);
            assert_eq!(failure_bound(0.0, 2, 8, 1, &g), 0.0);
            assert_eq!(failure_bound(0.0, 3, 4, 17, &g), 0.0);
        }
    }

    #[test]
    fn independent_full_prefix() {
        let g = geometry(8, 4, BoundKind::Independent);
        let b = failure_bound_for_probability(0.5, 8, 1, &g);
        assert!((b - (1.0 - 0.5f64.powi(8))).abs() < 1e-15);
        assert!((b - 0.99609).abs() < 1e-5);
    }

    #[test]
    fn independent_shorter_prefix() {
        let g = geometry(8, 4, BoundKind::Independent);
        let b = failure_bound_for_probability(0.9, 3, 2, &g);
        // (1 - 0.9^3)^2 (1 - 0.9^4)^2
        let expected = 0.271f64.powi(2) * 0.3439f64.powi(2);
        assert!((b - expected).abs() < 1e-15);
        assert!((b - 0.008686).abs() < 1e-6);
        assert!(b <= 0.01);
    }

    #[test]
    fn half_prefix_form() {
        let g = geometry(8, 16, BoundKind::HalfPrefix);
        let p: f64 = 0.8;
        // i = K: (1 - p^4)^(j div 4) (1 - p^4)^(j mod 4)
        let b = failure_bound_for_probability(p, 8, 6, &g);
        assert!((b - (1.0 - p.powi(4)).powi(1 + 2)).abs() < 1e-15);
        // i = 5: P_t(2.5, 6) P_t(3, 10)
        let b = failure_bound_for_probability(p, 5, 6, &g);
        let expected = (1.0 - p.powi(3)).powi(1)
            * (1.0 - p.powi(2)).powi(2)
            * (1.0 - p.powi(3)).powi(2)
            * (1.0 - p.powi(3)).powi(2);
        assert!((b - expected).abs() < 1e-15);
    }

    #[test]
    fn half_prefix_form_vanishes_at_prefix_one() {
        let g = geometry(8, 16, BoundKind::HalfPrefix);
        assert_eq!(failure_bound_for_probability(0.01, 1, 1, &g), 0.0);
        let g = geometry(8, 16, BoundKind::Tensored);
        assert!(failure_bound_for_probability(0.01, 1, 1, &g) > 0.9);
    }

    #[test]
    fn bounds_are_monotone_along_traversal() {
        for kind in [BoundKind::Independent, BoundKind::Tensored] {
            let g = geometry(8, 25, kind);
            for &p in &[0.05, 0.3, 0.6, 0.95] {
                let mut last = f64::INFINITY;
                for prefix in (1..=8).rev() {
                    for reps in 1..=25 {
                        let b = failure_bound_for_probability(p, prefix, reps, &g);
                        assert!(b <= last + 1e-12, "{kind:?} p {p} i {prefix} j {reps}");
                        last = b;
                    }
                }
            }
        }
    }

    #[test]
    fn tensored_single_slot_reduces_to_independent() {
        // with m = 1 there is one repetition and both forms coincide at full length
        let t = BoundGeometry { k: 8, l: 1, m: 1, r: 1.0, kind: BoundKind::Tensored };
        let i = BoundGeometry { kind: BoundKind::Independent, ..t };
        for &p in &[0.1, 0.5, 0.9] {
            let a = failure_bound_for_probability(p, 8, 1, &t);
            let b = failure_bound_for_probability(p, 8, 1, &i);
            assert!((a - b).abs() < 1e-12);
        }
    }

    /// Simulates the tensored pool directly: every slot draws how many leading
    /// symbols it matches, and the traversal's reported repetitions are
    /// replayed.
    fn simulated_miss(p: f64, prefix: usize, reps: usize, k: usize, m: usize, trials: usize, seed: u64) -> f64 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let half = k / 2;
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| (0..half).take_while(|_| rng.gen_bool(p)).count();
        let mut misses = 0usize;
        for _ in 0..trials {
            let left: Vec<usize> = (0..m).map(|_| draw(&mut rng)).collect();
            let right: Vec<usize> = (0..m).map(|_| draw(&mut rng)).collect();
            let hit = |j: usize, len: usize| left[j / m] >= len.div_ceil(2) && right[j % m] >= len / 2;
            let found = (0..reps).any(|j| hit(j, prefix)) || (prefix < k && (reps..m * m).any(|j| hit(j, prefix + 1)));
            misses += usize::from(!found);
        }
        misses as f64 / trials as f64
    }

    #[test]
    fn tensored_matches_simulation() {
        let trials = 40_000;
        let cases = [
            (0.3, 1, 1, 8, 4),
            (0.3, 1, 7, 8, 4),
            (0.5, 2, 5, 8, 4),
            (0.6, 3, 9, 8, 4),
            (0.7, 5, 16, 8, 4),
            (0.8, 8, 3, 8, 4),
            (0.8, 8, 11, 8, 4),
            (0.4, 4, 20, 6, 5),
        ];
        for (seed, &(p, prefix, reps, k, m)) in cases.iter().enumerate() {
            let g = BoundGeometry { k, l: m * m, m, r: 1.0, kind: BoundKind::Tensored };
            let exact = failure_bound_for_probability(p, prefix, reps, &g);
            let sim = simulated_miss(p, prefix, reps, k, m, trials, seed as u64);
            let se = (exact * (1.0 - exact) / trials as f64).sqrt().max(1e-4);
            assert!((exact - sim).abs() <= 4.0 * se, "case {:?}: {exact} vs {sim}", (p, prefix, reps, k, m));
        }
    }

    #[test]
    fn closer_pairs_have_smaller_bounds() {
        for kind in [BoundKind::Independent, BoundKind::Tensored] {
            let g = BoundGeometry { r: 0.7, ..geometry(8, 196, kind) };
            for prefix in 1..=8 {
                for reps in [1, 13, 14, 100, 196] {
                    let near = failure_bound(0.5, 2, prefix, reps, &g);
                    let far = failure_bound(1.5, 2, prefix, reps, &g);
                    assert!(near <= far);
                }
            }
        }
    }
}
