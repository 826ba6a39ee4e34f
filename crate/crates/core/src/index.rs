//! Lexicographically sorted hash words supporting prefix-group enumeration.
//!
//! For every (dimension, repetition) the subsequences are kept sorted by
//! word, so words sharing a prefix of any length form a contiguous run. The
//! common prefix length of each adjacent pair is cached: the groups at
//! prefix length `i` are the maximal runs whose adjacent common prefixes are
//! all at least `i`, which makes every level a refinement of the shorter ones.

use std::io::{Read, Write};
use std::ops::Range;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lsh::HashMatrix;

const MAGIC: &[u8; 8] = b"MDMOTIF\x01";
const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct HashIndex {
    hashes: HashMatrix,
    /// Per `(f, j)` at `f * L + j`: subsequence ids sorted by (word, id).
    orders: Vec<Vec<u32>>,
    /// Per `(f, j)`: common prefix length of sorted entries `t` and `t + 1`.
    lcps: Vec<Vec<u8>>,
}

/// Sorts the hash words of every (dimension, repetition).
pub fn build_index(hashes: HashMatrix) -> HashIndex {
    let reps = hashes.repetitions();
    let k = hashes.k();
    let sorted: Vec<(Vec<u32>, Vec<u8>)> = (0..hashes.dims() * reps)
        .into_par_iter()
        .map(|slot| {
            let (f, j) = (slot / reps, slot % reps);
            let mut keyed: Vec<(u128, u32)> = (0..hashes.len())
                .map(|a| (hashes.key(f, j, a), a as u32))
                .collect();
            keyed.sort_unstable();
            let lcp = keyed
                .windows(2)
                .map(|p| (((p[0].0 ^ p[1].0).leading_zeros() / 8) as usize).min(k) as u8)
                .collect();
            (keyed.into_iter().map(|(_, a)| a).collect(), lcp)
        })
        .collect();
    let (orders, lcps) = sorted.into_iter().unzip();
    HashIndex {
        hashes,
        orders,
        lcps,
    }
}

impl HashIndex {
    pub fn hashes(&self) -> &HashMatrix {
        &self.hashes
    }

    fn slot(&self, f: usize, j: usize) -> usize {
        f * self.hashes.repetitions() + j
    }

    /// Subsequence ids of `(f, j)` in word order.
    pub fn entries(&self, f: usize, j: usize) -> &[u32] {
        &self.orders[self.slot(f, j)]
    }

    /// Common prefix lengths of adjacent sorted entries of `(f, j)`.
    pub fn adjacent_lcp(&self, f: usize, j: usize) -> &[u8] {
        &self.lcps[self.slot(f, j)]
    }

    /// Maximal ranges of sorted positions whose words share their first
    /// `prefix` symbols. The ranges partition `0..len`.
    pub fn collision_groups(&self, f: usize, j: usize, prefix: usize) -> CollisionGroups<'_> {
        assert!(prefix >= 1 && prefix <= self.hashes.k(), "prefix {prefix} out of range");
        CollisionGroups {
            lcp: self.adjacent_lcp(f, j),
            prefix: prefix as u8,
            start: 0,
            len: self.hashes.len(),
        }
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let h = &self.hashes;
        out.write_all(MAGIC)?;
        out.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        for v in [h.len, h.dims, h.window, h.k, h.m * h.m, h.directions_used] {
            out.write_u64::<LittleEndian>(v as u64)?;
        }
        out.write_f64::<LittleEndian>(h.r)?;
        out.write_u64::<LittleEndian>(h.seed)?;
        for half in &h.halves {
            for &v in half {
                out.write_u64::<LittleEndian>(v)?;
            }
        }
        for (order, lcp) in self.orders.iter().zip(&self.lcps) {
            for &a in order {
                out.write_u32::<LittleEndian>(a)?;
            }
            out.write_all(lcp)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = input.read_u32::<LittleEndian>()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let mut header = [0usize; 6];
        for v in header.iter_mut() {
            *v = input.read_u64::<LittleEndian>()? as usize;
        }
        let [len, dims, window, k, reps, directions_used] = header;
        let m = (reps as f64).sqrt().round() as usize;
        if m * m != reps || k % 2 != 0 || k > crate::lsh::MAX_CONCATENATIONS || len > u32::MAX as usize {
            return Err(Error::Format(format!("inconsistent header: K = {k}, L = {reps}")));
        }
        let r = input.read_f64::<LittleEndian>()?;
        let seed = input.read_u64::<LittleEndian>()?;
        let mut halves = Vec::with_capacity(dims * 2 * m);
        for _ in 0..dims * 2 * m {
            let mut half = vec![0u64; len];
            input.read_u64_into::<LittleEndian>(&mut half)?;
            halves.push(half);
        }
        let mut orders = Vec::with_capacity(dims * reps);
        let mut lcps = Vec::with_capacity(dims * reps);
        for _ in 0..dims * reps {
            let mut order = vec![0u32; len];
            input.read_u32_into::<LittleEndian>(&mut order)?;
            if order.iter().any(|&a| a as usize >= len) {
                return Err(Error::Format("subsequence id out of range".into()));
            }
            let mut lcp = vec![0u8; len.saturating_sub(1)];
            input.read_exact(&mut lcp)?;
            orders.push(order);
            lcps.push(lcp);
        }
        let mut trailing = [0u8; 1];
        if input.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes".into()));
        }
        Ok(Self {
            hashes: HashMatrix {
                k,
                m,
                dims,
                len,
                halves,
                directions_used,
                window,
                r,
                seed,
            },
            orders,
            lcps,
        })
    }
}

/// Iterator over the collision groups of one (dimension, repetition) at a
/// given prefix length.
pub struct CollisionGroups<'a> {
    lcp: &'a [u8],
    prefix: u8,
    start: usize,
    len: usize,
}

impl Iterator for CollisionGroups<'_> {
    type Item = Range<usize>;

    fn next(&mut self) -> Option<Range<usize>> {
        if self.start >= self.len {
            return None;
        }
        let start = self.start;
        let mut end = start + 1;
        while end < self.len && self.lcp[end - 1] >= self.prefix {
            end += 1;
        }
        self.start = end;
        Some(start..end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lsh::{build_hash_pool, compute_all_hashes};
    use crate::series::{sliding_stats, TimeSeries};
    use std::collections::HashMap;

    fn index_for(cols: Vec<Vec<f64>>, w: usize, r: f64) -> HashIndex {
        let ts = TimeSeries::from_columns(cols).unwrap();
        let st = sliding_stats(&ts, w).unwrap();
        let pool = build_hash_pool(ts.dims(), w, st.num_subsequences(), 8, 9, r, 7, None).unwrap();
        build_index(compute_all_hashes(&ts, &st, &pool))
    }

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn singleton_series() {
        let idx = index_for(vec![vec![1.0, 2.0, 0.5]], 3, 0.1);
        for j in 0..9 {
            assert_eq!(idx.entries(0, j), &[0]);
            assert_eq!(idx.collision_groups(0, j, 4).collect::<Vec<_>>(), vec![0..1]);
        }
    }

    #[test]
    fn identical_words_form_one_group() {
        let col: Vec<f64> = (0..60).map(|t| (t % 2) as f64).collect();
        let idx = index_for(vec![col], 4, 0.3);
        // every window is a shift of [0,1,0,1] or [1,0,1,0]: two normalized forms
        let groups: Vec<_> = idx.collision_groups(0, 0, 8).collect();
        assert!(groups.len() <= 2);
        let flat = index_for(vec![vec![2.0; 40]], 5, 0.3);
        for i in 1..=8 {
            assert_eq!(flat.collision_groups(0, 3, i).collect::<Vec<_>>(), vec![0..36]);
        }
    }

    #[test]
    fn groups_match_dictionary_oracle() {
        let idx = index_for(vec![noise(800, 1), noise(800, 2)], 12, 0.4);
        let hashes = idx.hashes();
        for f in 0..2 {
            for j in [0, 4, 8] {
                for i in 1..=8 {
                    let mut oracle: HashMap<Vec<u8>, Vec<usize>> = HashMap::new();
                    for a in 0..hashes.len() {
                        let mut w = hashes.word(f, j, a);
                        w.truncate(i);
                        oracle.entry(w).or_default().push(a);
                    }
                    let mut expected: Vec<Vec<usize>> = oracle.into_values().collect();
                    expected.iter_mut().for_each(|g| g.sort_unstable());
                    expected.sort();
                    let entries = idx.entries(f, j);
                    let mut got: Vec<Vec<usize>> = idx
                        .collision_groups(f, j, i)
                        .map(|r| {
                            let mut g: Vec<usize> = entries[r].iter().map(|&a| a as usize).collect();
                            g.sort_unstable();
                            g
                        })
                        .collect();
                    got.sort();
                    assert_eq!(got, expected, "f {f} j {j} i {i}");
                }
            }
        }
    }

    #[test]
    fn sorted_order_is_deterministic() {
        let a = index_for(vec![noise(500, 3)], 10, 0.2);
        let b = index_for(vec![noise(500, 3)], 10, 0.2);
        assert_eq!(a, b);
        let entries = a.entries(0, 2);
        for p in entries.windows(2) {
            let (x, y) = (p[0] as usize, p[1] as usize);
            let (kx, ky) = (a.hashes().key(0, 2, x), a.hashes().key(0, 2, y));
            assert!(kx < ky || (kx == ky && x < y));
        }
    }

    #[test]
    fn dump_and_load() {
        let idx = index_for(vec![noise(300, 4), noise(300, 5)], 10, 0.2);
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        let back = HashIndex::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, idx);
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(HashIndex::read_from(bad.as_slice()).is_err());
        assert!(HashIndex::read_from(&buf[..buf.len() - 3]).is_err());
    }
}
