use crate::distance::MotifPair;

/// Top-k pairs kept sorted by (distance, a, b) and mutually non-overlapping.
///
/// A candidate enters only if no strictly closer pair in the queue overlaps
/// it; on entry it evicts every strictly farther pair it overlaps, and the
/// farthest pair is dropped when the queue exceeds `k`.
#[derive(Clone, Debug)]
pub struct TopKQueue {
    k: usize,
    exclusion: usize,
    pairs: Vec<MotifPair>,
}

impl TopKQueue {
    pub fn new(k: usize, exclusion: usize) -> Self {
        Self {
            k,
            exclusion,
            pairs: Vec::with_capacity(k + 1),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.pairs.len() >= self.k
    }

    pub fn max(&self) -> Option<&MotifPair> {
        self.pairs.last()
    }

    pub fn pairs(&self) -> &[MotifPair] {
        &self.pairs
    }

    pub fn into_pairs(self) -> Vec<MotifPair> {
        self.pairs
    }

    /// Whether a pair with this key could change the queue at all.
    pub fn admits(&self, dist_d: f64) -> bool {
        !self.is_full() || self.max().is_some_and(|m| dist_d <= m.dist_d)
    }

    /// Offers a candidate; returns whether the queue changed.
    pub fn offer(&mut self, pair: MotifPair) -> bool {
        let pos = self.pairs.partition_point(|p| p.cmp_key(&pair).is_lt());
        if self.pairs.get(pos).is_some_and(|p| p.a == pair.a && p.b == pair.b) {
            return false;
        }
        if self.pairs[..pos].iter().any(|p| p.overlaps(&pair, self.exclusion)) {
            return false;
        }
        if pos >= self.k {
            return false;
        }
        let exclusion = self.exclusion;
        let mut tail: Vec<MotifPair> = self.pairs.drain(pos..).collect();
        tail.retain(|p| !p.overlaps(&pair, exclusion));
        self.pairs.push(pair);
        self.pairs.extend(tail);
        self.pairs.truncate(self.k);
        true
    }
}
