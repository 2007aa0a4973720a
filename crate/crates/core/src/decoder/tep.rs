//! Test error patterns.

/// A set of basis positions to flip, 0-based and strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tep {
    positions: Vec<usize>,
}

impl Tep {
    pub fn empty() -> Self {
        Self { positions: Vec::new() }
    }

    /// Sorts and deduplicates `positions`.
    pub fn new(mut positions: Vec<usize>) -> Self {
        positions.sort_unstable();
        positions.dedup();
        Self { positions }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn weight(&self) -> usize {
        self.positions.len()
    }
}

/// All TEPs of weight at most `max_weight` over a `k`-bit basis.
///
/// Weights come in increasing order. Within a weight class patterns are
/// listed lexicographically in reliability rank, where rank 0 is the last
/// (least reliable) basis position, so for `k = 3, m = 2` the order is
/// `∅; {2}, {1}, {0}; {1,2}, {0,2}, {0,1}`.
pub fn enumerate_teps(k: usize, max_weight: usize) -> TepIter {
    assert!(max_weight <= k, "TEP weight {max_weight} exceeds basis size {k}");
    TepIter {
        k,
        max_weight,
        ranks: Vec::new(),
        done: false,
    }
}

#[derive(Clone, Debug)]
pub struct TepIter {
    k: usize,
    max_weight: usize,
    ranks: Vec<usize>,
    done: bool,
}

impl TepIter {
    fn advance(&mut self) {
        let w = self.ranks.len();
        let k = self.k;
        // Rightmost rank that can still move up.
        let mut i = w;
        while i > 0 {
            i -= 1;
            if self.ranks[i] < k - (w - i) {
                self.ranks[i] += 1;
                for j in i + 1..w {
                    self.ranks[j] = self.ranks[j - 1] + 1;
                }
                return;
            }
        }
        if w == self.max_weight {
            self.done = true;
        } else {
            self.ranks = (0..=w).collect();
        }
    }
}

impl Iterator for TepIter {
    type Item = Tep;

    fn next(&mut self) -> Option<Tep> {
        if self.done {
            return None;
        }
        let k = self.k;
        let tep = Tep::new(self.ranks.iter().map(|&r| k - 1 - r).collect());
        self.advance();
        Some(tep)
    }
}
