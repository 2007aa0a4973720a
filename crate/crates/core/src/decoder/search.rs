//! TEP reprocessing over a systematic basis.
//!
//! Both decoding paths run the same search: re-encode `y_B ⊕ e` for every
//! pattern `e` up to the order, keep the candidate closest to `y` in weighted
//! Hamming distance, optionally skip patterns whose success probability is
//! too small and optionally stop once a new incumbent is judged correct.
//!
//! Candidates are tracked as difference vectors `d = c ⊕ y`. Because the
//! generator is systematic, the basis part of `d` is the pattern itself.

use crate::gf2::BitVec;
use crate::reliability::{binomial, codeword_log_odds, ln_bit_correct, log_tep_success};

const WORD_BITS: usize = 64;

/// Generator rows, hard decisions and reliabilities in one coordinate system.
pub(crate) struct Basis<'a> {
    pub rows: &'a [BitVec],
    pub y: &'a BitVec,
    pub alpha: &'a [f64],
}

pub(crate) struct SearchConfig {
    pub max_weight: usize,
    pub n0: f64,
    pub log1m_all: f64,
    pub discard_log: Option<f64>,
    pub accept_log: Option<f64>,
}

#[derive(Debug)]
pub(crate) struct SearchResult {
    /// Difference vector of the best candidate found, if it beat the incumbent.
    pub best_d: Option<Vec<u64>>,
    pub best_whd: f64,
    pub reencoded: u64,
    pub discarded: u64,
    pub accepted: bool,
    /// WHD of every incumbent update, in order.
    pub history: Vec<f64>,
}

/// Basis positions ordered from least to most reliable; ties put the higher
/// position first.
pub(crate) fn rank_basis(alpha: &[f64], k: usize) -> Vec<usize> {
    let mut ranks: Vec<usize> = (0..k).collect();
    ranks.sort_by(|&a, &b| alpha[a].total_cmp(&alpha[b]).then(b.cmp(&a)));
    ranks
}

/// `Σ ln(1 - P(i))` over the first `k` positions.
pub(crate) fn log1m_basis(alpha: &[f64], k: usize, n0: f64) -> f64 {
    alpha[..k].iter().map(|&a| ln_bit_correct(a, n0)).sum()
}

struct Search<'a> {
    alpha: &'a [f64],
    n: usize,
    k: usize,
    words: usize,
    /// Generator rows in rank order, flattened.
    ranked_rows: Vec<u64>,
    ranked_alpha: Vec<f64>,
    /// `prefix[r]` = sum of the `r` smallest basis reliabilities.
    prefix: Vec<f64>,
    /// One partial difference vector per depth.
    stack: Vec<u64>,
    scratch: Vec<u64>,
    cfg: &'a SearchConfig,
    log1m_basis: f64,
    result: SearchResult,
}

impl Search<'_> {
    #[inline]
    fn log_success(&self, cost: f64) -> f64 {
        log_tep_success(cost, self.log1m_basis, self.cfg.n0)
    }

    #[inline]
    fn discard(&self, cost: f64) -> bool {
        self.cfg
            .discard_log
            .is_some_and(|t| self.log_success(cost) <= t)
    }

    /// Scores `scratch` against the incumbent. Returns true to stop the search.
    fn consider(&mut self, cost: f64) -> bool {
        self.result.reencoded += 1;
        let best = self.result.best_whd;
        let mut whd = 0.0;
        for (wi, &word) in self.scratch.iter().enumerate() {
            let mut w = word;
            while w != 0 {
                whd += self.alpha[wi * WORD_BITS + w.trailing_zeros() as usize];
                w &= w - 1;
            }
            if whd >= best {
                return false;
            }
        }
        self.result.best_whd = whd;
        self.result.history.push(whd);
        match &mut self.result.best_d {
            Some(d) => d.copy_from_slice(&self.scratch),
            None => self.result.best_d = Some(self.scratch.clone()),
        }
        if let Some(threshold) = self.cfg.accept_log {
            let log_r = codeword_log_odds(whd, self.log_success(cost), self.cfg.log1m_all, self.cfg.n0, self.n, self.k);
            if log_r <= threshold {
                self.result.accepted = true;
                return true;
            }
        }
        false
    }

    /// Chooses the pattern element at `depth` out of `weight`, starting at
    /// rank `start`. Returns true to stop the search.
    fn descend(&mut self, depth: usize, weight: usize, start: usize, cost: f64) -> bool {
        let remaining = weight - depth;
        let w = self.words;
        for r in start..=self.k - remaining {
            let lightest = cost + self.ranked_alpha[r] + (self.prefix[r + remaining] - self.prefix[r + 1]);
            if self.discard(lightest) {
                // Every pattern left at this depth is at least as heavy.
                let skipped = binomial(self.k - r, remaining).unwrap_or(u128::MAX);
                self.result.discarded = self.result.discarded.saturating_add(skipped.min(u64::MAX as u128) as u64);
                return false;
            }
            let c = cost + self.ranked_alpha[r];
            let (lo, hi) = self.stack.split_at_mut((depth + 1) * w);
            let parent = &lo[depth * w..];
            let row = &self.ranked_rows[r * w..(r + 1) * w];
            if remaining == 1 {
                for i in 0..w {
                    self.scratch[i] = parent[i] ^ row[i];
                }
                if self.consider(c) {
                    return true;
                }
            } else {
                for i in 0..w {
                    hi[i] = parent[i] ^ row[i];
                }
                if self.descend(depth + 1, weight, r + 1, c) {
                    return true;
                }
            }
        }
        false
    }
}

/// Runs the reprocessing stage. `incumbent_whd` seeds the best distance
/// (infinity when there is no warm start).
pub(crate) fn run(basis: &Basis<'_>, cfg: &SearchConfig, incumbent_whd: f64) -> SearchResult {
    let k = basis.rows.len();
    let n = basis.y.len();
    let words = n.div_ceil(WORD_BITS);
    let ranks = rank_basis(basis.alpha, k);

    let mut ranked_rows = Vec::with_capacity(k * words);
    let mut ranked_alpha = Vec::with_capacity(k);
    for &p in &ranks {
        ranked_rows.extend_from_slice(basis.rows[p].words());
        ranked_alpha.push(basis.alpha[p]);
    }
    let mut prefix = vec![0.0; k + 1];
    for r in 0..k {
        prefix[r + 1] = prefix[r] + ranked_alpha[r];
    }

    // Zero-pattern candidate: y_B · G ⊕ y.
    let mut d0 = basis.y.words().to_vec();
    for i in basis.y.ones().take_while(|&i| i < k) {
        for (d, g) in d0.iter_mut().zip(basis.rows[i].words()) {
            *d ^= g;
        }
    }

    let max_weight = cfg.max_weight.min(k);
    let mut stack = vec![0u64; (max_weight + 1) * words];
    stack[..words].copy_from_slice(&d0);

    let mut search = Search {
        alpha: basis.alpha,
        n,
        k,
        words,
        ranked_rows,
        ranked_alpha,
        prefix,
        stack,
        scratch: d0,
        cfg,
        log1m_basis: log1m_basis(basis.alpha, k, cfg.n0),
        result: SearchResult {
            best_d: None,
            best_whd: incumbent_whd,
            reencoded: 0,
            discarded: 0,
            accepted: false,
            history: Vec::new(),
        },
    };

    if !search.consider(0.0) {
        for weight in 1..=max_weight {
            if search.descend(0, weight, 0, 0.0) {
                break;
            }
        }
    }
    search.result
}

/// Codeword `y ⊕ d` from a difference vector.
pub(crate) fn codeword_from_diff(y: &BitVec, d: &[u64]) -> BitVec {
    let words = y.words().iter().zip(d).map(|(a, b)| a ^ b).collect();
    BitVec::from_words(y.len(), words)
}
