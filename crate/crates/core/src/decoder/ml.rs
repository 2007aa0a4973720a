use crate::channel::SoftWord;
use crate::codes::{CodeSpec, MAX_EXHAUSTIVE_K};
use crate::gf2::BitVec;
use crate::{Error, Result};

const MAX_N: usize = 128;

/// Exhaustive maximum-likelihood decoding: the codeword of minimum weighted
/// Hamming distance to the hard decisions. Ties go to the lexicographically
/// smallest codeword, reading bit 0 first.
pub fn ml_oracle(sw: &SoftWord, spec: &CodeSpec) -> Result<BitVec> {
    let (n, k) = (spec.n, spec.k);
    if k > MAX_EXHAUSTIVE_K {
        return Err(Error::TooManyCodewords { k, limit: MAX_EXHAUSTIVE_K });
    }
    if n > MAX_N {
        return Err(Error::Config(format!("exhaustive decoding supports n ≤ {MAX_N}, got {n}")));
    }
    if sw.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: sw.len() });
    }

    // tables[b][v] = Σ α over the set bits of byte value v at byte offset b.
    let bytes = n.div_ceil(8);
    let mut tables = vec![0.0f64; bytes * 256];
    for b in 0..bytes {
        for v in 1..256usize {
            let pos = b * 8 + v.trailing_zeros() as usize;
            let bit = if pos < n { sw.alpha[pos] } else { 0.0 };
            tables[b * 256 + v] = tables[b * 256 + (v & (v - 1))] + bit;
        }
    }

    let rows: Vec<u128> = spec.generator.row_slice().iter().map(|r| to_u128(r.words())).collect();
    let y = to_u128(sw.y.words());
    let best = if n <= 64 {
        let rows: Vec<u64> = rows.iter().map(|&r| r as u64).collect();
        search(&rows, y as u64, |d: u64| {
            let mut s = 0.0;
            for b in 0..bytes {
                s += tables[b * 256 + (d >> (8 * b) & 0xff) as usize];
            }
            s
        }) as u128
    } else {
        search(&rows, y, |d: u128| {
            let mut s = 0.0;
            for b in 0..bytes {
                s += tables[b * 256 + (d >> (8 * b) & 0xff) as usize];
            }
            s
        })
    };
    Ok(BitVec::from_words(n, vec![best as u64, (best >> 64) as u64][..n.div_ceil(64)].to_vec()))
}

trait Word: Copy + Ord + Default + std::ops::BitXor<Output = Self> + std::ops::BitXorAssign {
    /// Key ordering words by their first differing bit, reading bit 0 first.
    fn lex_key(self) -> Self;
}

impl Word for u64 {
    fn lex_key(self) -> Self {
        self.reverse_bits()
    }
}

impl Word for u128 {
    fn lex_key(self) -> Self {
        self.reverse_bits()
    }
}

/// Gray-code walk over every codeword spanned by `rows`.
fn search<W: Word>(rows: &[W], y: W, score: impl Fn(W) -> f64) -> W {
    let mut c = W::default();
    let mut best = W::default();
    let mut best_whd = score(y);
    for step in 1u64..1 << rows.len() {
        c ^= rows[step.trailing_zeros() as usize];
        let s = score(c ^ y);
        if s < best_whd || (s == best_whd && c.lex_key() < best.lex_key()) {
            best_whd = s;
            best = c;
        }
    }
    best
}

fn to_u128(words: &[u64]) -> u128 {
    words.iter().rev().fold(0u128, |acc, &w| acc << 64 | w as u128)
}
