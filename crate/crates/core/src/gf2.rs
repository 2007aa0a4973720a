//! Bit-packed GF(2) vectors and matrices.
//!
//! Bits are stored little-endian inside `u64` words: bit `i` lives in word
//! `i / 64` at position `i % 64`. Unused tail bits of the last word are kept
//! at zero so that word-level equality, popcount and XOR stay exact.

use std::fmt;
use std::ops::{BitXor, BitXorAssign};

use crate::{Error, Result};

const WORD_BITS: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut v = Self::zeros(0);
        for b in bits {
            v.push(b);
        }
        v
    }

    /// Parses a string of `'0'`/`'1'` characters. Any other character is rejected.
    pub fn parse(s: &str) -> Option<Self> {
        let mut v = Self::zeros(0);
        for ch in s.chars() {
            match ch {
                '0' => v.push(false),
                '1' => v.push(true),
                _ => return None,
            }
        }
        Some(v)
    }

    /// Builds a vector from raw words; bits at or beyond `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = Self { len, words };
        v.clear_tail();
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(WORD_BITS) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of set bits in increasing order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + tz)
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Copy of bits `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.len);
        Self::from_bits((start..end).map(|i| self.get(i)))
    }

    pub fn xor_assign_checked(&mut self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::DimensionMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        *self ^= other;
        Ok(())
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl BitXorAssign<&BitVec> for BitVec {
    /// Panics on length mismatch; use [`BitVec::xor_assign_checked`] for a fallible variant.
    fn bitxor_assign(&mut self, rhs: &BitVec) {
        assert_eq!(self.len, rhs.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&rhs.words) {
            *a ^= b;
        }
    }
}

impl BitXor for &BitVec {
    type Output = BitVec;

    fn bitxor(self, rhs: &BitVec) -> BitVec {
        let mut out = self.clone();
        out ^= rhs;
        out
    }
}

/// Column permutation. `map[i]` is the source position feeding output position `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    /// Validates that `map` is a bijection on `0..map.len()`.
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || seen[m] {
                return Err(Error::InvalidPermutation);
            }
            seen[m] = true;
        }
        Ok(Self { map })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.map.swap(a, b);
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &m) in self.map.iter().enumerate() {
            inv[m] = i;
        }
        Self { map: inv }
    }

    /// The permutation equivalent to applying `self` first and then `next`.
    pub fn then(&self, next: &Permutation) -> Self {
        assert_eq!(self.len(), next.len());
        Self {
            map: next.map.iter().map(|&j| self.map[j]).collect(),
        }
    }

    pub fn apply_bits(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.len());
        let mut out = BitVec::zeros(v.len());
        for (i, &src) in self.map.iter().enumerate() {
            if v.get(src) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn apply_slice<T: Copy>(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.len());
        self.map.iter().map(|&src| v[src]).collect()
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVec>,
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows.len(), self.cols)?;
        for r in &self.rows {
            writeln!(f, "  {r}")?;
        }
        write!(f, "]")
    }
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<BitVec>) -> Result<Self> {
        let cols = rows.first().map_or(0, BitVec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    /// Convenience constructor from nested `0`/`1` literals.
    pub fn from_u8_rows(rows: &[&[u8]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| BitVec::from_bits(r.iter().map(|&b| b != 0)))
                .collect(),
        )
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn row_slice(&self) -> &[BitVec] {
        &self.rows
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                t.rows[c].set(r, true);
            }
        }
        t
    }

    /// `v · M` over GF(2), with `v` of length `rows`.
    pub fn mat_vec_mul(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.rows(),
                found: v.len(),
            });
        }
        let mut out = BitVec::zeros(self.cols);
        for i in v.ones() {
            out ^= &self.rows[i];
        }
        Ok(out)
    }

    /// `self · other` over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        let rows = self
            .rows
            .iter()
            .map(|r| other.mat_vec_mul(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cols: other.cols,
            rows,
        })
    }

    /// Column `i` of the result is column `perm.map()[i]` of `self`.
    pub fn permute_columns(&self, perm: &Permutation) -> Self {
        assert_eq!(perm.len(), self.cols);
        Self {
            cols: self.cols,
            rows: self.rows.iter().map(|r| perm.apply_bits(r)).collect(),
        }
    }

    pub fn swap_columns(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for row in &mut self.rows {
            let (x, y) = (row.get(a), row.get(b));
            if x != y {
                row.flip(a);
                row.flip(b);
            }
        }
    }

    /// Appends a column holding the XOR of each row (even overall parity).
    pub fn with_parity_column(&self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut out = r.clone();
                out.push(r.count_ones() % 2 == 1);
                out
            })
            .collect();
        Self {
            cols: self.cols + 1,
            rows,
        }
    }

    /// Rank by elimination on a scratch copy.
    pub fn rank(&self) -> usize {
        let mut m = self.rows.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(p) = (rank..m.len()).find(|&r| m[r].get(c)) else {
                continue;
            };
            m.swap(rank, p);
            let pivot = m[rank].clone();
            for (r, row) in m.iter_mut().enumerate() {
                if r != rank && row.get(c) {
                    *row ^= &pivot;
                }
            }
            rank += 1;
            if rank == m.len() {
                break;
            }
        }
        rank
    }

    /// True when the left `rows × rows` block is the identity.
    pub fn has_identity_prefix(&self) -> bool {
        let k = self.rows();
        k <= self.cols
            && self
                .rows
                .iter()
                .enumerate()
                .all(|(i, r)| (0..k).all(|j| r.get(j) == (i == j)))
    }
}

/// Result of bringing a full-rank matrix into systematic form.
#[derive(Clone, Debug)]
pub struct Systematic {
    pub g_sys: BitMatrix,
    pub pi2: Permutation,
    pub row_ops: BitMatrix,
}

/// Gauss-Jordan elimination to `[I_k | P]`.
///
/// The pivot for row `i` is searched in columns `i, i+1, ...`; when column `i`
/// has no usable pivot, the first later column that does is swapped into
/// position `i` and the swap is recorded in `pi2`. The result satisfies
/// `g_sys == row_ops · pi2(m)`.
pub fn systematic_ge(m: &BitMatrix) -> Result<Systematic> {
    let mut ops = BitMatrix::identity(m.rows());
    let (g_sys, pi2) = reduce(m.clone(), Some(&mut ops))?;
    Ok(Systematic {
        g_sys,
        pi2,
        row_ops: ops,
    })
}

/// Same elimination as [`systematic_ge`] without materializing the row operations.
pub fn systematic_form(m: &BitMatrix) -> Result<(BitMatrix, Permutation)> {
    reduce(m.clone(), None)
}

fn reduce(mut m: BitMatrix, mut ops: Option<&mut BitMatrix>) -> Result<(BitMatrix, Permutation)> {
    let k = m.rows();
    let n = m.cols();
    if k > n {
        return Err(Error::RankDeficient { row: n });
    }
    let mut pi2 = Permutation::identity(n);
    for i in 0..k {
        let mut found = None;
        'search: for c in i..n {
            for r in i..k {
                if m.rows[r].get(c) {
                    found = Some((r, c));
                    break 'search;
                }
            }
        }
        let Some((r, c)) = found else {
            return Err(Error::RankDeficient { row: i });
        };
        if c != i {
            m.swap_columns(i, c);
            pi2.swap(i, c);
        }
        if r != i {
            m.rows.swap(i, r);
            if let Some(ops) = ops.as_deref_mut() {
                ops.rows.swap(i, r);
            }
        }
        let pivot = m.rows[i].clone();
        let pivot_ops = ops.as_deref().map(|o| o.rows[i].clone());
        for j in 0..k {
            if j != i && m.rows[j].get(i) {
                m.rows[j] ^= &pivot;
                if let (Some(ops), Some(p)) = (ops.as_deref_mut(), pivot_ops.as_ref()) {
                    ops.rows[j] ^= p;
                }
            }
        }
    }
    Ok((m, pi2))
}

/// `H = [Pᵀ | I_{n-k}]` for a generator in the form `[I_k | P]`.
pub fn parity_check_from_systematic(g_sys: &BitMatrix) -> Result<BitMatrix> {
    if !g_sys.has_identity_prefix() {
        return Err(Error::NotSystematic);
    }
    let k = g_sys.rows();
    let n = g_sys.cols();
    let r = n - k;
    let mut h = BitMatrix::zeros(r, n);
    for (i, row) in g_sys.rows.iter().enumerate() {
        for j in row.ones().filter(|&j| j >= k) {
            h.set(j - k, i, true);
        }
    }
    for j in 0..r {
        h.set(j, k + j, true);
    }
    Ok(h)
}

/// `H · cᵀ`, i.e. the syndrome of `c`.
pub fn syndrome(h: &BitMatrix, c: &BitVec) -> BitVec {
    assert_eq!(h.cols(), c.len());
    BitVec::from_bits(h.rows.iter().map(|row| {
        row.words()
            .iter()
            .zip(c.words())
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }))
}
