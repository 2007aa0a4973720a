//! Code construction: narrow-sense BCH codes over GF(2^m), their even-parity
//! extensions, and a plain-text generator-matrix format.
//!
//! File format: a header line `n k` (optionally `n k d`, with `d` the minimum
//! Hamming distance), followed by `k` lines of `n` characters from `{0,1}`.

use std::fs;
use std::path::Path;

use crate::gf2::{systematic_form, BitMatrix, BitVec};
use crate::{Error, Result};

/// Exhaustive distance scans are limited to this many information bits.
pub const MAX_EXHAUSTIVE_K: usize = 24;

/// GF(2^m) with log/antilog tables over a primitive polynomial.
#[derive(Clone, Debug)]
pub struct Gf2mField {
    m: u32,
    primitive_poly: u32,
    antilog: Vec<u16>,
    log: Vec<u16>,
}

impl Gf2mField {
    /// Field with the standard primitive polynomial for `m` in `3..=7`.
    pub fn new(m: u32) -> Result<Self> {
        let poly = match m {
            3 => 0b1011,      // x^3 + x + 1
            4 => 0b1_0011,    // x^4 + x + 1
            5 => 0b10_0101,   // x^5 + x^2 + 1
            6 => 0b100_0011,  // x^6 + x + 1
            7 => 0b1000_1001, // x^7 + x^3 + 1
            _ => return Err(Error::InvalidBch(format!("no pinned primitive polynomial for m = {m}"))),
        };
        Self::with_poly(m, poly)
    }

    pub fn with_poly(m: u32, primitive_poly: u32) -> Result<Self> {
        if !(2..=15).contains(&m) || primitive_poly >> m != 1 {
            return Err(Error::InvalidBch(format!(
                "polynomial {primitive_poly:#b} does not have degree {m}"
            )));
        }
        let order = (1usize << m) - 1;
        let mut antilog = vec![0u16; order];
        let mut log = vec![0u16; order + 1];
        let mut x: u32 = 1;
        for (i, slot) in antilog.iter_mut().enumerate() {
            if i > 0 && x == 1 {
                return Err(Error::InvalidBch(format!(
                    "polynomial {primitive_poly:#b} is not primitive"
                )));
            }
            *slot = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x >> m != 0 {
                x ^= primitive_poly;
            }
        }
        if x != 1 {
            return Err(Error::InvalidBch(format!(
                "polynomial {primitive_poly:#b} is not primitive"
            )));
        }
        Ok(Self {
            m,
            primitive_poly,
            antilog,
            log,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.primitive_poly
    }

    /// Multiplicative order of the primitive element, `2^m - 1`.
    pub fn order(&self) -> usize {
        self.antilog.len()
    }

    /// `α^e`.
    pub fn exp(&self, e: usize) -> u16 {
        self.antilog[e % self.order()]
    }

    /// Discrete log of a nonzero element.
    pub fn log(&self, x: u16) -> usize {
        assert!(x != 0, "log of zero");
        self.log[x as usize] as usize
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp(self.log(a) + self.log(b))
    }

    /// Minimal polynomial of `α^i` over GF(2), as a bitmask of coefficients.
    pub fn minimal_poly(&self, i: usize) -> u128 {
        let coset = cyclotomic_coset(i, self.order());
        // Coefficients in GF(2^m), lowest degree first.
        let mut poly: Vec<u16> = vec![1];
        for &j in &coset {
            let root = self.exp(j);
            let mut next = vec![0u16; poly.len() + 1];
            for (d, &c) in poly.iter().enumerate() {
                next[d + 1] ^= c;
                next[d] ^= self.mul(c, root);
            }
            poly = next;
        }
        poly.iter().enumerate().fold(0u128, |acc, (d, &c)| {
            debug_assert!(c <= 1, "minimal polynomial has a non-binary coefficient");
            acc | (u128::from(c) << d)
        })
    }
}

fn cyclotomic_coset(i: usize, n: usize) -> Vec<usize> {
    let mut coset = vec![i % n];
    let mut j = (2 * i) % n;
    while j != i % n {
        coset.push(j);
        j = (2 * j) % n;
    }
    coset
}

fn poly_degree(p: u128) -> usize {
    127 - p.leading_zeros() as usize
}

fn poly_mul(a: u128, b: u128) -> u128 {
    let mut out = 0u128;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            out ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    out
}

/// Remainder of `a` modulo `b` over GF(2).
pub fn poly_rem(a: &BitVec, b: &BitVec) -> BitVec {
    let deg_b = b.ones().last().expect("division by the zero polynomial");
    let mut r = a.clone();
    while let Some(deg_r) = r.ones().last() {
        if deg_r < deg_b {
            break;
        }
        let shift = deg_r - deg_b;
        for j in b.ones() {
            r.flip(j + shift);
        }
    }
    r
}

/// Generator polynomial of the narrow-sense BCH code of length `n` correcting
/// `designed_t` errors: the lcm of the minimal polynomials of `α, ..., α^{2t}`.
/// Bit `j` of the result is the coefficient of `x^j`.
pub fn bch_generator_poly(field: &Gf2mField, n: usize, designed_t: usize) -> Result<BitVec> {
    if n != field.order() {
        return Err(Error::InvalidBch(format!(
            "length {n} does not match 2^{} - 1",
            field.m()
        )));
    }
    if designed_t == 0 {
        return Err(Error::InvalidBch("designed t must be at least 1".into()));
    }
    let mut seen = vec![false; n];
    let mut g: u128 = 1;
    for i in 1..=2 * designed_t {
        let r = i % n;
        if r == 0 {
            // α^n = 1 is a root: every codeword would be a multiple of x^n - 1.
            return Err(Error::InvalidBch(format!(
                "t = {designed_t} leaves no information bits for n = {n}"
            )));
        }
        if seen[r] {
            continue;
        }
        for j in cyclotomic_coset(r, n) {
            seen[j] = true;
        }
        g = poly_mul(g, field.minimal_poly(r));
        if poly_degree(g) >= n {
            return Err(Error::InvalidBch(format!(
                "t = {designed_t} leaves no information bits for n = {n}"
            )));
        }
    }
    let deg = poly_degree(g);
    Ok(BitVec::from_bits((0..=deg).map(|j| (g >> j) & 1 == 1)))
}

/// Non-systematic `k × n` generator with rows `x^i g(x)`.
pub fn cyclic_generator(g: &BitVec, n: usize) -> Result<BitMatrix> {
    let deg = g.len() - 1;
    if deg >= n {
        return Err(Error::InvalidBch(format!("degree {deg} ≥ length {n}")));
    }
    let k = n - deg;
    let rows = (0..k)
        .map(|i| {
            let mut row = BitVec::zeros(n);
            for j in g.ones() {
                row.set(i + j, true);
            }
            row
        })
        .collect();
    BitMatrix::from_rows(rows)
}

/// Appends an overall parity bit and returns the systematic form.
pub fn extend_code(generator: &BitMatrix) -> Result<BitMatrix> {
    let (g_sys, _) = systematic_form(&generator.with_parity_column())?;
    Ok(g_sys)
}

/// A binary linear code with a systematic generator `[I_k | P]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d_h: usize,
    pub generator: BitMatrix,
}

impl CodeSpec {
    /// Wraps a generator, bringing it to systematic form. Column moves made by
    /// the elimination are kept in the stored matrix (an equivalent code).
    pub fn new(name: impl Into<String>, generator: &BitMatrix, d_h: usize) -> Result<Self> {
        let (g, _) = systematic_form(generator)?;
        Ok(Self {
            name: name.into(),
            n: g.cols(),
            k: g.rows(),
            d_h: d_h.max(1),
            generator: g,
        })
    }

    /// Extended narrow-sense BCH code from GF(2^m) with designed correction `t`.
    /// The stored distance is the designed distance of the BCH code plus one.
    pub fn extended_bch(m: u32, designed_t: usize) -> Result<Self> {
        let field = Gf2mField::new(m)?;
        let n = field.order();
        let g = bch_generator_poly(&field, n, designed_t)?;
        let gen = extend_code(&cyclic_generator(&g, n)?)?;
        let name = format!("ebch-{}-{}", gen.cols(), gen.rows());
        Ok(Self {
            name,
            n: gen.cols(),
            k: gen.rows(),
            d_h: 2 * designed_t + 2,
            generator: gen,
        })
    }

    /// One of the bundled codes, e.g. `ebch-64-36`.
    pub fn bundled(name: &str) -> Result<Self> {
        let text = BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| Error::UnknownCode(name.to_string()))?;
        let mut spec = parse_generator(text)?;
        spec.name = name.to_string();
        Ok(spec)
    }

    pub fn bundled_names() -> impl Iterator<Item = &'static str> {
        BUNDLED.iter().map(|(n, _)| *n)
    }

    pub fn parity_check(&self) -> BitMatrix {
        crate::gf2::parity_check_from_systematic(&self.generator)
            .expect("CodeSpec generator is systematic")
    }

    pub fn encode(&self, info: &BitVec) -> Result<BitVec> {
        self.generator.mat_vec_mul(info)
    }

    pub fn is_codeword(&self, c: &BitVec) -> bool {
        c.len() == self.n && crate::gf2::syndrome(&self.parity_check(), c).is_zero()
    }
}

/// Decoding order that achieves ML performance per the classic OSD bound,
/// `⌈d_H/4 - 1⌉`, clamped at zero.
pub fn default_order(spec: &CodeSpec) -> usize {
    if spec.d_h <= 4 {
        0
    } else {
        (spec.d_h - 1) / 4
    }
}

/// Minimum nonzero codeword weight by Gray-code enumeration of all `2^k` codewords.
pub fn min_distance_exhaustive(generator: &BitMatrix) -> Result<usize> {
    let k = generator.rows();
    if k > MAX_EXHAUSTIVE_K {
        return Err(Error::TooManyCodewords {
            k,
            limit: MAX_EXHAUSTIVE_K,
        });
    }
    let mut c = BitVec::zeros(generator.cols());
    let mut best = usize::MAX;
    for step in 1u64..(1u64 << k) {
        c ^= generator.row(step.trailing_zeros() as usize);
        best = best.min(c.count_ones());
    }
    Ok(if best == usize::MAX { generator.cols() } else { best })
}

pub fn parse_generator(text: &str) -> Result<CodeSpec> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header `n k`".into(),
    })?;
    let fields: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: hline,
            msg: format!("bad header `{header}`: {e}"),
        })?;
    let (n, k, d) = match fields[..] {
        [n, k] => (n, k, None),
        [n, k, d] => (n, k, Some(d)),
        _ => {
            return Err(Error::Parse {
                line: hline,
                msg: format!("header must be `n k` or `n k d`, got `{header}`"),
            })
        }
    };
    if k == 0 || k > n {
        return Err(Error::Parse {
            line: hline,
            msg: format!("need 0 < k ≤ n, got n = {n}, k = {k}"),
        });
    }
    let mut rows = Vec::with_capacity(k);
    let mut last_line = hline;
    for (line, l) in lines {
        if rows.len() == k {
            return Err(Error::Parse {
                line,
                msg: format!("unexpected content after {k} rows"),
            });
        }
        let row = BitVec::parse(l).ok_or_else(|| Error::Parse {
            line,
            msg: "row must contain only '0' and '1'".into(),
        })?;
        if row.len() != n {
            return Err(Error::Parse {
                line,
                msg: format!("row has {} columns, expected {n}", row.len()),
            });
        }
        rows.push(row);
        last_line = line;
    }
    if rows.len() < k {
        return Err(Error::Parse {
            line: last_line + 1,
            msg: format!("truncated: expected {k} rows, found {}", rows.len()),
        });
    }
    let raw = BitMatrix::from_rows(rows)?;
    let (g, _) = systematic_form(&raw)?;
    let d_h = match d {
        Some(d) => d,
        None if k <= MAX_EXHAUSTIVE_K => min_distance_exhaustive(&g)?,
        None => {
            return Err(Error::Parse {
                line: hline,
                msg: format!("k = {k} is too large to scan for the minimum distance; give it as `n k d`"),
            })
        }
    };
    Ok(CodeSpec {
        name: format!("code-{n}-{k}"),
        n,
        k,
        d_h: d_h.max(1),
        generator: g,
    })
}

pub fn load_generator(path: impl AsRef<Path>) -> Result<CodeSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut spec = parse_generator(&text)?;
    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
        spec.name = stem.to_string();
    }
    Ok(spec)
}

pub fn format_generator(spec: &CodeSpec) -> String {
    let mut out = format!("{} {} {}\n", spec.n, spec.k, spec.d_h);
    for row in spec.generator.row_slice() {
        out.push_str(&row.to_string());
        out.push('\n');
    }
    out
}

pub fn save_generator(spec: &CodeSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_generator(spec)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// (name, m, designed t) of every bundled extended BCH code.
pub const BUNDLED_PARAMS: &[(&str, u32, usize)] = &[
    ("ebch-8-4", 3, 1),
    ("ebch-16-11", 4, 1),
    ("ebch-32-16", 5, 3),
    ("ebch-64-24", 6, 7),
    ("ebch-64-36", 6, 5),
    ("ebch-64-45", 6, 3),
    ("ebch-128-106", 7, 3),
];

const BUNDLED: &[(&str, &str)] = &[
    ("ebch-8-4", include_str!("../codes/ebch-8-4.txt")),
    ("ebch-16-11", include_str!("../codes/ebch-16-11.txt")),
    ("ebch-32-16", include_str!("../codes/ebch-32-16.txt")),
    ("ebch-64-24", include_str!("../codes/ebch-64-24.txt")),
    ("ebch-64-36", include_str!("../codes/ebch-64-36.txt")),
    ("ebch-64-45", include_str!("../codes/ebch-64-45.txt")),
    ("ebch-128-106", include_str!("../codes/ebch-128-106.txt")),
];
