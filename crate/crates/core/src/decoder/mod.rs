//! Decoding engines.
//!
//! * [`standard_osd`]: sort by reliability, eliminate to the most reliable
//!   basis, reprocess up to order `m` with TEP discarding and early stop.
//! * [`non_ge_osd`]: reprocess up to order `m'` directly on the hard
//!   decisions with the original systematic generator.
//! * [`adaptive_decode`]: picks between the two per frame.
//! * [`ml_oracle`]: exhaustive maximum-likelihood reference for small `k`.

mod ml;
mod search;
mod tep;

use std::time::{Duration, Instant};

use crate::channel::SoftWord;
use crate::codes::CodeSpec;
use crate::gf2::{systematic_form, BitMatrix, BitVec, Permutation};
use crate::reliability::{condition1, ln_bit_correct, BitErrorProfile, ConditionParams};
use crate::Result;

pub use ml::ml_oracle;
pub use tep::{enumerate_teps, Tep, TepIter};

use search::{codeword_from_diff, Basis, SearchConfig};

/// Result of decoding one frame.
#[derive(Clone, Debug)]
pub struct DecodeOutcome {
    /// Decoded codeword in channel order.
    pub codeword: BitVec,
    pub whd: f64,
    pub teps_reencoded: u64,
    pub teps_discarded: u64,
    pub ge_performed: bool,
    pub condition1_fired: bool,
    /// The elimination-free path accepted its candidate.
    pub condition2_fired: bool,
    pub fallback_to_standard: bool,
    /// The standard path stopped before exhausting its patterns.
    pub early_stopped: bool,
    pub elapsed: Duration,
}

impl DecodeOutcome {
    /// Equality of everything except the timing.
    pub fn same_decision(&self, other: &Self) -> bool {
        self.codeword == other.codeword
            && self.whd.to_bits() == other.whd.to_bits()
            && self.teps_reencoded == other.teps_reencoded
            && self.teps_discarded == other.teps_discarded
            && self.ge_performed == other.ge_performed
            && self.condition1_fired == other.condition1_fired
            && self.condition2_fired == other.condition2_fired
            && self.fallback_to_standard == other.fallback_to_standard
            && self.early_stopped == other.early_stopped
    }
}

/// Frame after reliability sorting and elimination.
#[derive(Clone, Debug)]
pub struct OrderedContext {
    pub pi1: Permutation,
    pub pi2: Permutation,
    /// `pi1` followed by `pi2`.
    pub order: Permutation,
    pub g_sys: BitMatrix,
    pub y_ord: BitVec,
    pub alpha_ord: Vec<f64>,
}

impl OrderedContext {
    /// The hard decisions on the most reliable basis.
    pub fn mrb(&self) -> BitVec {
        self.y_ord.slice(0, self.g_sys.rows())
    }

    /// Ordered-domain candidate `(ỹ_B ⊕ e) G̃`.
    pub fn reencode(&self, tep: &Tep) -> BitVec {
        reencode(&self.mrb(), &self.g_sys, tep)
    }

    /// Maps an ordered-domain word back to channel order.
    pub fn to_natural(&self, c: &BitVec) -> BitVec {
        self.order.inverse().apply_bits(c)
    }
}

/// Positions sorted by decreasing reliability, ties by lower index.
pub fn reliability_order(alpha: &[f64]) -> Permutation {
    let mut map: Vec<usize> = (0..alpha.len()).collect();
    map.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]));
    Permutation::from_map(map).expect("sorted indices form a permutation")
}

pub fn preprocess(sw: &SoftWord, g: &BitMatrix) -> Result<OrderedContext> {
    preprocess_sorted(sw, g, reliability_order(&sw.alpha))
}

fn preprocess_sorted(sw: &SoftWord, g: &BitMatrix, pi1: Permutation) -> Result<OrderedContext> {
    let (g_sys, pi2) = systematic_form(&g.permute_columns(&pi1))?;
    let order = pi1.then(&pi2);
    Ok(OrderedContext {
        y_ord: order.apply_bits(&sw.y),
        alpha_ord: order.apply_slice(&sw.alpha),
        pi1,
        pi2,
        order,
        g_sys,
    })
}

/// `(basis ⊕ e) · G` for a generator with `basis.len()` rows.
pub fn reencode(basis: &BitVec, g: &BitMatrix, tep: &Tep) -> BitVec {
    let mut info = basis.clone();
    for &p in tep.positions() {
        info.flip(p);
    }
    g.mat_vec_mul(&info).expect("basis length matches the generator")
}

/// Weighted Hamming distance `Σ (c_i ⊕ y_i) α_i`.
pub fn whd(c: &BitVec, y: &BitVec, alpha: &[f64]) -> f64 {
    assert_eq!(c.len(), y.len());
    assert_eq!(c.len(), alpha.len());
    (c ^ y).ones().map(|i| alpha[i]).sum()
}

fn log1m_all(alpha: &[f64], n0: f64) -> f64 {
    alpha.iter().map(|&a| ln_bit_correct(a, n0)).sum()
}

struct StandardRun {
    outcome: DecodeOutcome,
    history: Vec<f64>,
}

fn run_standard(
    sw: &SoftWord,
    spec: &CodeSpec,
    params: &ConditionParams,
    pi1: Permutation,
    warm_start: Option<(&BitVec, f64)>,
) -> StandardRun {
    let ctx = preprocess_sorted(sw, &spec.generator, pi1).expect("code generators have full rank");
    let (n, k, n0) = (spec.n, spec.k, params.n0);
    let cfg = SearchConfig {
        max_weight: params.order_m.min(k),
        n0,
        log1m_all: log1m_all(&ctx.alpha_ord, n0),
        discard_log: params.discard_log_threshold(),
        accept_log: params.accept_log_threshold(),
    };

    let mut outcome = DecodeOutcome {
        codeword: BitVec::zeros(n),
        whd: f64::INFINITY,
        teps_reencoded: 0,
        teps_discarded: 0,
        ge_performed: true,
        condition1_fired: false,
        condition2_fired: false,
        fallback_to_standard: false,
        early_stopped: false,
        elapsed: Duration::ZERO,
    };

    if let Some((c, d)) = warm_start {
        outcome.codeword = c.clone();
        outcome.whd = d;
    }

    let rows = ctx.g_sys.row_slice();
    let basis = Basis { rows, y: &ctx.y_ord, alpha: &ctx.alpha_ord };
    let res = search::run(&basis, &cfg, outcome.whd);
    outcome.teps_reencoded = res.reencoded;
    outcome.teps_discarded = res.discarded;
    outcome.early_stopped = res.accepted;
    if let Some(d) = &res.best_d {
        outcome.codeword = ctx.to_natural(&codeword_from_diff(&ctx.y_ord, d));
        outcome.whd = res.best_whd;
    }
    StandardRun { outcome, history: res.history }
}

/// Order-`m` OSD over the most reliable basis.
///
/// Patterns whose success probability is at most `tau_p` are skipped and the
/// search stops once a new incumbent reaches success probability `tau`. A
/// warm start seeds the incumbent; the result is never worse than it.
pub fn standard_osd(
    sw: &SoftWord,
    spec: &CodeSpec,
    params: &ConditionParams,
    warm_start: Option<(&BitVec, f64)>,
) -> DecodeOutcome {
    let start = Instant::now();
    let mut out = run_standard(sw, spec, params, reliability_order(&sw.alpha), warm_start).outcome;
    out.elapsed = start.elapsed();
    out
}

struct NonGeRun {
    outcome: DecodeOutcome,
    accepted: bool,
    history: Vec<f64>,
}

fn run_non_ge(sw: &SoftWord, spec: &CodeSpec, params: &ConditionParams) -> NonGeRun {
    let (n, k) = (spec.n, spec.k);
    let cfg = SearchConfig {
        max_weight: params.order_m_prime.min(k),
        n0: params.n0,
        log1m_all: log1m_all(&sw.alpha, params.n0),
        discard_log: params.discard_log_threshold(),
        accept_log: params.accept_log_threshold(),
    };
    let basis = Basis { rows: spec.generator.row_slice(), y: &sw.y, alpha: &sw.alpha };
    let res = search::run(&basis, &cfg, f64::INFINITY);
    let codeword = match &res.best_d {
        Some(d) => codeword_from_diff(&sw.y, d),
        None => spec.generator.mat_vec_mul(&sw.y.slice(0, k)).expect("dimensions match"),
    };
    let whd_value = if res.best_d.is_some() { res.best_whd } else { whd(&codeword, &sw.y, &sw.alpha) };
    debug_assert_eq!(codeword.len(), n);
    NonGeRun {
        outcome: DecodeOutcome {
            codeword,
            whd: whd_value,
            teps_reencoded: res.reencoded,
            teps_discarded: res.discarded,
            ge_performed: false,
            condition1_fired: false,
            condition2_fired: res.accepted,
            fallback_to_standard: false,
            early_stopped: false,
            elapsed: Duration::ZERO,
        },
        accepted: res.accepted,
        history: res.history,
    }
}

/// Order-`m'` reprocessing on the unsorted hard decisions with the original
/// generator. `accepted` reports whether a candidate passed the success test.
pub fn non_ge_osd(sw: &SoftWord, spec: &CodeSpec, params: &ConditionParams) -> (DecodeOutcome, bool) {
    let start = Instant::now();
    let run = run_non_ge(sw, spec, params);
    let mut out = run.outcome;
    out.elapsed = start.elapsed();
    (out, run.accepted)
}

/// Decodes with the elimination-free path when the basis coverage test
/// allows it, falling back to (or going straight to) the standard path.
pub fn adaptive_decode(sw: &SoftWord, spec: &CodeSpec, params: &ConditionParams) -> DecodeOutcome {
    let start = Instant::now();
    let mut out = adaptive_inner(sw, spec, params).0;
    out.elapsed = start.elapsed();
    out
}

/// Adaptive decode plus the Non-GE incumbent (when fallback happened) and
/// every incumbent WHD in the order it was recorded.
fn adaptive_inner(sw: &SoftWord, spec: &CodeSpec, params: &ConditionParams) -> (DecodeOutcome, Option<f64>, Vec<f64>) {
    let k = spec.k;
    let pi1 = reliability_order(&sw.alpha);
    let profile = BitErrorProfile::new(&sw.alpha, &pi1, k, params.n0);
    if !condition1(&profile, params, k) {
        let run = run_standard(sw, spec, params, pi1, None);
        return (run.outcome, None, run.history);
    }
    let non_ge = run_non_ge(sw, spec, params);
    let mut history = non_ge.history;
    if non_ge.accepted {
        let mut out = non_ge.outcome;
        out.condition1_fired = true;
        return (out, None, history);
    }
    let incumbent = non_ge.outcome;
    let run = run_standard(sw, spec, params, pi1, Some((&incumbent.codeword, incumbent.whd)));
    history.extend(run.history);
    let mut out = run.outcome;
    out.teps_reencoded += incumbent.teps_reencoded;
    out.teps_discarded += incumbent.teps_discarded;
    out.condition1_fired = true;
    out.fallback_to_standard = true;
    (out, Some(incumbent.whd), history)
}
