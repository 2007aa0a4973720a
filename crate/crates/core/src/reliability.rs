//! Probability kernel shared by the decoders.
//!
//! Bit error probabilities follow the BPSK/AWGN posterior
//! `P = 1 / (1 + exp(4α/N0))`. Products of `(1 - P)` are carried as log sums
//! so that very reliable frames never underflow.

use statrs::function::factorial::ln_binomial as ln_binomial_gamma;

use crate::channel::NoiseModel;
use crate::gf2::Permutation;
use crate::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 0.05;
pub const DEFAULT_TAU: f64 = 0.95;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `ln Q(x)`, switching to the asymptotic expansion once `Q` would underflow.
pub fn ln_q_function(x: f64) -> f64 {
    if x < 30.0 {
        return q_function(x).ln();
    }
    let z2 = x * x;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    -0.5 * z2 - (x * (2.0 * std::f64::consts::PI).sqrt()).ln() + series.ln()
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(1 - e^x)` for `x ≤ 0`.
#[inline]
pub(crate) fn ln_1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Error probability of a hard decision with reliability `alpha`.
/// Saturates to exactly 0 once `exp(4α/N0)` overflows.
#[inline]
pub fn ordered_bit_error(alpha: f64, n0: f64) -> f64 {
    1.0 / (1.0 + (4.0 * alpha / n0).exp())
}

/// `ln(1 - P)` for the bit error probability of [`ordered_bit_error`].
#[inline]
pub fn ln_bit_correct(alpha: f64, n0: f64) -> f64 {
    -softplus(-4.0 * alpha / n0)
}

/// Exact `C(n, i)` when it fits in 128 bits (always true for `n ≤ 128`).
pub fn binomial(n: usize, i: usize) -> Option<u128> {
    if i > n {
        return Some(0);
    }
    let i = i.min(n - i);
    let mut c: u128 = 1;
    for j in 0..i {
        match c.checked_mul((n - j) as u128) {
            Some(v) => c = v / (j as u128 + 1),
            None => return pascal_entry(n, i),
        }
    }
    Some(c)
}

fn pascal_entry(n: usize, i: usize) -> Option<u128> {
    let mut row: Vec<u128> = vec![1];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for j in 1..row.len() {
            next[j] = row[j - 1].checked_add(row[j])?;
        }
        row = next;
    }
    row.get(i).copied()
}

/// `ln C(n, i)`: exact for `n ≤ 128`, log-gamma beyond.
pub fn ln_binomial(n: usize, i: usize) -> f64 {
    if i > n {
        return f64::NEG_INFINITY;
    }
    if n <= 128 {
        if let Some(c) = binomial(n, i) {
            return (c as f64).ln();
        }
    }
    ln_binomial_gamma(n as u64, i as u64)
}

/// `N_m = Σ_{i=0}^{m} C(k, i)`, the TEP budget of an order-`m` search.
pub fn tep_budget(k: usize, m: usize) -> u128 {
    (0..=m.min(k)).map(|i| binomial(k, i).unwrap_or(u128::MAX)).sum()
}

fn binomial_log_term(k: usize, i: usize, ln_p: f64, ln_q: f64) -> f64 {
    let a = if i == 0 { 0.0 } else { i as f64 * ln_p };
    let b = if i == k { 0.0 } else { (k - i) as f64 * ln_q };
    ln_binomial(k, i) + a + b
}

/// Probability that at most `m` of `k` independent bits with error
/// probability `p` are in error.
pub fn plist_online(p: f64, k: usize, m: usize) -> Result<f64> {
    if m > k {
        return Err(Error::OrderTooLarge { order: m, k });
    }
    if p <= 0.0 || m == k {
        return Ok(1.0);
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let lse = log_sum_exp((0..=m).map(|i| binomial_log_term(k, i, ln_p, ln_q)));
    Ok(lse.exp().min(1.0))
}

/// `1 - plist_online(p, k, m)`, summed from the upper tail so that tiny
/// miss probabilities keep their precision.
pub fn plist_miss(p: f64, k: usize, m: usize) -> Result<f64> {
    if m > k {
        return Err(Error::OrderTooLarge { order: m, k });
    }
    if p <= 0.0 || m == k {
        return Ok(0.0);
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let lse = log_sum_exp((m + 1..=k).map(|i| binomial_log_term(k, i, ln_p, ln_q)));
    Ok(lse.exp().min(1.0))
}

/// Per-frame bit error probabilities and the cached log sums reused by every
/// candidate of the frame.
#[derive(Clone, Debug)]
pub struct BitErrorProfile {
    /// `P(ĩ)` for positions sorted by decreasing reliability.
    pub p_ordered: Vec<f64>,
    /// `P(i)` in channel order.
    pub p_unordered: Vec<f64>,
    /// Mean of `p_ordered[..k]`.
    pub p_mrb_mean: f64,
    /// Mean of `p_unordered[..k]`.
    pub p_prime_mean: f64,
    /// `Σ ln(1 - P(i))` over all `n` positions.
    pub log1m_prod_all: f64,
    /// `Σ ln(1 - P(i))` over the first `k` channel positions.
    pub log1m_prod_k: f64,
}

impl BitErrorProfile {
    /// `pi1` must sort `alpha` by decreasing reliability.
    pub fn new(alpha: &[f64], pi1: &Permutation, k: usize, n0: f64) -> Self {
        assert_eq!(alpha.len(), pi1.len());
        assert!(k <= alpha.len());
        let p_unordered: Vec<f64> = alpha.iter().map(|&a| ordered_bit_error(a, n0)).collect();
        let p_ordered = pi1.apply_slice(&p_unordered);
        let mean = |v: &[f64]| if k == 0 { 0.0 } else { v[..k].iter().sum::<f64>() / k as f64 };
        let ln1m: Vec<f64> = alpha.iter().map(|&a| ln_bit_correct(a, n0)).collect();
        Self {
            p_mrb_mean: mean(&p_ordered),
            p_prime_mean: mean(&p_unordered),
            log1m_prod_all: ln1m.iter().sum(),
            log1m_prod_k: ln1m[..k].iter().sum(),
            p_ordered,
            p_unordered,
        }
    }
}

/// Decoder thresholds, together with the channel noise density the
/// decoders need to turn reliabilities into error probabilities.
///
/// `tau >= 1` disables early acceptance and `tau_p == 0` disables TEP
/// discarding, which together turn the standard path into plain OSD.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionParams {
    pub lambda: f64,
    pub tau: f64,
    pub tau_p: f64,
    pub order_m: usize,
    pub order_m_prime: usize,
    pub n0: f64,
}

impl ConditionParams {
    pub fn new(order_m: usize, lambda: f64, tau: f64, tau_p: f64, n0: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Config(format!("lambda must lie in (0, 1], got {lambda}")));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(Error::Config(format!("tau must lie in [0, 1], got {tau}")));
        }
        if !(tau_p >= 0.0 && tau_p.is_finite()) {
            return Err(Error::Config(format!("tau_p must be a finite non-negative number, got {tau_p}")));
        }
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::Config(format!("N0 must be positive and finite, got {n0}")));
        }
        Ok(Self {
            lambda,
            tau,
            tau_p,
            order_m,
            order_m_prime: order_m.saturating_sub(1),
            n0,
        })
    }

    /// Thresholds for a given channel, with `tau_p` from [`discard_threshold`].
    pub fn for_channel(order_m: usize, lambda: f64, tau: f64, noise: NoiseModel, k: usize) -> Result<Self> {
        let n0 = noise.n0();
        Self::new(order_m, lambda, tau, discard_threshold(n0, k, order_m.saturating_sub(1)), n0)
    }

    /// Plain order-`m` OSD: no discarding, no early stop.
    pub fn exhaustive(order_m: usize, noise: NoiseModel) -> Self {
        Self::new(order_m, DEFAULT_LAMBDA, 1.0, 0.0, noise.n0()).expect("constant parameters are valid")
    }

    /// `ln((1 - τ)/τ)`: a candidate is accepted when its log odds ratio is at
    /// most this value. `None` when acceptance is disabled.
    pub(crate) fn accept_log_threshold(&self) -> Option<f64> {
        if self.tau >= 1.0 {
            None
        } else if self.tau <= 0.0 {
            Some(f64::INFINITY)
        } else {
            Some((1.0 - self.tau).ln() - self.tau.ln())
        }
    }

    /// `ln τ_p`, or `None` when discarding is disabled.
    pub(crate) fn discard_log_threshold(&self) -> Option<f64> {
        (self.tau_p > 0.0).then(|| self.tau_p.ln())
    }
}

/// Gate for trying the elimination-free decoder first:
/// `P'_list(m') ≥ (1 - λ) P_list(m)`.
pub fn condition1(profile: &BitErrorProfile, params: &ConditionParams, k: usize) -> bool {
    let m = params.order_m.min(k);
    let m_prime = params.order_m_prime.min(k);
    let p_list = plist_online(profile.p_mrb_mean, k, m).expect("order clamped to k");
    let p_list_prime = plist_online(profile.p_prime_mean, k, m_prime).expect("order clamped to k");
    p_list_prime >= (1.0 - params.lambda) * p_list
}

/// Folded-normal reliability `|r|`, `r ~ N(±1, N0/2)`.
struct Reliability {
    sigma: f64,
}

impl Reliability {
    fn upper_tail(&self, x: f64) -> f64 {
        q_function((x - 1.0) / self.sigma) + q_function((x + 1.0) / self.sigma)
    }

    fn cdf(&self, x: f64) -> f64 {
        (q_function((1.0 - x) / self.sigma) - q_function((1.0 + x) / self.sigma)).max(0.0)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        let s2 = 2.0 * self.sigma * self.sigma;
        let a = -(x - 1.0).powi(2) / s2;
        let b = -(x + 1.0).powi(2) / s2;
        let hi = a.max(b);
        hi + ((a - hi).exp() + (b - hi).exp()).ln() - (std::f64::consts::PI * s2).sqrt().ln()
    }

    /// Error probability of a bit known to be more reliable than `x`.
    fn conditional_error(&self, x: f64) -> f64 {
        let ln_err = ln_q_function((x + 1.0) / self.sigma);
        let ln_ok = ln_q_function((x - 1.0) / self.sigma);
        1.0 / (1.0 + (ln_ok - ln_err).exp())
    }
}

/// Density of the `(k+1)`-th largest of `n` i.i.d. reliabilities.
fn order_statistic_density(rel: &Reliability, n: usize, k: usize, x: f64) -> f64 {
    let up = rel.upper_tail(x);
    let lo = rel.cdf(x);
    if (k > 0 && up <= 0.0) || (n - k - 1 > 0 && lo <= 0.0) {
        return 0.0;
    }
    let mut ln = (n as f64).ln() + ln_binomial(n - 1, k) + rel.ln_pdf(x);
    if k > 0 {
        ln += k as f64 * up.ln();
    }
    if n - k - 1 > 0 {
        ln += (n - k - 1) as f64 * lo.ln();
    }
    ln.exp()
}

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature to absolute tolerance `tol`.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    const INITIAL: usize = 64;
    const MAX_INTERVALS: usize = 20_000;
    let width = (b - a) / INITIAL as f64;
    let mut pending: Vec<(f64, f64, f64, f64)> = (0..INITIAL)
        .map(|i| {
            let lo = a + i as f64 * width;
            let hi = if i + 1 == INITIAL { b } else { lo + width };
            let (v, e) = gauss_kronrod(&f, lo, hi);
            (lo, hi, v, e)
        })
        .collect();
    for _ in 0..MAX_INTERVALS {
        let total_err: f64 = pending.iter().map(|s| s.3).sum();
        if total_err <= tol {
            return Ok(pending.iter().map(|s| s.2).sum());
        }
        let (idx, _) = pending
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = pending.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (v, e) = gauss_kronrod(&f, l, h);
            pending.push((l, h, v, e));
        }
    }
    let total_err: f64 = pending.iter().map(|s| s.3).sum();
    Err(Error::Integration(format!(
        "error estimate {total_err:.3e} above tolerance {tol:.1e} after {MAX_INTERVALS} subdivisions"
    )))
}

const OFFLINE_TOL: f64 = 1e-9;

fn plist_offline_with<F: Fn(f64, usize) -> f64>(n0: f64, n: usize, k: usize, m: usize, coverage: F) -> Result<f64> {
    if n0.is_nan() || n0 <= 0.0 {
        return Err(Error::Config(format!("N0 must be positive, got {n0}")));
    }
    if k >= n {
        return Err(Error::Config(format!("need k < n, got k = {k}, n = {n}")));
    }
    if m > k {
        return Err(Error::OrderTooLarge { order: m, k });
    }
    let rel = Reliability { sigma: (n0 / 2.0).sqrt() };
    let upper = 1.0 + 8.0 * rel.sigma;
    // P(α̃_{k+1} > upper) ≤ n · P(α > upper).
    let tail = n as f64 * rel.upper_tail(upper);
    if tail > OFFLINE_TOL {
        return Err(Error::Integration(format!("tail mass {tail:.3e} beyond the integration range")));
    }
    let integrand = |x: f64| {
        let density = order_statistic_density(&rel, n, k, x);
        if density == 0.0 {
            return 0.0;
        }
        coverage(rel.conditional_error(x), m) * density
    };
    integrate(integrand, 0.0, upper, OFFLINE_TOL - tail)
}

/// Channel-averaged probability that at most `m` of the `k` most reliable of
/// `n` bits are in error, integrating over the `(k+1)`-th reliability.
pub fn plist_offline(n0: f64, n: usize, k: usize, m: usize) -> Result<f64> {
    plist_offline_with(n0, n, k, m, |p, m| plist_online(p, k, m).expect("m ≤ k"))
}

/// `1 - plist_offline`, integrated directly.
pub fn plist_offline_miss(n0: f64, n: usize, k: usize, m: usize) -> Result<f64> {
    plist_offline_with(n0, n, k, m, |p, m| plist_miss(p, k, m).expect("m ≤ k"))
}

/// Coverage probability for `k` channel-order bits with the raw error rate
/// `Q(sqrt(2/N0))`.
pub fn plist_unordered(n0: f64, k: usize, m: usize) -> Result<f64> {
    plist_online(q_function((2.0 / n0).sqrt()), k, m)
}

pub fn plist_unordered_miss(n0: f64, k: usize, m: usize) -> Result<f64> {
    plist_miss(q_function((2.0 / n0).sqrt()), k, m)
}

/// `ln P(e)`: the probability that flipping exactly the positions of `tep`
/// (indices into `alpha_basis`) removes every error in the basis.
pub fn tep_success_prob(tep: &[usize], alpha_basis: &[f64], n0: f64) -> f64 {
    let flips: f64 = tep.iter().map(|&i| alpha_basis[i]).sum();
    let log1m_k: f64 = alpha_basis.iter().map(|&a| ln_bit_correct(a, n0)).sum();
    log_tep_success(flips, log1m_k, n0)
}

/// `ln P(e)` from the summed reliability of the flipped positions and the
/// cached `Σ ln(1 - P(i))` over the basis.
#[inline]
pub fn log_tep_success(flipped_alpha: f64, log1m_basis: f64, n0: f64) -> f64 {
    -4.0 * flipped_alpha / n0 + log1m_basis
}

/// `P(e)` as the literal product `Π_{flipped} P(i) · Π_{kept} (1 - P(i))`.
pub fn tep_success_prob_product(tep: &[usize], alpha_basis: &[f64], n0: f64) -> f64 {
    alpha_basis
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let p = ordered_bit_error(a, n0);
            if tep.contains(&i) {
                p
            } else {
                1.0 - p
            }
        })
        .product()
}

/// Log of the odds term `R` in `Pr(c_e | d_e) = 1 / (1 + R)`.
#[inline]
pub fn codeword_log_odds(whd_total: f64, log_tep_prob: f64, log1m_all: f64, n0: f64, n: usize, k: usize) -> f64 {
    let ln_fail = if log_tep_prob >= 0.0 { f64::NEG_INFINITY } else { ln_1m_exp(log_tep_prob) };
    ln_fail - (n - k) as f64 * std::f64::consts::LN_2 + 4.0 * whd_total / n0 - log1m_all
}

/// Probability that a candidate at weighted distance `whd_total` from the hard
/// decisions is the transmitted codeword.
pub fn codeword_success_prob(whd_total: f64, log_tep_prob: f64, log1m_all: f64, n0: f64, n: usize, k: usize) -> f64 {
    let log_r = codeword_log_odds(whd_total, log_tep_prob, log1m_all, n0, n, k);
    if log_r > 0.0 {
        let e = (-log_r).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + log_r.exp())
    }
}

/// TEP discarding threshold `0.002 · sqrt(p' / N_{m'})`, with
/// `N_{m'} = Σ_{i=1}^{m'} C(k, i)` taken as 1 when `m' = 0`.
pub fn discard_threshold(n0: f64, k: usize, order_m_prime: usize) -> f64 {
    let n_m: f64 = (1..=order_m_prime.min(k))
        .map(|i| binomial(k, i).map_or(f64::INFINITY, |c| c as f64))
        .sum();
    let n_m = if n_m == 0.0 { 1.0 } else { n_m };
    0.002 * (q_function((2.0 / n0).sqrt()) / n_m).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
    }

    /// Composite Simpson of the standard normal density on [x, x + 20].
    fn q_by_quadrature(x: f64) -> f64 {
        let steps = 400_000;
        let h = 20.0 / steps as f64;
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = pdf(x) + pdf(x + 20.0);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * pdf(x + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert!((q_function(-1.7) - (1.0 - q_function(1.7))).abs() < 1e-15);
        assert!(rel_close(q_function(1.0), 0.158_655_253_931_457_05, 1e-12));
        for x in [1.0, 2.5, 4.0, 6.0, 8.0] {
            let oracle = q_by_quadrature(x);
            assert!(rel_close(q_function(x), oracle, 1e-11), "x = {x}: {} vs {oracle}", q_function(x));
        }
        // 40-digit reference values.
        assert!(rel_close(q_function(6.0), 9.865_876_450_376_98e-10, 1e-12));
        assert!(rel_close(q_function(8.0), 6.220_960_574_271_784e-16, 1e-12));
    }

    #[test]
    fn ln_q_matches_direct_and_extends() {
        for x in [0.5, 5.0, 20.0, 29.0] {
            assert!(rel_close(ln_q_function(x), q_function(x).ln(), 1e-10));
        }
        // Continuity across the switch point.
        assert!(rel_close(ln_q_function(30.0 - 1e-9), ln_q_function(30.0), 1e-9));
        assert!(ln_q_function(100.0).is_finite());
    }

    #[test]
    fn bit_error_examples() {
        assert_eq!(ordered_bit_error(0.0, 1.0), 0.5);
        assert!(rel_close(ordered_bit_error(1.0, 1.0), 0.017_986_209_962_091_56, 1e-13));
        assert_eq!(ordered_bit_error(1000.0, 0.5), 0.0);
        assert!(rel_close(ln_bit_correct(0.3, 0.7), (1.0 - ordered_bit_error(0.3, 0.7)).ln(), 1e-13));
        assert_eq!(ln_bit_correct(1000.0, 0.5), 0.0);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(36, 3), Some(7140));
        assert_eq!(binomial(128, 64), Some(23_951_146_041_928_082_866_135_587_776_380_551_750));
        assert_eq!(binomial(5, 7), Some(0));
        assert_eq!(tep_budget(36, 3), 7807);
        assert_eq!(tep_budget(106, 2), 5672);
        assert!(rel_close(ln_binomial(300, 150), ln_binomial_gamma(300, 150), 1e-12));
    }

    #[test]
    fn plist_examples() {
        assert_eq!(plist_online(0.0, 36, 2).unwrap(), 1.0);
        assert!((plist_online(0.1, 2, 1).unwrap() - 0.99).abs() < 1e-14);
        assert_eq!(plist_online(0.3, 12, 12).unwrap(), 1.0);
        assert!(matches!(plist_online(0.1, 3, 4), Err(Error::OrderTooLarge { .. })));
        for (p, k, m) in [(0.01, 36, 3), (0.2, 64, 4), (0.45, 24, 10)] {
            let sum = plist_online(p, k, m).unwrap() + plist_miss(p, k, m).unwrap();
            assert!((sum - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn plist_matches_direct_domain() {
        for (p, k, m) in [(0.01f64, 36, 3), (0.07, 64, 2), (0.3, 20, 5)] {
            let direct: f64 = (0..=m)
                .map(|i| binomial(k, i).unwrap() as f64 * p.powi(i as i32) * (1.0 - p).powi((k - i) as i32))
                .sum();
            assert!(rel_close(plist_online(p, k, m).unwrap(), direct, 1e-10));
        }
    }

    #[test]
    fn condition1_examples() {
        let profile = |p: f64, pp: f64| BitErrorProfile {
            p_ordered: vec![],
            p_unordered: vec![],
            p_mrb_mean: p,
            p_prime_mean: pp,
            log1m_prod_all: 0.0,
            log1m_prod_k: 0.0,
        };
        let params = ConditionParams::new(3, 1.0, 0.95, 0.0, 1.0).unwrap();
        assert!(condition1(&profile(0.0, 0.5), &params, 36));

        // Equal inputs and equal orders: equality holds for any λ.
        let mut same = ConditionParams::new(3, 1e-9, 0.95, 0.0, 1.0).unwrap();
        same.order_m_prime = 3;
        assert!(condition1(&profile(0.02, 0.02), &same, 36));

        // P_list(0.01, m=3) = 0.999543837570, P'_list(0.02, m'=2) = 0.965017471781
        // (40-digit evaluation); 0.965017 ≥ 0.95 · 0.999544 = 0.949567.
        let params = ConditionParams::new(3, 0.05, 0.95, 0.0, 1.0).unwrap();
        assert!((plist_online(0.01, 36, 3).unwrap() - 0.999_543_837_570_324_8).abs() < 1e-13);
        assert!((plist_online(0.02, 36, 2).unwrap() - 0.965_017_471_781_096_1).abs() < 1e-13);
        assert!(condition1(&profile(0.01, 0.02), &params, 36));
        assert!(!condition1(&profile(0.01, 0.03), &params, 36));
    }

    #[test]
    fn condition1_is_monotone_in_lambda() {
        let lambdas = [0.001, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0];
        for pp in [0.005, 0.01, 0.02, 0.03, 0.05] {
            let profile = BitErrorProfile {
                p_ordered: vec![],
                p_unordered: vec![],
                p_mrb_mean: 0.004,
                p_prime_mean: pp,
                log1m_prod_all: 0.0,
                log1m_prod_k: 0.0,
            };
            let fired: Vec<bool> = lambdas
                .iter()
                .map(|&l| condition1(&profile, &ConditionParams::new(3, l, 0.95, 0.0, 1.0).unwrap(), 36))
                .collect();
            assert!(fired.windows(2).all(|w| !w[0] || w[1]), "{fired:?}");
        }
    }

    #[test]
    fn profile_fields() {
        let alpha = [0.9f64, 0.1, 1.4, 0.5, 0.0, 2.0];
        let mut order: Vec<usize> = (0..6).collect();
        order.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]));
        let pi1 = Permutation::from_map(order).unwrap();
        let n0 = 0.7;
        let prof = BitErrorProfile::new(&alpha, &pi1, 3, n0);
        assert!(prof.p_ordered.windows(2).all(|w| w[0] <= w[1]));
        assert!(prof.p_unordered.iter().all(|&p| (0.0..=0.5).contains(&p)));
        let direct_k: f64 = alpha[..3].iter().map(|&a| (1.0 - ordered_bit_error(a, n0)).ln()).sum();
        assert!(rel_close(prof.log1m_prod_k, direct_k, 1e-12));
        let mrb: f64 = [2.0, 1.4, 0.9].iter().map(|&a| ordered_bit_error(a, n0)).sum::<f64>() / 3.0;
        assert!(rel_close(prof.p_mrb_mean, mrb, 1e-14));
    }

    #[test]
    fn tep_probability_forms_agree() {
        let alpha = [0.9, 0.5, 0.2];
        let log_form = tep_success_prob(&[2], &alpha, 1.0);
        let product = tep_success_prob_product(&[2], &alpha, 1.0);
        assert!(rel_close(log_form.exp(), product, 1e-10));

        let empty: f64 = alpha.iter().map(|&a| 1.0 - ordered_bit_error(a, 1.0)).product();
        assert!(rel_close(tep_success_prob(&[], &alpha, 1.0).exp(), empty, 1e-12));
        assert!(tep_success_prob(&[], &[50.0; 8], 0.1).exp() > 1.0 - 1e-12);
    }

    #[test]
    fn codeword_probability_examples() {
        // Near-noiseless perfect match.
        let alpha = [1.0; 8];
        let n0 = 0.1;
        let log1m: f64 = alpha.iter().map(|&a| ln_bit_correct(a, n0)).sum();
        let lpe = tep_success_prob(&[], &alpha[..4], n0);
        assert!(codeword_success_prob(0.0, lpe, log1m, n0, 8, 4) >= 0.999);
        // Hopeless candidate.
        assert_eq!(codeword_success_prob(1e6, lpe, log1m, n0, 8, 4), 0.0);

        // Toy frame against a 40-digit evaluation.
        let alpha = [0.9, 0.5, 0.2, 1.3, 0.7, 0.05, 1.1, 0.4];
        let n0 = 0.8;
        let log1m: f64 = alpha.iter().map(|&a| ln_bit_correct(a, n0)).sum();
        let lpe = tep_success_prob(&[2], &alpha[..4], n0);
        assert!(rel_close(lpe.exp(), 0.245_440_315_141_266, 1e-12));
        let pr = codeword_success_prob(alpha[2] + alpha[5], lpe, log1m, n0, 8, 4);
        assert!(rel_close(pr, 0.659_891_748_777_104_3, 1e-12), "{pr}");
    }

    #[test]
    fn discard_threshold_examples() {
        // Choose N0 so that Q(sqrt(2/N0)) = 0.01.
        let mut lo = 0.1f64;
        let mut hi = 5.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q_function((2.0 / mid).sqrt()) < 0.01 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tp = discard_threshold(lo, 36, 1);
        assert!(rel_close(tp, 0.002 * (0.01f64 / 36.0).sqrt(), 1e-9));
        assert!(discard_threshold(1e-3, 36, 2) < 1e-100);
        assert!(discard_threshold(0.5, 64, 2) < discard_threshold(0.5, 36, 2));
        assert!(discard_threshold(0.5, 36, 3) < discard_threshold(0.5, 36, 2));
        assert!(discard_threshold(0.5, 36, 0) > 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(ConditionParams::new(3, 0.0, 0.95, 0.0, 1.0).is_err());
        assert!(ConditionParams::new(3, 0.05, 1.5, 0.0, 1.0).is_err());
        assert!(ConditionParams::new(3, 0.05, 0.95, -1.0, 1.0).is_err());
        let p = ConditionParams::new(0, 0.05, 0.95, 0.0, 1.0).unwrap();
        assert_eq!(p.order_m_prime, 0);
        let p = ConditionParams::new(3, 0.05, 0.95, 0.0, 1.0).unwrap();
        assert_eq!(p.order_m_prime, 2);
        assert!(ConditionParams::new(3, 0.05, 0.95, 0.0, 0.0).is_err());
        let plain = ConditionParams::exhaustive(3, NoiseModel::from_n0(0.5));
        assert!(plain.accept_log_threshold().is_none());
        assert!(plain.discard_log_threshold().is_none());
    }

    #[test]
    fn offline_full_order_is_one() {
        for n0 in [0.2, 1.0, 3.0] {
            let v = plist_offline(n0, 64, 36, 36).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "n0 = {n0}: {v}");
        }
    }

    #[test]
    fn offline_density_integrates_to_one() {
        let rel = Reliability { sigma: (0.6f64 / 2.0).sqrt() };
        let mass = integrate(|x| order_statistic_density(&rel, 64, 36, x), 0.0, 1.0 + 8.0 * rel.sigma, 1e-10).unwrap();
        assert!((mass - 1.0).abs() < 1e-9);
    }

    #[test]
    fn offline_converges_to_unordered_at_high_snr() {
        let gaps: Vec<f64> = [0.1, 0.05, 0.02, 0.01]
            .iter()
            .map(|&n0| {
                let ordered = plist_offline(n0, 64, 36, 3).unwrap();
                let unordered = plist_unordered(n0, 36, 2).unwrap();
                assert!(ordered > 1.0 - 1e-9);
                (ordered - unordered).abs()
            })
            .collect();
        assert!(gaps.iter().all(|&g| g < 1e-8), "{gaps:?}");
    }

    #[test]
    fn asymptotic_gap_shrinks() {
        // P_list with the limiting MRB error rate 1/(1+e^{4/N0}) against
        // P'_list with the raw rate Q(sqrt(2/N0)), one order lower.
        let gaps: Vec<f64> = [0.05, 0.02, 0.01]
            .iter()
            .map(|&n0| {
                let miss = plist_miss(ordered_bit_error(1.0, n0), 36, 3).unwrap();
                let miss_prime = plist_unordered_miss(n0, 36, 2).unwrap();
                (miss_prime - miss).abs()
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[2] < 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn plist_monotone(p in 0.0f64..0.5, k in 1usize..80, m in 0usize..6) {
                let m = m.min(k - 1);
                let a = plist_online(p, k, m).unwrap();
                let b = plist_online(p, k, m + 1).unwrap();
                prop_assert!(b >= a - 1e-15);
                let c = plist_online((p + 0.01).min(0.5), k, m).unwrap();
                prop_assert!(c <= a + 1e-15);
                prop_assert!((0.0..=1.0).contains(&a));
            }

            #[test]
            fn tep_forms_agree(
                alpha in proptest::collection::vec(0.0f64..3.0, 1..40),
                n0 in 0.2f64..3.0,
                mask in any::<u64>(),
            ) {
                let tep: Vec<usize> = (0..alpha.len()).filter(|i| mask >> (i % 64) & 1 == 1).take(4).collect();
                let a = tep_success_prob(&tep, &alpha, n0).exp();
                let b = tep_success_prob_product(&tep, &alpha, n0);
                prop_assert!((a - b).abs() <= 1e-10 * b.max(1e-300));
            }

            #[test]
            fn success_probability_in_unit_interval(
                whd in 0.0f64..20.0,
                lpe in -50.0f64..0.0,
                n0 in 0.1f64..3.0,
            ) {
                let pr = codeword_success_prob(whd, lpe, -1.0, n0, 64, 36);
                prop_assert!((0.0..=1.0).contains(&pr));
            }
        }
    }
}
