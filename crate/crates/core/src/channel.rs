//! BPSK over real AWGN.
//!
//! Codeword bit `c` maps to `(-1)^c`; the receiver sees `r = s + w` with `w`
//! i.i.d. `N(0, N0/2)`. SNR is defined as `2/N0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::gf2::BitVec;
use crate::reliability::q_function;

/// Noise level of the channel, stored as the single-sided density `N0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    n0: f64,
}

impl NoiseModel {
    pub fn from_n0(n0: f64) -> Self {
        assert!(n0 > 0.0 && n0.is_finite(), "N0 must be positive and finite, got {n0}");
        Self { n0 }
    }

    pub fn from_snr_db(snr_db: f64) -> Self {
        Self::from_n0(2.0 / 10f64.powf(snr_db / 10.0))
    }

    #[inline]
    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (2.0 / self.n0).log10()
    }

    pub fn sigma(&self) -> f64 {
        (self.n0 / 2.0).sqrt()
    }
}

/// One received frame.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftWord {
    pub r: Vec<f64>,
    pub alpha: Vec<f64>,
    pub y: BitVec,
}

impl SoftWord {
    /// Derives reliabilities and hard decisions from channel outputs.
    /// A zero sample decides to bit 0.
    pub fn from_received(r: Vec<f64>) -> Self {
        let alpha = r.iter().map(|x| x.abs()).collect();
        let y = BitVec::from_bits(r.iter().map(|&x| x < 0.0));
        Self { r, alpha, y }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

pub fn modulate(c: &BitVec) -> Vec<f64> {
    c.iter().map(|b| if b { -1.0 } else { 1.0 }).collect()
}

/// Adds Gaussian noise of variance `N0/2` to `s`.
pub fn transmit<R: Rng + ?Sized>(s: &[f64], noise: NoiseModel, rng: &mut R) -> SoftWord {
    let sigma = noise.sigma();
    let r = s
        .iter()
        .map(|&x| x + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    SoftWord::from_received(r)
}

/// Adds an explicit noise vector; a zero vector gives the noiseless frame.
pub fn transmit_with_noise(s: &[f64], w: &[f64]) -> SoftWord {
    assert_eq!(s.len(), w.len());
    SoftWord::from_received(s.iter().zip(w).map(|(a, b)| a + b).collect())
}

/// Raw hard-decision bit error probability `Q(sqrt(2/N0))`.
pub fn bitwise_error_prob_raw(noise: NoiseModel) -> f64 {
    q_function((2.0 / noise.n0()).sqrt())
}

/// Independent random stream for one frame of a campaign.
///
/// The master seed keys the generator and the frame index selects the stream,
/// so every frame sees the same samples whatever order frames are simulated in.
pub fn frame_rng(master_seed: u64, frame_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(frame_index);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulation_examples() {
        assert_eq!(modulate(&BitVec::parse("000").unwrap()), vec![1.0, 1.0, 1.0]);
        assert_eq!(modulate(&BitVec::parse("101").unwrap()), vec![-1.0, 1.0, -1.0]);
        let s = modulate(&BitVec::parse("1101001").unwrap());
        assert!(s.iter().all(|x| x * x == 1.0));
    }

    #[test]
    fn noiseless_frame() {
        let c = BitVec::parse("10110").unwrap();
        let s = modulate(&c);
        let sw = transmit_with_noise(&s, &[0.0; 5]);
        assert_eq!(sw.y, c);
        assert!(sw.alpha.iter().all(|&a| a == 1.0));
    }

    #[test]
    fn zero_sample_decides_zero() {
        let sw = SoftWord::from_received(vec![0.0, -0.0, -0.1, 0.1]);
        assert_eq!(sw.y, BitVec::parse("0010").unwrap());
        assert!(sw.alpha.iter().all(|&a| a >= 0.0));
    }

    #[test]
    fn snr_and_n0_are_consistent() {
        let nm = NoiseModel::from_snr_db(3.0);
        assert!((nm.snr_db() - 3.0).abs() < 1e-12);
        assert!((NoiseModel::from_n0(2.0).snr_db()).abs() < 1e-12);
    }

    #[test]
    fn noise_moments() {
        let noise = NoiseModel::from_n0(0.8);
        let mut rng = frame_rng(5, 0);
        let s = vec![0.0; 1_000_000];
        let sw = transmit(&s, noise, &mut rng);
        let n = sw.r.len() as f64;
        let mean = sw.r.iter().sum::<f64>() / n;
        let var = sw.r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sd_of_mean = (0.4f64 / n).sqrt();
        assert!(mean.abs() < 4.0 * sd_of_mean, "mean {mean}");
        assert!((var / 0.4 - 1.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn seeded_streams_are_reproducible() {
        let noise = NoiseModel::from_snr_db(2.0);
        let s = modulate(&BitVec::parse("0110100110").unwrap());
        let a = transmit(&s, noise, &mut frame_rng(42, 17));
        let b = transmit(&s, noise, &mut frame_rng(42, 17));
        let c = transmit(&s, noise, &mut frame_rng(42, 18));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn raw_error_probability() {
        assert!((bitwise_error_prob_raw(NoiseModel::from_n0(2.0)) - 0.158_655_253_931_457).abs() < 1e-12);
        assert!((bitwise_error_prob_raw(NoiseModel::from_n0(1e12)) - 0.5).abs() < 1e-6);
        assert!(bitwise_error_prob_raw(NoiseModel::from_n0(1e-3)) < 1e-300);
    }

    #[test]
    fn empirical_raw_ber_matches_q() {
        for snr in [0.0, 2.0, 4.0] {
            let noise = NoiseModel::from_snr_db(snr);
            let p = bitwise_error_prob_raw(noise);
            let s = vec![1.0; 1_000_000];
            let sw = transmit(&s, noise, &mut frame_rng(99, snr as u64));
            let errs = sw.y.count_ones() as f64;
            let n = s.len() as f64;
            let se = (p * (1.0 - p) / n).sqrt();
            assert!((errs / n - p).abs() < 3.0 * se, "snr {snr}: {} vs {p}", errs / n);
        }
    }

    #[test]
    fn sorting_preserves_sign_pairing() {
        let sw = transmit(&modulate(&BitVec::zeros(64)), NoiseModel::from_snr_db(1.0), &mut frame_rng(3, 3));
        let mut order: Vec<usize> = (0..64).collect();
        order.sort_by(|&a, &b| sw.alpha[b].total_cmp(&sw.alpha[a]));
        for &i in &order {
            assert_eq!(sw.y.get(i), sw.r[i] < 0.0);
            assert_eq!(sw.alpha[i], sw.r[i].abs());
        }
    }
}
