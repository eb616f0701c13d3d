//! Shared numeric carriers and the additive white Gaussian noise channel.
//!
//! Power is measured per element: a signal `w` of length `n` has power
//! `(1/n) Σ w[i]²`, so `P/N` is a dimensionless ratio that can be quoted in dB.

use std::ops::Deref;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Error, Result};

/// The pseudo-random generator used by every experiment in the crate.
pub type ExperimentRng = ChaCha8Rng;

/// Returns the experiment generator for `seed`.
pub fn seeded_rng(seed: u64) -> ExperimentRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real-valued sample vector: cover, stego, noise or added signal.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal(Vec<f64>);

impl Signal {
    /// Wraps `samples`, rejecting empty or non-finite input.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidData("signal must have at least one sample".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("sample {i} is not finite")));
        }
        Ok(Self(samples))
    }

    pub(crate) fn from_vec(samples: Vec<f64>) -> Self {
        debug_assert!(samples.iter().all(|v| v.is_finite()));
        Self(samples)
    }

    pub fn samples(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Mean squared value.
    pub fn power(&self) -> f64 {
        power(&self.0)
    }
}

impl Deref for Signal {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Signal> for Vec<f64> {
    fn from(s: Signal) -> Self {
        s.0
    }
}

/// Mean squared value of a slice; 0 for an empty slice.
pub fn power(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|v| v * v).sum::<f64>() / samples.len() as f64
}

/// Binary message, one bit per element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMessage(Vec<u8>);

impl BitMessage {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        check_bits(&bits)?;
        Ok(Self(bits))
    }

    /// Uniformly random message of length `n`.
    pub fn random(n: usize, rng: &mut impl rand::Rng) -> Self {
        Self((0..n).map(|_| rng.random_range(0..2u8)).collect())
    }

    /// Expands bytes MSB-first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self(bytes_to_bits(bytes))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }
}

impl Deref for BitMessage {
    type Target = [u8];

    fn deref(&self) -> &[u8] {
        &self.0
    }
}

pub(crate) fn check_bits(bits: &[u8]) -> Result<()> {
    match bits.iter().position(|&b| b > 1) {
        Some(i) => invalid(format!("bit {i} is {} (expected 0 or 1)", bits[i])),
        None => Ok(()),
    }
}

/// MSB-first bit expansion.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |k| (byte >> k) & 1))
        .collect()
}

/// Packs MSB-first bits; a trailing partial byte is zero-padded.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (k, &b)| acc | ((b & 1) << (7 - k)))
        })
        .collect()
}

/// Embedding power constraint `P` and channel noise variance `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    embed_power: f64,
    noise_variance: f64,
}

impl ChannelParams {
    pub fn new(embed_power: f64, noise_variance: f64) -> Result<Self> {
        if !(embed_power > 0.0 && embed_power.is_finite()) {
            return invalid(format!("embedding power must be > 0, got {embed_power}"));
        }
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return invalid(format!("noise variance must be >= 0, got {noise_variance}"));
        }
        Ok(Self {
            embed_power,
            noise_variance,
        })
    }

    /// Channel with noise variance `noise_variance` and `P/N` of `snr_db`.
    pub fn from_snr_db(snr_db: f64, noise_variance: f64) -> Result<Self> {
        Self::new(noise_variance * 10f64.powf(snr_db / 10.0), noise_variance)
    }

    pub fn embed_power(&self) -> f64 {
        self.embed_power
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Costa capacity `½ log₂(1 + P/N)` in bits per element; `+∞` when `N = 0`.
    pub fn capacity(&self) -> f64 {
        if self.noise_variance == 0.0 {
            return f64::INFINITY;
        }
        0.5 * (self.embed_power / self.noise_variance).ln_1p() / std::f64::consts::LN_2
    }

    /// `10 log₁₀(P/N)`.
    pub fn snr_db(&self) -> Result<f64> {
        if self.noise_variance == 0.0 {
            return invalid("P/N in dB is undefined for a noiseless channel");
        }
        Ok(10.0 * (self.embed_power / self.noise_variance).log10())
    }
}

/// Returns `signal` plus i.i.d. `N(0, variance)` noise drawn from `seed`.
pub fn awgn_apply(signal: &[f64], variance: f64, seed: u64) -> Result<Signal> {
    let mut rng = seeded_rng(seed);
    awgn_apply_with(signal, variance, &mut rng)
}

/// Same as [`awgn_apply`] but draws from a caller-owned generator.
pub fn awgn_apply_with(
    signal: &[f64],
    variance: f64,
    rng: &mut impl rand::Rng,
) -> Result<Signal> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return invalid(format!("noise variance must be >= 0, got {variance}"));
    }
    if variance == 0.0 {
        return Ok(Signal::from_vec(signal.to_vec()));
    }
    let normal = Normal::new(0.0, variance.sqrt())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(Signal::from_vec(
        signal.iter().map(|&v| v + normal.sample(rng)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_examples() {
        let c = ChannelParams::new(1.0, 1.0).unwrap();
        assert_eq!(c.capacity(), 0.5);
        let tiny = ChannelParams::new(1e-12, 1.0).unwrap().capacity();
        assert!((tiny - 1e-12 / (2.0 * std::f64::consts::LN_2)).abs() < 1e-20);
        // 14 dB: ½·log₂(1 + 10^1.4) evaluated with mpmath at 50 digits.
        let c14 = ChannelParams::from_snr_db(14.0, 1.0).unwrap().capacity();
        assert!((c14 - 2.353_510_131_364_418).abs() < 1e-9, "{c14}");
        assert_eq!(ChannelParams::new(1.0, 0.0).unwrap().capacity(), f64::INFINITY);
    }

    #[test]
    fn snr_examples() {
        assert_eq!(ChannelParams::new(3.0, 3.0).unwrap().snr_db().unwrap(), 0.0);
        assert!((ChannelParams::new(10.0, 1.0).unwrap().snr_db().unwrap() - 10.0).abs() < 1e-12);
        let db = ChannelParams::new(25.1189, 1.0).unwrap().snr_db().unwrap();
        assert!((db - 14.0).abs() < 1e-4);
        assert!(ChannelParams::new(1.0, 0.0).unwrap().snr_db().is_err());
    }

    #[test]
    fn params_are_validated() {
        assert!(ChannelParams::new(0.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, -1.0).is_err());
        assert!(ChannelParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn zero_variance_is_identity() {
        let x = vec![1.5, -2.0, 3.25];
        assert_eq!(awgn_apply(&x, 0.0, 7).unwrap().samples(), &x[..]);
        assert!(awgn_apply(&x, -1.0, 7).is_err());
    }

    #[test]
    fn awgn_is_deterministic_and_has_the_right_variance() {
        let x = vec![0.0; 1_000_000];
        let a = awgn_apply(&x, 4.0, 11).unwrap();
        let b = awgn_apply(&x, 4.0, 11).unwrap();
        assert_eq!(a, b);
        let mean = a.iter().sum::<f64>() / a.len() as f64;
        let var = a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / a.len() as f64;
        assert!((3.98..=4.02).contains(&var), "{var}");
    }

    #[test]
    fn signal_rejects_bad_samples() {
        assert!(Signal::new(vec![]).is_err());
        assert!(Signal::new(vec![1.0, f64::INFINITY]).is_err());
        assert_eq!(Signal::new(vec![3.0, 4.0]).unwrap().power(), 12.5);
    }

    #[test]
    fn byte_bit_round_trip() {
        let bytes = [0xA5, 0x01, 0xFF];
        let bits = bytes_to_bits(&bytes);
        assert_eq!(&bits[..8], &[1, 0, 1, 0, 0, 1, 0, 1]);
        assert_eq!(bits_to_bytes(&bits), bytes);
        assert!(BitMessage::new(vec![0, 1, 2]).is_err());
    }
}
