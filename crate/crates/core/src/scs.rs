//! Scalar Costa scheme.
//!
//! Each element carries one bit. The full codebook at index `i` is the lattice
//! `{k·Δ/2 + d[i]}`; bit `b` selects the coset `{k·Δ + d[i] + b·Δ/2}`. The
//! embedder moves the host a fraction `α` of the way toward the nearest point
//! of the selected coset, and the decoder reports the coset of the nearest
//! point of the full codebook.

use rand::Rng;

use crate::channel::{check_bits, BitMessage, ChannelParams, Signal};
use crate::error::{invalid, Result};
use crate::prf;

/// Step, scaling factor and per-element dither of an SCS code.
#[derive(Clone, Debug, PartialEq)]
pub struct ScsParams {
    delta: f64,
    alpha: f64,
    dither: Vec<f64>,
}

impl ScsParams {
    pub fn new(delta: f64, alpha: f64, dither: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return invalid(format!("SCS step must be > 0, got {delta}"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return invalid(format!("SCS alpha must lie in (0, 1], got {alpha}"));
        }
        if let Some(i) = dither.iter().position(|d| !(d.abs() <= delta / 2.0)) {
            return invalid(format!("dither[{i}] = {} exceeds Δ/2", dither[i]));
        }
        Ok(Self {
            delta,
            alpha,
            dither,
        })
    }

    /// Dither of length `n` drawn uniformly from `[-Δ/2, Δ/2)` with the keyed stream.
    pub fn keyed(delta: f64, alpha: f64, n: usize, key: &[u8]) -> Result<Self> {
        let mut rng = prf::keyed_stream(key, "pkstego/scs-dither");
        let dither = (0..n)
            .map(|_| delta * (rng.random::<f64>() - 0.5))
            .collect();
        Self::new(delta, alpha, dither)
    }

    /// Public, constant (all-zero) dither.
    pub fn zero_dither(delta: f64, alpha: f64, n: usize) -> Result<Self> {
        Self::new(delta, alpha, vec![0.0; n])
    }

    /// Keyed SCS tuned for `channel`: `α = √(P/(P + 2.71N))` and Δ from
    /// [`delta_for_power`].
    pub fn for_channel(channel: &ChannelParams, n: usize, key: &[u8]) -> Result<Self> {
        let alpha = costa_alpha(channel);
        Self::keyed(delta_for_power(channel.embed_power(), alpha), alpha, n, key)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dither(&self) -> &[f64] {
        &self.dither
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.dither.len() {
            return invalid(format!(
                "signal length {n} does not match dither length {}",
                self.dither.len()
            ));
        }
        Ok(())
    }
}

/// SCS scaling rule `α = √(P / (P + 2.71·N))`.
pub fn costa_alpha(channel: &ChannelParams) -> f64 {
    let p = channel.embed_power();
    (p / (p + 2.71 * channel.noise_variance())).sqrt()
}

/// Step for which uniform-host embedding has power `power`: `α²Δ²/12 = P`.
pub fn delta_for_power(power: f64, alpha: f64) -> f64 {
    (12.0 * power).sqrt() / alpha
}

/// Nearest point of `{k·step + offset}` to `v`; exact midpoints go to the larger point.
#[inline]
pub(crate) fn nearest_on_lattice(v: f64, step: f64, offset: f64) -> f64 {
    ((v - offset) / step + 0.5).floor() * step + offset
}

/// Nearest codeword of the sub-codebook selected by `m`, element by element.
pub fn scs_nearest_codeword(x: &[f64], m: &[u8], params: &ScsParams) -> Result<Signal> {
    params.check_len(x.len())?;
    if m.len() != x.len() {
        return invalid(format!("message length {} != signal length {}", m.len(), x.len()));
    }
    check_bits(m)?;
    let step = params.delta;
    Ok(Signal::from_vec(
        x.iter()
            .zip(m)
            .zip(&params.dither)
            .map(|((&xi, &bit), &d)| nearest_on_lattice(xi, step, d + step * f64::from(bit) / 2.0))
            .collect(),
    ))
}

/// `y = x + α(u* − x)`.
pub fn scs_embed(x: &[f64], m: &[u8], params: &ScsParams) -> Result<Signal> {
    let u = scs_nearest_codeword(x, m, params)?;
    if params.alpha == 1.0 {
        return Ok(u);
    }
    Ok(Signal::from_vec(
        x.iter()
            .zip(u.iter())
            .map(|(&xi, &ui)| xi + params.alpha * (ui - xi))
            .collect(),
    ))
}

/// Coset index of the nearest point of `{k·Δ/2 + d[i]}`.
pub fn scs_decode(y: &[f64], params: &ScsParams) -> Result<BitMessage> {
    params.check_len(y.len())?;
    let half = params.delta / 2.0;
    let bits = y
        .iter()
        .zip(&params.dither)
        .map(|(&yi, &d)| (((yi - d) / half + 0.5).floor() as i64).rem_euclid(2) as u8)
        .collect();
    BitMessage::new(bits)
}
