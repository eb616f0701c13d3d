//! Spread transform rate control and sub-band statistics.
//!
//! Bit `k` is carried by the projection of coefficients `[kL, (k+1)L)` onto
//! a keyed vector `v_k` with entries `±1/√L` (first entry positive, so `L = 1`
//! is direct embedding). The codec runs on the projections; the change it
//! makes to a projection is spread back along `v_k`, so per-coefficient
//! distortion is `1/L` of the codec's and the rate is `1/L` bit per coefficient.

use rand::Rng;

use crate::channel::{seeded_rng, BitMessage, Signal};
use crate::codec::CodecSpec;
use crate::error::{invalid, Error, Result};
use crate::prf;
use crate::security::RateEmbedder;

fn spreading_vectors(key: &[u8], length: usize, count: usize) -> Vec<f64> {
    let mut rng = prf::keyed_stream(key, "pkstego/spread");
    let amp = 1.0 / (length as f64).sqrt();
    (0..count * length)
        .map(|i| if i % length == 0 || rng.random::<bool>() { amp } else { -amp })
        .collect()
}

fn check(band_len: usize, num_bits: usize, length: usize) -> Result<()> {
    if length == 0 {
        return invalid("spread length must be >= 1");
    }
    if num_bits == 0 {
        return invalid("nothing to embed");
    }
    let required = num_bits * length;
    if band_len < required {
        return Err(Error::Capacity {
            required,
            available: band_len,
        });
    }
    Ok(())
}

/// Projections of the first `count·L` coefficients.
pub fn project(band: &[f64], length: usize, count: usize, key: &[u8]) -> Result<Vec<f64>> {
    check(band.len(), count, length)?;
    let v = spreading_vectors(key, length, count);
    Ok(band
        .chunks(length)
        .zip(v.chunks(length))
        .map(|(c, vk)| c.iter().zip(vk).map(|(a, b)| a * b).sum())
        .collect())
}

/// Embeds `bits` at `1/L` bit per coefficient; coefficients past `len(bits)·L` are untouched.
pub fn spread_embed(band: &[f64], bits: &[u8], length: usize, codec: &CodecSpec, key: &[u8]) -> Result<Signal> {
    let count = bits.len();
    let p = project(band, length, count, key)?;
    let q = codec.embed(&p, bits, key)?;
    let v = spreading_vectors(key, length, count);
    let mut out = band.to_vec();
    for (k, (before, after)) in p.iter().zip(q.iter()).enumerate() {
        let shift = after - before;
        for (o, vk) in out[k * length..(k + 1) * length].iter_mut().zip(&v[k * length..]) {
            *o += shift * vk;
        }
    }
    Signal::new(out)
}

pub fn spread_extract(band: &[f64], num_bits: usize, length: usize, codec: &CodecSpec, key: &[u8]) -> Result<BitMessage> {
    codec.decode(&project(band, length, num_bits, key)?, key)
}

/// `L` such that `1/L = rate`.
pub fn spread_length_for_rate(rate: f64) -> Result<usize> {
    if !(rate > 0.0 && rate <= 1.0) {
        return invalid(format!("rate must lie in (0, 1], got {rate}"));
    }
    let l = (1.0 / rate).round();
    if ((1.0 / l) - rate).abs() > 1e-9 {
        return invalid(format!("rate {rate} is not 1/L for an integer L"));
    }
    Ok(l as usize)
}

/// Maximum-likelihood Laplacian scale `mean |x − median|`.
pub fn laplacian_fit(band: &[f64]) -> Result<f64> {
    if band.is_empty() {
        return Err(Error::InvalidData("cannot fit an empty band".into()));
    }
    let mut v = band.to_vec();
    let mid = (v.len() - 1) / 2;
    let (_, &mut median, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    Ok(band.iter().map(|x| (x - median).abs()).sum::<f64>() / band.len() as f64)
}

/// Spread-transform embedding of a random message at a requested rate.
#[derive(Clone, Debug)]
pub struct SpreadEmbedder {
    pub codec: CodecSpec,
    pub key: Vec<u8>,
}

impl RateEmbedder for SpreadEmbedder {
    fn name(&self) -> String {
        self.codec.kind.to_string()
    }

    fn embed_at_rate(&self, band: &[f64], rate: f64, seed: u64) -> Result<Vec<f64>> {
        let length = spread_length_for_rate(rate)?;
        let count = band.len() / length;
        let bits = BitMessage::random(count, &mut seeded_rng(seed));
        let mut key = self.key.clone();
        key.extend_from_slice(&seed.to_be_bytes());
        Ok(spread_embed(band, &bits, length, &self.codec, &key)?.into_vec())
    }
}
