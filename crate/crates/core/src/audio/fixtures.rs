//! Synthetic audio whose sub-band coefficients are Laplacian by construction.
//!
//! Each MDCT coefficient is drawn from a Laplacian with a scale that depends
//! only on its sub-band, and the windows are overlap-added into PCM. Two
//! spectral shapes stand in for the quiet, low-passed clip ("smooth") and the
//! loud, broadband clip ("powerful").

use rand::Rng;

use crate::channel::seeded_rng;
use crate::error::Result;

use super::mdct::{Mdct, MDCT_COEFFS};
use super::subband::SubbandLayout;
use super::wav::PcmAudio;

pub const FIXTURE_SAMPLE_RATE: u32 = 44_100;
pub const FIXTURE_SECONDS: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixture {
    Smooth,
    Powerful,
}

impl Fixture {
    pub const ALL: [Fixture; 2] = [Fixture::Smooth, Fixture::Powerful];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Smooth => "smooth",
            Fixture::Powerful => "powerful",
        }
    }

    /// Laplacian scale of sub-band `b` out of `num_bands`, in PCM units.
    pub fn band_scale(self, b: usize, num_bands: usize) -> f64 {
        let f = b as f64 / num_bands as f64;
        match self {
            Fixture::Smooth => 2.0 + 300.0 * (-8.0 * f).exp(),
            Fixture::Powerful => 40.0 + 2500.0 * (-2.5 * f).exp(),
        }
    }
}

/// Symmetric Laplacian sample with scale `b`.
pub fn laplacian_sample(rng: &mut impl Rng, b: f64) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

pub fn laplacian_samples(n: usize, b: f64, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..n).map(|_| laplacian_sample(&mut rng, b)).collect()
}

/// `seconds` of 16-bit audio at `sample_rate` with the fixture's spectrum.
pub fn synthetic_audio(fixture: Fixture, seconds: f64, sample_rate: u32, seed: u64) -> Result<PcmAudio> {
    let len = (seconds * f64::from(sample_rate)).round() as usize;
    let mdct = Mdct::new(MDCT_COEFFS)?;
    let layout = SubbandLayout::default();
    let width = layout.band_width();
    let mut rng = seeded_rng(seed);
    let windows: Vec<Vec<f64>> = (0..mdct.num_windows(len))
        .map(|_| {
            (0..MDCT_COEFFS)
                .map(|k| laplacian_sample(&mut rng, fixture.band_scale(k / width, layout.num_bands)))
                .collect()
        })
        .collect();
    PcmAudio::from_f64(&mdct.synthesize(&windows, len)?, sample_rate)
}
