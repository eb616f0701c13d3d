//! Audio frontend: PCM WAV, MDCT analysis, sub-band grouping and spread
//! transform.
//!
//! The carrier handed to the codecs is the concatenation, band by band, of
//! every sub-band over all whole frames of the file. Samples after the last
//! whole frame are left untouched.

pub mod fixtures;
pub mod mdct;
pub mod spread;
pub mod subband;
pub mod wav;

use crate::error::{Error, Result};

pub use fixtures::{synthetic_audio, Fixture};
pub use mdct::{Mdct, MDCT_COEFFS, MDCT_WINDOW};
pub use spread::{laplacian_fit, spread_embed, spread_extract, SpreadEmbedder};
pub use subband::{band_series, group_subbands, set_band_series, ungroup_subbands, SubbandFrame, SubbandLayout};
pub use wav::{read_wav, write_wav, PcmAudio};

/// Sub-band frames of the whole frames of `samples`.
pub fn analyze_frames(samples: &[f64], layout: &SubbandLayout) -> Result<Vec<SubbandFrame>> {
    layout.validate()?;
    let mdct = Mdct::new(layout.coeffs_per_window)?;
    let windows = mdct.num_windows(samples.len());
    let usable = windows - windows % layout.windows_per_frame;
    if usable == 0 {
        return Err(Error::Capacity {
            required: (layout.windows_per_frame + 1) * layout.coeffs_per_window,
            available: samples.len(),
        });
    }
    let m = layout.coeffs_per_window;
    let coeffs: Vec<f64> = (0..usable)
        .map(|t| mdct.forward(&samples[t * m..t * m + 2 * m]))
        .collect::<Result<Vec<_>>>()?
        .concat();
    group_subbands(&coeffs, layout)
}

/// `samples` plus the time-domain image of the coefficient change `after − before`.
pub fn apply_frames(
    samples: &[f64],
    before: &[SubbandFrame],
    after: &[SubbandFrame],
    layout: &SubbandLayout,
) -> Result<Vec<f64>> {
    let mdct = Mdct::new(layout.coeffs_per_window)?;
    let a = ungroup_subbands(before, layout)?;
    let b = ungroup_subbands(after, layout)?;
    if a.len() != b.len() {
        return Err(Error::Framing("frame sets differ in size".into()));
    }
    let delta: Vec<f64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
    let windows = mdct::unflatten(&delta, layout.coeffs_per_window)?;
    let image = mdct.synthesize(&windows, samples.len())?;
    Ok(samples.iter().zip(&image).map(|(s, d)| s + d).collect())
}

/// Band-major carrier vector of `frames`.
pub fn carrier(frames: &[SubbandFrame]) -> Vec<f64> {
    let bands = frames.first().map_or(0, |f| f.bands.len());
    (0..bands).flat_map(|b| band_series(frames, b)).collect()
}

/// Writes a carrier produced by [`carrier`] back into `frames`.
pub fn set_carrier(frames: &mut [SubbandFrame], values: &[f64]) -> Result<()> {
    let bands = frames.first().map_or(0, |f| f.bands.len());
    let per_band = values.len() / bands.max(1);
    if per_band * bands != values.len() {
        return Err(Error::Framing("carrier length does not match the frames".into()));
    }
    for (b, chunk) in values.chunks(per_band.max(1)).enumerate().take(bands) {
        set_band_series(frames, b, chunk)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::seeded_rng;
    use rand::Rng;

    #[test]
    fn carrier_changes_survive_pcm_resynthesis() {
        let layout = SubbandLayout::default();
        let audio = synthetic_audio(Fixture::Powerful, 1.0, 44_100, 3).unwrap();
        let x = audio.to_f64();
        let frames = analyze_frames(&x, &layout).unwrap();
        assert_eq!(frames.len(), 8);
        let mut c = carrier(&frames);
        let mut rng = seeded_rng(4);
        for v in c.iter_mut() {
            *v += rng.random_range(-3.0..3.0);
        }
        let mut edited = frames.clone();
        set_carrier(&mut edited, &c).unwrap();
        let y = apply_frames(&x, &frames, &edited, &layout).unwrap();
        let back = carrier(&analyze_frames(&y, &layout).unwrap());
        let exact = back.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(exact < 1e-9);
        // rounding to PCM adds noise of variance 1/12 per coefficient
        let pcm = PcmAudio::from_f64(&y, 44_100).unwrap().to_f64();
        let back = carrier(&analyze_frames(&pcm, &layout).unwrap());
        let mse = back.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / c.len() as f64;
        assert!((mse * 12.0 - 1.0).abs() < 0.05, "{mse}");
    }

    #[test]
    fn short_audio_is_a_capacity_error() {
        let r = analyze_frames(&[0.0; 4000], &SubbandLayout::default());
        assert!(matches!(r, Err(Error::Capacity { .. })));
    }
}
