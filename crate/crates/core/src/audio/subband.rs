//! Grouping of MDCT coefficients into sub-bands.
//!
//! A frame spans `windows_per_frame` consecutive MDCT windows. Sub-band `b`
//! holds coefficient indices `[w·b, w·(b+1))` of every window in the frame,
//! with `w = coeffs_per_window / num_bands`, stored window by window. The
//! default layout (32 bands, 20 windows of 256 coefficients) gives 160
//! coefficients per band; [`SubbandLayout::ten_windows`] gives 80.

use crate::error::{invalid, Error, Result};

use super::mdct::MDCT_COEFFS;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubbandLayout {
    pub num_bands: usize,
    pub coeffs_per_window: usize,
    pub windows_per_frame: usize,
}

impl Default for SubbandLayout {
    fn default() -> Self {
        Self {
            num_bands: 32,
            coeffs_per_window: MDCT_COEFFS,
            windows_per_frame: 20,
        }
    }
}

impl SubbandLayout {
    pub fn ten_windows() -> Self {
        Self {
            windows_per_frame: 10,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_bands == 0 || self.windows_per_frame == 0 {
            return invalid("layout needs at least one band and one window");
        }
        if self.coeffs_per_window % self.num_bands != 0 {
            return invalid(format!(
                "{} coefficients do not split into {} bands",
                self.coeffs_per_window, self.num_bands
            ));
        }
        Ok(())
    }

    /// Coefficients of one window that belong to one band.
    pub fn band_width(&self) -> usize {
        self.coeffs_per_window / self.num_bands
    }

    /// Coefficients per band per frame.
    pub fn band_len(&self) -> usize {
        self.band_width() * self.windows_per_frame
    }

    pub fn frame_len(&self) -> usize {
        self.coeffs_per_window * self.windows_per_frame
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubbandFrame {
    pub bands: Vec<Vec<f64>>,
}

/// Splits window-major coefficients into frames of sub-bands.
pub fn group_subbands(coeffs: &[f64], layout: &SubbandLayout) -> Result<Vec<SubbandFrame>> {
    layout.validate()?;
    let frame_len = layout.frame_len();
    if coeffs.is_empty() || coeffs.len() % frame_len != 0 {
        return Err(Error::Framing(format!(
            "{} coefficients are not a whole number of {frame_len}-coefficient frames",
            coeffs.len()
        )));
    }
    let (m, w) = (layout.coeffs_per_window, layout.band_width());
    Ok(coeffs
        .chunks(frame_len)
        .map(|frame| SubbandFrame {
            bands: (0..layout.num_bands)
                .map(|b| {
                    frame
                        .chunks(m)
                        .flat_map(|window| window[b * w..(b + 1) * w].iter().copied())
                        .collect()
                })
                .collect(),
        })
        .collect())
}

/// Inverse of [`group_subbands`].
pub fn ungroup_subbands(frames: &[SubbandFrame], layout: &SubbandLayout) -> Result<Vec<f64>> {
    layout.validate()?;
    let (m, w) = (layout.coeffs_per_window, layout.band_width());
    let mut out = vec![0.0; frames.len() * layout.frame_len()];
    for (f, frame) in frames.iter().enumerate() {
        if frame.bands.len() != layout.num_bands || frame.bands.iter().any(|b| b.len() != layout.band_len()) {
            return Err(Error::Framing(format!("frame {f} does not match the layout")));
        }
        let base = f * layout.frame_len();
        for (b, band) in frame.bands.iter().enumerate() {
            for (t, chunk) in band.chunks(w).enumerate() {
                let at = base + t * m + b * w;
                out[at..at + w].copy_from_slice(chunk);
            }
        }
    }
    Ok(out)
}

/// Band `b` of every frame, concatenated.
pub fn band_series(frames: &[SubbandFrame], b: usize) -> Vec<f64> {
    frames.iter().flat_map(|f| f.bands[b].iter().copied()).collect()
}

/// Writes `values` (as produced by [`band_series`]) back into band `b`.
pub fn set_band_series(frames: &mut [SubbandFrame], b: usize, values: &[f64]) -> Result<()> {
    let total: usize = frames.iter().map(|f| f.bands[b].len()).sum();
    if values.len() != total {
        return invalid(format!("band series has {} values, expected {total}", values.len()));
    }
    let mut rest = values;
    for f in frames.iter_mut() {
        let (head, tail) = rest.split_at(f.bands[b].len());
        f.bands[b].copy_from_slice(head);
        rest = tail;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn one_frame_is_32_bands_of_160() {
        let layout = SubbandLayout::default();
        let coeffs: Vec<f64> = (0..5120).map(f64::from).collect();
        let frames = group_subbands(&coeffs, &layout).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].bands.len(), 32);
        assert!(frames[0].bands.iter().all(|b| b.len() == 160));
        // band 1 starts with coefficients 8..16 of window 0, then of window 1
        assert_eq!(frames[0].bands[1][..9], [8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0, 264.0]);
        assert_eq!(SubbandLayout::ten_windows().band_len(), 80);
    }

    #[test]
    fn partial_frames_are_rejected() {
        let layout = SubbandLayout::default();
        assert!(matches!(group_subbands(&[0.0; 5121], &layout), Err(Error::Framing(_))));
        assert!(matches!(group_subbands(&[0.0; 5119], &layout), Err(Error::Framing(_))));
        assert!(matches!(group_subbands(&[], &layout), Err(Error::Framing(_))));
    }

    #[test]
    fn band_series_round_trip() {
        let layout = SubbandLayout::ten_windows();
        let coeffs: Vec<f64> = (0..2 * 2560).map(f64::from).collect();
        let mut frames = group_subbands(&coeffs, &layout).unwrap();
        let s = band_series(&frames, 5);
        assert_eq!(s.len(), 160);
        let doubled: Vec<f64> = s.iter().map(|v| 2.0 * v).collect();
        set_band_series(&mut frames, 5, &doubled).unwrap();
        assert_eq!(band_series(&frames, 5), doubled);
        assert!(set_band_series(&mut frames, 5, &doubled[1..]).is_err());
    }

    proptest! {
        #[test]
        fn ungroup_inverts_group(frames in 1usize..4, ten in any::<bool>(), seed in any::<u64>()) {
            let layout = if ten { SubbandLayout::ten_windows() } else { SubbandLayout::default() };
            let coeffs: Vec<f64> = (0..frames * layout.frame_len())
                .map(|i| ((i as u64).wrapping_mul(seed | 1) % 1000) as f64)
                .collect();
            let g = group_subbands(&coeffs, &layout).unwrap();
            prop_assert_eq!(ungroup_subbands(&g, &layout).unwrap(), coeffs);
        }
    }
}
