//! ε-security estimation from empirical histograms.
//!
//! A stego system is ε-secure against a passive warden when the relative
//! entropy between cover and stego distributions is at most ε. Both
//! distributions are estimated with fixed-width histograms; the divergence is
//! `Σ p·log₂(p/q)` with `p` the cover and `q` the stego histogram.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};

pub const DEFAULT_NUM_BINS: usize = 100;
/// Half-width of the default histogram range, in cover standard deviations.
pub const DEFAULT_RANGE_SIGMAS: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn num_bins(&self) -> usize {
        self.counts.len()
    }

    /// Relative frequency of each bin.
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.total as f64).collect()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Equal-width histogram of `s` over `range`; samples outside the range are
/// counted in the nearest edge bin.
pub fn build_histogram(s: &[f64], num_bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if num_bins < 2 {
        return invalid(format!("need at least 2 bins, got {num_bins}"));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return invalid(format!("degenerate histogram range [{lo}, {hi}]"));
    }
    if s.is_empty() {
        return Err(Error::InvalidData("cannot histogram an empty signal".into()));
    }
    let width = (hi - lo) / num_bins as f64;
    let bin_edges = (0..=num_bins).map(|k| lo + width * k as f64).collect();
    let mut counts = vec![0u64; num_bins];
    for &v in s {
        let k = ((v - lo) / width).floor();
        let k = if k < 0.0 { 0 } else { (k as usize).min(num_bins - 1) };
        counts[k] += 1;
    }
    Ok(Histogram {
        bin_edges,
        counts,
        total: s.len() as u64,
    })
}

/// `mean ± sigmas·std` of `s`.
pub fn centered_range(s: &[f64], sigmas: f64) -> Result<(f64, f64)> {
    if s.is_empty() {
        return Err(Error::InvalidData("cannot take the range of an empty signal".into()));
    }
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let std = (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if std == 0.0 {
        return Err(Error::InvalidData("constant signal has no spread".into()));
    }
    Ok((mean - sigmas * std, mean + sigmas * std))
}

/// `Σ_{p̂>0} p̂·log₂(p̂/q̂)` where empty `q` bins count as half a sample.
pub fn kl_divergence(p: &Histogram, q: &Histogram) -> Result<f64> {
    if p.bin_edges != q.bin_edges {
        return invalid("histograms have different binning");
    }
    if p.total == 0 || q.total == 0 {
        return Err(Error::InvalidData("histogram without samples".into()));
    }
    let floor = 0.5 / q.total as f64;
    let mut kl = 0.0;
    for (&cp, &cq) in p.counts.iter().zip(&q.counts) {
        if cp == 0 {
            continue;
        }
        let ph = cp as f64 / p.total as f64;
        let qh = (cq as f64 / q.total as f64).max(floor);
        kl += ph * (ph / qh).log2();
    }
    Ok(kl)
}

/// KL between `cover` and `stego` over `num_bins` bins spanning the cover's
/// mean ± 5 standard deviations.
pub fn kl_cover_stego(cover: &[f64], stego: &[f64], num_bins: usize) -> Result<f64> {
    let range = centered_range(cover, DEFAULT_RANGE_SIGMAS)?;
    kl_divergence(&build_histogram(cover, num_bins, range)?, &build_histogram(stego, num_bins, range)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecurityReport {
    pub codec: String,
    pub rate: f64,
    /// Largest divergence over the evaluated bands.
    pub kl_bits: f64,
    pub mean_kl_bits: f64,
    pub epsilon_threshold: f64,
    pub secure: bool,
}

/// Something that hides bits at a given rate in a cover band.
pub trait RateEmbedder {
    fn name(&self) -> String;
    /// Returns the stego band; `seed` drives message and key choice.
    fn embed_at_rate(&self, band: &[f64], rate: f64, seed: u64) -> Result<Vec<f64>>;
}

/// For every rate, embeds into each band and reports the largest and mean
/// per-band divergence. Synthetic covers are passed as a single band.
pub fn epsilon_security_sweep<B: AsRef<[f64]>>(
    bands: &[B],
    embedder: &dyn RateEmbedder,
    rates: &[f64],
    epsilon: f64,
    num_bins: usize,
    seed: u64,
) -> Result<Vec<SecurityReport>> {
    if bands.is_empty() || rates.is_empty() {
        return invalid("security sweep needs at least one band and one rate");
    }
    if !(epsilon >= 0.0) {
        return invalid("epsilon must be >= 0");
    }
    rates
        .iter()
        .enumerate()
        .map(|(ri, &rate)| {
            if !(rate > 0.0 && rate <= 1.0) {
                return invalid(format!("rate must lie in (0, 1], got {rate}"));
            }
            let mut kls = Vec::with_capacity(bands.len());
            for (bi, band) in bands.iter().enumerate() {
                let band = band.as_ref();
                let point_seed = seed ^ ((ri as u64) << 32) ^ bi as u64;
                let stego = embedder.embed_at_rate(band, rate, point_seed)?;
                kls.push(kl_cover_stego(band, &stego, num_bins)?);
            }
            let kl_bits = kls.iter().copied().fold(0.0, f64::max);
            Ok(SecurityReport {
                codec: embedder.name(),
                rate,
                kl_bits,
                mean_kl_bits: kls.iter().sum::<f64>() / kls.len() as f64,
                epsilon_threshold: epsilon,
                secure: kl_bits <= epsilon,
            })
        })
        .collect()
}

pub const SECURITY_CSV_HEADER: &str = "rate,codec,kl_bits,mean_kl_bits,epsilon,secure";

pub fn reports_to_csv(reports: &[SecurityReport]) -> String {
    let mut out = format!("{SECURITY_CSV_HEADER}\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{:.6e},{:.6e},{},{}",
            r.rate, r.codec, r.kl_bits, r.mean_kl_bits, r.epsilon_threshold, r.secure
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::seeded_rng;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn zeros_land_in_the_middle_bin() {
        let h = build_histogram(&[0.0; 10], 5, (-1.0, 1.0)).unwrap();
        assert_eq!(h.counts, vec![0, 0, 10, 0, 0]);
        assert_eq!(h.total, 10);
        assert_eq!(h.bin_edges.len(), 6);
    }

    #[test]
    fn out_of_range_goes_to_edge_bins() {
        let h = build_histogram(&[-5.0, 5.0, 1.0], 4, (-1.0, 1.0)).unwrap();
        assert_eq!(h.counts, vec![1, 0, 0, 2]);
    }

    #[test]
    fn uniform_counts_stay_within_four_sigma() {
        let mut rng = seeded_rng(1);
        let n = 100_000;
        let s: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let bins = 50;
        let h = build_histogram(&s, bins, (0.0, 1.0)).unwrap();
        let p = 1.0 / bins as f64;
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        for &c in &h.counts {
            assert!((c as f64 - mean).abs() <= 4.0 * sd, "{c}");
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(build_histogram(&[], 4, (0.0, 1.0)).is_err());
        assert!(build_histogram(&[0.0], 1, (0.0, 1.0)).is_err());
        assert!(build_histogram(&[0.0], 4, (1.0, 1.0)).is_err());
        let a = build_histogram(&[0.0], 4, (0.0, 1.0)).unwrap();
        let b = build_histogram(&[0.0], 4, (0.0, 2.0)).unwrap();
        assert!(kl_divergence(&a, &b).is_err());
    }

    #[test]
    fn kl_closed_forms() {
        let mut rng = seeded_rng(2);
        let s: Vec<f64> = (0..1000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = build_histogram(&s, 10, (-1.0, 1.0)).unwrap();
        assert_eq!(kl_divergence(&h, &h).unwrap(), 0.0);
        let p = build_histogram(&[0.0, 0.0], 2, (-1.0, 1.0)).unwrap();
        let q = build_histogram(&[-0.5, 0.5], 2, (-1.0, 1.0)).unwrap();
        assert_eq!(p.counts, vec![0, 2]);
        assert_eq!(kl_divergence(&p, &q).unwrap(), 1.0);
    }

    #[test]
    fn gaussian_pair_matches_closed_form() {
        let mut rng = seeded_rng(3);
        let n = 1_000_000;
        let g0 = Normal::new(0.0, 1.0).unwrap();
        let g1 = Normal::new(0.5, 1.0).unwrap();
        let a: Vec<f64> = (0..n).map(|_| g0.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..n).map(|_| g1.sample(&mut rng)).collect();
        let kl = kl_divergence(
            &build_histogram(&a, 64, (-6.0, 6.0)).unwrap(),
            &build_histogram(&b, 64, (-6.0, 6.0)).unwrap(),
        )
        .unwrap();
        let exact = 0.125 / std::f64::consts::LN_2;
        assert!((kl / exact - 1.0).abs() < 0.1, "{kl} vs {exact}");
    }

    struct Shift(f64);

    impl RateEmbedder for Shift {
        fn name(&self) -> String {
            "shift".into()
        }

        fn embed_at_rate(&self, band: &[f64], rate: f64, _seed: u64) -> Result<Vec<f64>> {
            Ok(band.iter().map(|v| v + self.0 * rate).collect())
        }
    }

    #[test]
    fn sweep_reports_one_row_per_rate() {
        let mut rng = seeded_rng(4);
        let g = Normal::new(0.0, 1.0).unwrap();
        let band: Vec<f64> = (0..50_000).map(|_| g.sample(&mut rng)).collect();
        let one = epsilon_security_sweep(&[&band], &Shift(0.5), &[1.0], 0.01, 64, 0).unwrap();
        assert_eq!(one.len(), 1);
        assert!(!one[0].secure);
        let two = epsilon_security_sweep(&[&band, &band], &Shift(0.5), &[1.0, 0.01], 0.01, 64, 0).unwrap();
        assert!(two[1].kl_bits < two[0].kl_bits);
        assert!(two[1].secure);
        assert!(epsilon_security_sweep(&[&band], &Shift(0.5), &[0.0], 0.01, 64, 0).is_err());
        assert!(reports_to_csv(&two).starts_with(SECURITY_CSV_HEADER));
    }
}
