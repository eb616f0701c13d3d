//! Experiment runner behind the `pkstego` binary.
//!
//! Three experiments regenerate the published curves as CSV: BER against
//! `P/N` (`fig4`), cover/stego histograms for a Gaussian host (`fig2`) and
//! KL divergence against embedding rate (`fig5`). Grid points run in
//! parallel, each with a seed derived from the master seed and the point's
//! label, so output does not depend on scheduling. Every CSV starts with a
//! `# pkstego-csv 1 <experiment>` line.
//!
//! [`stego_send`] and [`stego_recv`] wrap the protocol for WAV files.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::audio::fixtures::{laplacian_samples, Fixture};
use crate::audio::{analyze_frames, apply_frames, band_series, carrier, read_wav, set_carrier, write_wav, PcmAudio};
use crate::audio::{SpreadEmbedder, SubbandFrame, SubbandLayout};
use crate::channel::{awgn_apply_with, seeded_rng, BitMessage, ChannelParams};
use crate::codec::{CodecKind, CodecSpec};
use crate::error::{invalid, Error, Result};
use crate::kv::{parse_kv, parse_value};
use crate::prf;
use crate::protocol::{receive_init, receive_message, send_init, send_message, CipherProvider, SessionConfig, TempKey};
use crate::scs::{delta_for_power, scs_embed, ScsParams};
use crate::security::{build_histogram, centered_range, epsilon_security_sweep, kl_divergence, Histogram, SecurityReport};
use crate::tcq::{tcq_encode, TcqParams};
use crate::trellis::build_trellis;

pub const CSV_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Ber,
    Pdf,
    Security,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Ber => "ber",
            Experiment::Pdf => "pdf",
            Experiment::Security => "security",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ber" | "fig4" => Ok(Experiment::Ber),
            "pdf" | "fig2" => Ok(Experiment::Pdf),
            "security" | "fig5" => Ok(Experiment::Security),
            _ => Err(Error::InvalidParameter(format!("unknown experiment `{s}`"))),
        }
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn parse_fixture(s: &str) -> Result<Fixture> {
    Fixture::ALL
        .into_iter()
        .find(|f| f.name() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown fixture `{s}`")))
}

impl FromStr for CodecList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',').map(|c| c.trim().parse()).collect::<Result<_>>().map(CodecList)
    }
}

/// Comma-separated codec names.
#[derive(Clone, Debug, PartialEq)]
pub struct CodecList(pub Vec<CodecKind>);

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub codecs: Vec<CodecKind>,
    pub snr_db_grid: Vec<f64>,
    /// Elements per BER point, host samples for `pdf`, coefficients per band for `security`.
    pub samples: usize,
    pub seed: u64,
    pub tcq_log2_states: u32,
    pub rates: Vec<f64>,
    pub num_bins: usize,
    pub noise_variance: f64,
    pub cover_std: f64,
    pub pdf_embed_power: f64,
    pub pdf_scs_alpha: f64,
    pub pdf_tcq_alpha: f64,
    pub fixtures: Vec<Fixture>,
    /// Audio cover for `security`; synthetic fixtures are used when absent.
    pub cover_wav: Option<PathBuf>,
    pub epsilon: f64,
    /// `P/N` each codec runs at in `security`.
    pub scs_snr_db: f64,
    pub tcq_snr_db: f64,
    pub turbo_snr_db: f64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Bit error rates at 1 bit per element over 8–14 dB, 10⁶ elements per point.
    pub fn fig4() -> Self {
        Self {
            experiment: Experiment::Ber,
            codecs: CodecKind::ALL.to_vec(),
            snr_db_grid: (8..=14).map(f64::from).collect(),
            samples: 1_000_000,
            seed: 1,
            tcq_log2_states: crate::codec::DEFAULT_TCQ_LOG2_STATES,
            rates: vec![1.0],
            num_bins: crate::security::DEFAULT_NUM_BINS,
            noise_variance: 1.0,
            cover_std: 1000.0,
            pdf_embed_power: 1e4,
            pdf_scs_alpha: 0.5,
            pdf_tcq_alpha: 0.7,
            fixtures: Fixture::ALL.to_vec(),
            cover_wav: None,
            epsilon: 1e-3,
            scs_snr_db: 14.0,
            tcq_snr_db: 12.0,
            turbo_snr_db: 9.0,
            out: None,
        }
    }

    /// `X ∼ N(0, 10⁶)`, `P = 10⁴`, SCS with `α = 0.5`, TCQ with `α = 0.7` and 2⁹ states.
    pub fn fig2() -> Self {
        Self {
            experiment: Experiment::Pdf,
            codecs: vec![CodecKind::Scs, CodecKind::Tcq],
            ..Self::fig4()
        }
    }

    /// KL against rate for SCS and turbo TCQ on Laplacian sub-band covers.
    /// Each codec runs at the lowest `fig4` grid point where its BER is
    /// below 10⁻⁵: 14 dB for SCS, 9 dB for turbo TCQ.
    pub fn fig5() -> Self {
        Self {
            experiment: Experiment::Security,
            codecs: vec![CodecKind::Scs, CodecKind::Turbo],
            rates: vec![1.0, 0.5, 0.25, 0.125],
            noise_variance: 1.0 / 12.0,
            ..Self::fig4()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "fig2" => Ok(Self::fig2()),
            "fig4" => Ok(Self::fig4()),
            "fig5" => Ok(Self::fig5()),
            _ => invalid(format!("unknown preset `{name}`")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.codecs.is_empty() {
            return invalid("codec list is empty");
        }
        if self.samples == 0 {
            return invalid("samples must be >= 1");
        }
        if self.experiment == Experiment::Ber && self.snr_db_grid.is_empty() {
            return invalid("P/N grid is empty");
        }
        if self.experiment == Experiment::Security {
            if self.rates.is_empty() {
                return invalid("rate grid is empty");
            }
            if self.cover_wav.is_none() && self.fixtures.is_empty() {
                return invalid("no cover: give a WAV file or at least one fixture");
            }
        }
        if let Some(s) = self.snr_db_grid.iter().find(|s| !s.is_finite()) {
            return invalid(format!("bad grid point {s}"));
        }
        if !(self.noise_variance > 0.0 && self.cover_std > 0.0 && self.pdf_embed_power > 0.0) {
            return invalid("noise variance, cover std and embedding power must be > 0");
        }
        Ok(())
    }

    /// Applies `key = value` overrides.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (k, v) in parse_kv(text)? {
            match k.as_str() {
                "experiment" => self.experiment = v.parse()?,
                "codecs" | "codec" => self.codecs = v.parse::<CodecList>()?.0,
                "snr_db_grid" => self.snr_db_grid = parse_list(&k, &v)?,
                "samples" => self.samples = parse_value(&k, &v)?,
                "seed" => self.seed = parse_value(&k, &v)?,
                "tcq.log2_states" => self.tcq_log2_states = parse_value(&k, &v)?,
                "rates" | "rate_grid" => self.rates = parse_list(&k, &v)?,
                "bins" => self.num_bins = parse_value(&k, &v)?,
                "noise_variance" => self.noise_variance = parse_value(&k, &v)?,
                "pdf.cover_std" => self.cover_std = parse_value(&k, &v)?,
                "pdf.embed_power" => self.pdf_embed_power = parse_value(&k, &v)?,
                "pdf.scs_alpha" => self.pdf_scs_alpha = parse_value(&k, &v)?,
                "pdf.tcq_alpha" => self.pdf_tcq_alpha = parse_value(&k, &v)?,
                "security.fixtures" => {
                    self.fixtures = v.split(',').map(|s| parse_fixture(s.trim())).collect::<Result<_>>()?
                }
                "security.cover_wav" => self.cover_wav = Some(PathBuf::from(v)),
                "security.epsilon" => self.epsilon = parse_value(&k, &v)?,
                "security.scs_snr_db" => self.scs_snr_db = parse_value(&k, &v)?,
                "security.tcq_snr_db" => self.tcq_snr_db = parse_value(&k, &v)?,
                "security.turbo_snr_db" => self.turbo_snr_db = parse_value(&k, &v)?,
                "out" => self.out = Some(PathBuf::from(v)),
                _ => return Err(Error::Format(format!("unknown config key `{k}`"))),
            }
        }
        Ok(())
    }

    fn codec_spec(&self, kind: CodecKind, snr_db: f64) -> Result<CodecSpec> {
        let mut spec = CodecSpec::new(kind, ChannelParams::from_snr_db(snr_db, self.noise_variance)?);
        spec.tcq_log2_states = self.tcq_log2_states;
        Ok(spec)
    }

    fn operating_snr_db(&self, kind: CodecKind) -> f64 {
        match kind {
            CodecKind::Scs => self.scs_snr_db,
            CodecKind::Tcq => self.tcq_snr_db,
            CodecKind::Turbo => self.turbo_snr_db,
        }
    }
}

/// Seed for the grid point named `label`.
pub fn point_seed(master: u64, label: &str) -> u64 {
    let k = prf::derive_key(&master.to_be_bytes(), label);
    u64::from_be_bytes(k[..8].try_into().expect("8 bytes"))
}

/// 95 % Wilson score interval for `errors` out of `n`.
pub fn wilson_interval(errors: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let (nf, p) = (n as f64, errors as f64 / n as f64);
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    (lo, (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub codec: CodecKind,
    pub n: u64,
    pub errors: u64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        self.errors as f64 / self.n as f64
    }
}

/// Embed, add `N(0, N)` noise and decode `samples` random bits per grid point.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<Vec<BerPoint>> {
    cfg.validate()?;
    let points: Vec<(CodecKind, f64)> = cfg
        .codecs
        .iter()
        .flat_map(|&c| cfg.snr_db_grid.iter().map(move |&s| (c, s)))
        .collect();
    points
        .par_iter()
        .map(|&(codec, snr_db)| ber_point(cfg, codec, snr_db))
        .collect()
}

fn ber_point(cfg: &ExperimentConfig, codec: CodecKind, snr_db: f64) -> Result<BerPoint> {
    let spec = cfg.codec_spec(codec, snr_db)?;
    let mut rng = seeded_rng(point_seed(cfg.seed, &format!("ber/{codec}/{snr_db}")));
    let host = Normal::new(0.0, cfg.cover_std).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let x: Vec<f64> = (0..cfg.samples).map(|_| host.sample(&mut rng)).collect();
    let m = BitMessage::random(cfg.samples, &mut rng);
    let key: [u8; 8] = rng.random();
    let y = spec.embed(&x, &m, &key)?;
    let noisy = awgn_apply_with(&y, cfg.noise_variance, &mut rng)?;
    let decoded = spec.decode(&noisy, &key)?;
    let errors = m.iter().zip(decoded.iter()).filter(|(a, b)| a != b).count() as u64;
    Ok(BerPoint {
        snr_db,
        codec,
        n: cfg.samples as u64,
        errors,
    })
}

fn csv_preamble(experiment: Experiment) -> String {
    format!("# pkstego-csv {CSV_VERSION} {experiment}\n")
}

pub fn ber_csv(points: &[BerPoint]) -> String {
    let mut out = csv_preamble(Experiment::Ber);
    out.push_str("snr_db,codec,n,errors,ber,ber_low,ber_high\n");
    for p in points {
        let (lo, hi) = wilson_interval(p.errors, p.n);
        let _ = writeln!(out, "{},{},{},{},{:e},{:e},{:e}", p.snr_db, p.codec, p.n, p.errors, p.ber(), lo, hi);
    }
    out
}

/// Cover and stego histograms on a common binning.
#[derive(Clone, Debug)]
pub struct PdfResult {
    pub cover: Histogram,
    pub scs: Histogram,
    pub tcq: Histogram,
    pub kl_scs: f64,
    pub kl_tcq: f64,
}

/// Gaussian host embedded with public (undithered) SCS and with TCQ.
pub fn run_pdf_experiment(cfg: &ExperimentConfig) -> Result<PdfResult> {
    cfg.validate()?;
    let n = cfg.samples;
    let mut rng = seeded_rng(point_seed(cfg.seed, "pdf"));
    let host = Normal::new(0.0, cfg.cover_std).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let x: Vec<f64> = (0..n).map(|_| host.sample(&mut rng)).collect();
    let m = BitMessage::random(n, &mut rng);
    let p = cfg.pdf_embed_power;

    let scs = ScsParams::zero_dither(delta_for_power(p, cfg.pdf_scs_alpha), cfg.pdf_scs_alpha, n)?;
    let y_scs = scs_embed(&x, &m, &scs)?;
    let trellis = build_trellis(cfg.tcq_log2_states, delta_for_power(p, cfg.pdf_tcq_alpha), b"pkstego/pdf")?;
    let y_tcq = tcq_encode(&x, &m, &TcqParams::new(trellis, cfg.pdf_tcq_alpha)?, 0)?.y;

    let range = centered_range(&x, crate::security::DEFAULT_RANGE_SIGMAS)?;
    let cover = build_histogram(&x, cfg.num_bins, range)?;
    let scs = build_histogram(&y_scs, cfg.num_bins, range)?;
    let tcq = build_histogram(&y_tcq, cfg.num_bins, range)?;
    Ok(PdfResult {
        kl_scs: kl_divergence(&cover, &scs)?,
        kl_tcq: kl_divergence(&cover, &tcq)?,
        cover,
        scs,
        tcq,
    })
}

pub fn pdf_csv(r: &PdfResult) -> String {
    let mut out = csv_preamble(Experiment::Pdf);
    let _ = writeln!(out, "# kl_scs_bits={:e} kl_tcq_bits={:e}", r.kl_scs, r.kl_tcq);
    out.push_str("bin_low,bin_high,cover,scs,tcq\n");
    for (i, w) in r.cover.bin_edges.windows(2).enumerate() {
        let _ = writeln!(out, "{},{},{},{},{}", w[0], w[1], r.cover.counts[i], r.scs.counts[i], r.tcq.counts[i]);
    }
    out
}

/// Ratios `max/min` of neighbouring bin counts, skipping pairs with fewer
/// than `min_count` samples in either bin.
pub fn adjacent_bin_ratios(h: &Histogram, min_count: u64) -> Vec<f64> {
    h.counts
        .windows(2)
        .filter(|w| w[0] >= min_count && w[1] >= min_count)
        .map(|w| w[0].max(w[1]) as f64 / w[0].min(w[1]) as f64)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecurityRow {
    pub cover: String,
    pub snr_db: f64,
    pub report: SecurityReport,
}

/// Sub-band series of every whole frame of a WAV cover.
pub fn wav_bands(path: &Path, layout: &SubbandLayout) -> Result<Vec<Vec<f64>>> {
    let audio = read_wav(path)?;
    let frames = analyze_frames(&audio.to_f64(), layout)?;
    Ok((0..layout.num_bands).map(|b| band_series(&frames, b)).collect())
}

/// Laplacian series with the fixture's per-band scales, `n` coefficients each.
pub fn fixture_bands(fixture: Fixture, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let layout = SubbandLayout::default();
    (0..layout.num_bands)
        .into_par_iter()
        .map(|b| {
            let s = point_seed(seed, &format!("fixture/{}/{b}", fixture.name()));
            laplacian_samples(n, fixture.band_scale(b, layout.num_bands), s)
        })
        .collect()
}

/// KL against rate for every configured codec and cover.
pub fn run_security_sweep(cfg: &ExperimentConfig) -> Result<Vec<SecurityRow>> {
    cfg.validate()?;
    let covers: Vec<(String, Vec<Vec<f64>>)> = match &cfg.cover_wav {
        Some(p) => vec![(p.display().to_string(), wav_bands(p, &SubbandLayout::default())?)],
        None => cfg
            .fixtures
            .iter()
            .map(|&f| (f.name().to_owned(), fixture_bands(f, cfg.samples, cfg.seed)))
            .collect(),
    };
    let jobs: Vec<(usize, CodecKind, f64)> = (0..covers.len())
        .flat_map(|c| cfg.codecs.iter().flat_map(move |&k| cfg.rates.iter().map(move |&r| (c, k, r))))
        .collect();
    jobs.par_iter()
        .map(|&(c, kind, rate)| {
            let snr_db = cfg.operating_snr_db(kind);
            let embedder = SpreadEmbedder {
                codec: cfg.codec_spec(kind, snr_db)?,
                key: point_seed(cfg.seed, &format!("security-key/{kind}")).to_be_bytes().to_vec(),
            };
            let seed = point_seed(cfg.seed, &format!("security/{}/{kind}/{rate}", covers[c].0));
            let report = epsilon_security_sweep(&covers[c].1, &embedder, &[rate], cfg.epsilon, cfg.num_bins, seed)?
                .remove(0);
            Ok(SecurityRow {
                cover: covers[c].0.clone(),
                snr_db,
                report,
            })
        })
        .collect()
}

pub fn security_csv(rows: &[SecurityRow]) -> String {
    let mut out = csv_preamble(Experiment::Security);
    out.push_str("cover,snr_db,rate,codec,kl_bits,mean_kl_bits,epsilon,secure\n");
    for r in rows {
        let s = &r.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{:e},{:e},{},{}",
            r.cover, r.snr_db, s.rate, s.codec, s.kl_bits, s.mean_kl_bits, s.epsilon_threshold, s.secure
        );
    }
    out
}

/// Runs the configured experiment and returns its CSV.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<String> {
    Ok(match cfg.experiment {
        Experiment::Ber => ber_csv(&run_ber_sweep(cfg)?),
        Experiment::Pdf => pdf_csv(&run_pdf_experiment(cfg)?),
        Experiment::Security => security_csv(&run_security_sweep(cfg)?),
    })
}

/// Carrier of a PCM signal and the frames it came from.
pub struct AudioCarrier {
    pub samples: Vec<f64>,
    pub frames: Vec<SubbandFrame>,
    pub carrier: Vec<f64>,
    pub layout: SubbandLayout,
}

impl AudioCarrier {
    pub fn new(audio: &PcmAudio, layout: SubbandLayout) -> Result<Self> {
        let samples = audio.to_f64();
        let frames = analyze_frames(&samples, &layout)?;
        Ok(Self {
            carrier: carrier(&frames),
            samples,
            frames,
            layout,
        })
    }

    /// PCM audio whose carrier is `values`, up to rounding.
    pub fn render(&self, values: &[f64], sample_rate: u32) -> Result<PcmAudio> {
        let mut after = self.frames.clone();
        set_carrier(&mut after, values)?;
        PcmAudio::from_f64(&apply_frames(&self.samples, &self.frames, &after, &self.layout)?, sample_rate)
    }
}

/// Both protocol phases on a WAV cover.
pub fn stego_send(
    cover: &PcmAudio,
    payload: &[u8],
    recipient_public_key: &[u8],
    session: &SessionConfig,
    cipher: &dyn CipherProvider,
    rng: &mut impl Rng,
) -> Result<(PcmAudio, TempKey)> {
    let c = AudioCarrier::new(cover, SubbandLayout::default())?;
    let (init, temp) = send_init(&c.carrier, recipient_public_key, session, cipher, rng)?;
    let stego = send_message(&init, payload, &temp, session, cipher)?;
    Ok((c.render(&stego, cover.sample_rate)?, temp))
}

pub fn stego_recv(
    stego: &PcmAudio,
    private_key: &[u8],
    session: &SessionConfig,
    cipher: &dyn CipherProvider,
) -> Result<Vec<u8>> {
    let c = AudioCarrier::new(stego, SubbandLayout::default())?;
    let temp = receive_init(&c.carrier, private_key, session, cipher)?;
    receive_message(&c.carrier, &temp, session, cipher)
}

/// File-level [`stego_send`].
pub fn stego_send_file(
    cover: &Path,
    payload: &[u8],
    recipient_public_key: &[u8],
    session: &SessionConfig,
    out: &Path,
    rng: &mut impl Rng,
) -> Result<()> {
    let audio = read_wav(cover)?;
    let (stego, _) = stego_send(&audio, payload, recipient_public_key, session, &crate::protocol::TestCipher, rng)?;
    write_wav(&stego, out)
}

pub fn stego_recv_file(stego: &Path, private_key: &[u8], session: &SessionConfig) -> Result<Vec<u8>> {
    stego_recv(&read_wav(stego)?, private_key, session, &crate::protocol::TestCipher)
}

/// Per-band KL between the sub-bands of two signals.
pub fn band_kl(cover: &[f64], stego: &[f64], layout: &SubbandLayout, num_bins: usize) -> Result<Vec<f64>> {
    let a = analyze_frames(cover, layout)?;
    let b = analyze_frames(stego, layout)?;
    (0..layout.num_bands)
        .map(|band| crate::security::kl_cover_stego(&band_series(&a, band), &band_series(&b, band), num_bins))
        .collect()
}
