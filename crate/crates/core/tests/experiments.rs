use statrs::distribution::{ContinuousCDF, Normal};

use pkstego::codec::CodecKind;
use pkstego::harness::*;

#[test]
fn pdf_experiment_histograms() {
    let r = run_pdf_experiment(&ExperimentConfig::fig2()).unwrap();

    // cover against the Gaussian cdf, over bins expecting at least 50 samples
    let g = Normal::new(0.0, 1000.0).unwrap();
    let total = r.cover.total as f64;
    let (mut chi2, mut dof) = (0.0, 0);
    for (w, &c) in r.cover.bin_edges.windows(2).zip(&r.cover.counts) {
        let expected = total * (g.cdf(w[1]) - g.cdf(w[0]));
        if expected >= 50.0 {
            chi2 += (c as f64 - expected).powi(2) / expected;
            dof += 1;
        }
    }
    assert!(chi2 / f64::from(dof) < 1.6, "chi2/dof = {}", chi2 / f64::from(dof));

    // inside ±2σ the Gaussian's own neighbouring-bin ratio stays below 1.23
    let centre: Vec<_> = r.tcq.bin_edges.windows(2).map(|w| w[0].abs().max(w[1].abs()) <= 2000.0).collect();
    let mut inner = r.tcq.clone();
    inner.counts = r.tcq.counts.iter().zip(&centre).map(|(&c, &k)| if k { c } else { 0 }).collect();
    let worst = adjacent_bin_ratios(&inner, 1).into_iter().fold(0.0, f64::max);
    assert!(worst <= 1.3, "{worst}");

    assert!(r.kl_scs >= 10.0 * r.kl_tcq, "{} vs {}", r.kl_scs, r.kl_tcq);
}

#[test]
fn turbo_at_10_db() {
    let cfg = ExperimentConfig {
        codecs: vec![CodecKind::Turbo],
        snr_db_grid: vec![10.0],
        samples: 200_000,
        ..ExperimentConfig::fig4()
    };
    let p = &run_ber_sweep(&cfg).unwrap()[0];
    assert!(p.ber() <= 1e-4, "{}", p.ber());
}

#[test]
fn security_sweep_orders_codecs_on_quiet_bands() {
    let cfg = ExperimentConfig {
        samples: 100_000,
        rates: vec![1.0],
        fixtures: vec![pkstego::audio::Fixture::Smooth],
        ..ExperimentConfig::fig5()
    };
    let rows = run_security_sweep(&cfg).unwrap();
    let kl = |c: CodecKind| rows.iter().find(|r| r.report.codec == c.name()).unwrap().report.mean_kl_bits;
    assert!(kl(CodecKind::Scs) > 2.0 * kl(CodecKind::Turbo));
}
