//! Orthonormal MDCT with a sine window and 50 % overlap.
//!
//! With `M` coefficients per window of `2M` samples,
//!
//! `X[k] = √(2/M) Σₙ w[n]·z[n]·cos(π/M·(n + ½ + M/2)(k + ½))`
//!
//! and the inverse applies the same kernel and window. The window satisfies
//! `w[n]² + w[n+M]² = 1`, so overlap-adding inverse frames reconstructs every
//! sample covered by two windows, and the analysis rows are orthonormal.
//!
//! The transform folds the windowed frame to `M` samples and runs a type-IV
//! DCT through an `M/2`-point complex FFT.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};

/// Coefficients per window.
pub const MDCT_COEFFS: usize = 256;
/// Samples per analysis window.
pub const MDCT_WINDOW: usize = 2 * MDCT_COEFFS;

/// `sin(π(n + ½)/(2M))` for a window of `2M` samples.
pub fn sine_window(m: usize) -> Vec<f64> {
    (0..2 * m).map(|n| (PI * (n as f64 + 0.5) / (2 * m) as f64).sin()).collect()
}

/// Planned transform for a fixed size.
pub struct Mdct {
    m: usize,
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
}

impl Mdct {
    /// `m` coefficients per window; `m` must be a positive multiple of 2.
    pub fn new(m: usize) -> Result<Self> {
        Self::with_window(m, sine_window(m))
    }

    pub fn with_window(m: usize, window: Vec<f64>) -> Result<Self> {
        if m < 2 || m % 2 != 0 {
            return invalid(format!("MDCT size must be even and >= 2, got {m}"));
        }
        if window.len() != 2 * m {
            return invalid(format!("window length {} != {}", window.len(), 2 * m));
        }
        let fft = FftPlanner::new().plan_fft_forward(m / 2);
        let mf = m as f64;
        let pre = (0..m / 2)
            .map(|n| Complex64::from_polar(1.0, -PI * (n as f64 + 0.25) / mf))
            .collect();
        let post = (0..m / 2).map(|k| Complex64::from_polar(1.0, -PI * k as f64 / mf)).collect();
        Ok(Self {
            m,
            window,
            fft,
            pre,
            post,
        })
    }

    pub fn coeffs(&self) -> usize {
        self.m
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// `X[k] = Σ v[n] cos(π/M (n+½)(k+½))`.
    fn dct4(&self, v: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut buf: Vec<Complex64> = (0..m / 2)
            .map(|n| Complex64::new(v[2 * n], v[m - 1 - 2 * n]) * self.pre[n])
            .collect();
        self.fft.process(&mut buf);
        let mut out = vec![0.0; m];
        for (k, (c, tw)) in buf.iter().zip(&self.post).enumerate() {
            let c = c * tw;
            out[2 * k] = c.re;
            out[m - 1 - 2 * k] = -c.im;
        }
        out
    }

    /// One window of `2M` samples to `M` coefficients.
    pub fn forward(&self, frame: &[f64]) -> Result<Vec<f64>> {
        let m = self.m;
        if frame.len() != 2 * m {
            return invalid(format!("MDCT frame must have {} samples, got {}", 2 * m, frame.len()));
        }
        let z: Vec<f64> = frame.iter().zip(&self.window).map(|(a, w)| a * w).collect();
        let h = m / 2;
        let v: Vec<f64> = (0..m)
            .map(|n| {
                if n < h {
                    -z[3 * h - 1 - n] - z[3 * h + n]
                } else {
                    z[n - h] - z[3 * h - 1 - n]
                }
            })
            .collect();
        let scale = (2.0 / m as f64).sqrt();
        Ok(self.dct4(&v).into_iter().map(|x| x * scale).collect())
    }

    /// `M` coefficients to a windowed `2M`-sample frame, ready for overlap-add.
    pub fn inverse(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let m = self.m;
        if coeffs.len() != m {
            return invalid(format!("MDCT inverse needs {m} coefficients, got {}", coeffs.len()));
        }
        let scale = (2.0 / m as f64).sqrt();
        let v = self.dct4(coeffs);
        let h = m / 2;
        let mut z = vec![0.0; 2 * m];
        for (n, &vn) in v.iter().enumerate() {
            if n < h {
                z[3 * h - 1 - n] -= vn;
                z[3 * h + n] -= vn;
            } else {
                z[n - h] += vn;
                z[3 * h - 1 - n] -= vn;
            }
        }
        Ok(z.iter().zip(&self.window).map(|(a, w)| a * w * scale).collect())
    }

    /// Number of full windows (hop `M`) inside `len` samples.
    pub fn num_windows(&self, len: usize) -> usize {
        if len < 2 * self.m {
            0
        } else {
            (len - 2 * self.m) / self.m + 1
        }
    }

    /// Transforms every full window of `signal`; window `t` starts at `t·M`.
    pub fn analyze(&self, signal: &[f64]) -> Result<Vec<Vec<f64>>> {
        (0..self.num_windows(signal.len()))
            .map(|t| self.forward(&signal[t * self.m..t * self.m + 2 * self.m]))
            .collect()
    }

    /// Overlap-adds inverse windows into a signal of `len` samples.
    pub fn synthesize(&self, windows: &[Vec<f64>], len: usize) -> Result<Vec<f64>> {
        if windows.len() > self.num_windows(len) {
            return invalid(format!("{} windows do not fit in {len} samples", windows.len()));
        }
        let mut out = vec![0.0; len];
        for (t, c) in windows.iter().enumerate() {
            for (o, v) in out[t * self.m..].iter_mut().zip(self.inverse(c)?) {
                *o += v;
            }
        }
        Ok(out)
    }
}

/// Window-major flat list of coefficients, `[t·M + k]`.
pub fn flatten(windows: &[Vec<f64>]) -> Vec<f64> {
    windows.iter().flatten().copied().collect()
}

pub fn unflatten(coeffs: &[f64], m: usize) -> Result<Vec<Vec<f64>>> {
    if m == 0 || coeffs.len() % m != 0 {
        return invalid(format!("{} coefficients are not a whole number of windows", coeffs.len()));
    }
    Ok(coeffs.chunks(m).map(<[f64]>::to_vec).collect())
}
