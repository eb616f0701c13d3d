//! Statistics-preserving embedding for the initialization phase.
//!
//! Instead of pulling the cover onto the target codeword `u*` (which leaves
//! stego samples suspiciously close to codewords), the cover is pushed just
//! inside the Voronoi region of `u*`:
//!
//! 1. `y = x`
//! 2. find the closest codeword `u` of the whole codebook to `y`; stop if `u = u*`
//! 3. `d = (u* − u)/|u* − u|`, `β = |u* − u|/2 + √N + ε`
//! 4. `y ← y + β·d`, go to 2
//!
//! Norms are Euclidean over the whole block.

use crate::channel::{check_bits, Signal};
use crate::error::{invalid, Error, Result};
use crate::tcq::{nearest_codeword_any, tcq_encode, TcqParams};

pub const DEFAULT_MAX_ITERATIONS: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct InitEmbedConfig {
    pub noise_variance: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub tcq: TcqParams,
}

impl InitEmbedConfig {
    /// Defaults: `ε = 0.5·√N`, 50 iterations.
    pub fn new(tcq: TcqParams, noise_variance: f64) -> Result<Self> {
        let cfg = Self {
            noise_variance,
            epsilon: 0.5 * noise_variance.max(0.0).sqrt(),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tcq,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return invalid("noise variance must be >= 0");
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return invalid("margin epsilon must be >= 0");
        }
        if self.max_iterations == 0 {
            return invalid("max_iterations must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitEmbedding {
    pub y: Signal,
    pub iterations: usize,
    pub u_star: Signal,
    /// `|u* − u|` observed at each step 2 that did not terminate.
    pub distances: Vec<f64>,
}

/// Runs the four-step algorithm. Fails with [`Error::NotConverged`] carrying
/// the last `y` when `u*` is not reached within `max_iterations` pushes.
pub fn iterative_embed(x: &[f64], m: &[u8], cfg: &InitEmbedConfig) -> Result<InitEmbedding> {
    cfg.validate()?;
    check_bits(m)?;
    let u_star = tcq_encode(x, m, &cfg.tcq, 0)?.u_star;
    let tol = 1e-9 * cfg.tcq.delta();
    let mut y = x.to_vec();
    let mut distances = Vec::new();
    for iterations in 0..=cfg.max_iterations {
        let (u, _) = nearest_codeword_any(&y, &cfg.tcq, 0)?;
        if same_codeword(&u, &u_star, tol) {
            return Ok(InitEmbedding {
                y: Signal::from_vec(y),
                iterations,
                u_star,
                distances,
            });
        }
        if iterations == cfg.max_iterations {
            break;
        }
        distances.push(distance(&u_star, &u));
        y = embed_step(&y, &u, &u_star, cfg.noise_variance, cfg.epsilon);
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        last: y,
    })
}

/// Steps 3 and 4: `y + (|u*−u|/2 + √N + ε)·(u*−u)/|u*−u|`.
pub fn embed_step(y: &[f64], u: &[f64], u_star: &[f64], noise_variance: f64, epsilon: f64) -> Vec<f64> {
    let norm = distance(u_star, u);
    if norm == 0.0 {
        return y.to_vec();
    }
    let beta = norm / 2.0 + noise_variance.sqrt() + epsilon;
    y.iter()
        .zip(u.iter().zip(u_star))
        .map(|(&yi, (&ui, &si))| yi + beta * (si - ui) / norm)
        .collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

fn same_codeword(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(p, q)| (p - q).abs() <= tol)
}

/// Mean over signals of the per-element mean squared distance to the nearest
/// codeword of the whole codebook.
pub fn distance_statistics<S: AsRef<[f64]>>(signals: &[S], tcq: &TcqParams) -> Result<f64> {
    if signals.is_empty() {
        return invalid("distance statistics need at least one signal");
    }
    let mut total = 0.0;
    for s in signals {
        let s = s.as_ref();
        let (u, _) = nearest_codeword_any(s, tcq, 0)?;
        total += s.iter().zip(u.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / s.len() as f64;
    }
    Ok(total / signals.len() as f64)
}

/// `distance_statistics(stego) / distance_statistics(cover)`; near 1 when
/// embedding leaves no distance-to-codeword artifact.
pub fn artifact_gap<C: AsRef<[f64]>, S: AsRef<[f64]>>(cover: &[C], stego: &[S], tcq: &TcqParams) -> Result<f64> {
    if cover.is_empty() || stego.is_empty() {
        return invalid("artifact gap needs non-empty cover and stego sets");
    }
    let dc = distance_statistics(cover, tcq)?;
    if dc == 0.0 {
        return Err(Error::InvalidData("cover signals lie on codewords".into()));
    }
    Ok(distance_statistics(stego, tcq)? / dc)
}
