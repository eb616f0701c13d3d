//! Turbo TCQ: two parallel trellises exchanging soft information.
//!
//! Trellis A runs over the message in natural order and trellis B over the
//! interleaved message. Element `i` of the carrier takes its offset from A
//! when `i` is even and from B when `i` is odd, so every message bit is
//! observed through exactly one element. The interleaver maps even
//! positions to even positions and odd to odd, which gives B the odd
//! positions of its own time axis.
//!
//! Decoding alternates max-log BCJR passes. Each pass sees the channel only
//! on the elements its trellis owns, takes the other pass's extrinsic
//! log-likelihood ratios as priors, and hands back its own extrinsic output
//! (posterior minus prior). Iteration stops when the two posteriors agree.
//!
//! When the interleaver is the identity and both trellises are equal, both
//! passes walk the same path, so the code is plain TCQ and is decoded as such.

use std::fmt::Write as _;

use rand::seq::SliceRandom;

use crate::channel::{check_bits, seeded_rng, BitMessage, ChannelParams, Signal};
use crate::error::{invalid, Error, Result};
use crate::prf;
use crate::scs::delta_for_power;
use crate::tcq::{blend, branch_error, path_offsets, robust_alpha, snap, tcq_decode, TcqEncoding, TcqParams};
use crate::trellis::{build_recursive_trellis, Trellis};

pub const DEFAULT_MAX_ITERATIONS: usize = 10;
pub const DEFAULT_AGREEMENT_THRESHOLD: f64 = 1e-3;
/// Register length of the default constituent trellises.
pub const DEFAULT_CONSTITUENT_LOG2_STATES: u32 = 2;

const LLR_CLIP: f64 = 100.0;

/// Permutation `π` of `{0..n-1}`; B's time `j` carries element `π(j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    seed: Option<u64>,
    perm: Vec<u32>,
}

impl Interleaver {
    pub fn identity(n: usize) -> Self {
        Self {
            seed: None,
            perm: (0..n as u32).collect(),
        }
    }

    /// Seeded permutation that shuffles even and odd positions separately.
    pub fn parity_preserving(n: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let mut evens: Vec<u32> = (0..n as u32).step_by(2).collect();
        let mut odds: Vec<u32> = (1..n as u32).step_by(2).collect();
        evens.shuffle(&mut rng);
        odds.shuffle(&mut rng);
        let perm = (0..n)
            .map(|j| if j % 2 == 0 { evens[j / 2] } else { odds[j / 2] })
            .collect();
        Self {
            seed: Some(seed),
            perm,
        }
    }

    /// Arbitrary permutation; must be a bijection on `0..len`.
    pub fn from_permutation(perm: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            match seen.get_mut(p as usize) {
                Some(slot) if !*slot => *slot = true,
                _ => return invalid("interleaver is not a permutation"),
            }
        }
        Ok(Self { seed: None, perm })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(j, &p)| j == p as usize)
    }

    pub fn permutation(&self) -> &[u32] {
        &self.perm
    }

    /// `out[j] = v[π(j)]`.
    pub fn interleave<T: Copy>(&self, v: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| v[p as usize]).collect()
    }

    /// Inverse of [`Interleaver::interleave`].
    pub fn deinterleave<T: Copy + Default>(&self, w: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); w.len()];
        for (j, &p) in self.perm.iter().enumerate() {
            out[p as usize] = w[j];
        }
        out
    }

    /// `pkstego-interleaver 1` / `kind <identity|parity>` / `seed <u64>` / `length <n>`.
    pub fn to_text(&self) -> Result<String> {
        let mut out = String::from("pkstego-interleaver 1\n");
        match self.seed {
            Some(seed) => {
                let _ = write!(out, "kind parity\nseed {seed}\n");
            }
            None if self.is_identity() => out.push_str("kind identity\nseed 0\n"),
            None => return invalid("explicit permutations have no seed form"),
        }
        let _ = writeln!(out, "length {}", self.len());
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut seed = None;
        let mut length = None;
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        if lines.next() != Some("pkstego-interleaver 1") {
            return Err(Error::Format("missing `pkstego-interleaver 1` header".into()));
        }
        for line in lines {
            let (key, value) = line
                .split_once(' ')
                .ok_or_else(|| Error::Format(format!("bad line `{line}`")))?;
            let bad = |_| Error::Format(format!("bad value in `{line}`"));
            match key {
                "kind" => kind = Some(value.to_owned()),
                "seed" => seed = Some(value.parse::<u64>().map_err(bad)?),
                "length" => length = Some(value.parse::<usize>().map_err(bad)?),
                _ => return Err(Error::Format(format!("unknown field `{key}`"))),
            }
        }
        let missing = |f: &str| Error::Format(format!("missing `{f}`"));
        let length = length.ok_or_else(|| missing("length"))?;
        match kind.as_deref() {
            Some("identity") => Ok(Self::identity(length)),
            Some("parity") => Ok(Self::parity_preserving(length, seed.ok_or_else(|| missing("seed"))?)),
            _ => Err(missing("kind")),
        }
    }
}

/// Constituent trellises, interleaver and decoder settings.
#[derive(Clone, Debug, PartialEq)]
pub struct TurboParams {
    pub trellis_a: Trellis,
    pub trellis_b: Trellis,
    pub interleaver: Interleaver,
    pub alpha: f64,
    /// Channel noise variance assumed by the decoder metrics.
    pub noise_variance: f64,
    pub max_iterations: usize,
    pub agreement_threshold: f64,
}

impl TurboParams {
    pub fn new(
        trellis_a: Trellis,
        trellis_b: Trellis,
        interleaver: Interleaver,
        alpha: f64,
        noise_variance: f64,
    ) -> Result<Self> {
        let p = Self {
            trellis_a,
            trellis_b,
            interleaver,
            alpha,
            noise_variance,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            agreement_threshold: DEFAULT_AGREEMENT_THRESHOLD,
        };
        p.validate()?;
        Ok(p)
    }

    /// Keyed code for `n` elements over `channel`: recursive constituents
    /// with all state bits fed back, `α = P/(P+N)`, `Δ = √(12P)/α`.
    pub fn for_channel(channel: &ChannelParams, n: usize, r: u32, key: &[u8]) -> Result<Self> {
        let alpha = robust_alpha(channel);
        let delta = delta_for_power(channel.embed_power(), alpha);
        let taps = (1u32 << r) - 1;
        let a = build_recursive_trellis(r, delta, &prf::derive_key(key, "pkstego/turbo-a"), taps)?;
        let b = build_recursive_trellis(r, delta, &prf::derive_key(key, "pkstego/turbo-b"), taps)?;
        let seed_bytes = prf::derive_key(key, "pkstego/turbo-interleaver");
        let seed = u64::from_be_bytes(seed_bytes[..8].try_into().expect("8 bytes"));
        Self::new(a, b, Interleaver::parity_preserving(n, seed), alpha, channel.noise_variance())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trellis_a.delta() != self.trellis_b.delta() {
            return invalid("constituent trellises must share the same step");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return invalid(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.noise_variance >= 0.0 && self.noise_variance.is_finite()) {
            return invalid("decoder noise variance must be >= 0");
        }
        if self.max_iterations == 0 {
            return invalid("max_iterations must be >= 1");
        }
        if !(self.agreement_threshold > 0.0) {
            return invalid("agreement threshold must be > 0");
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.trellis_a.delta()
    }

    /// Identity interleaver with equal constituents: the code collapses to plain TCQ.
    pub fn is_degenerate(&self) -> bool {
        self.interleaver.is_identity() && self.trellis_a == self.trellis_b
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.interleaver.len() {
            return invalid(format!(
                "signal length {n} does not match interleaver length {}",
                self.interleaver.len()
            ));
        }
        Ok(())
    }

    /// Variance used in the Gaussian branch metric: channel noise plus the
    /// self-noise `(1−α)²Δ²/12` left by partial quantization.
    fn metric_variance(&self) -> f64 {
        let d = self.delta();
        let v = self.noise_variance + (1.0 - self.alpha).powi(2) * d * d / 12.0;
        v.max(d * d * 1e-4)
    }
}

/// Offset carried by each element for message `m`.
pub fn joint_offsets(m: &[u8], params: &TurboParams) -> Vec<f64> {
    let from_a = path_offsets(&params.trellis_a, m, 0);
    let from_b = params
        .interleaver
        .deinterleave(&path_offsets(&params.trellis_b, &params.interleaver.interleave(m), 0));
    from_a
        .into_iter()
        .zip(from_b)
        .enumerate()
        .map(|(i, (a, b))| if i % 2 == 0 { a } else { b })
        .collect()
}

/// Informed embedding of `m` with both constituent paths fixed by the message.
pub fn turbo_encode(x: &[f64], m: &[u8], params: &TurboParams) -> Result<TcqEncoding> {
    params.validate()?;
    params.check_len(x.len())?;
    if m.len() != x.len() {
        return invalid(format!("message length {} != signal length {}", m.len(), x.len()));
    }
    check_bits(m)?;
    let u = snap(x, &joint_offsets(m, params), params.delta());
    let y = blend(x, &u, params.alpha);
    Ok(TcqEncoding {
        u_star: Signal::from_vec(u),
        y: Signal::from_vec(y),
    })
}

/// Outcome of iterative decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct TurboDecoding {
    pub message: BitMessage,
    pub iterations_used: usize,
    /// Whether the agreement threshold was met before the iteration cap.
    pub converged: bool,
    /// Final log-likelihood ratios `ln P(0)/P(1)` per element.
    pub reliabilities: Vec<f64>,
}

pub fn turbo_decode(y: &[f64], params: &TurboParams) -> Result<TurboDecoding> {
    turbo_decode_traced(y, params, |_, _| {})
}

/// Like [`turbo_decode`], calling `on_iteration(k, hard decisions)` after
/// every completed iteration `k` (1-based).
pub fn turbo_decode_traced(
    y: &[f64],
    params: &TurboParams,
    mut on_iteration: impl FnMut(usize, &[u8]),
) -> Result<TurboDecoding> {
    params.validate()?;
    if y.is_empty() {
        return invalid("cannot decode an empty signal");
    }
    params.check_len(y.len())?;

    if params.is_degenerate() {
        let tcq = TcqParams::new(params.trellis_a.clone(), params.alpha)?;
        let message = tcq_decode(y, &tcq, 0)?;
        on_iteration(1, &message);
        let reliabilities = message.iter().map(|&b| if b == 0 { LLR_CLIP } else { -LLR_CLIP }).collect();
        return Ok(TurboDecoding {
            message,
            iterations_used: 1,
            converged: true,
            reliabilities,
        });
    }

    let n = y.len();
    let pi = &params.interleaver;
    let scale = 0.5 / params.metric_variance();
    let observed_a: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
    let observed_b: Vec<bool> = pi.permutation().iter().map(|&p| p % 2 == 1).collect();
    let y_b = pi.interleave(y);

    let mut ext_b_to_a = vec![0.0; n];
    let mut post_b = vec![0.0; n];
    let mut iterations_used = 0;
    let mut converged = false;
    let mut hard = vec![0u8; n];
    for k in 1..=params.max_iterations {
        iterations_used = k;
        let post_a = max_log_bcjr(&params.trellis_a, y, &observed_a, &ext_b_to_a, scale);
        let ext_a_to_b: Vec<f64> = post_a
            .iter()
            .zip(&ext_b_to_a)
            .map(|(p, e)| (p - e).clamp(-LLR_CLIP, LLR_CLIP))
            .collect();
        let prior_b = pi.interleave(&ext_a_to_b);
        let post_b_time = max_log_bcjr(&params.trellis_b, &y_b, &observed_b, &prior_b, scale);
        for (j, &p) in pi.permutation().iter().enumerate() {
            let p = p as usize;
            ext_b_to_a[p] = (post_b_time[j] - prior_b[j]).clamp(-LLR_CLIP, LLR_CLIP);
            post_b[p] = post_b_time[j];
        }
        for (h, &l) in hard.iter_mut().zip(&post_b) {
            *h = u8::from(l < 0.0);
        }
        on_iteration(k, &hard);
        let disagreement = post_a
            .iter()
            .zip(&post_b)
            .map(|(&a, &b)| (prob_zero(a) - prob_zero(b)).abs())
            .sum::<f64>()
            / n as f64;
        if disagreement <= params.agreement_threshold {
            converged = true;
            break;
        }
    }
    Ok(TurboDecoding {
        message: BitMessage::new(hard)?,
        iterations_used,
        converged,
        reliabilities: post_b,
    })
}

fn prob_zero(llr: f64) -> f64 {
    1.0 / (1.0 + (-llr).exp())
}

/// Max-log BCJR over one constituent trellis starting in state 0 with a free
/// end state. `prior[t]` and the returned values are `ln P(0)/P(1)`.
fn max_log_bcjr(trellis: &Trellis, y: &[f64], observed: &[bool], prior: &[f64], scale: f64) -> Vec<f64> {
    let n = y.len();
    let states = trellis.num_states();
    let delta = trellis.delta();
    let gamma = |t: usize, s: usize, b: u8| -> f64 {
        let apriori = if b == 0 { 0.5 * prior[t] } else { -0.5 * prior[t] };
        if observed[t] {
            let e = branch_error(y[t], delta, trellis.output_dither(s, b));
            apriori - e * e * scale
        } else {
            apriori
        }
    };

    let mut alpha = vec![f64::NEG_INFINITY; (n + 1) * states];
    alpha[0] = 0.0;
    for t in 0..n {
        let (cur, nxt) = alpha[t * states..(t + 2) * states].split_at_mut(states);
        for (ns, slot) in nxt.iter_mut().enumerate() {
            let [(p0, b0), (p1, b1)] = trellis.predecessors(ns);
            let m0 = cur[p0 as usize] + gamma(t, p0 as usize, b0);
            let m1 = cur[p1 as usize] + gamma(t, p1 as usize, b1);
            *slot = m0.max(m1);
        }
        let top = nxt.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        nxt.iter_mut().for_each(|v| *v -= top);
    }

    let mut beta = vec![0.0; states];
    let mut beta_prev = vec![0.0; states];
    let mut llr = vec![0.0; n];
    for t in (0..n).rev() {
        let cur = &alpha[t * states..(t + 1) * states];
        let mut best = [f64::NEG_INFINITY; 2];
        for s in 0..states {
            let mut acc = f64::NEG_INFINITY;
            for b in 0..2u8 {
                let g = gamma(t, s, b) + beta[trellis.next_state(s, b)];
                best[b as usize] = best[b as usize].max(cur[s] + g);
                acc = acc.max(g);
            }
            beta_prev[s] = acc;
        }
        llr[t] = (best[0] - best[1]).clamp(-LLR_CLIP, LLR_CLIP);
        let top = beta_prev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (dst, &v) in beta.iter_mut().zip(&beta_prev) {
            *dst = v - top;
        }
    }
    llr
}
