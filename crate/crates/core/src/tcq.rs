//! Trellis-coded quantization as a dirty-paper code.
//!
//! The message fixes a path through the trellis, and the path fixes one
//! lattice `{k·Δ + o(s_i, m[i])}` per element. Encoding therefore only has to
//! pick the nearest lattice point per element. Decoding searches every path
//! with the Viterbi algorithm, using the branch metric
//! `min_k (y[i] − k·Δ − o(s, b))²`.

use crate::channel::{check_bits, BitMessage, ChannelParams, Signal};
use crate::error::{invalid, Result};
use crate::scs::{delta_for_power, nearest_on_lattice};
use crate::trellis::{build_trellis, Trellis};

/// Trellis plus embedding strength. The quantization step lives in the trellis.
#[derive(Clone, Debug, PartialEq)]
pub struct TcqParams {
    trellis: Trellis,
    alpha: f64,
}

impl TcqParams {
    pub fn new(trellis: Trellis, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return invalid(format!("TCQ alpha must lie in (0, 1], got {alpha}"));
        }
        Ok(Self { trellis, alpha })
    }

    /// Shift-register trellis tuned for `channel`: `α = P/(P+N)` and
    /// `Δ = √(12P)/α`, so uniform-host embedding has power `P`.
    pub fn for_channel(channel: &ChannelParams, r: u32, key: &[u8]) -> Result<Self> {
        let alpha = robust_alpha(channel);
        let trellis = build_trellis(r, delta_for_power(channel.embed_power(), alpha), key)?;
        Self::new(trellis, alpha)
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.trellis.delta()
    }
}

/// `α = P/(P+N)`.
pub fn robust_alpha(channel: &ChannelParams) -> f64 {
    let p = channel.embed_power();
    p / (p + channel.noise_variance())
}

/// Result of informed encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct TcqEncoding {
    /// Closest codeword consistent with the message.
    pub u_star: Signal,
    /// Stego signal `x + α(u* − x)`.
    pub y: Signal,
}

/// Offsets along the path that `bits` drive from `start_state`.
pub(crate) fn path_offsets(trellis: &Trellis, bits: &[u8], start_state: usize) -> Vec<f64> {
    let mut s = start_state;
    bits.iter()
        .map(|&b| {
            let o = trellis.output_dither(s, b);
            s = trellis.next_state(s, b);
            o
        })
        .collect()
}

/// Per-element nearest lattice point for a fixed offset sequence.
pub(crate) fn snap(v: &[f64], offsets: &[f64], delta: f64) -> Vec<f64> {
    v.iter()
        .zip(offsets)
        .map(|(&vi, &o)| nearest_on_lattice(vi, delta, o))
        .collect()
}

pub(crate) fn blend(x: &[f64], u: &[f64], alpha: f64) -> Vec<f64> {
    if alpha == 1.0 {
        return u.to_vec();
    }
    x.iter().zip(u).map(|(&xi, &ui)| xi + alpha * (ui - xi)).collect()
}

/// Informed embedding of `m` into `x`.
pub fn tcq_encode(x: &[f64], m: &[u8], params: &TcqParams, start_state: usize) -> Result<TcqEncoding> {
    if x.len() != m.len() {
        return invalid(format!("message length {} != signal length {}", m.len(), x.len()));
    }
    check_bits(m)?;
    params.trellis.check_state(start_state)?;
    let offsets = path_offsets(&params.trellis, m, start_state);
    let u = snap(x, &offsets, params.delta());
    let y = blend(x, &u, params.alpha);
    Ok(TcqEncoding {
        u_star: Signal::from_vec(u),
        y: Signal::from_vec(y),
    })
}

/// Message labelling the minimum-distortion path for `y`.
pub fn tcq_decode(y: &[f64], params: &TcqParams, start_state: usize) -> Result<BitMessage> {
    Ok(nearest_codeword_any(y, params, start_state)?.1)
}

/// Closest codeword of the whole codebook to `y`, with its message labelling.
pub fn nearest_codeword_any(
    y: &[f64],
    params: &TcqParams,
    start_state: usize,
) -> Result<(Signal, BitMessage)> {
    let trellis = &params.trellis;
    if y.is_empty() {
        return invalid("cannot decode an empty signal");
    }
    trellis.check_state(start_state)?;
    let bits = viterbi(y, trellis, start_state);
    let offsets = path_offsets(trellis, &bits, start_state);
    let u = snap(y, &offsets, trellis.delta());
    Ok((Signal::from_vec(u), BitMessage::new(bits)?))
}

#[inline]
pub(crate) fn branch_error(v: f64, delta: f64, offset: f64) -> f64 {
    v - nearest_on_lattice(v, delta, offset)
}

/// Minimum squared-error path search. Survivor decisions are stored as one
/// bit per state and step.
fn viterbi(y: &[f64], trellis: &Trellis, start_state: usize) -> Vec<u8> {
    let states = trellis.num_states();
    let delta = trellis.delta();
    let words = states.div_ceil(64);
    let mut decisions = vec![0u64; words * y.len()];
    let mut metric = vec![f64::INFINITY; states];
    metric[start_state] = 0.0;
    let mut next = vec![0.0; states];
    // branch metrics for the current element, indexed [state][bit]
    let mut branch = vec![[0.0f64; 2]; states];

    for (i, &yi) in y.iter().enumerate() {
        for (s, bm) in branch.iter_mut().enumerate() {
            for b in 0..2u8 {
                let e = branch_error(yi, delta, trellis.output_dither(s, b));
                bm[b as usize] = e * e;
            }
        }
        let row = &mut decisions[i * words..(i + 1) * words];
        for (ns, slot) in next.iter_mut().enumerate() {
            let [(p0, b0), (p1, b1)] = trellis.predecessors(ns);
            let m0 = metric[p0 as usize] + branch[p0 as usize][b0 as usize];
            let m1 = metric[p1 as usize] + branch[p1 as usize][b1 as usize];
            if m1 < m0 {
                *slot = m1;
                row[ns / 64] |= 1 << (ns % 64);
            } else {
                *slot = m0;
            }
        }
        std::mem::swap(&mut metric, &mut next);
    }

    let mut state = metric
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (s, &m)| if m < best.1 { (s, m) } else { best })
        .0;
    let mut bits = vec![0u8; y.len()];
    for i in (0..y.len()).rev() {
        let taken = (decisions[i * words + state / 64] >> (state % 64)) & 1;
        let (prev, bit) = trellis.predecessors(state)[taken as usize];
        bits[i] = bit;
        state = prev as usize;
    }
    bits
}
