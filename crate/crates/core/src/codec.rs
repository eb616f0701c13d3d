//! One embed/decode interface over SCS, TCQ and turbo TCQ.
//!
//! Each codec is tuned for a [`ChannelParams`] and keyed per call, so the
//! experiment harness, spread transform and protocol can switch codecs by name.
//!
//! Every codec uses a secret per-element dither drawn from the key. For the
//! trellis codes it is applied by shifting the host before encoding and the
//! received signal before decoding; without it all codewords of a key share
//! one lattice, which shows in the stego histogram.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::channel::{BitMessage, ChannelParams, Signal};
use crate::error::{Error, Result};
use crate::prf;
use crate::scs::{scs_decode, scs_embed, ScsParams};
use crate::tcq::{tcq_decode, tcq_encode, TcqParams};
use crate::turbo::{turbo_decode, turbo_encode, TurboParams, DEFAULT_CONSTITUENT_LOG2_STATES};

/// Register length of plain TCQ when none is given.
pub const DEFAULT_TCQ_LOG2_STATES: u32 = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodecKind {
    Scs,
    Tcq,
    Turbo,
}

impl CodecKind {
    pub const ALL: [CodecKind; 3] = [CodecKind::Scs, CodecKind::Tcq, CodecKind::Turbo];

    pub fn name(self) -> &'static str {
        match self {
            CodecKind::Scs => "scs",
            CodecKind::Tcq => "tcq",
            CodecKind::Turbo => "turbo",
        }
    }
}

impl fmt::Display for CodecKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CodecKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scs" => Ok(CodecKind::Scs),
            "tcq" => Ok(CodecKind::Tcq),
            "turbo" => Ok(CodecKind::Turbo),
            other => Err(Error::InvalidParameter(format!("unknown codec `{other}`"))),
        }
    }
}

/// A codec choice bound to a channel.
#[derive(Clone, Debug, PartialEq)]
pub struct CodecSpec {
    pub kind: CodecKind,
    pub channel: ChannelParams,
    pub tcq_log2_states: u32,
    pub turbo_log2_states: u32,
    pub turbo_max_iterations: usize,
}

impl CodecSpec {
    pub fn new(kind: CodecKind, channel: ChannelParams) -> Self {
        Self {
            kind,
            channel,
            tcq_log2_states: DEFAULT_TCQ_LOG2_STATES,
            turbo_log2_states: DEFAULT_CONSTITUENT_LOG2_STATES,
            turbo_max_iterations: crate::turbo::DEFAULT_MAX_ITERATIONS,
        }
    }

    fn tcq(&self, key: &[u8]) -> Result<TcqParams> {
        TcqParams::for_channel(&self.channel, self.tcq_log2_states, key)
    }

    fn turbo(&self, n: usize, key: &[u8]) -> Result<TurboParams> {
        let mut p = TurboParams::for_channel(&self.channel, n, self.turbo_log2_states, key)?;
        p.max_iterations = self.turbo_max_iterations;
        Ok(p)
    }

    /// `v − d` for the keyed dither `d`, uniform over one step.
    fn undither(v: &[f64], delta: f64, key: &[u8]) -> Vec<f64> {
        let mut rng = prf::keyed_stream(key, "pkstego/trellis-dither");
        v.iter().map(|x| x - delta * rng.random::<f64>()).collect()
    }

    fn redither(v: &[f64], delta: f64, key: &[u8]) -> Result<Signal> {
        let mut rng = prf::keyed_stream(key, "pkstego/trellis-dither");
        Signal::new(v.iter().map(|x| x + delta * rng.random::<f64>()).collect())
    }

    /// Embeds one bit per element of `x`.
    pub fn embed(&self, x: &[f64], m: &[u8], key: &[u8]) -> Result<Signal> {
        match self.kind {
            CodecKind::Scs => scs_embed(x, m, &ScsParams::for_channel(&self.channel, x.len(), key)?),
            CodecKind::Tcq => {
                let p = self.tcq(key)?;
                let y = tcq_encode(&Self::undither(x, p.delta(), key), m, &p, 0)?.y;
                Self::redither(&y, p.delta(), key)
            }
            CodecKind::Turbo => {
                let p = self.turbo(x.len(), key)?;
                let y = turbo_encode(&Self::undither(x, p.delta(), key), m, &p)?.y;
                Self::redither(&y, p.delta(), key)
            }
        }
    }

    pub fn decode(&self, y: &[f64], key: &[u8]) -> Result<BitMessage> {
        match self.kind {
            CodecKind::Scs => scs_decode(y, &ScsParams::for_channel(&self.channel, y.len(), key)?),
            CodecKind::Tcq => {
                let p = self.tcq(key)?;
                tcq_decode(&Self::undither(y, p.delta(), key), &p, 0)
            }
            CodecKind::Turbo => {
                let p = self.turbo(y.len(), key)?;
                Ok(turbo_decode(&Self::undither(y, p.delta(), key), &p)?.message)
            }
        }
    }
}
