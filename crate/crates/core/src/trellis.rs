//! Keyed trellis structure shared by the TCQ and turbo TCQ codecs.
//!
//! A trellis has `2^r` states. Each `(state, bit)` branch leads to a next
//! state and carries a dither offset in `[-Δ/2, Δ/2)`; the codewords of a
//! branch are the lattice `{k·Δ + offset}`.
//!
//! Offsets are pseudo-random in the key but follow a fixed coset layout so
//! the partition keeps a usable minimum distance:
//!
//! * the two branches leaving a state are `Δ/2` apart,
//! * the two branches entering a state are `Δ/4` apart, and
//! * the low parts of the states (state without its most significant bit)
//!   get phases spread evenly over half a step, in keyed order.
//!
//! Concretely, with `v` the bit shifted into the register, `L = 2^(r−1)`,
//! `ρ` a keyed permutation of `0..L` and `c` a keyed shift in `[0, 1)`:
//! `g(low) = frac(c + ρ(low)/(2L))` and
//! `offset = Δ·(frac(g(low) + v/2 + msb/4) − ½)`. With `r = 2` this is the
//! classic four-subset partition.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::prf;

/// Largest supported register length.
pub const MAX_LOG2_STATES: u32 = 16;

const FORMAT_TAG: &str = "pkstego-trellis";
const FORMAT_VERSION: u32 = 1;

/// How the input bit enters the state register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    /// `next = ((s << 1) | bit) mod 2^r`.
    ShiftRegister,
    /// `next = ((s << 1) | (bit ⊕ parity(s & taps))) mod 2^r`.
    Recursive { feedback_taps: u32 },
}

/// Immutable, keyed state machine with per-branch dither offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct Trellis {
    log2_states: u32,
    delta: f64,
    topology: Topology,
    key_fingerprint: [u8; 8],
    next: Vec<[u32; 2]>,
    dither: Vec<[f64; 2]>,
    // the two (previous state, bit) pairs entering each state
    pred: Vec<[(u32, u8); 2]>,
}

/// Shift-register trellis with `2^r` states and keyed offsets.
pub fn build_trellis(r: u32, delta: f64, key: &[u8]) -> Result<Trellis> {
    Trellis::build(r, delta, key, Topology::ShiftRegister)
}

/// Recursive (feedback) trellis; the turbo code uses these as constituents.
pub fn build_recursive_trellis(r: u32, delta: f64, key: &[u8], feedback_taps: u32) -> Result<Trellis> {
    Trellis::build(r, delta, key, Topology::Recursive { feedback_taps })
}

impl Trellis {
    pub fn build(r: u32, delta: f64, key: &[u8], topology: Topology) -> Result<Self> {
        check_shape(r, delta, topology)?;
        let states = 1usize << r;
        let low_count = states >> 1;
        let mut stream = prf::keyed_stream(key, "pkstego/trellis-offsets");
        let shift: f64 = stream.random();
        let mut rank: Vec<usize> = (0..low_count.max(1)).collect();
        rank.shuffle(&mut stream);
        let spacing = 1.0 / (2.0 * rank.len() as f64);
        let phase: Vec<f64> = rank.iter().map(|&k| (shift + k as f64 * spacing).fract()).collect();
        let mut dither = vec![[0.0; 2]; states];
        for (s, row) in dither.iter_mut().enumerate() {
            for bit in 0..2u8 {
                let v = shifted_bit(topology, s as u32, bit);
                let msb = (s >> (r - 1)) & 1;
                let low = s & (low_count.max(1) - 1);
                let h = (phase[low] + f64::from(v) / 2.0 + msb as f64 / 4.0).fract();
                row[bit as usize] = delta * (h - 0.5);
            }
        }
        Self::assemble(r, delta, topology, prf::fingerprint(key), dither)
    }

    fn assemble(
        r: u32,
        delta: f64,
        topology: Topology,
        key_fingerprint: [u8; 8],
        dither: Vec<[f64; 2]>,
    ) -> Result<Self> {
        let states = 1usize << r;
        let mask = (states - 1) as u32;
        let next: Vec<[u32; 2]> = (0..states as u32)
            .map(|s| {
                [0u8, 1].map(|b| ((s << 1) | u32::from(shifted_bit(topology, s, b))) & mask)
            })
            .collect();
        let mut incoming: Vec<Vec<(u32, u8)>> = vec![Vec::with_capacity(2); states];
        for (s, row) in next.iter().enumerate() {
            for b in 0..2u8 {
                incoming[row[b as usize] as usize].push((s as u32, b));
            }
        }
        let pred = incoming
            .into_iter()
            .map(|v| match v.as_slice() {
                [a, b] => Ok([*a, *b]),
                _ => Err(Error::InvalidParameter("trellis state without exactly two predecessors".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            log2_states: r,
            delta,
            topology,
            key_fingerprint,
            next,
            dither,
            pred,
        })
    }

    pub fn log2_states(&self) -> u32 {
        self.log2_states
    }

    pub fn num_states(&self) -> usize {
        self.next.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn key_fingerprint(&self) -> [u8; 8] {
        self.key_fingerprint
    }

    #[inline]
    pub fn next_state(&self, state: usize, bit: u8) -> usize {
        self.next[state][bit as usize] as usize
    }

    #[inline]
    pub fn output_dither(&self, state: usize, bit: u8) -> f64 {
        self.dither[state][bit as usize]
    }

    /// `(previous state, bit)` pairs that lead into `state`.
    #[inline]
    pub fn predecessors(&self, state: usize) -> [(u32, u8); 2] {
        self.pred[state]
    }

    pub(crate) fn check_state(&self, state: usize) -> Result<()> {
        if state >= self.num_states() {
            return invalid(format!(
                "state {state} outside a {}-state trellis",
                self.num_states()
            ));
        }
        Ok(())
    }

    /// Text form exchanged between sender and receiver.
    ///
    /// ```text
    /// pkstego-trellis 1
    /// log2-states <r>
    /// delta <Δ>
    /// topology shift | topology recursive <taps>
    /// key-fingerprint <16 hex digits>
    /// dither
    /// <state> <offset bit 0> <offset bit 1>     (one line per state)
    /// ```
    ///
    /// Reals are written in shortest round-trip form, so parsing is bit-exact.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_TAG} {FORMAT_VERSION}");
        let _ = writeln!(out, "log2-states {}", self.log2_states);
        let _ = writeln!(out, "delta {:?}", self.delta);
        match self.topology {
            Topology::ShiftRegister => out.push_str("topology shift\n"),
            Topology::Recursive { feedback_taps } => {
                let _ = writeln!(out, "topology recursive {feedback_taps}");
            }
        }
        let _ = writeln!(out, "key-fingerprint {}", hex::encode(self.key_fingerprint));
        out.push_str("dither\n");
        for (s, [d0, d1]) in self.dither.iter().enumerate() {
            let _ = writeln!(out, "{s} {d0:?} {d1:?}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut field = |name: &str| -> Result<Vec<String>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("missing `{name}` line")))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(name) {
                return Err(Error::Format(format!("expected `{name}`, found `{line}`")));
            }
            Ok(parts.map(str::to_owned).collect())
        };
        let header = field(FORMAT_TAG)?;
        if header != [FORMAT_VERSION.to_string()] {
            return Err(Error::Format(format!("unsupported trellis version {header:?}")));
        }
        let r: u32 = parse_one(&field("log2-states")?)?;
        let delta: f64 = parse_one(&field("delta")?)?;
        let topo = field("topology")?;
        let topology = match topo.as_slice() {
            [t] if t == "shift" => Topology::ShiftRegister,
            [t, taps] if t == "recursive" => Topology::Recursive {
                feedback_taps: taps.parse().map_err(|_| Error::Format(format!("bad taps `{taps}`")))?,
            },
            _ => return Err(Error::Format(format!("bad topology {topo:?}"))),
        };
        let fp_hex: String = parse_one(&field("key-fingerprint")?)?;
        let fp_bytes = hex::decode(&fp_hex).map_err(|e| Error::Format(e.to_string()))?;
        let key_fingerprint: [u8; 8] = fp_bytes
            .try_into()
            .map_err(|_| Error::Format("key fingerprint must be 8 bytes".into()))?;
        field("dither")?;
        check_shape(r, delta, topology).map_err(|e| Error::Format(e.to_string()))?;
        let states = 1usize << r;
        let mut dither = Vec::with_capacity(states);
        for s in 0..states {
            let row = lines
                .next()
                .ok_or_else(|| Error::Format(format!("dither table truncated at state {s}")))?;
            let cols: Vec<&str> = row.split_whitespace().collect();
            let [idx, d0, d1] = cols.as_slice() else {
                return Err(Error::Format(format!("bad dither row `{row}`")));
            };
            if idx.parse::<usize>().ok() != Some(s) {
                return Err(Error::Format(format!("dither row out of order: `{row}`")));
            }
            let parse = |v: &str| -> Result<f64> {
                let d: f64 = v.parse().map_err(|_| Error::Format(format!("bad offset `{v}`")))?;
                if !(d >= -delta / 2.0 && d < delta / 2.0) {
                    return Err(Error::Format(format!("offset {d} outside [-Δ/2, Δ/2)")));
                }
                Ok(d)
            };
            dither.push([parse(d0)?, parse(d1)?]);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Format(format!("trailing data `{extra}`")));
        }
        Self::assemble(r, delta, topology, key_fingerprint, dither)
    }
}

fn parse_one<T: std::str::FromStr>(values: &[String]) -> Result<T> {
    match values {
        [v] => v.parse().map_err(|_| Error::Format(format!("cannot parse `{v}`"))),
        _ => Err(Error::Format(format!("expected one value, got {values:?}"))),
    }
}

fn check_shape(r: u32, delta: f64, topology: Topology) -> Result<()> {
    if !(1..=MAX_LOG2_STATES).contains(&r) {
        return invalid(format!("trellis register length must be in 1..={MAX_LOG2_STATES}, got {r}"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return invalid(format!("trellis step must be > 0, got {delta}"));
    }
    if let Topology::Recursive { feedback_taps } = topology {
        if u64::from(feedback_taps) >= 1u64 << r {
            return invalid(format!("feedback taps {feedback_taps:#b} exceed {r} state bits"));
        }
    }
    Ok(())
}

#[inline]
fn shifted_bit(topology: Topology, state: u32, bit: u8) -> u8 {
    match topology {
        Topology::ShiftRegister => bit,
        Topology::Recursive { feedback_taps } => bit ^ ((state & feedback_taps).count_ones() & 1) as u8,
    }
}
