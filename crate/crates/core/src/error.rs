//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by the codecs, the protocol, and the audio frontend.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input data is unusable (empty, degenerate, non-finite).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// The carrier cannot hold the requested payload.
    #[error("insufficient capacity: {required} elements required, {available} available")]
    Capacity { required: usize, available: usize },

    /// A framed payload failed its checksum or length validation.
    #[error("integrity check failed: {0}")]
    Integrity(String),

    /// A WAV or serialized artifact could not be parsed.
    #[error("format error: {0}")]
    Format(String),

    /// Coefficient count does not tile a whole number of sub-band frames.
    #[error("framing error: {0}")]
    Framing(String),

    /// The iterative embedder ran out of iterations; `last` holds the final
    /// stego candidate so the caller can retry with a larger margin.
    #[error("iterative embedding did not reach the target region after {iterations} iterations")]
    NotConverged { iterations: usize, last: Vec<f64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
