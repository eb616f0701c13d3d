//! Public-key steganography built on side-informed (dirty-paper) codes.

pub mod audio;
pub mod channel;
pub mod codec;
pub mod error;
pub mod harness;
pub mod init_embed;
pub mod kv;
pub mod prf;
pub mod protocol;
pub mod scs;
pub mod security;
pub mod tcq;
pub mod trellis;
pub mod turbo;

pub use error::{Error, Result};
