//! Keyed pseudo-random expansion.
//!
//! Every secret or public parameter that must be reproduced identically by
//! sender and receiver (dither tables, interleavers, spreading vectors, cipher
//! keystreams) is expanded from a key with [`keyed_stream`]: a ChaCha20
//! generator seeded with `SHA-256(len(domain) ‖ domain ‖ key)`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Counter-mode keyed stream, separated by `domain`.
pub fn keyed_stream(key: &[u8], domain: &str) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(derive_key(key, domain))
}

/// 256-bit sub-key for `domain`.
pub fn derive_key(key: &[u8], domain: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((domain.len() as u64).to_be_bytes());
    h.update(domain.as_bytes());
    h.update(key);
    h.finalize().into()
}

/// Short public identifier of a key; reveals nothing useful about it.
pub fn fingerprint(key: &[u8]) -> [u8; 8] {
    let full = derive_key(key, "pkstego/fingerprint");
    let mut out = [0u8; 8];
    out.copy_from_slice(&full[..8]);
    out
}

/// 32-bit integrity checksum (truncated SHA-256).
pub fn checksum32(data: &[u8]) -> u32 {
    let d: [u8; 32] = Sha256::digest(data).into();
    u32::from_be_bytes([d[0], d[1], d[2], d[3]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_deterministic_and_domain_separated() {
        let mut s1 = keyed_stream(b"k", "x");
        let mut s2 = keyed_stream(b"k", "x");
        let mut s3 = keyed_stream(b"k", "y");
        let v1: u64 = s1.random();
        assert_eq!(v1, s2.random::<u64>());
        assert_ne!(v1, s3.random::<u64>());
        assert_ne!(fingerprint(b"k"), fingerprint(b"K"));
        assert_ne!(checksum32(b"abc"), checksum32(b"abd"));
    }
}
