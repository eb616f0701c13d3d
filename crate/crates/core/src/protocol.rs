//! Two-phase public-key steganographic protocol.
//!
//! *Initialization.* The sender draws a random temporary key, frames it,
//! encrypts it with the recipient's public key and hides the ciphertext at
//! the start of the carrier with the iterative embedder. The trellis used
//! there is keyed by a public label, so anyone can send and only the holder
//! of the private key can read.
//!
//! *Permanent phase.* Messages are framed and embedded in the rest of the
//! carrier with a codec whose dither tables and interleavers are expanded
//! from the temporary key. The payload is cut into blocks of `block_bits`
//! bits, each embedded with its own derived key; unused capacity is filled
//! with keyed pseudo-random bits.
//!
//! Frames are `len (u32 BE) ‖ header check (u16) ‖ payload ‖ checksum (u32)`.
//! The header check lets a receiver tell a wrong key (integrity error) from
//! a truncated carrier (capacity error).

use rand::{Rng, RngCore};

use crate::channel::{awgn_apply_with, bits_to_bytes, bytes_to_bits, ChannelParams, Signal};
use crate::codec::{CodecKind, CodecSpec};
use crate::audio::spread::{spread_embed, spread_extract};
use crate::error::{invalid, Error, Result};
use crate::init_embed::{iterative_embed, InitEmbedConfig};
use crate::kv::{parse_kv, parse_value};
use crate::prf;
use crate::tcq::{tcq_decode, TcqParams};
use crate::trellis::build_trellis;

pub const FRAME_HEADER: usize = 6;
pub const FRAME_OVERHEAD: usize = FRAME_HEADER + 4;
pub const TEMP_KEY_LEN: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub public_key: Vec<u8>,
    pub private_key: Vec<u8>,
}

/// Asymmetric encryption used for the temporary key.
pub trait CipherProvider {
    fn encrypt(&self, plaintext: &[u8], public_key: &[u8]) -> Result<Vec<u8>>;
    fn decrypt(&self, ciphertext: &[u8], private_key: &[u8]) -> Result<Vec<u8>>;
    fn ciphertext_len(&self, plaintext_len: usize) -> usize;
}

/// Deterministic stand-in for a public-key cipher: the public key is a hash
/// of the private key and both sides XOR with a stream keyed by the public
/// key. It has the right interface and a random-looking output, and no
/// secrecy whatsoever against anyone holding the public key.
#[derive(Clone, Copy, Debug, Default)]
pub struct TestCipher;

impl TestCipher {
    pub fn keypair(seed: &[u8]) -> KeyPair {
        let private_key = prf::derive_key(seed, "pkstego/test-cipher-private").to_vec();
        KeyPair {
            public_key: Self::public_for(&private_key),
            private_key,
        }
    }

    pub fn generate(rng: &mut impl RngCore) -> KeyPair {
        let mut seed = [0u8; 32];
        rng.fill_bytes(&mut seed);
        Self::keypair(&seed)
    }

    fn public_for(private_key: &[u8]) -> Vec<u8> {
        prf::derive_key(private_key, "pkstego/test-cipher-public").to_vec()
    }

    fn xor(data: &[u8], public_key: &[u8]) -> Vec<u8> {
        let mut stream = prf::keyed_stream(public_key, "pkstego/test-cipher-stream");
        data.iter().map(|b| b ^ stream.random::<u8>()).collect()
    }
}

impl CipherProvider for TestCipher {
    fn encrypt(&self, plaintext: &[u8], public_key: &[u8]) -> Result<Vec<u8>> {
        Ok(Self::xor(plaintext, public_key))
    }

    fn decrypt(&self, ciphertext: &[u8], private_key: &[u8]) -> Result<Vec<u8>> {
        Ok(Self::xor(ciphertext, &Self::public_for(private_key)))
    }

    fn ciphertext_len(&self, plaintext_len: usize) -> usize {
        plaintext_len
    }
}

/// Temporary session key chosen by the sender.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TempKey {
    pub seed: [u8; TEMP_KEY_LEN],
}

impl TempKey {
    pub fn random(rng: &mut impl RngCore) -> Self {
        let mut seed = [0u8; TEMP_KEY_LEN];
        rng.fill_bytes(&mut seed);
        Self { seed }
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.seed)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::Format(format!("temp key: {e}")))?;
        let seed = bytes
            .try_into()
            .map_err(|_| Error::Format(format!("temp key must be {TEMP_KEY_LEN} bytes")))?;
        Ok(Self { seed })
    }
}

fn header_check(len: [u8; 4]) -> u16 {
    (prf::checksum32(&len) >> 16) as u16
}

pub fn frame(payload: &[u8]) -> Result<Vec<u8>> {
    let len = u32::try_from(payload.len()).map_err(|_| Error::InvalidParameter("payload too large".into()))?;
    let len = len.to_be_bytes();
    let mut out = Vec::with_capacity(payload.len() + FRAME_OVERHEAD);
    out.extend_from_slice(&len);
    out.extend_from_slice(&header_check(len).to_be_bytes());
    out.extend_from_slice(payload);
    out.extend_from_slice(&prf::checksum32(&out).to_be_bytes());
    Ok(out)
}

/// Total frame size announced by a frame header.
pub fn frame_len(header: &[u8]) -> Result<usize> {
    if header.len() < FRAME_HEADER {
        return Err(Error::Integrity("frame header is incomplete".into()));
    }
    let len = [header[0], header[1], header[2], header[3]];
    if header_check(len).to_be_bytes() != header[4..6] {
        return Err(Error::Integrity("frame header check failed".into()));
    }
    Ok(u32::from_be_bytes(len) as usize + FRAME_OVERHEAD)
}

/// Payload of a frame at the start of `bytes`; trailing bytes are ignored.
pub fn unframe(bytes: &[u8]) -> Result<Vec<u8>> {
    let total = frame_len(bytes)?;
    if bytes.len() < total {
        return Err(Error::Integrity(format!("frame needs {total} bytes, got {}", bytes.len())));
    }
    let (body, check) = bytes[..total].split_at(total - 4);
    if prf::checksum32(body).to_be_bytes() != check {
        return Err(Error::Integrity("payload checksum mismatch".into()));
    }
    Ok(body[FRAME_HEADER..].to_vec())
}

/// Public parameters shared by both parties.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionConfig {
    pub init_log2_states: u32,
    pub init_delta: f64,
    pub init_block: usize,
    pub init_noise_variance: f64,
    pub init_epsilon: f64,
    /// Temporary keys tried before giving up on a robust initialization.
    pub init_attempts: usize,
    /// Simulated noise draws each initialization embedding must survive.
    pub init_checks: usize,
    /// Public label keying the initialization trellis.
    pub partition_label: String,
    pub codec: CodecKind,
    pub snr_db: f64,
    pub noise_variance: f64,
    pub spread_length: usize,
    pub block_bits: usize,
    pub tcq_log2_states: u32,
    pub turbo_log2_states: u32,
    pub turbo_max_iterations: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        let pcm_noise = 1.0 / 12.0;
        Self {
            init_log2_states: 9,
            init_delta: 64.0,
            init_block: 64,
            init_noise_variance: pcm_noise,
            init_epsilon: 0.5 * f64::sqrt(pcm_noise),
            init_attempts: 16,
            init_checks: 16,
            partition_label: "pkstego public initialization partition v1".into(),
            codec: CodecKind::Turbo,
            snr_db: 12.0,
            noise_variance: pcm_noise,
            spread_length: 1,
            block_bits: 8192,
            tcq_log2_states: crate::codec::DEFAULT_TCQ_LOG2_STATES,
            turbo_log2_states: crate::turbo::DEFAULT_CONSTITUENT_LOG2_STATES,
            turbo_max_iterations: crate::turbo::DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.init_block == 0 || self.block_bits == 0 || self.spread_length == 0 {
            return invalid("block sizes and spread length must be >= 1");
        }
        if self.init_attempts == 0 {
            return invalid("init_attempts must be >= 1");
        }
        if !(self.init_delta > 0.0 && self.init_delta.is_finite()) {
            return invalid("init_delta must be > 0");
        }
        self.channel()?;
        self.init_embed_config()?;
        Ok(())
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::from_snr_db(self.snr_db, self.noise_variance)
    }

    pub fn codec_spec(&self) -> Result<CodecSpec> {
        let mut spec = CodecSpec::new(self.codec, self.channel()?);
        spec.tcq_log2_states = self.tcq_log2_states;
        spec.turbo_log2_states = self.turbo_log2_states;
        spec.turbo_max_iterations = self.turbo_max_iterations;
        Ok(spec)
    }

    /// Initialization-phase trellis; built from public parameters only.
    pub fn init_tcq(&self) -> Result<TcqParams> {
        let trellis = build_trellis(self.init_log2_states, self.init_delta, self.partition_label.as_bytes())?;
        TcqParams::new(trellis, 1.0)
    }

    pub fn init_embed_config(&self) -> Result<InitEmbedConfig> {
        InitEmbedConfig::new(self.init_tcq()?, self.init_noise_variance)?.with_epsilon(self.init_epsilon)
    }

    /// Carrier elements reserved for the initialization phase.
    pub fn init_len(&self, cipher: &dyn CipherProvider) -> usize {
        let bits = 8 * cipher.ciphertext_len(TEMP_KEY_LEN + FRAME_OVERHEAD);
        bits.div_ceil(self.init_block) * self.init_block
    }

    pub fn to_text(&self) -> String {
        format!(
            "# pkstego session v1\n\
             init.log2_states = {}\ninit.delta = {}\ninit.block = {}\ninit.noise_variance = {}\n\
             init.epsilon = {}\ninit.attempts = {}\ninit.checks = {}\ninit.partition_label = {}\n\
             codec = {}\nsnr_db = {}\nnoise_variance = {}\nspread_length = {}\nblock_bits = {}\n\
             tcq.log2_states = {}\nturbo.log2_states = {}\nturbo.max_iterations = {}\n",
            self.init_log2_states,
            self.init_delta,
            self.init_block,
            self.init_noise_variance,
            self.init_epsilon,
            self.init_attempts,
            self.init_checks,
            self.partition_label,
            self.codec,
            self.snr_db,
            self.noise_variance,
            self.spread_length,
            self.block_bits,
            self.tcq_log2_states,
            self.turbo_log2_states,
            self.turbo_max_iterations,
        )
    }

    /// Reads keys written by [`SessionConfig::to_text`]; missing keys keep defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (k, v) in parse_kv(text)? {
            match k.as_str() {
                "init.log2_states" => c.init_log2_states = parse_value(&k, &v)?,
                "init.delta" => c.init_delta = parse_value(&k, &v)?,
                "init.block" => c.init_block = parse_value(&k, &v)?,
                "init.noise_variance" => c.init_noise_variance = parse_value(&k, &v)?,
                "init.epsilon" => c.init_epsilon = parse_value(&k, &v)?,
                "init.attempts" => c.init_attempts = parse_value(&k, &v)?,
                "init.checks" => c.init_checks = parse_value(&k, &v)?,
                "init.partition_label" => c.partition_label = v,
                "codec" => c.codec = v.parse()?,
                "snr_db" => c.snr_db = parse_value(&k, &v)?,
                "noise_variance" => c.noise_variance = parse_value(&k, &v)?,
                "spread_length" => c.spread_length = parse_value(&k, &v)?,
                "block_bits" => c.block_bits = parse_value(&k, &v)?,
                "tcq.log2_states" => c.tcq_log2_states = parse_value(&k, &v)?,
                "turbo.log2_states" => c.turbo_log2_states = parse_value(&k, &v)?,
                "turbo.max_iterations" => c.turbo_max_iterations = parse_value(&k, &v)?,
                _ => return Err(Error::Format(format!("unknown session key `{k}`"))),
            }
        }
        c.validate()?;
        Ok(c)
    }
}

fn embed_init_region(x: &[f64], bits: &[u8], cfg: &InitEmbedConfig, block: usize) -> Result<Vec<f64>> {
    let mut y = Vec::with_capacity(x.len());
    for (xb, mb) in x.chunks(block).zip(bits.chunks(block)) {
        y.extend(iterative_embed(xb, mb, cfg)?.y.into_vec());
    }
    Ok(y)
}

fn decode_init_region(y: &[f64], tcq: &TcqParams, block: usize) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(y.len());
    for yb in y.chunks(block) {
        bits.extend(tcq_decode(yb, tcq, 0)?.into_vec());
    }
    Ok(bits)
}

/// Hides the encrypted temporary key at the start of `cover`.
///
/// Each candidate temporary key is kept only if its embedding decodes
/// correctly under `init_checks` simulated noise draws; otherwise a fresh key
/// is drawn. When no candidate passes, the last converged one is used.
pub fn send_init(
    cover: &[f64],
    recipient_public_key: &[u8],
    cfg: &SessionConfig,
    cipher: &dyn CipherProvider,
    rng: &mut impl Rng,
) -> Result<(Signal, TempKey)> {
    cfg.validate()?;
    let init_len = cfg.init_len(cipher);
    if cover.len() < init_len {
        return Err(Error::Capacity {
            required: init_len,
            available: cover.len(),
        });
    }
    let embed_cfg = cfg.init_embed_config()?;
    let region = &cover[..init_len];
    let mut fallback = None;
    for _ in 0..cfg.init_attempts {
        let temp = TempKey::random(rng);
        let ciphertext = cipher.encrypt(&frame(&temp.seed)?, recipient_public_key)?;
        let mut bits = bytes_to_bits(&ciphertext);
        bits.resize(init_len, 0);
        let y = match embed_init_region(region, &bits, &embed_cfg, cfg.init_block) {
            Ok(y) => y,
            Err(Error::NotConverged { .. }) => continue,
            Err(e) => return Err(e),
        };
        let robust = (0..cfg.init_checks).all(|_| {
            awgn_apply_with(&y, cfg.init_noise_variance, rng)
                .and_then(|noisy| decode_init_region(&noisy, &embed_cfg.tcq, cfg.init_block))
                .is_ok_and(|b| b == bits)
        });
        fallback = Some((y, temp));
        if robust {
            break;
        }
    }
    let (y, temp) = fallback.ok_or(Error::NotConverged {
        iterations: embed_cfg.max_iterations,
        last: region.to_vec(),
    })?;
    let mut stego = cover.to_vec();
    stego[..init_len].copy_from_slice(&y);
    Ok((Signal::new(stego)?, temp))
}

/// Recovers the temporary key hidden by [`send_init`].
pub fn receive_init(
    stego: &[f64],
    private_key: &[u8],
    cfg: &SessionConfig,
    cipher: &dyn CipherProvider,
) -> Result<TempKey> {
    cfg.validate()?;
    let init_len = cfg.init_len(cipher);
    if stego.len() < init_len {
        return Err(Error::Capacity {
            required: init_len,
            available: stego.len(),
        });
    }
    let bits = decode_init_region(&stego[..init_len], &cfg.init_tcq()?, cfg.init_block)?;
    let ct_len = cipher.ciphertext_len(TEMP_KEY_LEN + FRAME_OVERHEAD);
    let plaintext = cipher.decrypt(&bits_to_bytes(&bits[..8 * ct_len]), private_key)?;
    let seed = unframe(&plaintext)?;
    let seed = seed
        .try_into()
        .map_err(|_| Error::Integrity("temporary key has the wrong length".into()))?;
    Ok(TempKey { seed })
}

struct Phase2Layout {
    offset: usize,
    capacity_bits: usize,
}

impl Phase2Layout {
    fn new(len: usize, cfg: &SessionConfig, cipher: &dyn CipherProvider) -> Self {
        let offset = cfg.init_len(cipher);
        Self {
            offset,
            capacity_bits: len.saturating_sub(offset) / cfg.spread_length,
        }
    }

    /// `(first bit, bit count)` of every block.
    fn blocks(&self, cfg: &SessionConfig) -> Vec<(usize, usize)> {
        (0..self.capacity_bits)
            .step_by(cfg.block_bits)
            .map(|s| (s, cfg.block_bits.min(self.capacity_bits - s)))
            .collect()
    }

    fn coeff_range(&self, cfg: &SessionConfig, (start, count): (usize, usize)) -> std::ops::Range<usize> {
        let l = cfg.spread_length;
        self.offset + start * l..self.offset + (start + count) * l
    }

    fn required_len(&self, cfg: &SessionConfig, bits: usize) -> usize {
        self.offset + bits * cfg.spread_length
    }
}

fn block_key(temp: &TempKey, block: usize) -> Vec<u8> {
    let mut material = temp.seed.to_vec();
    material.extend_from_slice(&(block as u64).to_be_bytes());
    prf::derive_key(&material, "pkstego/phase2-block").to_vec()
}

/// The carrier bits for a frame: frame bits then keyed filler.
fn phase2_bits(framed: &[u8], capacity: usize, temp: &TempKey) -> Vec<u8> {
    let mut bits = bytes_to_bits(framed);
    let mut filler = prf::keyed_stream(&temp.seed, "pkstego/phase2-filler");
    while bits.len() < capacity {
        bits.push(u8::from(filler.random::<bool>()));
    }
    bits
}

/// Embeds `message` after the initialization region of `cover`.
pub fn send_message(
    cover: &[f64],
    message: &[u8],
    temp_key: &TempKey,
    cfg: &SessionConfig,
    cipher: &dyn CipherProvider,
) -> Result<Signal> {
    cfg.validate()?;
    let layout = Phase2Layout::new(cover.len(), cfg, cipher);
    let framed = frame(message)?;
    let needed = 8 * framed.len();
    if needed > layout.capacity_bits {
        return Err(Error::Capacity {
            required: layout.required_len(cfg, needed),
            available: cover.len(),
        });
    }
    let codec = cfg.codec_spec()?;
    let bits = phase2_bits(&framed, layout.capacity_bits, temp_key);
    let mut stego = cover.to_vec();
    for (b, block) in layout.blocks(cfg).into_iter().enumerate() {
        let range = layout.coeff_range(cfg, block);
        let y = spread_embed(
            &cover[range.clone()],
            &bits[block.0..block.0 + block.1],
            cfg.spread_length,
            &codec,
            &block_key(temp_key, b),
        )?;
        stego[range].copy_from_slice(&y);
    }
    Signal::new(stego)
}

/// The first `num_bits` phase-2 bits as decoded with `temp_key`, without
/// looking at the framing.
pub fn receive_raw_bits(
    stego: &[f64],
    temp_key: &TempKey,
    cfg: &SessionConfig,
    cipher: &dyn CipherProvider,
    num_bits: usize,
) -> Result<Vec<u8>> {
    cfg.validate()?;
    let layout = Phase2Layout::new(stego.len(), cfg, cipher);
    if num_bits > layout.capacity_bits {
        return Err(Error::Capacity {
            required: layout.required_len(cfg, num_bits),
            available: stego.len(),
        });
    }
    let codec = cfg.codec_spec()?;
    let mut bits = Vec::with_capacity(num_bits);
    for (b, block) in layout.blocks(cfg).into_iter().enumerate() {
        if bits.len() >= num_bits {
            break;
        }
        let range = layout.coeff_range(cfg, block);
        bits.extend(spread_extract(&stego[range], block.1, cfg.spread_length, &codec, &block_key(temp_key, b))?.into_vec());
    }
    bits.truncate(num_bits);
    Ok(bits)
}

/// Inverse of [`send_message`]; only the blocks covering the frame are decoded.
pub fn receive_message(
    stego: &[f64],
    temp_key: &TempKey,
    cfg: &SessionConfig,
    cipher: &dyn CipherProvider,
) -> Result<Vec<u8>> {
    cfg.validate()?;
    let layout = Phase2Layout::new(stego.len(), cfg, cipher);
    let header_bits = 8 * FRAME_HEADER;
    if layout.capacity_bits < header_bits {
        return Err(Error::Capacity {
            required: layout.required_len(cfg, header_bits),
            available: stego.len(),
        });
    }
    let codec = cfg.codec_spec()?;
    let blocks = layout.blocks(cfg);
    let decode_block = |b: usize| -> Result<Vec<u8>> {
        let range = layout.coeff_range(cfg, blocks[b]);
        Ok(spread_extract(&stego[range], blocks[b].1, cfg.spread_length, &codec, &block_key(temp_key, b))?.into_vec())
    };
    let mut bits = decode_block(0)?;
    let mut next = 1;
    while bits.len() < header_bits {
        bits.extend(decode_block(next)?);
        next += 1;
    }
    let total_bits = 8 * frame_len(&bits_to_bytes(&bits[..header_bits]))?;
    if total_bits > layout.capacity_bits {
        return Err(Error::Capacity {
            required: layout.required_len(cfg, total_bits),
            available: stego.len(),
        });
    }
    while bits.len() < total_bits {
        bits.extend(decode_block(next)?);
        next += 1;
    }
    unframe(&bits_to_bytes(&bits[..total_bits]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::seeded_rng;

    fn cover(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = seeded_rng(seed);
        (0..n).map(|_| rng.random_range(-3000.0..3000.0)).collect()
    }

    fn small_cfg() -> SessionConfig {
        SessionConfig {
            block_bits: 2048,
            ..SessionConfig::default()
        }
    }

    #[test]
    fn framing_round_trip_and_damage() {
        let f = frame(b"hello").unwrap();
        assert_eq!(f.len(), 5 + FRAME_OVERHEAD);
        assert_eq!(unframe(&f).unwrap(), b"hello");
        let mut padded = f.clone();
        padded.extend_from_slice(&[7; 9]);
        assert_eq!(unframe(&padded).unwrap(), b"hello");
        for i in 0..f.len() {
            let mut bad = f.clone();
            bad[i] ^= 0x10;
            assert!(matches!(unframe(&bad), Err(Error::Integrity(_))), "byte {i}");
        }
        assert!(unframe(&f[..f.len() - 1]).is_err());
    }

    #[test]
    fn test_cipher_round_trips_and_looks_random() {
        let kp = TestCipher::keypair(b"bob");
        let pt = vec![0u8; 512];
        let ct = TestCipher.encrypt(&pt, &kp.public_key).unwrap();
        assert_eq!(TestCipher.decrypt(&ct, &kp.private_key).unwrap(), pt);
        let ones: u32 = ct.iter().map(|b| b.count_ones()).sum();
        let frac = f64::from(ones) / 4096.0;
        assert!((frac - 0.5).abs() < 0.05, "{frac}");
        let other = TestCipher::keypair(b"eve");
        assert_ne!(TestCipher.decrypt(&ct, &other.private_key).unwrap(), pt);
    }

    #[test]
    fn temp_key_hex_round_trip() {
        let k = TempKey::random(&mut seeded_rng(1));
        assert_eq!(TempKey::from_hex(&k.to_hex()).unwrap(), k);
        assert!(TempKey::from_hex("abcd").is_err());
    }

    #[test]
    fn session_text_round_trip() {
        let mut c = SessionConfig::default();
        c.codec = CodecKind::Scs;
        c.spread_length = 4;
        c.init_delta = 48.5;
        assert_eq!(SessionConfig::from_text(&c.to_text()).unwrap(), c);
        assert!(SessionConfig::from_text("colour = blue").is_err());
        assert!(SessionConfig::from_text("spread_length = 0").is_err());
    }

    #[test]
    fn initialization_round_trip() {
        let cfg = small_cfg();
        let bob = TestCipher::keypair(b"bob");
        let x = cover(1000, 2);
        let mut rng = seeded_rng(3);
        let (stego, temp) = send_init(&x, &bob.public_key, &cfg, &TestCipher, &mut rng).unwrap();
        let init_len = cfg.init_len(&TestCipher);
        assert_eq!(init_len, 384);
        assert_eq!(stego[init_len..], x[init_len..]);
        assert_eq!(receive_init(&stego, &bob.private_key, &cfg, &TestCipher).unwrap(), temp);
        let eve = TestCipher::keypair(b"eve");
        assert!(matches!(
            receive_init(&stego, &eve.private_key, &cfg, &TestCipher),
            Err(Error::Integrity(_))
        ));
        assert!(matches!(
            send_init(&[], &bob.public_key, &cfg, &TestCipher, &mut rng),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn flipped_ciphertext_bit_is_an_integrity_error() {
        let bob = TestCipher::keypair(b"bob");
        let temp = TempKey::random(&mut seeded_rng(4));
        let mut ct = TestCipher.encrypt(&frame(&temp.seed).unwrap(), &bob.public_key).unwrap();
        ct[3] ^= 1;
        let pt = TestCipher.decrypt(&ct, &bob.private_key).unwrap();
        assert!(matches!(unframe(&pt), Err(Error::Integrity(_))));
    }

    #[test]
    fn message_round_trip_noiseless_and_errors() {
        let cfg = small_cfg();
        let x = cover(384 + 6000, 5);
        let temp = TempKey::random(&mut seeded_rng(6));
        let msg = b"attack at dawn".repeat(20);
        let stego = send_message(&x, &msg, &temp, &cfg, &TestCipher).unwrap();
        assert_eq!(stego[..384], x[..384]);
        assert_eq!(receive_message(&stego, &temp, &cfg, &TestCipher).unwrap(), msg);

        let wrong = TempKey::random(&mut seeded_rng(7));
        assert!(matches!(receive_message(&stego, &wrong, &cfg, &TestCipher), Err(Error::Integrity(_))));

        let big = vec![1u8; 2000];
        assert!(matches!(
            send_message(&x, &big, &temp, &cfg, &TestCipher),
            Err(Error::Capacity { .. })
        ));

        // the header survives in block 0, the rest of the frame is cut off
        let long = vec![9u8; 400];
        let stego = send_message(&x, &long, &temp, &cfg, &TestCipher).unwrap();
        assert!(matches!(
            receive_message(&stego[..384 + 2048 + 100], &temp, &cfg, &TestCipher),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            receive_message(&stego[..400], &temp, &cfg, &TestCipher),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn spread_sessions_round_trip() {
        let mut cfg = small_cfg();
        cfg.spread_length = 4;
        cfg.codec = CodecKind::Scs;
        let x = cover(384 + 8000, 8);
        let temp = TempKey::random(&mut seeded_rng(9));
        let stego = send_message(&x, b"short", &temp, &cfg, &TestCipher).unwrap();
        assert_eq!(receive_message(&stego, &temp, &cfg, &TestCipher).unwrap(), b"short");
    }
}
