use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use pkstego::channel::{awgn_apply_with, bytes_to_bits, seeded_rng};
use pkstego::init_embed::iterative_embed;
use pkstego::protocol::*;
use pkstego::scs::delta_for_power;
use pkstego::security::kl_cover_stego;
use pkstego::tcq::tcq_decode;
use pkstego::Error;

fn cover(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    let g = Normal::new(0.0, 500.0).unwrap();
    (0..n).map(|_| g.sample(&mut rng)).collect()
}

fn session() -> SessionConfig {
    SessionConfig {
        block_bits: 4096,
        ..SessionConfig::default()
    }
}

#[test]
fn both_phases_survive_pcm_level_noise() {
    let cfg = session();
    let bob = TestCipher::keypair(b"bob");
    for trial in 0..10u64 {
        let x = cover(384 + 12_000, trial);
        let mut rng = seeded_rng(100 + trial);
        let mut payload = vec![0u8; 1024];
        rng.fill(&mut payload[..]);
        let (init, temp) = send_init(&x, &bob.public_key, &cfg, &TestCipher, &mut rng).unwrap();
        let stego = send_message(&init, &payload, &temp, &cfg, &TestCipher).unwrap();
        let noisy = awgn_apply_with(&stego, cfg.noise_variance, &mut rng).unwrap();
        let got = receive_init(&noisy, &bob.private_key, &cfg, &TestCipher).unwrap();
        assert_eq!(got, temp, "trial {trial}");
        assert_eq!(receive_message(&noisy, &got, &cfg, &TestCipher).unwrap(), payload, "trial {trial}");
    }
}

#[test]
fn phase_one_is_readable_with_public_parameters_only() {
    let cfg = session();
    let bob = TestCipher::keypair(b"bob");
    let x = cover(2000, 1);
    let (stego, temp) = send_init(&x, &bob.public_key, &cfg, &TestCipher, &mut seeded_rng(2)).unwrap();
    let init_len = cfg.init_len(&TestCipher);
    // block-wise decoding with the public trellis recovers the ciphertext
    let mut decoded = Vec::new();
    for block in stego[..init_len].chunks(cfg.init_block) {
        decoded.extend(tcq_decode(block, &cfg.init_tcq().unwrap(), 0).unwrap().into_vec());
    }
    let ct = TestCipher.encrypt(&frame(&temp.seed).unwrap(), &bob.public_key).unwrap();
    assert_eq!(decoded[..8 * ct.len()], bytes_to_bits(&ct)[..]);
}

#[test]
fn flipped_phase_one_bit_is_an_integrity_error() {
    let bob = TestCipher::keypair(b"bob");
    let temp = TempKey::random(&mut seeded_rng(3));
    let ct = TestCipher.encrypt(&frame(&temp.seed).unwrap(), &bob.public_key).unwrap();
    for i in 0..8 * ct.len() {
        let mut bad = ct.clone();
        bad[i / 8] ^= 0x80 >> (i % 8);
        let pt = TestCipher.decrypt(&bad, &bob.private_key).unwrap();
        assert!(matches!(unframe(&pt), Err(Error::Integrity(_))), "bit {i}");
    }
}

#[test]
fn phase_one_preserves_gaussian_statistics() {
    // the Gaussian host and P of the pdf experiment, TCQ step for α = 0.7
    let mut cfg = session();
    cfg.init_delta = delta_for_power(1e4, 0.7);
    cfg.init_noise_variance = 1e4 / 10f64.powf(1.4);
    cfg.init_epsilon = 0.5 * cfg.init_noise_variance.sqrt();
    let embed = cfg.init_embed_config().unwrap();
    let mut rng = seeded_rng(4);
    let g = Normal::new(0.0, 1000.0).unwrap();
    let x: Vec<f64> = (0..200_000).map(|_| g.sample(&mut rng)).collect();
    let mut y = Vec::with_capacity(x.len());
    for block in x.chunks(cfg.init_block) {
        let m: Vec<u8> = (0..block.len()).map(|_| rng.random_range(0..2)).collect();
        y.extend(iterative_embed(block, &m, &embed).unwrap().y.into_vec());
    }
    let kl = kl_cover_stego(&x, &y, 100).unwrap();
    assert!(kl <= 1e-3, "{kl}");
}

#[test]
fn wrong_temp_keys_fail_the_checksum() {
    let cfg = SessionConfig {
        block_bits: 1024,
        ..SessionConfig::default()
    };
    let x = cover(384 + 1024, 5);
    let mut rng = seeded_rng(6);
    let temp = TempKey::random(&mut rng);
    let stego = send_message(&x, b"the quick brown fox", &temp, &cfg, &TestCipher).unwrap();
    let failures = (0..1000)
        .filter(|_| {
            matches!(
                receive_message(&stego, &TempKey::random(&mut rng), &cfg, &TestCipher),
                Err(Error::Integrity(_))
            )
        })
        .count();
    assert!(failures >= 999, "{failures}");
}

#[test]
fn wrong_key_bits_are_uncorrelated() {
    let cfg = session();
    let x = cover(384 + 8192, 7);
    let mut rng = seeded_rng(8);
    let temp = TempKey::random(&mut rng);
    let payload: Vec<u8> = (0..1000).map(|_| rng.random()).collect();
    let stego = send_message(&x, &payload, &temp, &cfg, &TestCipher).unwrap();
    let n = 8 * (payload.len() + FRAME_OVERHEAD);
    let right = receive_raw_bits(&stego, &temp, &cfg, &TestCipher, n).unwrap();
    let wrong = receive_raw_bits(&stego, &TempKey::random(&mut rng), &cfg, &TestCipher, n).unwrap();
    let agree = right.iter().zip(&wrong).filter(|(a, b)| a == b).count() as f64 / n as f64;
    assert!((agree - 0.5).abs() <= 0.05, "{agree}");
}

#[test]
fn truncated_stego_is_a_capacity_error() {
    let cfg = session();
    let x = cover(384 + 10_000, 9);
    let temp = TempKey::random(&mut seeded_rng(10));
    let payload = vec![0x5a; 1000];
    let stego = send_message(&x, &payload, &temp, &cfg, &TestCipher).unwrap();
    match receive_message(&stego[..384 + 5000], &temp, &cfg, &TestCipher) {
        Err(Error::Capacity { required, available }) => {
            assert_eq!(required, 384 + 8 * (payload.len() + FRAME_OVERHEAD));
            assert_eq!(available, 384 + 5000);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn test_cipher_output_is_balanced() {
    let kp = TestCipher::generate(&mut seeded_rng(11));
    let ct = TestCipher.encrypt(&[0xff; 1024], &kp.public_key).unwrap();
    let bits = bytes_to_bits(&ct);
    for pos in 0..8 {
        let ones = bits.iter().skip(pos).step_by(8).filter(|&&b| b == 1).count() as f64;
        let frac = ones / (bits.len() / 8) as f64;
        assert!((frac - 0.5).abs() <= 0.05, "bit {pos}: {frac}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn framing_round_trips(payload in proptest::collection::vec(any::<u8>(), 0..300)) {
        prop_assert_eq!(unframe(&frame(&payload).unwrap()).unwrap(), payload);
    }

    #[test]
    fn noiseless_round_trip_always_succeeds(
        payload in proptest::collection::vec(any::<u8>(), 0..200),
        seed in any::<u64>(),
        spread in 1usize..4,
    ) {
        let cfg = SessionConfig { spread_length: spread, block_bits: 2048, ..SessionConfig::default() };
        let x = cover(384 + 6000, seed);
        let temp = TempKey::random(&mut seeded_rng(seed ^ 1));
        let stego = send_message(&x, &payload, &temp, &cfg, &TestCipher).unwrap();
        prop_assert_eq!(receive_message(&stego, &temp, &cfg, &TestCipher).unwrap(), payload);
    }
}
