use std::path::Path;
use std::process::{Command, Output};

fn pkstego(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pkstego")).args(args).current_dir(dir).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn send_and_receive_through_wav_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&pkstego(&["fixture", "--kind", "smooth", "--out", "cover.wav"], d)), 0);
    assert_eq!(code(&pkstego(&["keygen", "--out-prefix", "bob", "--seed-hex", "0b0b"], d)), 0);
    assert_eq!(code(&pkstego(&["keygen", "--out-prefix", "eve", "--seed-hex", "0e0e"], d)), 0);
    let payload: Vec<u8> = (0..1024u32).map(|i| (i * 37 % 251) as u8).collect();
    std::fs::write(d.join("msg.bin"), &payload).unwrap();

    let send = ["send", "--cover", "cover.wav", "--payload", "msg.bin", "--public-key", "bob.pub", "--out", "stego.wav"];
    assert_eq!(code(&pkstego(&send, d)), 0);
    let recv = pkstego(&["recv", "--stego", "stego.wav", "--private-key", "bob.key", "--out", "got.bin"], d);
    assert_eq!(code(&recv), 0, "{}", String::from_utf8_lossy(&recv.stderr));
    assert_eq!(std::fs::read(d.join("got.bin")).unwrap(), payload);

    let wrong = pkstego(&["recv", "--stego", "stego.wav", "--private-key", "eve.key", "--out", "x.bin"], d);
    assert_eq!(code(&wrong), 3);

    std::fs::write(d.join("big.bin"), vec![7u8; 100_000]).unwrap();
    let big = ["send", "--cover", "cover.wav", "--payload", "big.bin", "--public-key", "bob.pub", "--out", "s2.wav"];
    let o = pkstego(&big, d);
    assert_eq!(code(&o), 4);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("required"), "{err}");
}

#[test]
fn experiment_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = |out: &'static str| {
        vec!["run", "--preset", "fig4", "--samples", "5000", "--snr-db-grid", "9,12", "--seed", "3", "--out", out]
    };
    assert_eq!(code(&pkstego(&args("a.csv"), d)), 0);
    assert_eq!(code(&pkstego(&args("b.csv"), d)), 0);
    let a = std::fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(d.join("b.csv")).unwrap());
    assert!(String::from_utf8(a).unwrap().starts_with("# pkstego-csv 1 ber\n"));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.cfg"), "# smaller run\nsamples = 1000\nsnr_db_grid = 20\ncodecs = scs\n").unwrap();
    let o = pkstego(&["run", "--preset", "fig4", "--snr-db-grid", "8,9", "--config", "run.cfg"], d);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(2).unwrap().starts_with("20,scs,1000,"));
}

#[test]
fn configuration_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.cfg"), "rates =\n").unwrap();
    assert_eq!(code(&pkstego(&["run", "--preset", "fig5", "--config", "bad.cfg"], d)), 2);
    std::fs::write(d.join("typo.cfg"), "sampels = 3\n").unwrap();
    assert_eq!(code(&pkstego(&["run", "--config", "typo.cfg"], d)), 2);
    assert_eq!(code(&pkstego(&["run", "--preset", "fig7"], d)), 2);
    assert_eq!(code(&pkstego(&["run", "--codec", "ldpc"], d)), 2);
    assert_eq!(code(&pkstego(&["run", "--config", "missing.cfg"], d)), 2);
}
