//! `pkstego` command line.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration error,
//! 3 integrity error, 4 capacity error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pkstego::audio::fixtures::{FIXTURE_SAMPLE_RATE, FIXTURE_SECONDS};
use pkstego::audio::{synthetic_audio, write_wav, Fixture};
use pkstego::channel::seeded_rng;
use pkstego::codec::CodecKind;
use pkstego::harness::{run_experiment, stego_recv_file, stego_send_file, ExperimentConfig};
use pkstego::protocol::{SessionConfig, TestCipher};
use pkstego::{Error, Result};

#[derive(Parser)]
#[command(name = "pkstego", version, about = "Public-key steganography experiments and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV.
    Run(RunArgs),
    /// Write a synthetic fixture WAV (smooth or powerful).
    Fixture {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Create a key pair for the built-in test cipher (`<prefix>.pub`, `<prefix>.key`).
    /// The test cipher only demonstrates the protocol and gives no secrecy.
    Keygen {
        #[arg(long)]
        out_prefix: PathBuf,
        /// Hex seed; random when omitted.
        #[arg(long)]
        seed_hex: Option<String>,
    },
    /// Hide a payload in a WAV file.
    Send {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        payload: PathBuf,
        #[arg(long)]
        public_key: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        session: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recover a payload from a stego WAV file.
    Recv {
        #[arg(long)]
        stego: PathBuf,
        #[arg(long)]
        private_key: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        session: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// fig2, fig4 or fig5.
    #[arg(long, default_value = "fig4")]
    preset: String,
    #[arg(long, value_delimiter = ',')]
    codec: Option<Vec<CodecKind>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr_db_grid: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    rate_grid: Option<Vec<f64>>,
    /// Stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key = value` file; its entries take precedence over flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn config_error(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidParameter(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| config_error(path, e))
}

fn read_hex(path: &Path) -> Result<Vec<u8>> {
    hex::decode(read_text(path)?.trim()).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn session(path: Option<&Path>) -> Result<SessionConfig> {
    match path {
        Some(p) => SessionConfig::from_text(&read_text(p)?),
        None => Ok(SessionConfig::default()),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::preset(&args.preset)?;
    if let Some(c) = args.codec {
        cfg.codecs = c;
    }
    if let Some(g) = args.snr_db_grid {
        cfg.snr_db_grid = g;
    }
    if let Some(r) = args.rate_grid {
        cfg.rates = r;
    }
    if let Some(n) = args.samples {
        cfg.samples = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if let Some(p) = &args.config {
        cfg.apply_kv(&read_text(p)?)?;
    }
    cfg.validate()?;
    let csv = run_experiment(&cfg)?;
    match &cfg.out {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Fixture { kind, out, seed } => {
            let fixture = Fixture::ALL
                .into_iter()
                .find(|f| f.name() == kind)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown fixture `{kind}`")))?;
            write_wav(&synthetic_audio(fixture, FIXTURE_SECONDS, FIXTURE_SAMPLE_RATE, seed)?, out)
        }
        Command::Keygen { out_prefix, seed_hex } => {
            let kp = match seed_hex {
                Some(h) => TestCipher::keypair(&hex::decode(h).map_err(|e| Error::Format(e.to_string()))?),
                None => TestCipher::generate(&mut rand::rng()),
            };
            fs::write(out_prefix.with_extension("pub"), hex::encode(&kp.public_key) + "\n")?;
            fs::write(out_prefix.with_extension("key"), hex::encode(&kp.private_key) + "\n")?;
            Ok(())
        }
        Command::Send {
            cover,
            payload,
            public_key,
            out,
            session: s,
            seed,
        } => {
            let cfg = session(s.as_deref())?;
            let pk = read_hex(&public_key)?;
            let payload = fs::read(&payload)?;
            stego_send_file(&cover, &payload, &pk, &cfg, &out, &mut seeded_rng(seed))
        }
        Command::Recv {
            stego,
            private_key,
            out,
            session: s,
        } => {
            let cfg = session(s.as_deref())?;
            let sk = read_hex(&private_key)?;
            fs::write(out, stego_recv_file(&stego, &sk, &cfg)?)?;
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::Format(_) => 2,
        Error::Integrity(_) => 3,
        Error::Capacity { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pkstego: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
