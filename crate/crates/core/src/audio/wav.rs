//! 16-bit PCM RIFF/WAVE reading and writing.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Mono 16-bit PCM audio.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcmAudio {
    pub samples: Vec<i16>,
    pub sample_rate: u32,
}

impl PcmAudio {
    pub fn new(samples: Vec<i16>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidParameter("sample rate must be > 0".into()));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.samples.iter().map(|&s| f64::from(s)).collect()
    }

    /// Rounds to the nearest integer and saturates at the 16-bit limits.
    pub fn from_f64(samples: &[f64], sample_rate: u32) -> Result<Self> {
        let samples = samples
            .iter()
            .map(|&v| v.round().clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16)
            .collect();
        Self::new(samples, sample_rate)
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Parses a PCM16 WAV image; multi-channel input keeps channel 0.
pub fn parse_wav(bytes: &[u8]) -> Result<PcmAudio> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(fmt_err("not a RIFF/WAVE file"));
    }
    let mut pos = 12;
    let mut format: Option<(u16, u32, u16)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        let end = body.checked_add(size).filter(|&e| e <= bytes.len());
        match id {
            b"fmt " => {
                end.ok_or_else(|| fmt_err("truncated fmt chunk"))?;
                if size < 16 {
                    return Err(fmt_err("fmt chunk too short"));
                }
                let tag = u16_at(bytes, body);
                let channels = u16_at(bytes, body + 2);
                let rate = u32_at(bytes, body + 4);
                let bits = u16_at(bytes, body + 14);
                // WAVE_FORMAT_EXTENSIBLE carries the real tag in its sub-format GUID
                let tag = if tag == 0xFFFE && size >= 26 { u16_at(bytes, body + 24) } else { tag };
                if tag != 1 {
                    return Err(fmt_err(format!("unsupported format tag {tag}, need PCM")));
                }
                if bits != 16 {
                    return Err(fmt_err(format!("unsupported bit depth {bits}, need 16")));
                }
                if channels == 0 || rate == 0 {
                    return Err(fmt_err("zero channels or sample rate"));
                }
                format = Some((channels, rate, bits));
            }
            b"data" => {
                let (channels, rate, _) = format.ok_or_else(|| fmt_err("data chunk before fmt chunk"))?;
                let end = end.ok_or_else(|| fmt_err("truncated data chunk"))?;
                let frame = 2 * channels as usize;
                if size % frame != 0 {
                    return Err(fmt_err("data size is not a whole number of frames"));
                }
                let samples = bytes[body..end]
                    .chunks_exact(frame)
                    .map(|f| i16::from_le_bytes([f[0], f[1]]))
                    .collect();
                return PcmAudio::new(samples, rate);
            }
            _ => {
                if end.is_none() {
                    return Err(fmt_err("truncated chunk"));
                }
            }
        }
        pos = body + size + (size & 1);
    }
    Err(fmt_err("no data chunk"))
}

/// Canonical 44-byte-header mono PCM16 image.
pub fn encode_wav(audio: &PcmAudio) -> Vec<u8> {
    let data_len = 2 * audio.samples.len() as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&audio.sample_rate.to_le_bytes());
    out.extend_from_slice(&(audio.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in &audio.samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<PcmAudio> {
    parse_wav(&fs::read(path)?)
}

pub fn write_wav(audio: &PcmAudio, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_wav(audio))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PcmAudio {
        PcmAudio::new((0..1000).map(|i| ((i * 37) % 65536 - 32768) as i16).collect(), 44_100).unwrap()
    }

    #[test]
    fn file_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let a = sample();
        write_wav(&a, &path).unwrap();
        assert_eq!(read_wav(&path).unwrap(), a);
        assert_eq!(std::fs::read(&path).unwrap().len(), 44 + 2000);
    }

    #[test]
    fn five_seconds_at_44k1() {
        let a = PcmAudio::new(vec![0; 220_500], 44_100).unwrap();
        let b = parse_wav(&encode_wav(&a)).unwrap();
        assert_eq!(b.samples.len(), 220_500);
        assert_eq!(b.duration_secs(), 5.0);
    }

    #[test]
    fn stereo_keeps_the_first_channel() {
        let mut img = encode_wav(&PcmAudio::new(vec![1, -1, 2, -2], 8000).unwrap());
        img[22] = 2; // channels
        let a = parse_wav(&img).unwrap();
        assert_eq!(a.samples, vec![1, 2]);
    }

    #[test]
    fn malformed_input_is_rejected() {
        let img = encode_wav(&sample());
        assert!(matches!(parse_wav(&img[..img.len() - 3]), Err(Error::Format(_))));
        assert!(matches!(parse_wav(&img[..30]), Err(Error::Format(_))));
        assert!(matches!(parse_wav(b"RIFX0000WAVE"), Err(Error::Format(_))));
        let mut eight_bit = img.clone();
        eight_bit[34] = 8;
        assert!(matches!(parse_wav(&eight_bit), Err(Error::Format(_))));
        let mut float = img;
        float[20] = 3;
        assert!(matches!(parse_wav(&float), Err(Error::Format(_))));
    }

    #[test]
    fn conversion_saturates() {
        let a = PcmAudio::from_f64(&[1e6, -1e6, 0.4, -0.6], 8000).unwrap();
        assert_eq!(a.samples, vec![i16::MAX, i16::MIN, 0, -1]);
    }
}
