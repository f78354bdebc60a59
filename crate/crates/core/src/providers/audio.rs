//! Canonical audio: RIFF/WAVE, PCM 16-bit, mono, 16 kHz.

use std::io::Cursor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digest::sha256_hex;

pub const SAMPLE_RATE: u32 = 16_000;
/// Samples per millisecond at the canonical rate.
pub const SAMPLES_PER_MS: u32 = SAMPLE_RATE / 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AudioFormat {
    WavPcm16Mono16k,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AudioError {
    #[error("not a readable WAV file: {0}")]
    Malformed(String),
    #[error("unsupported WAV layout: {0} (expected PCM16 mono 16 kHz)")]
    Unsupported(String),
}

/// One utterance of canonical audio. `bytes` is the complete WAV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AudioBlob {
    format: AudioFormat,
    bytes: Vec<u8>,
    sample_count: u32,
    /// Known text of the utterance, attached by test fixtures or clients
    /// that already have a transcript. Used by the offline transcriber.
    sidecar_transcript: Option<String>,
}

impl AudioBlob {
    pub fn from_samples(samples: &[i16]) -> Self {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: SAMPLE_RATE,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut cursor = Cursor::new(Vec::with_capacity(44 + samples.len() * 2));
        {
            let mut writer = hound::WavWriter::new(&mut cursor, spec).expect("wav header");
            let mut w16 = writer.get_i16_writer(samples.len() as u32);
            for s in samples {
                w16.write_sample(*s);
            }
            w16.flush().expect("in-memory wav write");
            writer.finalize().expect("in-memory wav finalize");
        }
        Self {
            format: AudioFormat::WavPcm16Mono16k,
            bytes: cursor.into_inner(),
            sample_count: samples.len() as u32,
            sidecar_transcript: None,
        }
    }

    /// Parses and checks a WAV file. Anything other than PCM16 mono 16 kHz
    /// is rejected.
    pub fn from_wav(bytes: Vec<u8>) -> Result<Self, AudioError> {
        let reader = hound::WavReader::new(Cursor::new(&bytes))
            .map_err(|e| AudioError::Malformed(e.to_string()))?;
        let spec = reader.spec();
        if spec.channels != 1
            || spec.sample_rate != SAMPLE_RATE
            || spec.bits_per_sample != 16
            || spec.sample_format != hound::SampleFormat::Int
        {
            return Err(AudioError::Unsupported(format!(
                "{} ch, {} Hz, {} bit {:?}",
                spec.channels, spec.sample_rate, spec.bits_per_sample, spec.sample_format
            )));
        }
        let sample_count = reader.len();
        Ok(Self {
            format: AudioFormat::WavPcm16Mono16k,
            bytes,
            sample_count,
            sidecar_transcript: None,
        })
    }

    pub fn with_transcript(mut self, text: impl Into<String>) -> Self {
        self.sidecar_transcript = Some(text.into());
        self
    }

    pub fn format(&self) -> AudioFormat {
        self.format
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn sample_count(&self) -> u32 {
        self.sample_count
    }

    pub fn duration_ms(&self) -> u64 {
        u64::from(self.sample_count / SAMPLES_PER_MS)
    }

    pub fn is_empty(&self) -> bool {
        self.sample_count == 0
    }

    pub fn sidecar_transcript(&self) -> Option<&str> {
        self.sidecar_transcript.as_deref()
    }

    pub fn sha256(&self) -> String {
        sha256_hex(&self.bytes)
    }

    pub fn samples(&self) -> Vec<i16> {
        hound::WavReader::new(Cursor::new(&self.bytes))
            .expect("validated at construction")
            .into_samples::<i16>()
            .filter_map(Result::ok)
            .collect()
    }
}

/// `duration_ms` of a 440 Hz tone at quarter amplitude.
pub fn sine_tone(duration_ms: u64) -> Vec<i16> {
    let n = duration_ms * u64::from(SAMPLES_PER_MS);
    let amp = f64::from(i16::MAX) * 0.25;
    (0..n)
        .map(|i| {
            let t = i as f64 / f64::from(SAMPLE_RATE);
            (amp * (2.0 * std::f64::consts::PI * 440.0 * t).sin()).round() as i16
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Header of a WAV holding 4 zero samples, written by Python's `wave`
    /// module (nchannels=1, sampwidth=2, framerate=16000).
    const PY_WAVE_4_ZEROS: [u8; 52] = [
        0x52, 0x49, 0x46, 0x46, 0x2c, 0x00, 0x00, 0x00, 0x57, 0x41, 0x56, 0x45, 0x66, 0x6d, 0x74,
        0x20, 0x10, 0x00, 0x00, 0x00, 0x01, 0x00, 0x01, 0x00, 0x80, 0x3e, 0x00, 0x00, 0x00, 0x7d,
        0x00, 0x00, 0x02, 0x00, 0x10, 0x00, 0x64, 0x61, 0x74, 0x61, 0x08, 0x00, 0x00, 0x00, 0x00,
        0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    ];

    #[test]
    fn wav_bytes_are_canonical() {
        let blob = AudioBlob::from_samples(&[0, 0, 0, 0]);
        assert_eq!(blob.bytes(), &PY_WAVE_4_ZEROS[..]);
    }

    #[test]
    fn duration_from_sample_count() {
        let blob = AudioBlob::from_samples(&vec![0; 24_000]);
        assert_eq!(blob.duration_ms(), 1500);
        assert_eq!(AudioBlob::from_samples(&vec![0; 4000]).duration_ms(), 250);
    }

    #[test]
    fn parse_round_trip() {
        let tone = sine_tone(10);
        let blob = AudioBlob::from_samples(&tone);
        let parsed = AudioBlob::from_wav(blob.bytes().to_vec()).unwrap();
        assert_eq!(parsed, blob);
        assert_eq!(parsed.samples(), tone);
    }

    #[test]
    fn rejects_other_layouts() {
        let spec = hound::WavSpec {
            channels: 2,
            sample_rate: 44_100,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut cursor = Cursor::new(Vec::new());
        let mut w = hound::WavWriter::new(&mut cursor, spec).unwrap();
        w.write_sample(0i16).unwrap();
        w.write_sample(0i16).unwrap();
        w.finalize().unwrap();
        assert!(matches!(
            AudioBlob::from_wav(cursor.into_inner()),
            Err(AudioError::Unsupported(_))
        ));
        assert!(matches!(
            AudioBlob::from_wav(b"not a wav".to_vec()),
            Err(AudioError::Malformed(_))
        ));
    }
}
