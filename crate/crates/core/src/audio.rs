//! Mono PCM buffers and WAV file I/O.
//!
//! Everything is normalised to a single channel of `f32` samples at the
//! file's native rate. No resampling happens here: changing the rate would
//! itself shift the measured tempo.

use std::path::Path;

use crate::error::{Error, Result};

/// Mono floating-point audio.
#[derive(Debug, Clone, PartialEq)]
pub struct PcmBuffer {
    samples: Vec<f32>,
    sample_rate: u32,
}

impl PcmBuffer {
    /// Rejects a zero sample rate or any non-finite sample.
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::InvalidBuffer("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidBuffer(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn silence(duration_s: f64, sample_rate: u32) -> Result<Self> {
        let n = (duration_s * f64::from(sample_rate)).round().max(0.0) as usize;
        Self::new(vec![0.0; n], sample_rate)
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Number of samples whose magnitude exceeds full scale.
    pub fn clipped_count(&self) -> usize {
        self.samples.iter().filter(|s| s.abs() > 1.0).count()
    }

    /// Sample index nearest to `t` seconds.
    pub fn index_at(&self, t: f64) -> usize {
        (t * f64::from(self.sample_rate)).round().max(0.0) as usize
    }

    /// Samples `[start, end)` by index. Caller guarantees the range is valid.
    pub(crate) fn range(&self, start: usize, end: usize) -> PcmBuffer {
        PcmBuffer {
            samples: self.samples[start..end].to_vec(),
            sample_rate: self.sample_rate,
        }
    }

    /// Applies `f` to every sample.
    pub fn map(&self, f: impl Fn(f32) -> f32) -> Result<PcmBuffer> {
        PcmBuffer::new(self.samples.iter().map(|&s| f(s)).collect(), self.sample_rate)
    }
}

/// Reads a PCM WAV file (8/16/24/32-bit integer or 32-bit float, one or two
/// channels) and mixes it down to mono by averaging channels.
pub fn read_wav(path: impl AsRef<Path>) -> Result<PcmBuffer> {
    let mut reader = hound::WavReader::open(path).map_err(map_hound)?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(Error::UnsupportedFormat(format!(
            "{} channels (only mono and stereo are supported)",
            spec.channels
        )));
    }

    let interleaved: Vec<f32> = match spec.sample_format {
        hound::SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(Error::UnsupportedFormat(format!(
                    "{}-bit float",
                    spec.bits_per_sample
                )));
            }
            reader
                .samples::<f32>()
                .collect::<std::result::Result<_, _>>()
                .map_err(map_hound)?
        }
        hound::SampleFormat::Int => {
            let bits = spec.bits_per_sample;
            if !matches!(bits, 8 | 16 | 24 | 32) {
                return Err(Error::UnsupportedFormat(format!("{bits}-bit integer")));
            }
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| (f64::from(v) * scale) as f32))
                .collect::<std::result::Result<_, _>>()
                .map_err(map_hound)?
        }
    };

    let samples = match spec.channels {
        1 => interleaved,
        _ => interleaved
            .chunks_exact(2)
            .map(|lr| 0.5 * (lr[0] + lr[1]))
            .collect(),
    };
    PcmBuffer::new(samples, spec.sample_rate)
}

/// Outcome of [`write_wav`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WriteSummary {
    /// Samples saturated to full scale.
    pub clipped: usize,
}

impl WriteSummary {
    pub fn clipping_warning(&self) -> bool {
        self.clipped > 0
    }
}

/// Writes 16-bit PCM mono. Out-of-range samples saturate and are counted.
pub fn write_wav(buf: &PcmBuffer, path: impl AsRef<Path>) -> Result<WriteSummary> {
    if buf.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: buf.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(map_hound)?;
    let mut clipped = 0;
    for &s in buf.samples() {
        if s.abs() > 1.0 {
            clipped += 1;
        }
        let q = (f64::from(s) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(q).map_err(map_hound)?;
    }
    writer.finalize().map_err(map_hound)?;
    if clipped > 0 {
        log::warn!("{clipped} samples clipped while writing WAV");
    }
    Ok(WriteSummary { clipped })
}

fn map_hound(err: hound::Error) -> Error {
    match err {
        hound::Error::IoError(e) => Error::Io(e),
        hound::Error::FormatError(msg) => Error::MalformedHeader(msg.to_string()),
        hound::Error::Unsupported => Error::UnsupportedFormat("non-PCM or unsupported encoding".into()),
        hound::Error::TooWide => Error::UnsupportedFormat("sample too wide".into()),
        hound::Error::InvalidSampleFormat => Error::UnsupportedFormat("invalid sample format".into()),
        hound::Error::UnfinishedSample => Error::MalformedHeader("truncated sample data".into()),
    }
}

/// Extracts `[start_s, end_s)` in seconds.
pub fn slice(buf: &PcmBuffer, start_s: f64, end_s: f64) -> Result<PcmBuffer> {
    let duration_s = buf.duration_s();
    let eps = 0.5 / f64::from(buf.sample_rate);
    if !(start_s >= 0.0 && start_s < end_s && end_s <= duration_s + eps) {
        return Err(Error::OutOfRange {
            start_s,
            end_s,
            duration_s,
        });
    }
    let start = buf.index_at(start_s).min(buf.len());
    let end = buf.index_at(end_s).min(buf.len());
    if start >= end {
        return Err(Error::OutOfRange {
            start_s,
            end_s,
            duration_s,
        });
    }
    Ok(buf.range(start, end))
}

/// Joins buffers end to end. All parts must share one sample rate.
pub fn concat(parts: &[PcmBuffer]) -> Result<PcmBuffer> {
    let first = parts.first().ok_or(Error::EmptyBuffer)?;
    let rate = first.sample_rate;
    let mut samples = Vec::with_capacity(parts.iter().map(PcmBuffer::len).sum());
    for part in parts {
        if part.sample_rate != rate {
            return Err(Error::SampleRateMismatch {
                expected: rate,
                found: part.sample_rate,
            });
        }
        samples.extend_from_slice(&part.samples);
    }
    Ok(PcmBuffer {
        samples,
        sample_rate: rate,
    })
}

/// RMS level in dBFS; negative infinity for an all-zero (or empty) buffer.
pub fn rms_dbfs(buf: &PcmBuffer) -> f64 {
    rms_dbfs_of(buf.samples())
}

pub(crate) fn rms_dbfs_of(samples: &[f32]) -> f64 {
    if samples.is_empty() {
        return f64::NEG_INFINITY;
    }
    let mean_square =
        samples.iter().map(|&s| f64::from(s) * f64::from(s)).sum::<f64>() / samples.len() as f64;
    if mean_square == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * mean_square.log10()
    }
}
