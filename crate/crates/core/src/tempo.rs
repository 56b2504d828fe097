//! Tempo candidates from raw audio.
//!
//! Pipeline: Hann-windowed STFT, half-wave rectified spectral flux, mean
//! removal, then autocorrelation of the onset envelope over the lags that
//! correspond to the configured BPM range. Local autocorrelation maxima are
//! refined with parabolic interpolation and returned as ranked candidates.
//!
//! Absolute accuracy is not the goal. What matters is that the estimate
//! scales with a time stretch, so a slice sped up by 1% reads about 1% higher
//! than an untouched one.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::{rms_dbfs_of, PcmBuffer};
use crate::error::{Error, Result};

/// Minimum audio length for [`estimate_tempo`], in seconds.
pub const MIN_ESTIMATE_SECONDS: f64 = 9.0;
const MIN_ENVELOPE_SECONDS: f64 = 1.0;

/// Normalised autocorrelation a peak must exceed to count as periodic.
/// White noise stays well below this (see the `white_noise_has_no_periodicity`
/// test); click tracks peak above 0.5.
pub const PERIODICITY_FLOOR: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TempoConfig {
    pub bpm_min: f64,
    pub bpm_max: f64,
    pub stft_window: usize,
    pub stft_hop: usize,
    pub k_max: usize,
    /// Buffers quieter than this are refused with [`Error::LowEnergy`].
    pub min_rms_dbfs: f64,
}

impl Default for TempoConfig {
    fn default() -> Self {
        Self {
            bpm_min: 60.0,
            bpm_max: 200.0,
            stft_window: 2048,
            stft_hop: 512,
            k_max: 5,
            min_rms_dbfs: -45.0,
        }
    }
}

impl TempoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bpm_min > 0.0 && self.bpm_min < self.bpm_max) {
            return Err(Error::InvalidConfig("need 0 < bpm_min < bpm_max".into()));
        }
        if self.stft_hop == 0 || self.stft_hop > self.stft_window {
            return Err(Error::InvalidConfig("need 0 < stft_hop <= stft_window".into()));
        }
        if self.k_max == 0 {
            return Err(Error::InvalidConfig("k_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// One tempo hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TempoCandidate {
    pub bpm: f64,
    pub strength: f64,
}

/// Ranked tempo hypotheses for one stretch of audio, strongest first.
/// Strengths sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TempoCandidates {
    entries: Vec<TempoCandidate>,
    analysis_window_s: f64,
}

impl TempoCandidates {
    /// Builds a candidate set from raw `(bpm, weight)` pairs: sorts by weight
    /// and normalises the weights. Intended for tests and reference overrides.
    pub fn from_pairs(pairs: &[(f64, f64)], analysis_window_s: f64) -> Self {
        let mut entries: Vec<TempoCandidate> = pairs
            .iter()
            .map(|&(bpm, strength)| TempoCandidate { bpm, strength })
            .collect();
        normalise(&mut entries);
        Self {
            entries,
            analysis_window_s,
        }
    }

    /// Plain BPM list; every entry gets equal weight.
    pub fn from_bpms(bpms: &[f64]) -> Self {
        let pairs: Vec<(f64, f64)> = bpms.iter().map(|&b| (b, 1.0)).collect();
        Self::from_pairs(&pairs, 0.0)
    }

    pub fn entries(&self) -> &[TempoCandidate] {
        &self.entries
    }

    pub fn bpms(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|c| c.bpm)
    }

    pub fn top(&self) -> Option<&TempoCandidate> {
        self.entries.first()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn analysis_window_s(&self) -> f64 {
        self.analysis_window_s
    }

    /// Every BPM multiplied by `factor`; strengths unchanged.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|c| TempoCandidate {
                    bpm: c.bpm * factor,
                    strength: c.strength,
                })
                .collect(),
            analysis_window_s: self.analysis_window_s,
        }
    }

    /// `bpm strength` per line.
    pub fn to_lines(&self) -> String {
        self.entries
            .iter()
            .map(|c| format!("{:.3} {:.4}", c.bpm, c.strength))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

fn normalise(entries: &mut [TempoCandidate]) {
    entries.sort_by(|a, b| b.strength.total_cmp(&a.strength));
    let total: f64 = entries.iter().map(|c| c.strength).sum();
    if total > 0.0 {
        for c in entries.iter_mut() {
            c.strength /= total;
        }
    }
}

/// Onset strength sampled at `frame_rate` frames per second. Frame `t` is
/// centred at `(t * hop + window / 2) / sample_rate` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct OnsetEnvelope {
    pub values: Vec<f64>,
    pub frame_rate: f64,
    pub frame_offset_s: f64,
}

impl OnsetEnvelope {
    pub fn frame_time(&self, frame: usize) -> f64 {
        frame as f64 / self.frame_rate + self.frame_offset_s
    }
}

fn check_energy(buf: &PcmBuffer, cfg: &TempoConfig) -> Result<()> {
    let level = rms_dbfs_of(buf.samples());
    if level < cfg.min_rms_dbfs {
        return Err(Error::LowEnergy {
            rms_dbfs: level,
            gate_dbfs: cfg.min_rms_dbfs,
        });
    }
    Ok(())
}

fn check_length(buf: &PcmBuffer, required_s: f64) -> Result<()> {
    // Half a sample of slack so exact-length windows pass.
    if buf.duration_s() + 0.5 / f64::from(buf.sample_rate()) < required_s {
        return Err(Error::TooShort {
            actual_s: buf.duration_s(),
            required_s,
        });
    }
    Ok(())
}

/// Half-wave rectified spectral flux, mean-subtracted and clamped at zero.
pub fn onset_envelope(buf: &PcmBuffer, cfg: &TempoConfig) -> Result<OnsetEnvelope> {
    cfg.validate()?;
    check_length(buf, MIN_ENVELOPE_SECONDS)?;
    check_energy(buf, cfg)?;
    let (win, hop) = (cfg.stft_window, cfg.stft_hop);
    let samples = buf.samples();
    if samples.len() < win {
        return Err(Error::TooShort {
            actual_s: buf.duration_s(),
            required_s: win as f64 / f64::from(buf.sample_rate()),
        });
    }

    let hann: Vec<f64> = (0..win)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / win as f64).cos())
        .collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(win);
    let bins = win / 2 + 1;
    let frames = 1 + (samples.len() - win) / hop;

    let mut scratch = vec![Complex::default(); win];
    let mut previous = vec![0.0f64; bins];
    let mut current = vec![0.0f64; bins];
    let mut flux = Vec::with_capacity(frames);
    for t in 0..frames {
        let start = t * hop;
        for ((slot, &s), w) in scratch.iter_mut().zip(&samples[start..start + win]).zip(&hann) {
            *slot = Complex::new(f64::from(s) * w, 0.0);
        }
        fft.process(&mut scratch);
        for (m, c) in current.iter_mut().zip(&scratch[..bins]) {
            *m = c.norm();
        }
        let value = if t == 0 {
            0.0
        } else {
            current
                .iter()
                .zip(&previous)
                .map(|(c, p)| (c - p).max(0.0))
                .sum()
        };
        flux.push(value);
        std::mem::swap(&mut previous, &mut current);
    }

    let mean = flux.iter().sum::<f64>() / flux.len() as f64;
    let values = flux.into_iter().map(|v| (v - mean).max(0.0)).collect();
    let sr = f64::from(buf.sample_rate());
    Ok(OnsetEnvelope {
        values,
        frame_rate: sr / hop as f64,
        frame_offset_s: win as f64 / 2.0 / sr,
    })
}

/// Ranked tempo candidates for `buf` (at least [`MIN_ESTIMATE_SECONDS`] long).
pub fn estimate_tempo(buf: &PcmBuffer, cfg: &TempoConfig) -> Result<TempoCandidates> {
    cfg.validate()?;
    check_length(buf, MIN_ESTIMATE_SECONDS)?;
    let envelope = onset_envelope(buf, cfg)?;
    let candidates = candidates_from_envelope(&envelope, cfg)?;
    Ok(TempoCandidates {
        entries: candidates,
        analysis_window_s: buf.duration_s(),
    })
}

/// Log-Gaussian weight centred on 120 BPM with a one-octave spread. Breaks
/// the near-tie between a beat period and its multiples in favour of the
/// musically common range; BPM values themselves are untouched.
fn tempo_preference(bpm: f64) -> f64 {
    let octaves = (bpm / 120.0).log2();
    (-0.5 * octaves * octaves).exp()
}

fn candidates_from_envelope(env: &OnsetEnvelope, cfg: &TempoConfig) -> Result<Vec<TempoCandidate>> {
    let fr = env.frame_rate;
    let lag_lo = ((60.0 * fr / cfg.bpm_max).floor() as usize).max(2);
    let lag_hi = (60.0 * fr / cfg.bpm_min).ceil() as usize;
    let n = env.values.len();
    if lag_hi + 2 >= n {
        return Err(Error::NoPeriodicity);
    }

    let mean = env.values.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = env.values.iter().map(|v| v - mean).collect();
    let unbiased = |lag: usize| -> f64 {
        let sum: f64 = centred[..n - lag]
            .iter()
            .zip(&centred[lag..])
            .map(|(a, b)| a * b)
            .sum();
        sum / (n - lag) as f64
    };
    let zero_lag = unbiased(0);
    if zero_lag <= 0.0 {
        return Err(Error::NoPeriodicity);
    }
    // acf[i] holds lag (lag_lo - 1 + i), one extra on each side for peak tests.
    let acf: Vec<f64> = (lag_lo - 1..=lag_hi + 1)
        .map(|lag| unbiased(lag) / zero_lag)
        .collect();

    let mut found = Vec::new();
    for i in 1..acf.len() - 1 {
        let (left, mid, right) = (acf[i - 1], acf[i], acf[i + 1]);
        if !(mid > left && mid >= right && mid > PERIODICITY_FLOOR) {
            continue;
        }
        let curvature = left - 2.0 * mid + right;
        let shift = if curvature < 0.0 {
            (0.5 * (left - right) / curvature).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let lag = (lag_lo - 1 + i) as f64 + shift;
        let height = mid - 0.25 * (left - right) * shift;
        let bpm = 60.0 * fr / lag;
        if bpm >= cfg.bpm_min && bpm <= cfg.bpm_max {
            found.push(TempoCandidate {
                bpm,
                strength: height * tempo_preference(bpm),
            });
        }
    }
    if found.is_empty() {
        return Err(Error::NoPeriodicity);
    }
    found.sort_by(|a, b| b.strength.total_cmp(&a.strength));
    found.truncate(cfg.k_max);
    normalise(&mut found);
    Ok(found)
}
