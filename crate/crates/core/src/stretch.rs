//! Pitch-preserving tempo change by waveform-similarity overlap-add (WSOLA).
//!
//! Output frames are laid down every `sequence - overlap` samples. For each
//! frame the input read position advances nominally by that hop times the
//! tempo ratio; the actual position is chosen within `±seek` of nominal so the
//! frame's head best matches the natural continuation of the previous frame
//! (normalised cross-correlation over the overlap region). Frames are joined
//! with a linear cross-fade.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::audio::PcmBuffer;
use crate::error::{Error, Result};

/// Window geometry for [`stretch_tempo`], in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StretchConfig {
    pub sequence_ms: f64,
    pub seek_ms: f64,
    pub overlap_ms: f64,
}

impl Default for StretchConfig {
    fn default() -> Self {
        Self {
            sequence_ms: 80.0,
            seek_ms: 16.0,
            overlap_ms: 10.0,
        }
    }
}

impl StretchConfig {
    pub fn validate(&self) -> Result<()> {
        let all_positive = [self.sequence_ms, self.seek_ms, self.overlap_ms]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !all_positive {
            return Err(Error::InvalidConfig(
                "stretch window lengths must be positive".into(),
            ));
        }
        if self.overlap_ms >= self.sequence_ms {
            return Err(Error::InvalidConfig(
                "overlap_ms must be shorter than sequence_ms".into(),
            ));
        }
        Ok(())
    }
}

/// Length in samples of an `input_len`-sample buffer after [`stretch_tempo`].
pub fn stretched_len(input_len: usize, ratio: f64) -> usize {
    (input_len as f64 / ratio).round() as usize
}

/// Changes tempo by `ratio` (new tempo / old tempo) without changing pitch.
/// `1.01` plays one percent faster, so the output is about 1% shorter.
///
/// The output length is exactly [`stretched_len`]`(buf.len(), ratio)`.
pub fn stretch_tempo(buf: &PcmBuffer, ratio: f64, cfg: &StretchConfig) -> Result<PcmBuffer> {
    cfg.validate()?;
    if !(0.5..=2.0).contains(&ratio) {
        return Err(Error::RatioOutOfRange(ratio));
    }
    let sr = f64::from(buf.sample_rate());
    let to_samples = |ms: f64| ((ms * sr / 1000.0).round() as usize).max(1);
    let seq = to_samples(cfg.sequence_ms);
    let overlap = to_samples(cfg.overlap_ms).min(seq - 1);
    let seek = to_samples(cfg.seek_ms);
    if buf.len() < 2 * seq {
        return Err(Error::BufferTooShort {
            actual_s: buf.duration_s(),
            required_s: 2.0 * seq as f64 / sr,
        });
    }

    let input: Vec<f64> = buf.samples().iter().map(|&s| f64::from(s)).collect();
    let n = input.len();
    let target_len = stretched_len(n, ratio);
    let hop_out = seq - overlap;
    let hop_in = hop_out as f64 * ratio;
    let fade: Vec<f64> = (0..overlap)
        .map(|j| (j as f64 + 0.5) / overlap as f64)
        .collect();

    let mut out = vec![0.0f64; target_len];
    let first = seq.min(target_len);
    out[..first].copy_from_slice(&input[..first]);

    let mut search = AlignmentSearch::new(overlap, seek);
    let mut src = 0usize;
    let mut out_pos = 0usize;
    let mut frame = 1usize;
    loop {
        let next_out = frame * hop_out;
        if next_out + seq > target_len {
            break;
        }
        let nominal = (frame as f64 * hop_in).round() as usize;
        let lo = nominal.saturating_sub(seek);
        let hi = (nominal + seek).min(n - seq);
        if lo > hi {
            break;
        }
        let best = search.best_offset(&input, src + hop_out, lo, hi, nominal);

        for (j, w) in fade.iter().enumerate() {
            let o = &mut out[next_out + j];
            *o = *o * (1.0 - w) + input[best + j] * w;
        }
        out[next_out + overlap..next_out + seq]
            .copy_from_slice(&input[best + overlap..best + seq]);

        src = best;
        out_pos = next_out;
        frame += 1;
    }

    // Whatever is left of the output continues the last frame's source.
    let written = (out_pos + seq).min(target_len);
    for (j, o) in out[written..].iter_mut().enumerate() {
        *o = input.get(src + seq + j).copied().unwrap_or(0.0);
    }

    PcmBuffer::new(out.into_iter().map(|s| s as f32).collect(), buf.sample_rate())
}

/// FFT-backed search for the read position whose first `overlap` samples are
/// most similar to a target segment.
struct AlignmentSearch {
    overlap: usize,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    region: Vec<Complex<f64>>,
    target: Vec<Complex<f64>>,
    prefix_energy: Vec<f64>,
}

/// Mean-square level under which a window counts as silent.
const SILENT_MEAN_SQUARE: f64 = 1e-14;
const TIE_TOLERANCE: f64 = 1e-9;

impl AlignmentSearch {
    fn new(overlap: usize, seek: usize) -> Self {
        let fft_len = (2 * seek + 2 * overlap).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            overlap,
            fft_len,
            forward: planner.plan_fft_forward(fft_len),
            inverse: planner.plan_fft_inverse(fft_len),
            region: vec![Complex::default(); fft_len],
            target: vec![Complex::default(); fft_len],
            prefix_energy: Vec::with_capacity(fft_len + 1),
        }
    }

    /// Best start in `[lo, hi]` for continuing from `input[continuation..]`.
    /// Ties, including the all-silent case, go to the candidate nearest
    /// `nominal`.
    fn best_offset(
        &mut self,
        input: &[f64],
        continuation: usize,
        lo: usize,
        hi: usize,
        nominal: usize,
    ) -> usize {
        let len = self.overlap;
        let target = &input[continuation..continuation + len];
        let target_energy: f64 = target.iter().map(|v| v * v).sum();
        if target_energy < SILENT_MEAN_SQUARE * len as f64 {
            return nominal.clamp(lo, hi);
        }
        // An exact copy of the continuation is a perfect match.
        if (lo..=hi).contains(&continuation) {
            return continuation;
        }

        let region = &input[lo..hi + len];
        for (slot, v) in self.region.iter_mut().zip(region.iter().chain(std::iter::repeat(&0.0))) {
            *slot = Complex::new(*v, 0.0);
        }
        for (slot, v) in self.target.iter_mut().zip(target.iter().chain(std::iter::repeat(&0.0))) {
            *slot = Complex::new(*v, 0.0);
        }
        self.forward.process(&mut self.region);
        self.forward.process(&mut self.target);
        for (r, t) in self.region.iter_mut().zip(&self.target) {
            *r *= t.conj();
        }
        self.inverse.process(&mut self.region);
        let norm = 1.0 / self.fft_len as f64;

        self.prefix_energy.clear();
        self.prefix_energy.push(0.0);
        let mut acc = 0.0;
        for v in region {
            acc += v * v;
            self.prefix_energy.push(acc);
        }

        let mut best = nominal.clamp(lo, hi);
        let mut best_score = f64::NEG_INFINITY;
        for d in 0..=(hi - lo) {
            let energy = self.prefix_energy[d + len] - self.prefix_energy[d];
            let score = if energy < SILENT_MEAN_SQUARE * len as f64 {
                0.0
            } else {
                self.region[d].re * norm / (target_energy * energy).sqrt()
            };
            let pos = lo + d;
            let closer = pos.abs_diff(nominal) < best.abs_diff(nominal);
            if score > best_score + TIE_TOLERANCE
                || (score >= best_score - TIE_TOLERANCE && closer)
            {
                best = pos;
                best_score = score.max(best_score);
            }
        }
        best
    }
}
