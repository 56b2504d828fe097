//! Channel degradations applied to a steganogram before decoding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::audio::PcmBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Perturbation {
    /// Additive white Gaussian noise at `snr_db` relative to the signal RMS.
    Noise { snr_db: f64, seed: u64 },
    Gain(f64),
    /// Linear-interpolation resample to `intermediate_rate` and back.
    ResampleRoundTrip { intermediate_rate: u32 },
}

impl Perturbation {
    pub fn noise(snr_db: f64) -> Self {
        Perturbation::Noise { snr_db, seed: 0 }
    }
}

pub fn perturb(buf: &PcmBuffer, kind: &Perturbation) -> Result<PcmBuffer> {
    match *kind {
        Perturbation::Gain(factor) => {
            if !(factor.is_finite() && factor > 0.0) {
                return Err(Error::InvalidConfig(format!("gain {factor} must be positive")));
            }
            buf.map(|s| (f64::from(s) * factor) as f32)
        }
        Perturbation::Noise { snr_db, seed } => {
            if !snr_db.is_finite() {
                return Err(Error::InvalidConfig("SNR must be finite".into()));
            }
            let n = buf.len().max(1) as f64;
            let signal_rms =
                (buf.samples().iter().map(|&s| f64::from(s).powi(2)).sum::<f64>() / n).sqrt();
            let sigma = signal_rms / 10f64.powf(snr_db / 20.0);
            let normal = Normal::new(0.0, sigma)
                .map_err(|e| Error::InvalidConfig(format!("noise level: {e}")))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            PcmBuffer::new(
                buf.samples()
                    .iter()
                    .map(|&s| (f64::from(s) + normal.sample(&mut rng)) as f32)
                    .collect(),
                buf.sample_rate(),
            )
        }
        Perturbation::ResampleRoundTrip { intermediate_rate } => {
            if intermediate_rate == 0 {
                return Err(Error::InvalidConfig("intermediate rate must be positive".into()));
            }
            let rate = buf.sample_rate();
            let mid_len =
                (buf.len() as f64 * f64::from(intermediate_rate) / f64::from(rate)).round() as usize;
            let mid = linear_resample(buf.samples(), f64::from(rate) / f64::from(intermediate_rate), mid_len);
            let back = linear_resample(&mid, f64::from(intermediate_rate) / f64::from(rate), buf.len());
            PcmBuffer::new(back, rate)
        }
    }
}

/// Output sample `j` reads the input at position `j * step`.
fn linear_resample(input: &[f32], step: f64, out_len: usize) -> Vec<f32> {
    if input.is_empty() {
        return vec![0.0; out_len];
    }
    let last = input.len() - 1;
    (0..out_len)
        .map(|j| {
            let pos = j as f64 * step;
            let i = (pos.floor() as usize).min(last);
            let frac = pos - i as f64;
            let next = input[(i + 1).min(last)];
            (f64::from(input[i]) * (1.0 - frac) + f64::from(next) * frac) as f32
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> PcmBuffer {
        PcmBuffer::new((0..4410).map(|i| ((i % 100) as f32 / 100.0) - 0.5).collect(), 44100).unwrap()
    }

    #[test]
    fn gain_scales() {
        let b = ramp();
        let g = perturb(&b, &Perturbation::Gain(0.5)).unwrap();
        for (x, y) in b.samples().iter().zip(g.samples()) {
            assert!((x * 0.5 - y).abs() < 1e-7);
        }
        assert!(perturb(&b, &Perturbation::Gain(0.0)).is_err());
        assert!(perturb(&b, &Perturbation::Gain(f64::NAN)).is_err());
    }

    #[test]
    fn same_rate_round_trip_is_identity() {
        let b = ramp();
        let out = perturb(&b, &Perturbation::ResampleRoundTrip { intermediate_rate: 44100 }).unwrap();
        assert_eq!(out.len(), b.len());
        for (x, y) in b.samples().iter().zip(out.samples()) {
            assert!((x - y).abs() <= 1.0 / 32768.0);
        }
    }

    #[test]
    fn resample_preserves_length() {
        let b = ramp();
        for rate in [8000, 22050, 48000] {
            let out = perturb(&b, &Perturbation::ResampleRoundTrip { intermediate_rate: rate }).unwrap();
            assert_eq!(out.len(), b.len());
        }
        assert!(perturb(&b, &Perturbation::ResampleRoundTrip { intermediate_rate: 0 }).is_err());
    }

    #[test]
    fn noise_hits_requested_snr() {
        let b = PcmBuffer::new(
            (0..44100).map(|i| (i as f32 * 0.05).sin() * 0.5).collect(),
            44100,
        )
        .unwrap();
        let noisy = perturb(&b, &Perturbation::Noise { snr_db: 20.0, seed: 4 }).unwrap();
        let (mut sig, mut err) = (0.0f64, 0.0f64);
        for (x, y) in b.samples().iter().zip(noisy.samples()) {
            sig += f64::from(*x).powi(2);
            err += f64::from(y - x).powi(2);
        }
        let snr = 10.0 * (sig / err).log10();
        assert!((snr - 20.0).abs() < 0.2, "snr {snr}");
        let again = perturb(&b, &Perturbation::Noise { snr_db: 20.0, seed: 4 }).unwrap();
        assert_eq!(noisy, again);
    }
}
