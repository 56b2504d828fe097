//! Deterministic click-track carriers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::audio::PcmBuffer;
use crate::error::{Error, Result};

/// Click synthesis settings. Each click is a burst of random-sign noise under
/// an exponential decay envelope, truncated after ten time constants so the
/// gaps between clicks are digital silence.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickTrack {
    pub bpm: f64,
    pub duration_s: f64,
    pub sample_rate: u32,
    pub amplitude: f64,
    pub decay_s: f64,
    /// Amplitude of the off-beat click halfway between beats; zero disables it.
    pub subdivision_amplitude: f64,
    pub seed: u64,
}

impl ClickTrack {
    pub fn new(bpm: f64, duration_s: f64, sample_rate: u32) -> Self {
        Self {
            bpm,
            duration_s,
            sample_rate,
            amplitude: 0.8,
            decay_s: 0.005,
            subdivision_amplitude: 0.3,
            seed: 0x5eed,
        }
    }

    pub fn without_subdivisions(mut self) -> Self {
        self.subdivision_amplitude = 0.0;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Beat onset times in seconds.
    pub fn onsets(&self) -> Vec<f64> {
        let period = 60.0 / self.bpm;
        (0..)
            .map(|k| k as f64 * period)
            .take_while(|t| *t < self.duration_s)
            .collect()
    }

    pub fn render(&self) -> Result<PcmBuffer> {
        if !(40.0..=300.0).contains(&self.bpm) {
            return Err(Error::InvalidConfig(format!("bpm {} outside [40, 300]", self.bpm)));
        }
        if !(self.duration_s >= 1.0) {
            return Err(Error::InvalidConfig("duration must be at least 1 s".into()));
        }
        if self.sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        let sr = f64::from(self.sample_rate);
        let n = (self.duration_s * sr).round() as usize;
        let mut samples = vec![0.0f32; n];
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let click_len = (10.0 * self.decay_s * sr).round() as usize;
        let period = 60.0 / self.bpm;

        let mut place = |start_s: f64, amp: f64, rng: &mut ChaCha8Rng| {
            let start = (start_s * sr).round() as usize;
            for i in 0..click_len {
                let Some(slot) = samples.get_mut(start + i) else {
                    break;
                };
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let env = (-(i as f64) / (self.decay_s * sr)).exp();
                *slot += (amp * sign * env) as f32;
            }
        };
        for onset in self.onsets() {
            place(onset, self.amplitude, &mut rng);
            if self.subdivision_amplitude > 0.0 {
                place(onset + period / 2.0, self.subdivision_amplitude, &mut rng);
            }
        }
        PcmBuffer::new(samples, self.sample_rate)
    }
}

/// Click track at `bpm` with the default click shape and half-beat
/// subdivisions.
pub fn generate_click_track(bpm: f64, duration_s: f64, sample_rate: u32) -> Result<PcmBuffer> {
    ClickTrack::new(bpm, duration_s, sample_rate).render()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Main-beat onsets found directly in the samples: a sample at (or above)
    /// the main click amplitude preceded by at least 10 ms of silence.
    fn count_main_onsets(buf: &PcmBuffer) -> Vec<f64> {
        let sr = f64::from(buf.sample_rate());
        let quiet = (0.01 * sr) as usize;
        let s = buf.samples();
        (0..s.len())
            .filter(|&i| s[i].abs() >= 0.79 && s[i.saturating_sub(quiet)..i].iter().all(|v| *v == 0.0))
            .map(|i| i as f64 / sr)
            .collect()
    }

    #[test]
    fn one_minute_at_120() {
        let b = generate_click_track(120.0, 60.0, 44100).unwrap();
        assert_eq!(b.len(), 60 * 44100);
        let onsets = count_main_onsets(&b);
        assert_eq!(onsets.len(), 120);
        for pair in onsets.windows(2) {
            assert!((pair[1] - pair[0] - 0.5).abs() < 1e-4);
        }
        assert!(b.samples().iter().all(|s| s.abs() <= 0.8 + 1e-6));
    }

    #[test]
    fn ten_seconds_at_60() {
        let b = ClickTrack::new(60.0, 10.0, 44100).without_subdivisions().render().unwrap();
        let onsets = count_main_onsets(&b);
        assert_eq!(onsets.len(), 10);
        assert!((onsets[1] - onsets[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn estimator_reads_generator_tempo() {
        let b = generate_click_track(140.0, 15.0, 44100).unwrap();
        let cands = crate::tempo::estimate_tempo(&b, &crate::tempo::TempoConfig::default()).unwrap();
        let top = cands.top().unwrap().bpm;
        assert!((top - 140.0).abs() <= 1.0, "top {top}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_click_track(30.0, 10.0, 44100).is_err());
        assert!(generate_click_track(120.0, 0.5, 44100).is_err());
        assert!(generate_click_track(120.0, 10.0, 0).is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = ClickTrack::new(100.0, 2.0, 8000).render().unwrap();
        let b = ClickTrack::new(100.0, 2.0, 8000).render().unwrap();
        let c = ClickTrack::new(100.0, 2.0, 8000).with_seed(9).render().unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
