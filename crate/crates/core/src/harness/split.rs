//! Splitting a recorded stream into songs at silent gaps.

use crate::audio::{rms_dbfs_of, PcmBuffer};

const FRAME_S: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SilenceSplit {
    /// Shortest quiet run treated as a separator.
    pub min_silence_s: f64,
    pub threshold_dbfs: f64,
}

impl Default for SilenceSplit {
    fn default() -> Self {
        Self {
            min_silence_s: 2.0,
            threshold_dbfs: -50.0,
        }
    }
}

/// Non-silent segments of `stream`, in order, with edge silence removed.
/// Silence is judged on 10 ms frames; a stream without any separator comes
/// back as a single segment, an all-silent one as none.
pub fn split_on_silence(stream: &PcmBuffer, min_silence_s: f64, threshold_dbfs: f64) -> Vec<PcmBuffer> {
    let frame = stream.index_at(FRAME_S).max(1);
    let samples = stream.samples();
    let frames: Vec<(usize, usize)> = (0..samples.len())
        .step_by(frame)
        .map(|s| (s, (s + frame).min(samples.len())))
        .collect();
    let silent: Vec<bool> = frames
        .iter()
        .map(|&(s, e)| rms_dbfs_of(&samples[s..e]) < threshold_dbfs)
        .collect();
    let min_len = stream.index_at(min_silence_s);

    // Frame ranges [a, b) holding separators.
    let mut separators = Vec::new();
    let mut k = 0;
    while k < frames.len() {
        if !silent[k] {
            k += 1;
            continue;
        }
        let run_start = k;
        while k < frames.len() && silent[k] {
            k += 1;
        }
        let run_samples = frames[k - 1].1 - frames[run_start].0;
        if run_samples >= min_len {
            separators.push((run_start, k));
        }
    }

    let mut bounds = Vec::new();
    let mut cursor = 0;
    for &(a, b) in &separators {
        bounds.push((cursor, a));
        cursor = b;
    }
    bounds.push((cursor, frames.len()));

    bounds
        .into_iter()
        .filter_map(|(mut a, mut b)| {
            while a < b && silent[a] {
                a += 1;
            }
            while b > a && silent[b - 1] {
                b -= 1;
            }
            (a < b).then(|| stream.range(frames[a].0, frames[b - 1].1))
        })
        .collect()
}

impl SilenceSplit {
    pub fn split(&self, stream: &PcmBuffer) -> Vec<PcmBuffer> {
        split_on_silence(stream, self.min_silence_s, self.threshold_dbfs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::concat;

    fn tone(seconds: f64, freq: f64) -> PcmBuffer {
        let sr = 8000u32;
        let n = (seconds * f64::from(sr)) as usize;
        PcmBuffer::new(
            (0..n)
                .map(|i| (0.3 * (2.0 * std::f64::consts::PI * freq * i as f64 / f64::from(sr)).sin()) as f32)
                .collect(),
            sr,
        )
        .unwrap()
    }

    #[test]
    fn splits_at_long_gap() {
        let (a, b) = (tone(5.0, 300.0), tone(7.0, 500.0));
        let gap = PcmBuffer::silence(3.0, 8000).unwrap();
        let parts = SilenceSplit::default().split(&concat(&[a.clone(), gap, b.clone()]).unwrap());
        assert_eq!(parts.len(), 2);
        assert!((parts[0].duration_s() - a.duration_s()).abs() < 0.1);
        assert!((parts[1].duration_s() - b.duration_s()).abs() < 0.1);
    }

    #[test]
    fn no_silence_returns_input() {
        let a = tone(4.0, 440.0);
        let parts = split_on_silence(&a, 2.0, -50.0);
        assert_eq!(parts, vec![a]);
    }

    #[test]
    fn short_gap_is_not_a_separator() {
        let (a, b) = (tone(3.0, 300.0), tone(3.0, 500.0));
        let gap = PcmBuffer::silence(1.0, 8000).unwrap();
        let parts = split_on_silence(&concat(&[a, gap, b]).unwrap(), 2.0, -50.0);
        assert_eq!(parts.len(), 1);
        assert!((parts[0].duration_s() - 7.0).abs() < 0.02);
    }

    #[test]
    fn edge_silence_is_trimmed() {
        let a = tone(2.0, 300.0);
        let pad = PcmBuffer::silence(0.5, 8000).unwrap();
        let parts = split_on_silence(&concat(&[pad.clone(), a.clone(), pad]).unwrap(), 2.0, -50.0);
        assert_eq!(parts.len(), 1);
        assert!((parts[0].duration_s() - 2.0).abs() < 0.011);
        assert!(split_on_silence(&PcmBuffer::silence(3.0, 8000).unwrap(), 2.0, -50.0).is_empty());
    }
}
