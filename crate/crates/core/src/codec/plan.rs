use serde::{Deserialize, Serialize};

use super::params::StegoParams;

/// Full slices in `duration_s`, with a small tolerance so exact multiples of
/// `phi_s` are not lost to rounding.
fn full_slices(duration_s: f64, phi_s: f64) -> usize {
    ((duration_s / phi_s) + 1e-9).floor().max(0.0) as usize
}

/// Bits a carrier of `duration_s` seconds can hold: the number of full
/// slices minus the reference and the last full slice.
pub fn capacity(duration_s: f64, params: &StegoParams) -> usize {
    full_slices(duration_s, params.phi_s).saturating_sub(2)
}

/// `[start, end)` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start_s: f64,
    pub end_s: f64,
}

impl Interval {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// How an unmodified carrier is partitioned: reference, data slices, tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicePlan {
    pub reference: Interval,
    pub data_slices: Vec<Interval>,
    pub tail: Interval,
}

impl SlicePlan {
    pub fn new(duration_s: f64, params: &StegoParams) -> Self {
        let phi = params.phi_s;
        let n = full_slices(duration_s, phi);
        let reference_end = phi.min(duration_s);
        let data_slices: Vec<Interval> = (1..n.saturating_sub(1))
            .map(|i| Interval {
                start_s: i as f64 * phi,
                end_s: (i + 1) as f64 * phi,
            })
            .collect();
        let tail_start = data_slices.last().map_or(reference_end, |s| s.end_s);
        Self {
            reference: Interval {
                start_s: 0.0,
                end_s: reference_end,
            },
            data_slices,
            tail: Interval {
                start_s: tail_start,
                end_s: duration_s,
            },
        }
    }

    pub fn capacity(&self) -> usize {
        self.data_slices.len()
    }

    /// All intervals in time order.
    pub fn intervals(&self) -> Vec<Interval> {
        let mut all = vec![self.reference];
        all.extend(self.data_slices.iter().copied());
        if self.tail.duration_s() > 0.0 {
            all.push(self.tail);
        }
        all
    }
}
