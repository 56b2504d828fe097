//! Direction classifier: compare every reference tempo with every sample
//! tempo, drop large (cross-harmonic) differences, and use the sign of the sum.

use serde::{Deserialize, Serialize};

use super::params::{Direction, StegoParams};
use crate::tempo::TempoCandidates;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub direction: Direction,
    /// Absolute value of the summed surviving differences, in percent.
    pub confidence: f64,
    /// Number of reference/sample pairs that survived the gate.
    pub pairs_used: usize,
}

/// Why a slice could not be classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
pub enum Undecidable {
    #[error("a candidate set is empty")]
    NoCandidates,
    #[error("every tempo difference exceeded the discard gate")]
    AllDiscarded,
    #[error("surviving tempo differences sum to zero")]
    ZeroSum,
}

/// Percentage differences `100 * (s - r) / r` for every (reference, sample)
/// pair, reference-major.
pub fn pair_differences(reference: &TempoCandidates, sample: &TempoCandidates) -> Vec<f64> {
    reference
        .bpms()
        .flat_map(|r| sample.bpms().map(move |s| 100.0 * (s - r) / r))
        .collect()
}

pub fn classify_slice(
    reference: &TempoCandidates,
    sample: &TempoCandidates,
    params: &StegoParams,
) -> Result<Classification, Undecidable> {
    if reference.is_empty() || sample.is_empty() {
        return Err(Undecidable::NoCandidates);
    }
    let survivors: Vec<f64> = pair_differences(reference, sample)
        .into_iter()
        .filter(|d| d.abs() <= params.discard_pct)
        .collect();
    if survivors.is_empty() {
        return Err(Undecidable::AllDiscarded);
    }
    let sum: f64 = survivors.iter().sum();
    let direction = if sum > 0.0 {
        Direction::Up
    } else if sum < 0.0 {
        Direction::Down
    } else {
        return Err(Undecidable::ZeroSum);
    };
    Ok(Classification {
        direction,
        confidence: sum.abs(),
        pairs_used: survivors.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cands(bpms: &[f64]) -> TempoCandidates {
        TempoCandidates::from_bpms(bpms)
    }

    #[test]
    fn single_pair_up() {
        let c = classify_slice(&cands(&[120.0]), &cands(&[121.2]), &StegoParams::default()).unwrap();
        assert_eq!(c.direction, Direction::Up);
        assert!((c.confidence - 1.0).abs() < 1e-9);
        assert_eq!(c.pairs_used, 1);
    }

    #[test]
    fn harmonic_pairs_are_gated() {
        // Enumerated by hand: 120->118.8 = -1.0, 120->59.4 = -50.5,
        // 60->118.8 = +98.0, 60->59.4 = -1.0. Two survive, sum -2.0.
        let diffs = pair_differences(&cands(&[120.0, 60.0]), &cands(&[118.8, 59.4]));
        let mut sorted = diffs.clone();
        sorted.sort_by(f64::total_cmp);
        let expected = [-50.5, -1.0, -1.0, 98.0];
        for (d, e) in sorted.iter().zip(expected) {
            assert!((d - e).abs() < 1e-9, "{d} vs {e}");
        }
        let c = classify_slice(&cands(&[120.0, 60.0]), &cands(&[118.8, 59.4]), &StegoParams::default())
            .unwrap();
        assert_eq!(c.direction, Direction::Down);
        assert!((c.confidence - 2.0).abs() < 1e-9);
        assert_eq!(c.pairs_used, 2);
    }

    #[test]
    fn octave_error_is_undecidable() {
        let r = classify_slice(&cands(&[120.0]), &cands(&[240.0]), &StegoParams::default());
        assert_eq!(r, Err(Undecidable::AllDiscarded));
    }

    #[test]
    fn exact_zero_and_empty_sets() {
        let p = StegoParams::default();
        assert_eq!(classify_slice(&cands(&[120.0]), &cands(&[120.0]), &p), Err(Undecidable::ZeroSum));
        assert_eq!(classify_slice(&cands(&[]), &cands(&[120.0]), &p), Err(Undecidable::NoCandidates));
    }

    #[test]
    fn gate_boundary_is_inclusive() {
        // Exactly +4% is kept; the gate discards only values above it.
        let c = classify_slice(&cands(&[100.0]), &cands(&[104.0]), &StegoParams::default()).unwrap();
        assert_eq!(c.direction, Direction::Up);
    }
}
