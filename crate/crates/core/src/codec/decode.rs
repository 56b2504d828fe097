use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{classify_slice, Classification, Undecidable};
use super::encode::validate_reference;
use super::params::{BoundaryMode, Direction, StegoParams};
use super::plan::capacity;
use crate::audio::PcmBuffer;
use crate::bits::{Bit, BitString};
use crate::error::{Error, Result};
use crate::stretch::stretched_len;
use crate::tempo::{estimate_tempo, TempoCandidates};

/// Slices whose confidence falls below this fraction of the nominal offset
/// (in percent) are flagged with [`DecodeWarning::LowConfidence`].
pub const LOW_CONFIDENCE_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Default)]
pub struct DecodeOptions {
    /// Stop after this many data slices.
    pub max_bits: Option<usize>,
    /// Replace the measured reference tempo with these candidates. Skips the
    /// reference energy check. Test hook for studying bad references.
    pub reference_override: Option<TempoCandidates>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub slice_index: usize,
    /// Start of the (untrimmed) slice in the steganogram.
    pub start_s: f64,
    pub direction: Option<Direction>,
    pub confidence: f64,
    pub candidates_used: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum DecodeWarning {
    LowConfidence { slice_index: usize, confidence: f64 },
    Undecidable { slice_index: usize, reason: Undecidable },
    ForcedDecision { slice_index: usize },
    EstimationFailed { slice_index: usize, error: String },
    /// `max_bits` asked for more slices than the steganogram holds.
    Truncated { requested: usize, decoded: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    #[serde(with = "bit_notation")]
    pub bits: BitString,
    pub per_slice: Vec<SliceRecord>,
    pub warnings: Vec<DecodeWarning>,
    pub reference: TempoCandidates,
    pub params_used: StegoParams,
}

impl DecodeReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn mean_confidence(&self) -> f64 {
        if self.per_slice.is_empty() {
            return 0.0;
        }
        self.per_slice.iter().map(|s| s.confidence).sum::<f64>() / self.per_slice.len() as f64
    }
}

/// Bits as the space-separated `0`/`1`/`x` string.
mod bit_notation {
    use super::{Bit, BitString};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &BitString, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&bits.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BitString, D::Error> {
        let raw = String::deserialize(d)?;
        raw.split_whitespace()
            .map(|tok| match tok {
                "0" => Ok(Bit::Zero),
                "1" => Ok(Bit::One),
                "x" => Ok(Bit::Erasure),
                other => Err(D::Error::custom(format!("bad bit symbol {other:?}"))),
            })
            .collect()
    }
}

pub fn decode(stego: &PcmBuffer, params: &StegoParams, max_bits: Option<usize>) -> Result<DecodeReport> {
    decode_with(
        stego,
        params,
        &DecodeOptions {
            max_bits,
            reference_override: None,
        },
    )
}

/// Length in samples of original slice `i` (slice boundaries are rounded
/// multiples of `phi_s`).
fn slice_len(i: usize, phi_s: f64, sample_rate: u32) -> usize {
    let at = |k: usize| (k as f64 * phi_s * f64::from(sample_rate)).round() as usize;
    at(i + 1) - at(i)
}

pub fn decode_with(stego: &PcmBuffer, params: &StegoParams, opts: &DecodeOptions) -> Result<DecodeReport> {
    params.validate()?;
    if stego.duration_s() + 1e-9 < 3.0 * params.phi_s {
        return Err(Error::TooShort {
            actual_s: stego.duration_s(),
            required_s: 3.0 * params.phi_s,
        });
    }
    let sr = stego.sample_rate();
    let trim = stego.index_at(params.trim_s());
    let window = stego.index_at(params.analysis_window_s());

    let reference = match &opts.reference_override {
        Some(r) => r.clone(),
        None => {
            validate_reference(stego, params)?;
            let ref_window = stego.range(trim, trim + window);
            estimate_tempo(&ref_window, &params.tempo).map_err(|e| match e {
                Error::LowEnergy { rms_dbfs, .. } => Error::ReferenceSilent { rms_dbfs },
                other => other,
            })?
        }
    };

    let mut state = Decoding {
        params,
        reference: &reference,
        bits: BitString::new(),
        per_slice: Vec::new(),
        warnings: Vec::new(),
    };
    let fits = |start: usize| start + trim + window <= stego.len();
    let analyse = |start: usize| {
        let w = stego.range(start + trim, start + trim + window);
        estimate_tempo(&w, &params.tempo)
    };

    match params.boundary_mode {
        BoundaryMode::Static => {
            let count = opts
                .max_bits
                .unwrap_or_else(|| capacity(stego.duration_s(), params));
            let starts: Vec<usize> = (1..=count)
                .map(|i| stego.index_at(i as f64 * params.phi_s))
                .take_while(|&s| fits(s))
                .collect();
            let estimates: Vec<_> = starts.par_iter().map(|&s| analyse(s)).collect();
            for (k, (start, est)) in starts.iter().zip(estimates).enumerate() {
                state.record(k + 1, *start as f64 / f64::from(sr), est);
            }
        }
        BoundaryMode::Tracked => {
            let phi_samples = stego.index_at(params.phi_s);
            let mut start = slice_len(0, params.phi_s, sr);
            let mut i = 1;
            loop {
                let len = slice_len(i, params.phi_s, sr);
                let more = match opts.max_bits {
                    Some(max) => i <= max,
                    // A data slice is always followed by one full untouched slice.
                    None => start + stretched_len(len, 1.0 + params.delta) + phi_samples <= stego.len(),
                };
                if !more || !fits(start) {
                    break;
                }
                let decided = state.record(i, start as f64 / f64::from(sr), analyse(start));
                start += match decided {
                    Some(dir) => stretched_len(len, dir.ratio(params.delta)),
                    None => len,
                };
                i += 1;
            }
        }
    }

    if let Some(max) = opts.max_bits {
        if state.bits.len() < max {
            state.warnings.push(DecodeWarning::Truncated {
                requested: max,
                decoded: state.bits.len(),
            });
        }
    }

    Ok(DecodeReport {
        bits: state.bits,
        per_slice: state.per_slice,
        warnings: state.warnings,
        reference,
        params_used: params.clone(),
    })
}

struct Decoding<'a> {
    params: &'a StegoParams,
    reference: &'a TempoCandidates,
    bits: BitString,
    per_slice: Vec<SliceRecord>,
    warnings: Vec<DecodeWarning>,
}

impl Decoding<'_> {
    /// Classifies one slice, appends its bit and record, and returns the
    /// direction used for the bit (if any).
    fn record(&mut self, slice_index: usize, start_s: f64, estimate: Result<TempoCandidates>) -> Option<Direction> {
        let verdict: std::result::Result<Classification, Option<Undecidable>> = match estimate {
            Ok(sample) => classify_slice(self.reference, &sample, self.params).map_err(Some),
            Err(e) => {
                self.warnings.push(DecodeWarning::EstimationFailed {
                    slice_index,
                    error: e.to_string(),
                });
                Err(None)
            }
        };
        let (direction, confidence, used) = match verdict {
            Ok(c) => {
                if c.confidence < LOW_CONFIDENCE_FRACTION * self.params.delta * 100.0 {
                    self.warnings.push(DecodeWarning::LowConfidence {
                        slice_index,
                        confidence: c.confidence,
                    });
                }
                (Some(c.direction), c.confidence, c.pairs_used)
            }
            Err(reason) => {
                if let Some(reason) = reason {
                    self.warnings.push(DecodeWarning::Undecidable { slice_index, reason });
                }
                if self.params.force_decide {
                    self.warnings.push(DecodeWarning::ForcedDecision { slice_index });
                    (Some(Direction::Down), 0.0, 0)
                } else {
                    (None, 0.0, 0)
                }
            }
        };
        self.bits.push(match direction {
            Some(d) => Bit::from_bool(d == self.params.bit_one_direction),
            None => Bit::Erasure,
        });
        self.per_slice.push(SliceRecord {
            slice_index,
            start_s,
            direction,
            confidence,
            candidates_used: used,
        });
        direction
    }
}

/// Decodes each steganogram and concatenates the bits. `lengths`, when given,
/// caps each file at its known segment length.
pub fn decode_playlist(
    stegos: &[PcmBuffer],
    params: &StegoParams,
    lengths: Option<&[usize]>,
) -> Result<(BitString, Vec<DecodeReport>)> {
    let reports: Vec<DecodeReport> = stegos
        .par_iter()
        .enumerate()
        .map(|(i, s)| decode(s, params, lengths.map(|l| l[i])))
        .collect::<Result<_>>()?;
    let bits = BitString::concat(reports.iter().map(|r| &r.bits));
    Ok((bits, reports))
}
