use rayon::prelude::*;

use super::params::StegoParams;
use super::plan::{capacity, SlicePlan};
use crate::audio::{concat, rms_dbfs_of, PcmBuffer};
use crate::bits::{plan_spanning, Bit, BitString};
use crate::error::{Error, Result};
use crate::stretch::stretch_tempo;

/// Block length used when checking the reference slice for silence.
pub const REFERENCE_BLOCK_S: f64 = 2.0;

/// Refuses a reference slice that contains a silent stretch.
///
/// The trimmed reference window is cut into blocks of [`REFERENCE_BLOCK_S`]
/// (the last block absorbs any remainder); if the quietest block is under
/// the tempo energy gate the reference is rejected. A whole-window RMS check
/// would miss a few seconds of leading silence followed by loud music.
pub fn validate_reference(carrier: &PcmBuffer, params: &StegoParams) -> Result<()> {
    let start = carrier.index_at(params.trim_s());
    let end = carrier
        .index_at(params.phi_s - params.trim_s())
        .min(carrier.len());
    if start >= end {
        return Err(Error::TooShort {
            actual_s: carrier.duration_s(),
            required_s: params.phi_s,
        });
    }
    let window = &carrier.samples()[start..end];
    let block = carrier.index_at(REFERENCE_BLOCK_S).max(1);
    let blocks = (window.len() / block).max(1);
    let quietest = (0..blocks)
        .map(|b| {
            let hi = if b + 1 == blocks { window.len() } else { (b + 1) * block };
            rms_dbfs_of(&window[b * block..hi])
        })
        .fold(f64::INFINITY, f64::min);
    if quietest < params.tempo.min_rms_dbfs {
        return Err(Error::ReferenceSilent { rms_dbfs: quietest });
    }
    Ok(())
}

/// Hides `message` in `carrier`: the reference slice and the tail are kept
/// verbatim, data slice `i` is tempo-shifted up or down for bit `i`, and data
/// slices past the end of the message are left untouched.
pub fn encode(carrier: &PcmBuffer, message: &BitString, params: &StegoParams) -> Result<PcmBuffer> {
    params.validate()?;
    if message.has_erasures() {
        return Err(Error::ContainsErasures);
    }
    let cap = capacity(carrier.duration_s(), params);
    if message.len() > cap {
        return Err(Error::MessageTooLong {
            length: message.len(),
            capacity: cap,
        });
    }
    validate_reference(carrier, params)?;

    let plan = SlicePlan::new(carrier.duration_s(), params);
    let ranges: Vec<(usize, usize)> = plan
        .intervals()
        .iter()
        .map(|iv| (carrier.index_at(iv.start_s), carrier.index_at(iv.end_s).min(carrier.len())))
        .collect();

    let pieces: Vec<PcmBuffer> = ranges
        .par_iter()
        .enumerate()
        .map(|(idx, &(start, end))| {
            let piece = carrier.range(start, end);
            // Index 0 is the reference; data slice k (1-based) carries bit k-1.
            match idx.checked_sub(1).and_then(|k| message.get(k)) {
                Some(bit) if idx <= plan.capacity() => {
                    let ratio = params.direction_for_bit(bit == Bit::One).ratio(params.delta);
                    stretch_tempo(&piece, ratio, &params.stretch)
                }
                _ => Ok(piece),
            }
        })
        .collect::<Result<_>>()?;
    concat(&pieces)
}

/// Spreads `message` over several carriers in order, each encoded with its
/// own reference slice.
pub fn encode_playlist(
    carriers: &[PcmBuffer],
    message: &BitString,
    params: &StegoParams,
) -> Result<Vec<PcmBuffer>> {
    params.validate()?;
    let capacities: Vec<usize> = carriers
        .iter()
        .map(|c| capacity(c.duration_s(), params))
        .collect();
    let segments = plan_spanning(message, &capacities)?;
    carriers
        .par_iter()
        .zip(segments.par_iter())
        .map(|(carrier, segment)| encode(carrier, segment, params))
        .collect()
}
