//! The tempo-modulation channel.
//!
//! A carrier is cut into `phi_s`-second slices. The first slice is kept as a
//! tempo reference; each following slice carries one bit by being sped up or
//! slowed down by `delta`; the last full slice and the remainder stay
//! untouched. Decoding measures tempo candidates of every (edge-trimmed)
//! slice and classifies its direction against the reference.

mod classify;
mod decode;
mod encode;
mod params;
mod plan;

pub use classify::{classify_slice, pair_differences, Classification, Undecidable};
pub use decode::{
    decode, decode_playlist, decode_with, DecodeOptions, DecodeReport, DecodeWarning, SliceRecord,
    LOW_CONFIDENCE_FRACTION,
};
pub use encode::{encode, encode_playlist, validate_reference, REFERENCE_BLOCK_S};
pub use params::{BoundaryMode, Direction, StegoParams};
pub use plan::{capacity, Interval, SlicePlan};
