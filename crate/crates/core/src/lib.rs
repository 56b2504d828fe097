//! Covert channel that hides bit strings in constant-tempo music.
//!
//! Each fixed-length slice of a carrier is played slightly faster or slower
//! (±1% by default) with a pitch-preserving time stretch; the receiver
//! recovers the bits by comparing each slice's estimated tempo with the
//! untouched first slice.
//!
//! ```no_run
//! use tempo_stego::{audio, bits, codec};
//!
//! let carrier = audio::read_wav("song.wav")?;
//! let params = codec::StegoParams::default();
//! let message = bits::parse_bitstring("1 1 0 1")?;
//! let stego = codec::encode(&carrier, &message, &params)?;
//! let report = codec::decode(&stego, &params, Some(message.len()))?;
//! assert_eq!(report.bits, message);
//! # Ok::<(), tempo_stego::Error>(())
//! ```

pub mod audio;
pub mod bits;
pub mod codec;
pub mod error;
pub mod harness;
pub mod stretch;
pub mod tempo;

pub use audio::PcmBuffer;
pub use bits::{Bit, BitString};
pub use codec::{BoundaryMode, DecodeReport, Direction, StegoParams};
pub use error::{Error, Result};
pub use tempo::{TempoCandidates, TempoConfig};
