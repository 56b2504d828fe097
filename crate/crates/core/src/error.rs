use thiserror::Error;

/// Every failure this crate can report.
///
/// [`Error::name`] gives a stable machine-readable identifier for each
/// variant; the CLI prints it on failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid symbol {symbol:?} at position {position}")]
    InvalidSymbol { symbol: char, position: usize },

    #[error("invalid hex payload: {0}")]
    InvalidHex(String),

    #[error("bit string of {0} bits cannot be converted to bytes")]
    NotByteAligned(usize),

    #[error("bit string contains erasures")]
    ContainsErasures,

    #[error("insufficient capacity: {required} bits required, {available} available")]
    InsufficientCapacity { required: usize, available: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed WAV header: {0}")]
    MalformedHeader(String),

    #[error("buffer is empty")]
    EmptyBuffer,

    #[error("invalid buffer: {0}")]
    InvalidBuffer(String),

    #[error("interval [{start_s}, {end_s}) s is outside [0, {duration_s}] s or empty")]
    OutOfRange {
        start_s: f64,
        end_s: f64,
        duration_s: f64,
    },

    #[error("sample rate mismatch: {expected} Hz vs {found} Hz")]
    SampleRateMismatch { expected: u32, found: u32 },

    #[error("buffer of {actual_s:.3} s is shorter than the {required_s:.3} s required")]
    BufferTooShort { actual_s: f64, required_s: f64 },

    #[error("stretch ratio {0} outside [0.5, 2.0]")]
    RatioOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("signal level {rms_dbfs:.1} dBFS is below the {gate_dbfs:.1} dBFS gate")]
    LowEnergy { rms_dbfs: f64, gate_dbfs: f64 },

    #[error("{actual_s:.3} s of audio is too short for analysis (need {required_s:.3} s)")]
    TooShort { actual_s: f64, required_s: f64 },

    #[error("no periodicity found in search range")]
    NoPeriodicity,

    #[error("message of {length} bits exceeds carrier capacity of {capacity} bits")]
    MessageTooLong { length: usize, capacity: usize },

    #[error("reference slice is silent ({rms_dbfs:.1} dBFS in its quietest block); tempo reference would be unreliable")]
    ReferenceSilent { rms_dbfs: f64 },
}

impl Error {
    /// Stable identifier for the variant, e.g. `"ReferenceSilent"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidSymbol { .. } => "InvalidSymbol",
            Error::InvalidHex(_) => "InvalidHex",
            Error::NotByteAligned(_) => "NotByteAligned",
            Error::ContainsErasures => "ContainsErasures",
            Error::InsufficientCapacity { .. } => "InsufficientCapacity",
            Error::Io(_) => "IoError",
            Error::UnsupportedFormat(_) => "UnsupportedFormat",
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::EmptyBuffer => "EmptyBuffer",
            Error::InvalidBuffer(_) => "InvalidBuffer",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::SampleRateMismatch { .. } => "SampleRateMismatch",
            Error::BufferTooShort { .. } => "BufferTooShort",
            Error::RatioOutOfRange(_) => "RatioOutOfRange",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::LowEnergy { .. } => "LowEnergy",
            Error::TooShort { .. } => "TooShort",
            Error::NoPeriodicity => "NoPeriodicity",
            Error::MessageTooLong { .. } => "MessageTooLong",
            Error::ReferenceSilent { .. } => "ReferenceSilent",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
