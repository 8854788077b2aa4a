use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("frequency grid must be non-empty and strictly increasing")]
    BadFrequencyGrid,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("insufficient coverage: {0}")]
    InsufficientCoverage(String),

    #[error("matched-weighting gain unbounded: time-averaged projection is zero")]
    UnboundedMatchedGain,

    #[error("sampling interval {dt} s aliases the sidereal baseband (limit {limit} s)")]
    Aliasing { dt: f64, limit: f64 },

    #[error("record of {requested} samples exceeds the limit of {limit}")]
    TooManySamples { requested: f64, limit: usize },

    #[error("center frequency {f_center} Hz with bandwidth {bandwidth} Hz is outside the representable band (Nyquist {nyquist} Hz)")]
    OutOfBand { f_center: f64, bandwidth: f64, nyquist: f64 },

    #[error("segment of {segment} samples is longer than the record of {record} samples")]
    SegmentTooLong { segment: usize, record: usize },

    #[error("all weights are zero")]
    ZeroWeights,

    #[error("time stamps must be strictly increasing")]
    NonMonotoneTime,

    #[error("empty mass grid")]
    EmptyGrid,

    #[error("non-physical result: {0}")]
    NonPhysical(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
