use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("non-finite matrix entry at Fourier indices ({row}, {col})")]
    NonFinite { row: i64, col: i64 },

    #[error("idler frequency {0} THz is outside the model validity range (0, 2] THz; the azimuthal approximation breaks down near 2 THz")]
    OutOfValidity(f64),

    #[error("grid size {n} is too small for the mode bandwidth: need at least {min}")]
    GridTooSmall { n: usize, min: usize },

    #[error("gain spectrum has {gains} entries but the decomposition has {modes} modes")]
    Misaligned { gains: usize, modes: usize },

    #[error("mode number is undefined for an all-zero spectrum")]
    ZeroSpectrum,

    #[error("mode index {index} out of range ({count} modes)")]
    ModeIndex { index: usize, count: usize },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
