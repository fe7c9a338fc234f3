use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transform length {len} is not a power of two")]
    NotPowerOfTwo { len: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("variance must be non-negative, got {0}")]
    NegativeVariance(f64),

    #[error("unsupported constellation order {0} (expected 4, 16, 64 or 256)")]
    UnsupportedOrder(u32),

    #[error("bit count {bits} is not a multiple of {bits_per_symbol}")]
    BitCount { bits: usize, bits_per_symbol: usize },

    #[error("subcarrier index {0} is outside the data set")]
    InvalidSubcarrier(i64),

    #[error("invalid OFDM configuration: {0}")]
    InvalidOfdm(&'static str),

    #[error("channel column for subcarrier {subcarrier} is all zero")]
    SingularChannel { subcarrier: usize },

    #[error("equalizer denominator vanishes on subcarrier {subcarrier}")]
    DeepFade { subcarrier: usize },

    #[error("propagation distance must be positive")]
    ZeroDistance,

    #[error("input power is zero, gain is undefined")]
    ZeroInputPower,

    #[error("CSI error parameter {0} outside [0, 1]")]
    CsiEpsilon(f64),

    #[error("saturation power must be positive, got {0}")]
    SaturationPower(f64),

    #[error("{0}")]
    Invalid(&'static str),
}

impl Error {
    /// True for failures caused by the numbers of one realization (deep
    /// fades, singular channels) as opposed to a malformed setup.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularChannel { .. } | Error::DeepFade { .. } | Error::ZeroInputPower
        )
    }
}
