use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ambient mismatch: {0}")]
    AmbientMismatch(String),

    #[error("truncation exceeded: requested order {requested}, series supports at most {available}")]
    TruncationExceeded { requested: usize, available: usize },

    #[error("truncation exceeded: |xi| = {radius} lies beyond the series validity radius {limit}")]
    OutsideValidity { radius: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("insufficient table width: need {needed} columns, have {available}")]
    InsufficientTableWidth { needed: usize, available: usize },

    #[error("recovery failed: weight not point-supported at given bounds (relative residual {residual:.3e})")]
    RecoveryFailed { residual: f64 },

    #[error("evaluation point lies within {distance:.3e} of the support")]
    NearSupport { distance: f64 },

    #[error("polynomial is not holomorphic (contains conjugate variables)")]
    NonHolomorphic,

    #[error("unsupported weight family for {0}")]
    Unsupported(&'static str),

    #[error("bandwidth insufficient: tail bound {tail:.3e} at bandwidth {bandwidth} for R = {scale}")]
    BandwidthInsufficient { tail: f64, bandwidth: f64, scale: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
