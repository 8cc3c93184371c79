//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the mathematical domain of an operation (negative
    /// radius, non-positive time, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A scheme or model parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A configuration-level problem (grid sizing, missing series, bad
    /// ladder, unreadable table, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Non-finite values appeared where finite data is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A quotient or fit could not be formed from the given data.
    #[error("undefined: {0}")]
    Undefined(String),

    /// An operation was asked about a run it does not apply to
    /// (e.g. smoothing bounds on a blow-up trajectory).
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// A bisection bracket whose endpoints do not disagree.
    #[error("bracket error: {0}")]
    Bracket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
