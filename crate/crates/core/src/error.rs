//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpinError {
    /// S or I is not a non-negative half-integer.
    #[error("invalid spin quantum number: {0}")]
    InvalidSpin(String),

    /// A parameter violates a type invariant (non-finite field, empty grid, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation received a matrix that does not satisfy its contract.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A closed-form expression was asked for outside its regime of validity.
    #[error("unsupported formula: {0}")]
    UnsupportedFormula(String),

    /// Positive quantity required.
    #[error("domain error: {0}")]
    DomainError(String),

    /// Hilbert-space dimension above the hard cap.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// Van Vleck sum hit a quasi-degenerate pair with a nonzero moment
    /// matrix element, with degenerate-block handling disabled.
    #[error(
        "singular van Vleck term between levels {i} and {j}: gap {gap_kelvin} K, |mu| {moment_mub} mu_B"
    )]
    SingularTerm { i: usize, j: usize, gap_kelvin: f64, moment_mub: f64 },

    /// Fit could not produce a result (all starts failed, no data, ...).
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// Malformed input file.
    #[error("parse error: {0}")]
    ParseError(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SpinError>;
