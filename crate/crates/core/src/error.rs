//! Error type shared by every module.

use thiserror::Error;

/// Errors raised by the witness toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A Walsh spectrum whose inverse transform leaves the ±1 class.
    #[error("spectrum does not invert to a ±1 function (value {value} at index {index})")]
    NotASignFunction { index: usize, value: f64 },

    /// A size parameter exceeds the configured exhaustive or dense limit.
    #[error("{what}: n = {n} exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("optimizer did not converge after {sweeps} sweeps (best norm {best_norm})")]
    DidNotConverge { sweeps: usize, best_norm: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// A product state produced |<W>| > 1, which the separable bound forbids.
    #[error("separable bound violated: |<W>| = {value}")]
    BoundViolated { value: f64 },

    #[error("Mermin-Klyshko candidate for n = {n} reached {found}, expected {expected}")]
    ConstructionInvalid { n: usize, found: f64, expected: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotASignFunction { .. }
            | Error::InvalidInput(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Io(_) => 2,
            Error::NumericalFailure(_)
            | Error::BoundViolated { .. }
            | Error::ConstructionInvalid { .. }
            | Error::DidNotConverge { .. } => 3,
            Error::TooLarge { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
