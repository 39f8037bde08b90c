use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not symmetric at ({}, {})", .row + 1, .col + 1)]
    NotSymmetric { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the enumeration cap of {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph contains a directed cycle")]
    Cyclic,

    #[error("no index passes the threshold at step {step} (best margin {best_margin:.6})")]
    NoCandidate { step: usize, best_margin: f64 },

    #[error("maximum likelihood estimate does not exist: x{} is fitted exactly", .variable + 1)]
    MleDoesNotExist { variable: usize },

    #[error("active-set solver did not terminate after {iterations} iterations")]
    MaxIterations { iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
