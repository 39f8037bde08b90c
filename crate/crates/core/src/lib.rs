//! Positive dependence along DAG orderings for Gaussian models.
//!
//! Core pieces: the `K = U D Uᵀ` factorization and its use for CIS checks
//! ([`positivity`]), recovery of a CIS ordering from a population model or
//! a sample ([`recovery`]), maximum likelihood under sign and support
//! constraints ([`mle`]), DAG equivalence classes ([`dag`]) and seeded
//! simulation ([`simulate`]).
//!
//! Variables are 0-based throughout the library. Orderings are written in
//! one-line notation, `σ = (σ(1), …, σ(m))`; their `Display` form is 1-based.

pub mod dag;
pub mod data;
pub mod error;
pub mod lstsq;
pub mod matrix;
pub mod mle;
pub mod model;
pub mod nnls;
pub mod ordering;
pub mod positivity;
pub mod recovery;
pub mod simulate;

pub use dag::{Dag, VStructure};
pub use data::Dataset;
pub use error::{Error, Result};
pub use matrix::{PosDiagonal, SymMatrix, Tolerance, UnitUpperTriangular};
pub use mle::{MleFit, RowConstraint};
pub use model::{CovariancePair, SemParams};
pub use ordering::Ordering;
pub use positivity::PositivityReport;
pub use recovery::{EpsilonSchedule, RecoveryConfig, TieBreak};
pub use simulate::SimSpec;
