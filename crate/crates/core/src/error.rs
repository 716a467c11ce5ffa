//! Error type shared by every module in the crate.

use crate::locc::Party;
use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),

    #[error("matrix is not unitary (max residual {0:.3e})")]
    NotUnitary(f64),

    #[error("measurement basis is not orthonormal (max residual {0:.3e})")]
    NotOrthonormalBasis(f64),

    #[error("state is not normalized (norm-squared {0})")]
    NotNormalized(f64),

    #[error("state has zero norm and cannot be normalized")]
    ZeroState,

    #[error("kraus completeness violated (max residual {0:.3e})")]
    IncompleteKrausSet(f64),

    #[error("invalid povm: {0}")]
    InvalidPovm(String),

    #[error("coefficient cross-products are not diagonal (max off-diagonal {0:.3e}); the set is not orthogonal-equivalent within tolerance")]
    NotOrthogonalEquivalent(f64),

    #[error("unknown subsystem `{0}`")]
    UnknownSubsystem(String),

    #[error("duplicate subsystem `{0}`")]
    DuplicateSubsystem(String),

    #[error("{party} cannot act on subsystem `{subsystem}` owned by {owner}")]
    LocalityViolation {
        party: Party,
        subsystem: String,
        owner: Party,
    },

    #[error("{party} cannot use outcome label `{label}`: the value was never sent to them")]
    ClassicalLocalityViolation { party: Party, label: String },

    #[error("unknown outcome label `{0}`")]
    UnknownLabel(String),

    #[error("label `{0}` was already recorded by an earlier measurement")]
    DuplicateLabel(String),

    #[error("operation requires {0} mode")]
    WrongMode(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
}
