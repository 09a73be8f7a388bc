// SPDX-License-Identifier: Apache-2.0

//! Error type shared by every module of the core crate.

/// Failure modes of the numerical operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// The requested variant or parameter combination is not provided.
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    /// An iterative or adaptive method stopped before reaching its tolerance.
    #[error("accuracy target missed: best estimate {estimate:e}, error estimate {error:e}")]
    Accuracy {
        /// Best available estimate.
        estimate: f64,
        /// Error estimate attached to it.
        error: f64,
    },
    /// A bracketing search found no sign change.
    #[error("no sign change found: {0}")]
    NotFound(&'static str),
    /// A documented precondition does not hold for the supplied data.
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
}

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
