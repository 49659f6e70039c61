//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation
    /// (e.g. a Dicke index above 2S, a non-positive occupation number).
    #[error("domain error: {0}")]
    Domain(String),

    /// Time integration did not meet its accuracy contract.
    #[error("integration failure: {0}")]
    Integration(String),

    /// A Fock-space cutoff is inconsistent or leaves too much tail mass.
    #[error("cutoff error: {0}")]
    Cutoff(String),

    /// A requested dense problem is too large to be sensible.
    #[error("size error: {0}")]
    TooLarge(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn integration(msg: impl Into<String>) -> Self {
        Error::Integration(msg.into())
    }
    pub fn cutoff(msg: impl Into<String>) -> Self {
        Error::Cutoff(msg.into())
    }
    pub fn too_large(msg: impl Into<String>) -> Self {
        Error::TooLarge(msg.into())
    }
}
