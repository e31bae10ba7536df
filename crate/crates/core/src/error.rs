use thiserror::Error;

/// Failure categories for every fallible operation in the crate.
///
/// The CLI maps these onto stable exit codes: `Domain` and `Precision` are
/// usage errors (exit 2), `Range` and `Resource` are range/resource errors
/// (exit 3).
#[derive(Debug, Error)]
pub enum Error {
    /// The input is outside the operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The input is valid in shape but beyond the computed or configured range.
    #[error("range error: {0}")]
    Range(String),

    /// Honoring the request would exceed a configured resource cap.
    #[error("resource error: {0}")]
    Resource(String),

    /// The certified radius at this input would be too large to be useful.
    #[error("precision error: {0}")]
    Precision(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
