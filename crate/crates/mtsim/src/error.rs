//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by this crate.
///
/// The three variants separate caller mistakes from mathematically invalid
/// values and from structurally invalid models, so callers (such as a CLI)
/// can map them to distinct exit codes:
///
/// * [`Error::Usage`] — the call itself is malformed: empty inputs, length
///   mismatches, too few replicates, an empty sweep grid.
/// * [`Error::Domain`] — a numeric argument lies outside the domain of the
///   requested quantity: a probability outside `[0, 1]`, a level outside
///   `(0, 1)`, a correlation outside its range, a non-finite observation.
/// * [`Error::Model`] — a statistical model that cannot be realized, such as
///   a correlation matrix with no Cholesky factorization.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed call: sizes, lengths, or argument combinations.
    #[error("usage: {0}")]
    Usage(String),
    /// Numeric argument outside the mathematical domain.
    #[error("domain: {0}")]
    Domain(String),
    /// Statistically invalid model.
    #[error("model: {0}")]
    Model(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }
}
