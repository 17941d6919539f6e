//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`Result`]. Verification
//! routines distinguish *errors* (bad parameters, unknown elements, blown
//! budgets) from *verified failures* (a well-formed object that fails a
//! mathematical check); the latter are reported through result structs, not
//! through this enum.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All error conditions surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameters fail a structural precondition (e.g. `t > n`, symbol out of
    /// range, unsorted block).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An element key does not belong to the instance's ground set.
    #[error("element {0} is not in the ground set")]
    UnknownElement(String),

    /// An exhaustive operation would enumerate more elements than allowed.
    #[error("enumeration budget exceeded: need {needed} elements/points, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    /// A sample size `N` outside `1..=|B|`.
    #[error("N = {n} is outside 1..={max}")]
    NOutOfRange { n: u64, max: u64 },

    /// The expected count vector `(N/|B|)·φ(B)` is not integral, so no subset
    /// can match it exactly.
    #[error("divisibility violated: (N/|B|)·φ(B) is not integral at index {index} ({detail})")]
    Divisibility { index: usize, detail: String },

    /// An operation received an empty set where a nonempty one is required.
    #[error("{0} must be nonempty")]
    EmptySet(&'static str),

    /// Vector or matrix dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Isolation vectors are not constructible for this instance family.
    #[error("isolation families are not available for {family} instances{note}")]
    IsolationUnsupported { family: &'static str, note: String },

    /// A numeric domain precondition of an analysis routine is violated.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// A structured text file failed to parse.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Underlying I/O failure while reading or writing object files.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Shorthand used by parameter validators.
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    /// Shorthand for file-format errors with a position.
    pub(crate) fn parse(path: &str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }
}
