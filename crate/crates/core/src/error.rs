use thiserror::Error;

/// Errors raised by dictionary construction, queries and (de)serialization.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A bit index or bit range lies outside `[0, len)`.
    #[error("index {index} out of range for length {len}")]
    Range { index: usize, len: usize },

    /// A query argument lies outside the domain of the operation
    /// (e.g. `select1(0)` or `select1(i)` with `i > m`).
    #[error("{what}: argument {value} outside valid domain [{min}, {max}]")]
    Domain {
        what: &'static str,
        value: u64,
        min: u64,
        max: u64,
    },

    /// Build parameters rejected for the requested structure.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed builder input, such as unsorted or duplicate positions.
    #[error("invalid input: {0}")]
    Input(String),

    /// An internal structural invariant failed while building.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// A serialized container could not be decoded.
    #[error("malformed container: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, value: u64, min: u64, max: u64) -> Self {
        Error::Domain {
            what,
            value,
            min,
            max,
        }
    }
}
