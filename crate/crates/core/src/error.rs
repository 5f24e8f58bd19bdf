use alloc::string::String;

/// Errors raised by evaluators, checks and constructions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The brute-force oracle refuses instances with too many atom tuples.
    #[error("atom-tuple count {tuples} exceeds the oracle cap {cap}")]
    TupleCapExceeded { tuples: u128, cap: u128 },

    #[error("block dimension {dim} exceeds the cap {cap}")]
    BlockCapExceeded { dim: usize, cap: usize },

    /// A theorem hypothesis on the exponents does not hold.
    #[error("exponent out of range: {0}")]
    ExponentRange(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// True for the resource-cap refusals (as opposed to bad input).
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::TupleCapExceeded { .. } | Error::BlockCapExceeded { .. })
    }
}
