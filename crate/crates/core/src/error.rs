use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An enumeration guard was hit. `limit` is the largest accepted value.
    #[error("{what} = {got} exceeds the enumeration guard (limit {limit})")]
    GuardExceeded {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("matrix is singular over F_2")]
    SingularMatrix,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("first marginal is not uniform: P(bit = 1) = {0}")]
    NonUniformBit(f64),

    #[error("configuration error: {0}")]
    Config(String),

    /// A computed instance contradicts an inequality that is a theorem.
    #[error("theorem-backed check `{check}` failed: {detail}")]
    TheoremViolation { check: &'static str, detail: String },
}

impl Error {
    pub(crate) fn guard(what: &'static str, limit: usize, got: usize) -> Self {
        Error::GuardExceeded { what, limit, got }
    }
}
