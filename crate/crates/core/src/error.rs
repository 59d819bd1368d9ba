use thiserror::Error;

/// Errors raised by the density, selection, and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("support mismatch: expected {expected} entries, found {found}")]
    SupportMismatch { expected: usize, found: usize },

    #[error("invalid pair: cannot compare candidate {0} with itself")]
    InvalidPair(usize),

    #[error("index {index} out of range for family of size {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("family is empty")]
    EmptyFamily,

    #[error("vector is not a distribution (sum {sum}, min entry {min})")]
    NotNormalized { sum: f64, min: f64 },

    #[error("non-finite mass entry at atom {0}")]
    NonFinite(usize),

    #[error("degenerate pair: candidates are at L1 distance zero")]
    DegeneratePair,

    #[error("family size {found} not supported here (expected {expected})")]
    FamilySize { expected: usize, found: usize },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("brute-force capacity exceeded: {what} is {size}, limit {limit}")]
    Capacity {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),

    #[error("unknown atom label {0:?}")]
    UnknownAtom(String),
}

pub type Result<T> = std::result::Result<T, Error>;
