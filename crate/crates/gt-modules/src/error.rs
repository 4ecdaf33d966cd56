use thiserror::Error;

/// Errors produced by exact arithmetic, tableau handling and module actions.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("division by a zero jet")]
    DivisionByZeroJet,

    #[error("jet coefficient sinks below the pole floor {floor} (leading exponent {leading})")]
    PoleDepthExceeded { leading: i64, floor: i64 },

    #[error("jet truncated at order {have}, coefficient {want} requested")]
    InsufficientTruncation { want: i64, have: i64 },

    #[error("invalid position ({row},{col}) for n={n}")]
    InvalidPosition { row: usize, col: usize, n: usize },

    #[error("size mismatch: expected n={expected}, got n={got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid rational literal `{0}`")]
    InvalidRational(String),

    #[error("{0}")]
    InvalidTableau(String),

    #[error("{0}")]
    InvalidSpec(String),

    #[error("generator E({a},{b}) out of range for n={n}")]
    InvalidGenerator { a: usize, b: usize, n: usize },

    #[error("tag incompatible with module spec: {0}")]
    IncompatibleTag(String),

    #[error("pole at a critical point but no path attached (row {row})")]
    PoleWithoutPath { row: usize },

    #[error("irregular coefficient jet in {context}: {jet}")]
    IrregularCoefficient { context: String, jet: String },

    #[error("{0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
