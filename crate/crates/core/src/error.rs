use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent must satisfy 1 <= p <= inf, got {0}")]
    InvalidExponent(f64),

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vectors live in different spaces")]
    SpaceMismatch,

    #[error("the zero vector has no norming functional")]
    ZeroVector,

    #[error("the zero operator has no norm attainment structure")]
    ZeroOperator,

    #[error("epsilon must lie in [0, 1), got {0}")]
    InvalidEpsilon(f64),

    #[error("delta must lie in (0, {norm}), got {delta}")]
    InvalidDelta { delta: f64, norm: f64 },

    #[error("matrix shape {rows}x{cols} does not match ({expected_rows}x{expected_cols})")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },

    #[error("norm attainment set is not a single +/- pair ({pairs} pairs found{})", if *.near_degenerate { ", near-degenerate" } else { "" })]
    NotSingletonPair { pairs: usize, near_degenerate: bool },

    #[error("operation requires p = r = 2, got p = {p}, r = {r}")]
    NotHilbert { p: f64, r: f64 },

    #[error("sequence is not norming: gap {gap} exceeds {threshold}")]
    NotNorming { gap: f64, threshold: f64 },

    #[error("operator is not smooth; {0}")]
    NotSmooth(String),

    #[error("dimension {dim} is too large for the brute-force oracle (max {max})")]
    OracleTooLarge { dim: usize, max: usize },

    #[error("symbol parse error at byte {pos}: {msg}")]
    SymbolParse { pos: usize, msg: String },

    #[error("symbol is unbounded: {0}")]
    UnboundedSymbol(String),

    #[error("symbol outside the supported grammar: {0}")]
    UnsupportedSymbol(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
