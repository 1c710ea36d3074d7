use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |H - H*| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("dimension mismatch: {context} ({left} vs {right})")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },
    #[error("entry count {got} does not match shape {rows}x{cols}")]
    BadShape {
        rows: usize,
        cols: usize,
        got: usize,
    },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("band radius {radius} exceeds the admissible limit {limit}")]
    BandViolation { radius: f64, limit: f64 },
    #[error("spectrum reaches |x| = {extent}, sinc grid covers |x| <= {covered}; need truncation >= {required}")]
    SpectrumNotCovered {
        extent: f64,
        covered: f64,
        required: usize,
    },
    #[error("representation shape {got} cannot be used here (expected {expected})")]
    WrongShape {
        got: &'static str,
        expected: &'static str,
    },
    #[error("matrix is not a contraction: operator norm {norm}")]
    NotContraction { norm: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
