use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical routines. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sequence must contain at least one value")]
    Empty,
    #[error("value {value} at index {index} is not a finite non-negative number")]
    InvalidValue { index: usize, value: f64 },
    #[error("first weight must be positive, got {0}")]
    NonPositiveLeadingWeight(f64),
    #[error("exponent must be finite, got {0}")]
    NonFiniteExponent(f64),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("constant must be positive and finite, got {0}")]
    NonPositiveConstant(f64),
    #[error("weight at index {index} is zero")]
    ZeroWeight { index: usize },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("horizon {horizon} needs {needed} weights but the profile has {available}")]
    HorizonTooLong {
        horizon: usize,
        needed: usize,
        available: usize,
    },
    #[error("size must be at least 1")]
    ZeroSize,
    #[error("size {requested} exceeds profile length {available}")]
    SizeTooLarge { requested: usize, available: usize },
    #[error("mu must be positive and finite, got {0}")]
    InvalidMu(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("iteration count must be at least 1")]
    ZeroIterations,
    #[error("terminal condition not bracketed below mu = {upper}")]
    BracketFailure { upper: f64 },
    #[error("bisection did not reach tolerance after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("omega recursion left its domain at k = {k}")]
    DivergedTrace { k: usize },
    #[error("trace length {trace} does not match requested size {expected}")]
    TraceLength { trace: usize, expected: usize },
    #[error("term at index {index} is zero")]
    ZeroTerm { index: usize },
    #[error("exponent p must exceed 1, got {0}")]
    InvalidP(f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("r must lie in (0, 1], got {0}")]
    LemmaExponentOutOfRange(f64),
    #[error("x must lie in [0, 1], got {0}")]
    XOutOfRange(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("sign chain g >= h > 0 violated at alpha = {alpha}, x = {x}")]
    ChainViolation { alpha: f64, x: f64 },
}
