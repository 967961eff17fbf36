use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input: at least one atom is required")]
    Empty,

    #[error("length mismatch: {values} values but {weights} weights")]
    LengthMismatch { values: usize, weights: usize },

    #[error("weight at position {index} must be finite and positive, got {weight}")]
    NonPositiveWeight { index: usize, weight: f64 },

    #[error("value at position {index} is not finite: {value}")]
    NonFiniteValue { index: usize, value: f64 },

    #[error("quantile function is not monotone: q({at_lo}) = {lo} > q({at_hi}) = {hi}")]
    NonMonotoneQuantile { at_lo: f64, lo: f64, at_hi: f64, hi: f64 },

    #[error("atom range [{lo}, {hi}] is invalid for a measure with {len} atoms")]
    InvalidRange { lo: usize, hi: usize, len: usize },

    #[error("exponent p must satisfy 1 <= p < inf, got {0}")]
    InvalidExponent(f64),

    #[error("number of levels k must be at least {min}, got {k}")]
    InvalidLevelCount { k: usize, min: usize },

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),

    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("invalid quantizer: {0}")]
    InvalidQuantizer(String),

    #[error("initial levels must be finite and strictly increasing")]
    InvalidInitLevels,

    #[error("sweep grid is empty")]
    EmptyGrid,

    #[error("too many atoms for exhaustive search: {n} > {max}")]
    TooManyAtoms { n: usize, max: usize },

    #[error("operation requires a finite measure (no infinite-mass complement)")]
    InfiniteMeasure,

    #[error("family is empty")]
    EmptyFamily,

    #[error("family members disagree on the infinite-complement flag")]
    MixedFamily,

    #[error("invalid construction parameters: {0}")]
    InvalidParameters(String),

    #[error("no k <= {max_k} reaches distance {eps}")]
    Unreachable { eps: f64, max_k: usize },

    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
