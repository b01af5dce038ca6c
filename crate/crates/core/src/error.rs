use thiserror::Error;

use crate::scaling::SinkhornResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Row and column are 1-based, matching how matrices are written by hand.
    #[error("entry ({row},{col}) not positive: {value}")]
    NonPositiveEntry { row: usize, col: usize, value: String },

    #[error("matrix must have at least one row and one column")]
    Empty,

    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },

    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric at ({row},{col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("target sums differ: rows sum to {row_total}, columns sum to {col_total}")]
    TargetSumMismatch { row_total: f64, col_total: f64 },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("alternate scaling did not converge within {} passes (residual {:e})", .partial.iterations, .partial.residual)]
    NotConverged { partial: Box<SinkhornResult> },

    #[error("matrix is not a symmetric 3x3 matrix with exactly two distinct entries")]
    NotTwoValue,

    #[error("no canonical class matches the entry pattern")]
    ClassificationFailed,

    #[error("polynomial is identically zero")]
    ZeroPolynomial,

    #[error("root bracketing failed near {0}")]
    BracketingFailure(f64),

    #[error("{0} positive solutions of the scaling equations were found, expected exactly one")]
    MultipleValidTriples(usize),

    #[error("denominator grew to {bits} bits, above the limit of {limit} bits")]
    ResourceLimit { bits: u64, limit: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}
