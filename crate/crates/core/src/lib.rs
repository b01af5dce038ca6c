//! Sinkhorn scaling of positive matrices: the alternate scaling iteration,
//! closed-form limits for structured families, classification of two-value
//! symmetric 3×3 matrices, and exact rational traces.

pub mod a7;
pub mod classify;
pub mod closed_forms;
pub mod error;
pub mod exact;
pub mod io;
pub mod matrix;
pub mod polynomial;
pub mod scaling;

pub use a7::{a7_limit, A7Solution};
pub use classify::{classified_limit, classify, classify_exact, limit_of, ClassLabel, ClassifiedLimit};
pub use closed_forms::{canonical_limit, canonical_matrix, mbn_limit, CanonicalLimit, Label, MbnLimit, MbnParams};
pub use error::{Error, Result};
pub use exact::RationalMatrix;
pub use io::MatrixLiteral;
pub use matrix::{DiagScaling, Permutation, PositiveMatrix};
pub use num_rational::BigRational;
pub use scaling::{sinkhorn, target_sinkhorn, Provenance, ScalingOrder, SinkhornOptions, SinkhornResult};
