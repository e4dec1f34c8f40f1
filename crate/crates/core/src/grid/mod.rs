//! Grid data model, case files, and DC network matrices.

mod case;
pub mod fixtures;
mod matrices;

pub use case::{
    case_hash, parse_case, Bus, Generator, Interval, Line, SigmaRange, SystemCase, WindUnit,
    DEFAULT_MU_FRACTION, DEFAULT_SIGMA_FRACTION,
};
pub use matrices::{build_matrices, GridMatrices};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid case: {0}")]
    Validation(String),
    #[error("reduced susceptance matrix is singular")]
    SingularMatrix,
}
