//! Linear algebra and linear programming.

pub mod dense;
mod lu;
pub mod problem;
pub mod simplex;
pub mod vertex;

pub use dense::{lu_solve, DenseMatrix};
pub use problem::{Basis, LpProblem, LpSolution, LpStatus, SparseRow, INFINITE_BOUND};
pub use simplex::{solve_lp, solve_lp_with, SimplexEngine, SimplexOptions};
pub use vertex::{vertex_enumeration, VertexOutcome};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("variable {var} has invalid bounds [{lo}, {hi}]")]
    InvalidBounds { var: usize, lo: f64, hi: f64 },
    #[error("singular matrix (pivot {pivot} below threshold)")]
    SingularMatrix { pivot: usize },
    #[error("problem too large: {0}")]
    TooLarge(String),
}
