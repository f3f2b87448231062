use thiserror::Error;

/// Errors raised by the geometric and stochastic routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("atom list is empty")]
    EmptyMeasure,
    #[error("atom direction has zero length")]
    ZeroDirection,
    #[error("atom mass must be positive and finite, got {0}")]
    InvalidMass(f64),
    #[error("support spans a {rank}-dimensional subspace of R^{dim}")]
    DegenerateSupport { rank: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("halfspace intersection has empty interior")]
    EmptyPolytope,
    #[error("body is not o-symmetric")]
    NotSymmetric,
    #[error("Minkowski solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("zero cell still unbounded after {0} radius doublings")]
    UnboundedCell(usize),
    #[error("no interior faces in the observation window")]
    NoInteriorFaces,
    #[error("subspace is not in the support of the flat distribution")]
    NotInSupport,
    #[error("linear program failed: {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, Error>;
