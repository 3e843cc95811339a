//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised while building or evaluating lattice systems.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LrError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid decay function: {0}")]
    InvalidDecay(String),
    #[error("support {support} is not contained in volume {volume}")]
    SupportViolation { support: String, volume: String },
    #[error("Hilbert space dimension {dim} exceeds the cap {cap} (set LRLAB_MAX_DIM to override)")]
    DimensionCap { dim: usize, cap: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not self-adjoint (defect {0:.3e})")]
    NotSelfAdjoint(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is singular")]
    Singular,
    #[error("eigendecomposition failed")]
    Eigen,
    #[error("enumeration over {sites} sites exceeds the guard of {limit}")]
    EnumerationGuard { sites: usize, limit: usize },
    #[error("time grids do not match: {0}")]
    GridMismatch(String),
    #[error("generator appears discontinuous (jump {0:.3e} does not shrink under refinement)")]
    Discontinuous(f64),
    #[error("quadrature did not converge (last change {0:.3e})")]
    Quadrature(f64),
}

pub type Result<T> = std::result::Result<T, LrError>;
