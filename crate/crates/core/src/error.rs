//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("potential values exceed overflow threshold 1e12 (max |V| = {max_abs:e})")]
    PotentialOverflow { max_abs: f64 },

    #[error("node count mismatch: grid has {expected} nodes, field has {got}")]
    NodeCountMismatch { expected: usize, got: usize },

    #[error("angular resolution {got} too coarse for a Neumann seam (need >= 8)")]
    AngularTooCoarse { got: usize },

    #[error("vector length mismatch: operator is {expected}x{expected}, got length {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("dense oracle limited to N <= 2000, got N = {n}")]
    OracleTooLarge { n: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residuals {r1:e}, {r2:e})")]
    NoConvergence { iterations: usize, r1: f64, r2: f64 },

    #[error("interior mask is empty (delta too large or grid too coarse)")]
    EmptyMask,

    #[error("operation requires a disk grid")]
    NotADisk,

    #[error("operation requires {0} boundary conditions")]
    WrongBoundaryCondition(&'static str),

    #[error("hypothesis not satisfied: {0}")]
    HypothesisFailed(String),

    #[error("weighted Rayleigh quotient: zero denominator after projection")]
    ZeroDenominator,

    #[error("beta = {0} outside the admissible interval (0, sqrt(2))")]
    BetaOutOfDomain(f64),

    #[error("boundary extrapolation unstable at node {node}: extrapolants disagree by {disagreement:e}")]
    ExtrapolationUnstable { node: usize, disagreement: f64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
