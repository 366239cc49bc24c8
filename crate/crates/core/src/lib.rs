//! gaplab: a finite-difference laboratory for the spectral gap of
//! Schrödinger operators -Δ + V on convex domains.
//!
//! The crate discretizes intervals, rectangles and disks, computes the two
//! lowest eigenpairs of -Δ + V under Dirichlet or Neumann conditions, and
//! checks the quantitative gap and ground-state estimates (universal gap
//! bound, the theta/diameter bound, the log-concavity constant, Laplacian
//! and growth estimates of -log u1, and the barrier-based gap bound)
//! against the measured spectrum.

pub mod eigen;
pub mod error;
pub mod fields;
pub mod fmt;
pub mod gap;
pub mod geometry;
pub mod groundstate;
pub mod linalg;
pub mod operator;
pub mod potential;
pub mod report;

pub use error::{Error, Result};
