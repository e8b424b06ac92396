//! Two 11-node nonconforming triangular prism elements.
//!
//! The first element ([`element_h1`]) has vertex values and face-centroid values as
//! degrees of freedom and is used for the Poisson problem. The second element
//! ([`element_h2`]) replaces the face-centroid values by normal derivatives and is
//! used for the biharmonic problem with clamped boundary conditions. Both shape
//! spaces are `P2` plus one cubic function.
//!
//! The pipeline is
//!
//! - [`mesh`]: structured prism meshes of the unit cube,
//! - [`frame`]: per-cell affine coordinate functions,
//! - [`lambda_poly`]: shape functions as polynomials in those coordinates,
//! - [`element_h1`], [`element_h2`]: nodal bases and interpolants,
//! - [`quadrature`]: prism and face rules,
//! - [`assembly`]: DoF maps and global stiffness systems,
//! - [`solver`], [`norms`]: SPD solves and broken Sobolev error norms,
//! - [`problems`], [`study`], [`verify`]: manufactured solutions, convergence
//!   studies and the identity checks driven by the command-line tool.

pub mod assembly;
pub mod element_h1;
pub mod element_h2;
pub mod frame;
pub mod lambda_poly;
pub mod mesh;
pub mod norms;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod study;
pub mod verify;

pub use nalgebra::{Point3, Vector3};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameter: {0}")]
    InvalidMeshParameter(String),
    #[error("degenerate cell {cell}: {reason}")]
    DegenerateCell { cell: usize, reason: String },
    #[error("unsupported quadrature degree {0} (supported: 1..=10)")]
    UnsupportedDegree(usize),
    #[error("element kind {kind:?} cannot discretize a problem of order {order}")]
    ElementOrderMismatch { kind: assembly::ElementKind, order: usize },
    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    CgNotConverged { iterations: usize, residual: f64 },
    #[error("sparse Cholesky factorization failed: {0}")]
    Factorization(String),
    #[error("invalid convergence data: {0}")]
    InvalidErrors(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed mesh dump at line {line}: {reason}")]
    MeshDump { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
