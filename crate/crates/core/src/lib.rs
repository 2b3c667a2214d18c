//! Dynamically generated planar code Hamiltonians.
//!
//! A free qubit lattice with a weak cavity coupling is driven by periodic
//! single-qubit rotations and Ising phase gates so that its average Hamiltonian
//! is the planar code. The crate covers the Pauli algebra, the lattice, the
//! pulse-sequence compiler, symbolic average Hamiltonians, exact pulsed dynamics
//! and the closed-form fidelity analysis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dense;
pub mod dynamics;
pub mod hamiltonian;
pub mod lattice;
pub mod pauli;
pub mod sequences;

pub use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid layer: {0}")]
    InvalidLayer(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("dimension {dim} exceeds the dense cap {cap}")]
    DenseCap { dim: usize, cap: usize },
    #[error("time {t} is not a multiple of the period {period}")]
    NotStroboscopic { t: f64, period: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
