//! Exact-arithmetic lattices for the hungry quotient-difference (dhQD) family
//! of discrete integrable systems.
//!
//! The crate builds striped moment determinants and their bi-orthogonal
//! polynomial families, derives the lattice variables of the dhQD algorithm
//! and the QD-type dhLV-related system, assembles both spectral (Lax) pairs,
//! and machine-verifies every identity the schemes satisfy -- all in exact
//! rational arithmetic. A parallel elliptic-basis track covers the hungry
//! higher-analogue discrete-time Toda (hHADT) equation and the hungry
//! quotient-quotient-difference (hQQD) scheme together with their block Lax
//! pairs.
//!
//! Everything numeric is generic over [`scalar::Scalar`], instantiated either
//! with arbitrary-precision rationals ([`Rat`], the default for verification)
//! or with `f64` (used by the eigenvalue demo). A computation never mixes the
//! two: the scalar type is fixed per lattice.

pub mod elliptic;
pub mod error;
pub mod gram;
pub mod laurent;
pub mod matrix;
pub mod measure;
pub mod qd;
pub mod report;
pub mod scalar;
pub mod suites;

pub mod eigen;

pub use error::Error;
pub use scalar::Scalar;

/// Exact scalar: arbitrary-precision rational, always in lowest terms.
pub type Rat = num_rational::BigRational;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
