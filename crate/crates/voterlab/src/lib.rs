//! Simulation-and-verification laboratory for occupation-time central limit
//! theorems of the voter model on Z^d with spatially inhomogeneous product
//! initial laws.
//!
//! The crate has three legs that are checked against each other:
//! - an exact event-driven forward simulation of the voter model on a torus
//!   ([`forward`]),
//! - coalescing-random-walk duality estimators that reach large N without
//!   forward simulation ([`dual`]),
//! - closed-form / quadrature evaluation of the limiting Gaussian objects
//!   ([`limits`]), built on lattice random-walk kernels ([`lattice`]).
//!
//! The [`harness`] module orchestrates seeded experiments, trend checks
//! against the analytic targets and report emission.

pub mod bessel;
pub mod dual;
pub mod error;
pub mod forward;
pub mod harness;
pub mod lattice;
pub mod limits;
pub mod profile;
pub mod quad;
pub mod streams;

pub use error::{Result, VoterlabError};
