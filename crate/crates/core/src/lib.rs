//! Finite-dimensional desk checks for scattering theory in semifinite von
//! Neumann algebras: spectral calculus, Kato-smoothness functionals,
//! generalized wave operators and a Kato–Rosenblum verifier.
//!
//! Every ε → 0 or t → ∞ limit is evaluated on a schedule that stays coarser
//! than the local eigenvalue spacing (the mesh-regularized regime), with
//! stabilization diagnostics instead of literal limits.

pub mod error;
pub mod io;
pub mod linalg;
pub mod models;
pub mod operator_core;
pub mod rng;
pub mod scenario;
pub mod smoothness;
pub mod trace_space;
pub mod wave;

pub use error::{Error, Result};
