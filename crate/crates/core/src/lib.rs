//! Density matrix embedding with sample-based subspace diagonalization.
//!
//! The pipeline runs restricted Hartree–Fock on an integral bundle,
//! orthogonalizes into atom-assignable orbitals, builds one impurity per
//! fragment from the mean-field density, solves every impurity with either
//! exact diagonalization or the sampled-subspace solver, and tunes a global
//! chemical potential until the fragment electron counts add up.

pub mod dmet;
pub mod error;
pub mod integrals;
pub mod linalg;
pub mod meanfield;
pub mod par;
pub mod pipeline;
pub mod sampling;
pub mod sqd;

pub use error::{EmberError, ErrorKind, Result};
