//! Cavity-modified Rydberg pair potentials and Ramsey dephasing.
//!
//! A microwave cavity detuned from a Rydberg `f ↔ d` transition reshapes the
//! van der Waals interaction between atoms prepared in `|d⟩`: photon exchange
//! through the mode adds a distance-independent all-to-all term (`C0`) and a
//! cavity-induced dipole-dipole term (`C3/r³`) on top of the free-space
//! `C6/r⁶` tail. This crate computes those coefficients from first-principles
//! inputs, validates the perturbative derivation against exact
//! diagonalization of the two-excitation pair Hamiltonian, and predicts the
//! Ramsey contrast and phase of an N-atom ensemble by exact pair products,
//! Monte-Carlo averaging over atom positions, and an analytic continuum
//! limit built on Fresnel and (modified) trigonometric integrals.
//!
//! Internal unit convention: lengths in μm, times in μs, angular frequencies
//! in rad/μs. Conversions from ordinary-frequency inputs (Hz…THz) happen at
//! the boundary, in [`params::units`] and the CLI config layer, and nowhere
//! else.

pub mod cli;
pub mod pairham;
pub mod params;
pub mod potential;
pub mod quad;
pub mod ramsey;
pub mod rng;
pub mod specfun;

use thiserror::Error;

/// Unified error type; the CLI maps variants onto process exit codes
/// (config → 2, domain/numerical → 3, I/O → 1).
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent configuration (bad units, missing fields,
    /// invalid parameter combinations supplied by the user).
    #[error("config error: {0}")]
    Config(String),
    /// Input outside an operation's mathematical domain (r ≤ 0, Ci at x ≤ 0,
    /// negative mode volume, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Numerical failure: non-convergence, degeneracy, contract violations
    /// detected at runtime.
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
