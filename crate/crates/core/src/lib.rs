//! Exact diagonalization of the two-level Bose-Hubbard model for `N` bosons in a
//! tilted double well, with cat-state analysis, tunneling-resonance detection and a
//! single-particle band calculation that derives the model energies from a lattice
//! potential.

pub mod analysis;
pub mod bandcalc;
pub mod cli;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod spectrum;

pub use error::{Error, Result};
pub use fock::{Basis, FockState, Level, Levels, Well};
pub use hamiltonian::{build, EnergyUnit, ModelParams, SparseHamiltonian};
pub use spectrum::{solve_dense, solve_lowest, Spectrum};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats a float with 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}
