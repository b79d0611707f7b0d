//! Exact diagonalization of fermion-pairing and exciton-condensation model
//! Hamiltonians, with condensate signatures from reduced density matrices.

pub mod classes;
pub mod cli;
pub mod error;
pub mod fock;
pub mod hamiltonians;
pub mod plot;
pub mod rdm;
pub mod sweep;
pub mod wavefunction;

pub use error::{Error, Result};
