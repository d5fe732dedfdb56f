//! Maasch–Saltzman glacial-cycle models and their bifurcation structure.
//!
//! - [`models`]: the model family and parameter maps
//! - [`integrate`]: ODE integration, x̄ estimation, limit cycles, attractor census
//! - [`equilibria`]: equilibria, stability, parameter-plane regions, Hopf analysis
//! - [`melnikov`]: Hamiltonian level curves and Melnikov persistence analysis
//! - [`bifurcation`]: Hopf, homoclinic and cycle-fold curves, x̄ sweeps
//! - [`cli`]: the `msclimate` command-line front end

pub mod bifurcation;
pub mod cli;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod melnikov;
pub mod models;

pub use error::{Error, Result};
