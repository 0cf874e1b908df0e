//! Exact computation of exotic de Rham homology on finite-dimensional models.

pub mod algebra;
pub mod cli;
pub mod dynamics;
pub mod equivariant;
pub mod error;
pub mod exact_sequence;
pub mod flat;
pub mod fock;
pub mod model;
pub mod problem;
pub mod spectral;

pub use error::{Error, Result};
