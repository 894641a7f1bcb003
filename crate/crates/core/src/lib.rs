//! Few-body systems on a line read as one point in Euclidean space.
//!
//! The crate builds the Calogero/Wolfes/TTW, Evans and Platonic-symmetric
//! Hamiltonians, their polynomial first integrals (including the degree-`n`
//! ladder integral), the finite symmetry groups that act on them, and the
//! symplectic integrators and Poincaré sections used to check conservation
//! numerically.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coords;
pub mod dynamics;
pub mod error;
pub mod extensions;
pub mod hamiltonian;
pub mod integrals;
pub mod jet;
pub mod potentials;
pub mod real;
pub mod sampling;
pub mod symmetry;

pub use error::{Error, Result};
