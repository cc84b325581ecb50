//! Gaussian wave packet dynamics as Hamiltonian flow on the symplectic frame
//! bundle of `T*R^n`, together with its reduction to the Siegel upper half
//! space and an independent Schrödinger-equation oracle.

// Negated comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branch;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod reduction;
pub mod symplectic;
pub mod verify;
pub mod wavepacket;

pub use error::{Error, Result};
