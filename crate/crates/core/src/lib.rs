//! Vanishing-discount selection for Hamilton-Jacobi equations on the circle.
//!
//! The crate solves discounted problems `eps u + H(x, P + Du) = 0` with a monotone
//! Godunov scheme, estimates effective Hamiltonians, builds approximate Mather
//! measures through a discrete adjoint, and checks the selected limit against
//! explicit sub- and supersolution constructions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adjoint;
pub mod cli;
pub mod cyclic;
pub mod discount;
pub mod ergodic;
pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod potential;
pub mod scheme;
pub mod solver;
pub mod subsolution;
pub mod verify;

pub use discount::{GeneralizedDiscount, Shape};
pub use error::{Error, Result};
pub use grid::{GridFunction, TorusGrid};
pub use hamiltonian::{HamiltonianModel, Polynomial, Side};
pub use potential::Potential;
pub use scheme::Scheme;
pub use solver::{SolveResult, SolverConfig};
