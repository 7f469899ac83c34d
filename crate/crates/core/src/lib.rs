//! Radial k-Hessian equations `S_k(D²u) = λρ(|x|)(1-u)^q` and the quadratic
//! Lotka-Volterra system they reduce to under the logarithmic change of variables.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches files,
//! threads or the command line lives in the `khess` companion crate.
#![no_std]
// `!(x > 0.0)` is the NaN-rejecting form used throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bifurcation;
pub mod classify;
mod error;
pub mod exponents;
pub mod integrate;
pub mod quad;
pub mod solver;
pub mod transform;
pub mod weights;

pub use error::{Error, Result};
pub use exponents::ProblemParams;
pub use solver::{IntegratorConfig, Orbit, RadialSolution};
pub use weights::WeightSpec;
