//! Grid-based harmonic analysis workbench: BMO-type norms, Muckenhoupt weights,
//! homogeneous singular and fractional integrals, their commutators, and the
//! constructive lower bound of a BMO-type norm by the commutator norm.
//!
//! Everything lives on uniform grids of cell centers over axis-parallel cubes
//! in dimension one or two. All operations are pure functions.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commutators;
pub mod embeddings;
mod error;
pub mod geometry;
pub mod necessity;
pub mod operators;
pub mod spaces;
pub mod weights;

pub use error::{Error, Result};
