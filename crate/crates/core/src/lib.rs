#![no_std]
//! Exact computations with truncated vertex operator algebras, logarithmic
//! modules, three-point conformal blocks on the projective line and
//! logarithmic intertwining operators.

extern crate alloc;

pub mod error;
pub mod linear;

pub use error::{Error, Result};
pub use linear::{Scalar, SparseVec};
pub mod blocks;
pub mod correspondence;
pub mod current;
pub mod heisenberg;
pub mod intertwiner;
pub mod module;
pub mod voa;

#[cfg(test)]
extern crate std;
