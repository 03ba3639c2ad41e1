//! Exact scalars and linear algebra over the rationals.

mod matrix;
mod scalar;
mod vector;

pub use matrix::{DenseMatrix, RowReducer, SparseMatrix};
pub use scalar::{binomial, binomial_scalar, factorial, ParseScalarError, Scalar};
pub use vector::SparseVec;
