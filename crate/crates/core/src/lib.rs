//! Numerical laboratory for Schatten p-norm inequalities of positive
//! 2x2 block matrices and for maximal output p-norms of quantum channels.
//!
//! - [`schatten`]: Hermitian eigendecomposition, singular values, matrix powers and norms.
//! - [`blockmat`]: positive and general 2x2 block matrices, samplers and norm summaries.
//! - [`inequality`]: signed-margin checkers and the fuzzing driver.
//! - [`channel`]: Kraus channels, maximal output p-norm and minimal output entropy.

pub mod blockmat;
pub mod channel;
pub mod eigen;
pub mod error;
pub mod inequality;
pub mod matrix;
pub mod random;
pub mod schatten;
pub mod tolerance;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use schatten::{
    conjugate_exponent, hermitian_eig, psd_power, schatten_norm, trace_abs_power, HermitianMatrix, PsdMatrix,
    SchattenExponent, Spectrum,
};
