//! Numerical tolerances.
//!
//! The mathematics is exact; every slack used to compare floating-point
//! results lives here so it can be audited and overridden in one place.

/// Hermitian symmetry check, relative to `1 + max|a_ij|`.
pub const HERMITIAN: f64 = 1e-12;

/// Smallest admissible eigenvalue of a PSD matrix, relative to `max(1, ||A||_op)`.
pub const PSD: f64 = 1e-10;

/// Eigendecomposition reconstruction error, relative to `1 + ||A||_F`.
pub const RECONSTRUCTION: f64 = 1e-10;

/// Threshold for negative powers: `min eig > NEGATIVE_POWER * ||A||_op`.
pub const NEGATIVE_POWER: f64 = 1e-12;

/// Default relative tolerance for inequality margins.
pub const MARGIN_REL: f64 = 1e-8;

/// Relaxed margin tolerance for finite-difference second derivatives.
pub const FINITE_DIFFERENCE_REL: f64 = 1e-4;

/// Richardson levels must agree within this fraction of the record scale.
pub const RICHARDSON_AGREEMENT: f64 = 1e-3;

/// Trace preservation residual of a Kraus set, relative to the input dimension.
pub const TRACE_PRESERVATION: f64 = 1e-10;

/// Unit-trace check for density matrices.
pub const UNIT_TRACE: f64 = 1e-12;

/// Unit-norm check for pure states.
pub const UNIT_NORM: f64 = 1e-12;

/// Overridable bundle of the validation tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub psd: f64,
    pub reconstruction: f64,
    pub margin_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN,
            psd: PSD,
            reconstruction: RECONSTRUCTION,
            margin_rel: MARGIN_REL,
        }
    }
}
