use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape: {rows}x{cols} with {len} entries")]
    InvalidShape { rows: usize, cols: usize, len: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not Hermitian (asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("invalid Schatten exponent {0}; need 1 <= p <= inf")]
    InvalidExponent(f64),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal residual {residual:.3e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("matrix is near singular (min |eigenvalue| {min_abs:.3e}, threshold {threshold:.3e})")]
    NearSingular { min_abs: f64, threshold: f64 },

    #[error("dimension {0} too large for sign enumeration (max {1})")]
    DimensionTooLarge(usize, usize),

    #[error("blocks do not share the off-diagonal block (max difference {0:.3e})")]
    InvalidPair(f64),

    #[error("2x2 argument is not positive with nonnegative entries: {0}")]
    NotPositive(String),

    #[error("finite-difference estimate unstable (level disagreement {0:.3e})")]
    Unstable(f64),

    #[error("{name} = {value} outside [{lo}, {hi}]")]
    OutOfRange { name: &'static str, value: f64, lo: f64, hi: f64 },

    #[error("Kraus operators are not trace preserving (residual {0:.3e})")]
    NotTracePreserving(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("block is not of Hanner form X = Z, Y = Y* (defect {0:.3e})")]
    NotHannerForm(f64),

    #[error("{0}")]
    Parse(String),
}

impl Error {
    /// Short machine tag used in reports, e.g. `NEAR_SINGULAR`.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::InvalidShape { .. } => "INVALID_SHAPE",
            Error::NonFinite { .. } => "NON_FINITE",
            Error::NotSquare(..) => "NOT_SQUARE",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::NotHermitian(_) => "NOT_HERMITIAN",
            Error::NotPsd(_) => "NOT_PSD",
            Error::InvalidExponent(_) => "INVALID_EXPONENT",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::NearSingular { .. } => "NEAR_SINGULAR",
            Error::DimensionTooLarge(..) => "DIMENSION_TOO_LARGE",
            Error::InvalidPair(_) => "INVALID_PAIR",
            Error::NotPositive(_) => "NOT_POSITIVE",
            Error::Unstable(_) => "UNSTABLE",
            Error::OutOfRange { .. } => "OUT_OF_RANGE",
            Error::NotTracePreserving(_) => "NOT_TRACE_PRESERVING",
            Error::InvalidTrace(_) => "INVALID_TRACE",
            Error::NotNormalized(_) => "NOT_NORMALIZED",
            Error::NotHannerForm(_) => "NOT_HANNER_FORM",
            Error::Parse(_) => "PARSE",
        }
    }

    /// Numerical failures, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::NearSingular { .. } | Error::Unstable(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
