//! Schatten p-norms, validated Hermitian/PSD wrappers and spectral functions.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::eigen::{jacobi_eigh, jacobi_singular_values};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::tolerance::{self, Tolerances};

/// Schatten exponent `p ∈ [1, ∞]`. Infinity is its own variant so that
/// `x^p` is never evaluated with a huge float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchattenExponent {
    Finite(f64),
    Infinity,
}

impl SchattenExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Self::Finite(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    /// Value as a float (`f64::INFINITY` for the infinite exponent).
    pub fn value(self) -> f64 {
        match self {
            Self::Finite(p) => p,
            Self::Infinity => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(p) => Some(p),
            Self::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinity)
    }

    /// `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Self {
        conjugate_exponent(self)
    }

    /// `(Σ x_i^p)^{1/p}` (or `max x_i`) for nonnegative `x`, computed with
    /// the largest entry factored out to avoid overflow.
    pub fn lp_norm(self, values: &[f64]) -> f64 {
        let top = values.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        match self {
            Self::Infinity => top,
            Self::Finite(_) if top == 0.0 => 0.0,
            Self::Finite(1.0) => values.iter().map(|x| x.abs()).sum(),
            Self::Finite(p) => top * values.iter().map(|x| (x.abs() / top).powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

pub fn conjugate_exponent(p: SchattenExponent) -> SchattenExponent {
    match p {
        SchattenExponent::Infinity => SchattenExponent::Finite(1.0),
        SchattenExponent::Finite(1.0) => SchattenExponent::Infinity,
        SchattenExponent::Finite(v) => SchattenExponent::Finite(v / (v - 1.0)),
    }
}

impl fmt::Display for SchattenExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for SchattenExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinity),
            t => t
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid exponent {s:?}")))
                .and_then(Self::new),
        }
    }
}

/// Serialized as a JSON number, or the string `"inf"`.
impl Serialize for SchattenExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(p) => serializer.serialize_f64(*p),
            Self::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for SchattenExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Num(f64),
            Str(String),
        }
        match Wire::deserialize(deserializer)? {
            Wire::Num(p) => SchattenExponent::new(p),
            Wire::Str(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Square matrix with `A = A*` up to [`tolerance::HERMITIAN`], stored symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, tolerance::HERMITIAN)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        m.require_square()?;
        let defect = m.hermitian_defect();
        if defect > tol * (1.0 + m.max_abs()) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self(m.hermitian_part()))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(jacobi_eigh(&self.0, false)?.0)
    }
}

/// Eigenvalues (descending) with unitary eigenvector columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// `V f(Λ) V*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj()).sum())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues descending.
pub fn hermitian_eig(a: &HermitianMatrix) -> Result<Spectrum> {
    let (eigenvalues, vectors) = jacobi_eigh(a.matrix(), true)?;
    Ok(Spectrum { eigenvalues, eigenvectors: vectors.expect("vectors requested") })
}

/// Positive semidefinite matrix with its spectrum cached; cached
/// eigenvalues are clipped to be nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMatrix {
    matrix: HermitianMatrix,
    spectrum: Spectrum,
}

impl PsdMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        Self::from_hermitian(HermitianMatrix::with_tolerance(m, tol.hermitian)?, tol.psd)
    }

    pub fn from_hermitian(h: HermitianMatrix, psd_tol: f64) -> Result<Self> {
        let mut spectrum = hermitian_eig(&h)?;
        let op = spectrum.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let min = spectrum.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -psd_tol * op.max(1.0) {
            return Err(Error::NotPsd(min));
        }
        for l in &mut spectrum.eigenvalues {
            *l = l.max(0.0);
        }
        Ok(Self { matrix: h, spectrum })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(ComplexMatrix::identity(n)).expect("identity is PSD")
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(ComplexMatrix::zeros(n, n)).expect("zero is PSD")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.matrix.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Cached eigenvalues, descending and nonnegative.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    pub fn trace(&self) -> f64 {
        self.matrix().trace().re
    }

    /// Schatten norm from the cached spectrum (singular values = eigenvalues).
    pub fn norm(&self, p: SchattenExponent) -> f64 {
        p.lp_norm(self.eigenvalues())
    }

    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

/// `||A||_p` via the singular values of `A`.
pub fn schatten_norm(a: &ComplexMatrix, p: SchattenExponent) -> Result<f64> {
    Ok(p.lp_norm(&singular_values(a)?))
}

/// Singular values, descending.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    jacobi_singular_values(a)
}

/// `Tr |A|^p = Σ σ_i^p` for finite `p ≥ 1`.
pub fn trace_abs_power(a: &ComplexMatrix, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    Ok(singular_values(a)?.iter().map(|s| s.powf(p)).sum())
}

/// `A^s = V diag(λ^s) V*`, with `0^s = 0` for `s > 0` and `A^0 = I`.
pub fn psd_power(a: &PsdMatrix, s: f64) -> Result<PsdMatrix> {
    if !s.is_finite() {
        return Err(Error::Parse(format!("power {s} is not finite")));
    }
    if s < 0.0 {
        let op = a.operator_norm();
        let min = a.eigenvalues().last().copied().unwrap_or(0.0);
        let threshold = tolerance::NEGATIVE_POWER * op;
        if min <= threshold || op == 0.0 {
            return Err(Error::NearSingular { min_abs: min, threshold });
        }
    }
    let f = |l: f64| {
        if s == 0.0 {
            1.0
        } else if l == 0.0 {
            0.0
        } else {
            l.powf(s)
        }
    };
    let matrix = HermitianMatrix(a.spectrum.reconstruct_with(f).hermitian_part());
    let eigenvalues = a.eigenvalues().iter().map(|&l| f(l)).collect::<Vec<_>>();
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eigenvalues[j].total_cmp(&eigenvalues[i]));
    let v = &a.spectrum.eigenvectors;
    let spectrum = Spectrum {
        eigenvalues: order.iter().map(|&i| eigenvalues[i]).collect(),
        eigenvectors: ComplexMatrix::from_fn(v.rows(), v.cols(), |i, j| v[(i, order[j])]),
    };
    Ok(PsdMatrix { matrix, spectrum })
}

/// `Tr(AB)`.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    assert_eq!(a.cols(), b.rows());
    assert_eq!(a.rows(), b.cols());
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}
