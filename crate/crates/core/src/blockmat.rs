//! 2x2 block matrices `[[X, Y], [W, Z]]`.
//!
//! A [`PositiveBlock`] has `W = Y*` and an assembled matrix that is PSD;
//! equivalently `X, Z ≥ 0` and `Y = X^{1/2} R Z^{1/2}` for a contraction
//! `R`. A [`GeneralBlock`] carries four arbitrary square blocks.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::random::{gaussian_matrix, random_unitary, wishart};
use crate::schatten::{psd_power, singular_values, PsdMatrix, SchattenExponent};
use crate::tolerance;

/// Largest dimension accepted by the sign-averaging routines.
pub const MAX_SIGN_AVERAGE_DIM: usize = 12;

/// Anything that assembles into a `2n × 2n` matrix.
pub trait Assemble {
    fn block_dim(&self) -> usize;
    fn assemble(&self) -> ComplexMatrix;
}

pub fn assemble<B: Assemble + ?Sized>(block: &B) -> ComplexMatrix {
    block.assemble()
}

fn assemble_blocks(x: &ComplexMatrix, y: &ComplexMatrix, w: &ComplexMatrix, z: &ComplexMatrix) -> ComplexMatrix {
    let n = x.rows();
    let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
    m.set_block(0, 0, x);
    m.set_block(0, n, y);
    m.set_block(n, 0, w);
    m.set_block(n, n, z);
    m
}

/// PSD block matrix `M = [[X, Y], [Y*, Z]]`. The assembled matrix and the
/// singular values of `Y` are computed once at construction.
#[derive(Debug, Clone)]
pub struct PositiveBlock {
    x: PsdMatrix,
    y: ComplexMatrix,
    z: PsdMatrix,
    assembled: PsdMatrix,
    y_singular: Vec<f64>,
}

impl PositiveBlock {
    pub fn new(x: PsdMatrix, y: ComplexMatrix, z: PsdMatrix) -> Result<Self> {
        let n = x.dim();
        if z.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: z.dim() });
        }
        if y.rows() != n || y.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.rows().max(y.cols()) });
        }
        let m = assemble_blocks(x.matrix(), &y, &y.adjoint(), z.matrix());
        let assembled = PsdMatrix::new(m)?;
        let y_singular = singular_values(&y)?;
        Ok(Self { x, y, z, assembled, y_singular })
    }

    /// `Y = X^{1/2} R Z^{1/2}` for a contraction `R`.
    pub fn from_contraction(x: PsdMatrix, r: &ComplexMatrix, z: PsdMatrix) -> Result<Self> {
        let op = singular_values(r)?.first().copied().unwrap_or(0.0);
        if op > 1.0 + 1e-10 {
            return Err(Error::OutOfRange { name: "||R||_op", value: op, lo: 0.0, hi: 1.0 });
        }
        let xh = psd_power(&x, 0.5)?;
        let zh = psd_power(&z, 0.5)?;
        let y = &(xh.matrix() * r) * zh.matrix();
        Self::new(x, y, z)
    }

    pub fn n(&self) -> usize {
        self.x.dim()
    }

    pub fn x(&self) -> &PsdMatrix {
        &self.x
    }

    pub fn y(&self) -> &ComplexMatrix {
        &self.y
    }

    pub fn z(&self) -> &PsdMatrix {
        &self.z
    }

    /// The assembled matrix `M` with its cached spectrum.
    pub fn assembled(&self) -> &PsdMatrix {
        &self.assembled
    }

    pub fn y_singular_values(&self) -> &[f64] {
        &self.y_singular
    }

    pub fn y_norm(&self, p: SchattenExponent) -> f64 {
        p.lp_norm(&self.y_singular)
    }

    /// `k · M` for `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(
            PsdMatrix::new(self.x.matrix().scale(k))?,
            self.y.scale(k),
            PsdMatrix::new(self.z.matrix().scale(k))?,
        )
    }

    pub fn to_general(&self) -> GeneralBlock {
        GeneralBlock {
            x: self.x.matrix().clone(),
            y: self.y.clone(),
            w: self.y.adjoint(),
            z: self.z.matrix().clone(),
        }
    }
}

impl Assemble for PositiveBlock {
    fn block_dim(&self) -> usize {
        self.n()
    }

    fn assemble(&self) -> ComplexMatrix {
        self.assembled.matrix().clone()
    }
}

/// Arbitrary `[[X, Y], [W, Z]]` with `n × n` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralBlock {
    x: ComplexMatrix,
    y: ComplexMatrix,
    w: ComplexMatrix,
    z: ComplexMatrix,
}

impl GeneralBlock {
    pub fn new(x: ComplexMatrix, y: ComplexMatrix, w: ComplexMatrix, z: ComplexMatrix) -> Result<Self> {
        let n = x.require_square()?;
        for b in [&y, &w, &z] {
            if b.rows() != n || b.cols() != n {
                return Err(Error::DimensionMismatch { expected: n, got: b.rows().max(b.cols()) });
            }
        }
        Ok(Self { x, y, w, z })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn x(&self) -> &ComplexMatrix {
        &self.x
    }

    pub fn y(&self) -> &ComplexMatrix {
        &self.y
    }

    pub fn w(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn z(&self) -> &ComplexMatrix {
        &self.z
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { x: self.x.scale(k), y: self.y.scale(k), w: self.w.scale(k), z: self.z.scale(k) }
    }
}

impl Assemble for GeneralBlock {
    fn block_dim(&self) -> usize {
        self.n()
    }

    fn assemble(&self) -> ComplexMatrix {
        assemble_blocks(&self.x, &self.y, &self.w, &self.z)
    }
}

/// How the contraction (and the diagonal blocks) of a sampled positive block are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMode {
    /// Gaussian `R` rescaled by its operator norm when it exceeds 1.
    Generic,
    /// `R` unitary: every singular value equals 1.
    Boundary,
    /// `R = 0`, so `M` is block diagonal.
    ZeroCoupling,
    /// `R = I`.
    IdentityContraction,
    /// `X` has rank `n - 1` (zero for `n = 1`), generic `R`.
    RankDeficient,
}

impl SamplerMode {
    pub const ALL: [SamplerMode; 5] = [
        SamplerMode::Generic,
        SamplerMode::Boundary,
        SamplerMode::ZeroCoupling,
        SamplerMode::IdentityContraction,
        SamplerMode::RankDeficient,
    ];
}

fn rescaled_contraction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let c = gaussian_matrix(n, n, rng);
    let op = singular_values(&c).expect("Jacobi SVD converges")[0];
    c.scale(1.0_f64.min(1.0 / op))
}

/// Positive block with Wishart `X`, `Z` and a generic contraction.
pub fn sample_positive_block<R: Rng + ?Sized>(n: usize, rng: &mut R, scale: f64) -> PositiveBlock {
    sample_positive_block_with(n, rng, scale, SamplerMode::Generic)
}

/// `X = scale·GG*/n`, `Z = scale·HH*/n`, `Y = X^{1/2} R Z^{1/2}` with `R` drawn per `mode`.
pub fn sample_positive_block_with<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    scale: f64,
    mode: SamplerMode,
) -> PositiveBlock {
    assert!(n >= 1, "block dimension must be positive");
    let x_rank = if mode == SamplerMode::RankDeficient { n - 1 } else { n };
    let x = wishart(n, x_rank, scale, rng);
    let z = wishart(n, n, scale, rng);
    let r = match mode {
        SamplerMode::Generic | SamplerMode::RankDeficient => rescaled_contraction(n, rng),
        SamplerMode::Boundary => random_unitary(n, rng),
        SamplerMode::ZeroCoupling => ComplexMatrix::zeros(n, n),
        SamplerMode::IdentityContraction => ComplexMatrix::identity(n),
    };
    PositiveBlock::from_contraction(x, &r, z).expect("sampled contraction yields a positive block")
}

/// Four independent Gaussian blocks.
pub fn sample_general_block<R: Rng + ?Sized>(n: usize, rng: &mut R, scale: f64) -> GeneralBlock {
    let mut g = || gaussian_matrix(n, n, rng).scale(scale);
    let (x, y, w, z) = (g(), g(), g(), g());
    GeneralBlock { x, y, w, z }
}

/// Block with `X = Z = (P+Q)/2`, `Y = (P-Q)/2`, so that `X ± Y` are `P` and `Q`.
pub fn hanner_pair(p: &PsdMatrix, q: &PsdMatrix) -> Result<PositiveBlock> {
    let x = (p.matrix() + q.matrix()).scale(0.5);
    let y = (p.matrix() - q.matrix()).scale(0.5).hermitian_part();
    PositiveBlock::new(PsdMatrix::new(x.clone())?, y, PsdMatrix::new(x)?)
}

/// [`hanner_pair`] of two independent full-rank Wishart matrices.
pub fn sample_hanner_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> PositiveBlock {
    let p = wishart(n, n, 1.0, rng);
    let q = wishart(n, n, 1.0, rng);
    hanner_pair(&p, &q).expect("Hanner pair of PSD matrices is positive")
}

/// Adds independent Wishart perturbations to `X` and `Z`, keeping `Y`.
pub fn perturb_diagonal_blocks<R: Rng + ?Sized>(block: &PositiveBlock, rng: &mut R, scale: f64) -> PositiveBlock {
    let n = block.n();
    let dx = wishart(n, n, scale, rng);
    let dz = wishart(n, n, scale, rng);
    let x = PsdMatrix::new(block.x().matrix() + dx.matrix()).expect("sum of PSD is PSD");
    let z = PsdMatrix::new(block.z().matrix() + dz.matrix()).expect("sum of PSD is PSD");
    PositiveBlock::new(x, block.y().clone(), z).expect("perturbation keeps positivity")
}

/// `[[||X||_p, ||Y||_p], [||Y||_p, ||Z||_p]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSummary {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl NormSummary {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.x, self.y], [self.y, self.z]]
    }

    /// Half-trace `u` and eigenvalue half-gap `v`; the eigenvalues are `u ± v`.
    pub fn u_v(&self) -> (f64, f64) {
        let u = 0.5 * (self.x + self.z);
        let v = (0.5 * (self.x - self.z)).hypot(self.y);
        (u, v)
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let (u, v) = self.u_v();
        [u + v, u - v]
    }

    pub fn determinant(&self) -> f64 {
        self.x * self.z - self.y * self.y
    }

    /// `||m||_p` for any exponent, from the eigenvalues `u ± v`.
    pub fn norm(&self, p: SchattenExponent) -> f64 {
        match p {
            SchattenExponent::Finite(p) => two_by_two_norm_closed_form(self, p),
            SchattenExponent::Infinity => {
                let [a, b] = self.eigenvalues();
                a.abs().max(b.abs())
            }
        }
    }
}

/// Norm summary of a positive block; fails when Hölder's bound
/// `||Y||_p ≤ (||X||_p ||Z||_p)^{1/2}` is violated beyond tolerance.
pub fn norm_summary(block: &PositiveBlock, p: SchattenExponent) -> Result<NormSummary> {
    let s = NormSummary::new(block.x().norm(p), block.y_norm(p), block.z().norm(p));
    let bound = (s.x * s.z).sqrt();
    if s.y > bound + tolerance::PSD * s.x.max(s.z).max(1.0) {
        return Err(Error::NotPsd(s.determinant()));
    }
    Ok(s)
}

/// `||m||_p = ((u+v)^p + |u-v|^p)^{1/p}` for the symmetric 2x2 `m`.
pub fn two_by_two_norm_closed_form(m: &NormSummary, p: f64) -> f64 {
    let (u, v) = m.u_v();
    SchattenExponent::Finite(p).lp_norm(&[u + v, (u - v).abs()])
}

/// Symmetric 2x2 with diagonal `(||X||_p, ||Z||_p)` and off-diagonal
/// `((||Y||_p^p + ||W||_p^p)/2)^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSummary {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AlphaSummary {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.x, self.y], [self.y, self.z]]
    }

    pub fn trace(&self) -> f64 {
        self.x + self.z
    }

    /// `Tr(α²)`.
    pub fn trace_of_square(&self) -> f64 {
        self.x * self.x + self.z * self.z + 2.0 * self.y * self.y
    }
}

pub fn alpha_summary(block: &GeneralBlock, p: f64) -> Result<AlphaSummary> {
    let e = SchattenExponent::new(p)?;
    if e.is_infinite() {
        return Err(Error::InvalidExponent(p));
    }
    let norm = |a: &ComplexMatrix| -> Result<f64> { Ok(e.lp_norm(&singular_values(a)?)) };
    let (ny, nw) = (norm(block.y())?, norm(block.w())?);
    let top = ny.max(nw);
    let y = if top == 0.0 {
        0.0
    } else {
        top * (0.5 * ((ny / top).powf(p) + (nw / top).powf(p))).powf(1.0 / p)
    };
    Ok(AlphaSummary { x: norm(block.x())?, y, z: norm(block.z())? })
}

fn sign_average_with(a: &ComplexMatrix, slot: impl Fn(usize) -> usize, slots: usize) -> Result<ComplexMatrix> {
    let dim = a.require_square()?;
    if slots > MAX_SIGN_AVERAGE_DIM {
        return Err(Error::DimensionTooLarge(slots, MAX_SIGN_AVERAGE_DIM));
    }
    let count = 1usize << slots;
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for mask in 0..count {
        let signs: Vec<f64> = (0..dim).map(|i| if mask >> slot(i) & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let u = ComplexMatrix::from_diag(&signs);
        let conj = &(&u * a) * &u.adjoint();
        acc = &acc + &conj;
    }
    Ok(acc.scale(1.0 / count as f64))
}

/// `Σ_i 2^{-n} U_i A U_i*` over all `2^n` diagonal `±1` matrices `U_i`,
/// which equals the diagonal part of `A`.
pub fn sign_average_diagonal(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.require_square()?;
    sign_average_with(a, |i| i, n)
}

/// Same average with the paired signs `U_i ⊕ U_i` on a `2n × 2n` matrix.
/// Each block is replaced by its diagonal part.
pub fn sign_average_paired(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a.require_square()?;
    if dim % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: dim + 1, got: dim });
    }
    let n = dim / 2;
    sign_average_with(a, |i| i % n, n)
}

/// JSON block exchange: `{"n", "X", "Y", "W"?, "Z"}`; a missing `W`
/// denotes a positive block with `W = Y*`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockWire {
    pub n: usize,
    #[serde(rename = "X")]
    pub x: ComplexMatrix,
    #[serde(rename = "Y")]
    pub y: ComplexMatrix,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<ComplexMatrix>,
    #[serde(rename = "Z")]
    pub z: ComplexMatrix,
}

/// Parsed block from the exchange format.
#[derive(Debug, Clone)]
pub enum BlockInput {
    Positive(PositiveBlock),
    General(GeneralBlock),
}

impl BlockWire {
    pub fn into_block(self) -> Result<BlockInput> {
        for m in [&self.x, &self.y, &self.z].into_iter().chain(self.w.as_ref()) {
            if m.rows() != self.n || m.cols() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: m.rows().max(m.cols()) });
            }
        }
        match self.w {
            None => Ok(BlockInput::Positive(PositiveBlock::new(
                PsdMatrix::new(self.x)?,
                self.y,
                PsdMatrix::new(self.z)?,
            )?)),
            Some(w) => Ok(BlockInput::General(GeneralBlock::new(self.x, self.y, w, self.z)?)),
        }
    }
}

impl From<&PositiveBlock> for BlockWire {
    fn from(b: &PositiveBlock) -> Self {
        BlockWire { n: b.n(), x: b.x().matrix().clone(), y: b.y().clone(), w: None, z: b.z().matrix().clone() }
    }
}

impl From<&GeneralBlock> for BlockWire {
    fn from(b: &GeneralBlock) -> Self {
        BlockWire { n: b.n(), x: b.x.clone(), y: b.y.clone(), w: Some(b.w.clone()), z: b.z.clone() }
    }
}
