//! Quantum channels in Kraus form and optimizers for their maximal output
//! p-norm and minimal output entropy.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::jacobi_eigh;
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::random::{derive_seed, random_density, random_unit_vector};
use crate::schatten::{PsdMatrix, SchattenExponent};
use crate::tolerance;

/// Largest `dim_in · dim_out` the optimizers accept.
pub const MAX_SEARCH_DIM: usize = 81;

/// Completely positive trace-preserving map `ρ ↦ Σ K ρ K*`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::Parse("a channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if let Some(k) = kraus.iter().find(|k| k.rows() != dim_out || k.cols() != dim_in) {
            return Err(Error::DimensionMismatch { expected: dim_out * dim_in, got: k.rows() * k.cols() });
        }
        let mut sum = ComplexMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum = &sum + &k.adjoint().matmul(k)?;
        }
        let residual = (&sum - &ComplexMatrix::identity(dim_in)).frobenius_norm();
        if residual > tolerance::TRACE_PRESERVATION * dim_in as f64 {
            return Err(Error::NotTracePreserving(residual));
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(d)]).expect("identity is trace preserving")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `Σ K ρ K*` without validation of `rho`.
    pub fn apply_matrix(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: rho.rows() });
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &k.matmul(rho)?.matmul(&k.adjoint())?;
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_matrix(rho.matrix())?;
        DensityMatrix::with_trace_tolerance(out, tolerance::TRACE_PRESERVATION)
    }

    /// Output for the pure input `ψψ*`, as `Σ (Kψ)(Kψ)*`.
    pub fn apply_pure(&self, psi: &[Complex64]) -> ComplexMatrix {
        assert_eq!(psi.len(), self.dim_in, "state dimension");
        let d = self.dim_out;
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for k in &self.kraus {
            let v = k.matvec(psi).expect("dimension checked");
            for i in 0..d {
                for j in 0..d {
                    data[i * d + j] += v[i] * v[j].conj();
                }
            }
        }
        ComplexMatrix::new(d, d, data).expect("finite output")
    }
}

fn pauli() -> [ComplexMatrix; 3] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        ComplexMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap(),
        ComplexMatrix::new(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap(),
        ComplexMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]).unwrap(),
    ]
}

/// Qubit depolarizing channel `ρ ↦ λρ + (1-λ) Tr(ρ) I/2`.
pub fn depolarizing(lambda: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange { name: "lambda", value: lambda, lo: 0.0, hi: 1.0 });
    }
    let mut kraus = vec![ComplexMatrix::identity(2).scale(((1.0 + 3.0 * lambda) / 4.0).sqrt())];
    let w = ((1.0 - lambda) / 4.0).sqrt();
    kraus.extend(pauli().iter().map(|s| s.scale(w)));
    let channel = KrausChannel::new(kraus)?;
    for i in 0..2 {
        for j in 0..2 {
            let e = ComplexMatrix::from_fn(2, 2, |r, c| Complex64::new(((r, c) == (i, j)) as u8 as f64, 0.0));
            let expected = &e.scale(lambda) + &ComplexMatrix::identity(2).scale((1.0 - lambda) * e.trace().re / 2.0);
            let got = channel.apply_matrix(&e)?;
            assert!(got.max_abs_diff(&expected) <= 1e-12, "depolarizing Kraus set disagrees with its action");
        }
    }
    Ok(channel)
}

/// Werner–Holevo channel `ρ ↦ (Tr(ρ) I - ρᵀ)/(d-1)` with Kraus operators
/// `(|i⟩⟨j| - |j⟩⟨i|)/sqrt(d-1)`, `i < j`.
pub fn werner_holevo(d: usize) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::OutOfRange { name: "d", value: d as f64, lo: 2.0, hi: f64::INFINITY });
    }
    let w = 1.0 / ((d - 1) as f64).sqrt();
    let mut kraus = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in i + 1..d {
            let mut k = ComplexMatrix::zeros(d, d);
            k.set_block(i, j, &ComplexMatrix::from_real(1, 1, &[w])?);
            k.set_block(j, i, &ComplexMatrix::from_real(1, 1, &[-w])?);
            kraus.push(k);
        }
    }
    let channel = KrausChannel::new(kraus)?;
    let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
    for _ in 0..3 {
        let rho = random_density(d, d, &mut rng);
        let expected = (&ComplexMatrix::identity(d) - &rho.transpose()).scale(w * w);
        let got = channel.apply_matrix(&rho)?;
        assert!(got.max_abs_diff(&expected) <= 1e-10, "Werner-Holevo Kraus set disagrees with its action");
    }
    Ok(channel)
}

/// `Φ1 ⊗ Φ2` with Kraus operators `K_i ⊗ L_j`.
pub fn tensor(a: &KrausChannel, b: &KrausChannel) -> KrausChannel {
    let kraus = a.kraus.iter().flat_map(|k| b.kraus.iter().map(move |l| k.kron(l))).collect();
    KrausChannel { dim_in: a.dim_in * b.dim_in, dim_out: a.dim_out * b.dim_out, kraus }
}

/// Positive semidefinite matrix of unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: PsdMatrix,
}

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_trace_tolerance(m, tolerance::UNIT_TRACE)
    }

    fn with_trace_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let rho = PsdMatrix::new(m)?;
        let t = rho.trace();
        if (t - 1.0).abs() > tol {
            return Err(Error::InvalidTrace(t));
        }
        Ok(Self { rho })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::new(ComplexMatrix::identity(d).scale(1.0 / d as f64)).expect("I/d is a state")
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.rho.matrix()
    }

    pub fn psd(&self) -> &PsdMatrix {
        &self.rho
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.rho.eigenvalues()
    }

    pub fn norm(&self, p: SchattenExponent) -> f64 {
        self.rho.norm(p)
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> f64 {
        entropy_of(self.eigenvalues())
    }
}

fn entropy_of(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.ln()).sum()
}

/// Unit vector in `C^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureState {
    vector: Vec<Complex64>,
}

impl PureState {
    pub fn new(vector: Vec<Complex64>) -> Result<Self> {
        let norm = l2(&vector);
        if vector.is_empty() || (norm - 1.0).abs() > tolerance::UNIT_NORM {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { vector })
    }

    pub fn normalized(mut vector: Vec<Complex64>) -> Result<Self> {
        let norm = l2(&vector);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm));
        }
        vector.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { vector })
    }

    /// `d^{-1/2} Σ |ii⟩` in `C^d ⊗ C^d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            v[i * d + i] = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        Self::normalized(v).expect("nonzero vector")
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::with_trace_tolerance(ComplexMatrix::outer(&self.vector, &self.vector), 1e-10)
            .expect("outer product of a unit vector is a state")
    }
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub restarts: usize,
    /// Maximum number of pattern-search sweeps per restart.
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self { restarts: 32, max_iters: 2000, tol: 1e-8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub value: f64,
    pub argmax: PureState,
    pub restarts_used: usize,
    pub converged: bool,
    /// Best value of each restart, in restart order.
    pub history: Vec<f64>,
}

fn output_spectrum(channel: &KrausChannel, psi: &[Complex64]) -> Vec<f64> {
    let out = channel.apply_pure(psi);
    let (ev, _) = jacobi_eigh(&out, false).expect("Jacobi eigensolver converges");
    ev.into_iter().map(|l| l.max(0.0)).collect()
}

/// `||Φ(ψψ*)||_p`.
pub fn output_norm(channel: &KrausChannel, psi: &[Complex64], p: SchattenExponent) -> f64 {
    p.lp_norm(&output_spectrum(channel, psi))
}

/// `S(Φ(ψψ*))` in nats.
pub fn output_entropy(channel: &KrausChannel, psi: &[Complex64]) -> f64 {
    entropy_of(&output_spectrum(channel, psi))
}

/// Applies one elementary unitary move to `psi` in place. Moves `0..4`
/// rotate the pair `(i, j)` by `±θ` in a real or imaginary plane; moves
/// `4..6` put a phase `e^{±iθ}` on coordinate `i`.
fn apply_move(psi: &mut [Complex64], i: usize, j: usize, kind: usize, theta: f64) {
    let t = if kind.is_multiple_of(2) { theta } else { -theta };
    let (c, s) = (t.cos(), t.sin());
    match kind / 2 {
        0 => {
            let (a, b) = (psi[i], psi[j]);
            psi[i] = a * c - b * s;
            psi[j] = a * s + b * c;
        }
        1 => {
            let is = Complex64::new(0.0, s);
            let (a, b) = (psi[i], psi[j]);
            psi[i] = a * c + b * is;
            psi[j] = a * is + b * c;
        }
        _ => psi[i] *= Complex64::from_polar(1.0, t),
    }
}

const STEP_START: f64 = std::f64::consts::FRAC_PI_4;
const STEP_MIN: f64 = 1e-9;

/// Pattern search maximizing `f` on the unit sphere from `start`.
fn ascend(f: &(impl Fn(&[Complex64]) -> f64 + Sync), start: Vec<Complex64>, max_iters: usize) -> (f64, Vec<Complex64>) {
    let d = start.len();
    let mut psi = start;
    let mut best = f(&psi);
    let mut step = STEP_START;
    let mut moves: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            moves.extend((0..4).map(|k| (i, j, k)));
        }
        moves.extend((4..6).map(|k| (i, i, k)));
    }
    for _ in 0..max_iters {
        let mut improved = false;
        for &(i, j, kind) in &moves {
            let mut trial = psi.clone();
            apply_move(&mut trial, i, j, kind, step);
            let v = f(&trial);
            if v > best {
                best = v;
                psi = trial;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
            if step < STEP_MIN {
                break;
            }
        }
    }
    let norm = l2(&psi);
    psi.iter_mut().for_each(|z| *z /= norm);
    (f(&psi), psi)
}

fn multistart(channel: &KrausChannel, cfg: &OptConfig, f: impl Fn(&[Complex64]) -> f64 + Sync) -> Result<OptResult> {
    if channel.dim_in * channel.dim_out > MAX_SEARCH_DIM {
        return Err(Error::DimensionTooLarge(channel.dim_in * channel.dim_out, MAX_SEARCH_DIM));
    }
    if cfg.restarts == 0 {
        return Err(Error::Parse("restarts must be at least 1".into()));
    }
    let runs: Vec<(f64, Vec<Complex64>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, r as u64));
            let start = random_unit_vector(channel.dim_in, &mut rng);
            ascend(&f, start, cfg.max_iters.max(1))
        })
        .collect();
    let history: Vec<f64> = runs.iter().map(|(v, _)| *v).collect();
    let best = (0..runs.len()).fold(0, |b, i| if history[i] > history[b] { i } else { b });
    let mut sorted = history.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let top = &sorted[..sorted.len().min(3)];
    let converged = top[0] - top[top.len() - 1] <= cfg.tol * top[0].abs().max(1.0);
    let (value, psi) = runs.into_iter().nth(best).expect("at least one restart");
    Ok(OptResult { value, argmax: PureState::normalized(psi)?, restarts_used: cfg.restarts, converged, history })
}

/// Lower bound on `ν_p(Φ) = sup_ρ ||Φ(ρ)||_p` by multi-start search over pure inputs.
pub fn nu_p(channel: &KrausChannel, p: SchattenExponent, cfg: &OptConfig) -> Result<OptResult> {
    multistart(channel, cfg, |psi| output_norm(channel, psi, p))
}

/// Upper bound on `S_min(Φ)` by multi-start search over pure inputs; `value` is the entropy.
pub fn s_min(channel: &KrausChannel, cfg: &OptConfig) -> Result<OptResult> {
    let mut r = multistart(channel, cfg, |psi| -output_entropy(channel, psi))?;
    r.value = -r.value;
    r.history.iter_mut().for_each(|v| *v = -*v);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub p: SchattenExponent,
    pub nu_product: f64,
    pub nu_joint_lower: f64,
    pub gap: f64,
}

/// `ν_p(Φ1⊗Φ2) - ν_p(Φ1) ν_p(Φ2)` with every ν estimated by the optimizer.
pub fn multiplicativity_gap(a: &KrausChannel, b: &KrausChannel, p: SchattenExponent, cfg: &OptConfig) -> Result<GapRecord> {
    let nu_a = nu_p(a, p, cfg)?.value;
    let nu_b = nu_p(b, p, cfg)?.value;
    let joint = nu_p(&tensor(a, b), p, cfg)?.value;
    let nu_product = nu_a * nu_b;
    Ok(GapRecord { p, nu_product, nu_joint_lower: joint, gap: joint - nu_product })
}

/// `||(Φ1⊗Φ2)(ψψ*)||_p` for the maximally entangled `ψ`.
pub fn entangled_lower_bound(a: &KrausChannel, b: &KrausChannel, p: SchattenExponent) -> Result<f64> {
    if a.dim_in != b.dim_in {
        return Err(Error::DimensionMismatch { expected: a.dim_in, got: b.dim_in });
    }
    let psi = PureState::maximally_entangled(a.dim_in);
    Ok(output_norm(&tensor(a, b), psi.vector(), p))
}

/// `ν_p(Δ(λ)) = (((1+λ)/2)^p + ((1-λ)/2)^p)^{1/p}`.
pub fn depolarizing_nu_closed_form(lambda: f64, p: SchattenExponent) -> f64 {
    p.lp_norm(&[(1.0 + lambda) / 2.0, (1.0 - lambda) / 2.0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub min_margin: f64,
    pub nu_depolarizing: f64,
    pub nu_other: f64,
    pub worst_output_norm: f64,
    pub samples: usize,
}

/// Worst `ν_p(Δ) ν_p(Φ) - ||(Δ⊗Φ)(ρ)||_p` over random states `ρ` on
/// `C² ⊗ C^{dim_in(Φ)}`; ranks are drawn uniformly so pure inputs appear.
pub fn depolarizing_product_bound_check<R: Rng + ?Sized>(
    phi: &KrausChannel,
    lambda: f64,
    p: f64,
    samples: usize,
    rng: &mut R,
) -> Result<BoundCheck> {
    let e = SchattenExponent::new(p)?;
    if p < 2.0 {
        return Err(Error::OutOfRange { name: "p", value: p, lo: 2.0, hi: f64::INFINITY });
    }
    let delta = depolarizing(lambda)?;
    let nu_delta = depolarizing_nu_closed_form(lambda, e);
    let cfg = OptConfig { seed: rng.random(), ..OptConfig::default() };
    let nu_other = nu_p(phi, e, &cfg)?.value;
    let product = tensor(&delta, phi);
    let d = product.dim_in;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let rank = rng.random_range(1..=d);
        let rho = DensityMatrix::with_trace_tolerance(random_density(d, rank, rng), 1e-10)?;
        worst = worst.max(product.apply(&rho)?.norm(e));
    }
    Ok(BoundCheck {
        min_margin: nu_delta * nu_other - worst,
        nu_depolarizing: nu_delta,
        nu_other,
        worst_output_norm: worst,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub p: f64,
    pub entangled: f64,
    pub nu_product: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScan {
    pub points: Vec<ScanPoint>,
    pub sign_changes: usize,
    /// First grid point with a positive gap.
    pub first_positive: Option<f64>,
}

/// Compares the entangled witness for `Φ⊗Φ` with `ν_p(Φ)²` on the grid
/// `from, from + step, ..., to`.
pub fn scan_threshold(channel: &KrausChannel, from: f64, to: f64, step: f64, cfg: &OptConfig) -> Result<ThresholdScan> {
    if !(step > 0.0 && from >= 1.0 && to >= from && to.is_finite()) {
        return Err(Error::Parse("scan needs 1 <= from <= to and step > 0".into()));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    let points = (0..count)
        .map(|i| {
            let p = from + i as f64 * step;
            let e = SchattenExponent::new(p)?;
            let nu = nu_p(channel, e, cfg)?.value;
            let entangled = entangled_lower_bound(channel, channel, e)?;
            Ok(ScanPoint { p, entangled, nu_product: nu * nu, gap: entangled - nu * nu })
        })
        .collect::<Result<Vec<_>>>()?;
    let sign_changes = points.windows(2).filter(|w| (w[0].gap > 0.0) != (w[1].gap > 0.0)).count();
    let first_positive = points.iter().find(|pt| pt.gap > 0.0).map(|pt| pt.p);
    Ok(ThresholdScan { points, sign_changes, first_positive })
}

/// JSON description of a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    Depolarizing { lambda: f64 },
    WernerHolevo { d: usize },
    Kraus { ops: Vec<ComplexMatrix> },
    Tensor { factors: Vec<ChannelSpec> },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<KrausChannel> {
        match self {
            Self::Depolarizing { lambda } => depolarizing(*lambda),
            Self::WernerHolevo { d } => werner_holevo(*d),
            Self::Kraus { ops } => KrausChannel::new(ops.clone()),
            Self::Tensor { factors } => {
                let mut built = factors.iter().map(|f| f.build());
                let first = built.next().ok_or_else(|| Error::Parse("tensor needs at least one factor".into()))??;
                built.try_fold(first, |acc, f| Ok(tensor(&acc, &f?)))
            }
        }
    }
}

impl std::str::FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("channel spec: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_unitary_mixture;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn state(m: ComplexMatrix) -> DensityMatrix {
        DensityMatrix::new(m).unwrap()
    }

    fn quick() -> OptConfig {
        OptConfig { restarts: 8, ..OptConfig::default() }
    }

    #[test]
    fn identity_channel_leaves_state() {
        let rho = state(random_density(3, 2, &mut rng(1)));
        let out = KrausChannel::identity(3).apply(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn depolarizing_examples() {
        let rho = state(random_density(2, 2, &mut rng(2)));
        let out = depolarizing(0.0).unwrap().apply(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);

        let out = depolarizing(0.5).unwrap().apply(&state(ComplexMatrix::from_diag(&[1.0, 0.0]))).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::from_diag(&[0.75, 0.25])) < 1e-15);

        let rho = state(random_density(2, 2, &mut rng(3)));
        let out = depolarizing(1.0).unwrap().apply(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let (a, b, off) = (0.3, 0.7, c(0.2, -0.1));
        let m = ComplexMatrix::new(2, 2, vec![c(a, 0.0), off, off.conj(), c(b, 0.0)]).unwrap();
        let out = depolarizing(0.6).unwrap().apply(&state(m)).unwrap();
        let expected = ComplexMatrix::new(
            2,
            2,
            vec![c(0.8 * a + 0.2 * b, 0.0), off * 0.6, off.conj() * 0.6, c(0.2 * a + 0.8 * b, 0.0)],
        )
        .unwrap();
        assert!(out.matrix().max_abs_diff(&expected) < 1e-15);
        assert!(matches!(depolarizing(1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn werner_holevo_examples() {
        let out = werner_holevo(2).unwrap().apply(&state(ComplexMatrix::from_diag(&[1.0, 0.0]))).unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::from_diag(&[0.0, 1.0])) < 1e-15);

        let wh = werner_holevo(3).unwrap();
        let psi = PureState::normalized(random_unit_vector(3, &mut rng(4))).unwrap();
        let ev = wh.apply(&psi.density()).unwrap().eigenvalues().to_vec();
        for (got, want) in ev.iter().zip([0.5, 0.5, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        for d in 2..=5 {
            let out = werner_holevo(d).unwrap().apply(&DensityMatrix::maximally_mixed(d)).unwrap();
            assert!(out.matrix().max_abs_diff(DensityMatrix::maximally_mixed(d).matrix()) < 1e-14);
        }
        assert!(werner_holevo(1).is_err());
    }

    #[test]
    fn unnormalized_kraus_rejected() {
        let k = ComplexMatrix::identity(2).scale(0.9);
        assert!(matches!(KrausChannel::new(vec![k]), Err(Error::NotTracePreserving(_))));
        assert!(KrausChannel::new(vec![]).is_err());
    }

    #[test]
    fn tensor_examples() {
        let id = tensor(&KrausChannel::identity(2), &KrausChannel::identity(3));
        assert_eq!((id.dim_in(), id.dim_out()), (6, 6));
        let rho = state(random_density(6, 6, &mut rng(5)));
        assert!(id.apply(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);

        let mut r = rng(6);
        let (r1, r2) = (random_density(2, 2, &mut r), random_density(3, 1, &mut r));
        let delta = depolarizing(0.4).unwrap();
        let got = tensor(&delta, &KrausChannel::identity(3)).apply(&state(r1.kron(&r2))).unwrap();
        let want = delta.apply_matrix(&r1).unwrap().kron(&r2);
        assert!(got.matrix().max_abs_diff(&want) < 1e-14);

        let dd = tensor(&depolarizing(0.5).unwrap(), &depolarizing(0.5).unwrap());
        let out = dd.apply(&DensityMatrix::maximally_mixed(4)).unwrap();
        assert!(out.matrix().max_abs_diff(DensityMatrix::maximally_mixed(4).matrix()) < 1e-15);
        assert!(dd.apply(&DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn random_channels_preserve_trace_and_positivity() {
        let mut r = rng(7);
        for _ in 0..100 {
            let d = r.random_range(2..=4);
            let ch = KrausChannel::new(random_unitary_mixture(d, 3, &mut r)).unwrap();
            let rho = state(random_density(d, r.random_range(1..=d), &mut r));
            let out = ch.apply(&rho).unwrap();
            assert!((out.psd().trace() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn nu_p_examples() {
        let id = nu_p(&KrausChannel::identity(3), SchattenExponent::Finite(2.5), &quick()).unwrap();
        assert!((id.value - 1.0).abs() < 1e-12);
        for lambda in [0.0, 0.5, 0.8] {
            for p in [SchattenExponent::Finite(1.5), SchattenExponent::Finite(3.0), SchattenExponent::Infinity] {
                let r = nu_p(&depolarizing(lambda).unwrap(), p, &quick()).unwrap();
                assert!((r.value - depolarizing_nu_closed_form(lambda, p)).abs() < 1e-9, "{lambda} {p}");
                assert!((output_norm(&depolarizing(lambda).unwrap(), r.argmax.vector(), p) - r.value).abs() < 1e-15);
                assert!(r.converged);
            }
        }
        let wh = nu_p(&werner_holevo(3).unwrap(), SchattenExponent::Finite(2.0), &quick()).unwrap();
        assert!((wh.value - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nu_one_is_one() {
        let ch = KrausChannel::new(random_unitary_mixture(3, 2, &mut rng(8))).unwrap();
        let r = nu_p(&ch, SchattenExponent::Finite(1.0), &quick()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn s_min_examples() {
        assert!(s_min(&KrausChannel::identity(2), &quick()).unwrap().value.abs() < 1e-12);
        let r = s_min(&depolarizing(0.0).unwrap(), &quick()).unwrap();
        assert!((r.value - 2f64.ln()).abs() < 1e-12);
        let r = s_min(&depolarizing(0.5).unwrap(), &quick()).unwrap();
        let expected = -(0.75 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        assert!((r.value - expected).abs() < 1e-10);
        let n = nu_p(&depolarizing(0.5).unwrap(), SchattenExponent::Finite(3.0), &quick()).unwrap();
        let a = output_spectrum(&depolarizing(0.5).unwrap(), r.argmax.vector());
        let b = output_spectrum(&depolarizing(0.5).unwrap(), n.argmax.vector());
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-6));
    }

    #[test]
    fn gap_examples() {
        let p = SchattenExponent::Finite(3.0);
        let id = multiplicativity_gap(&KrausChannel::identity(2), &KrausChannel::identity(2), p, &quick()).unwrap();
        assert!(id.gap.abs() < 1e-12);
        let g = multiplicativity_gap(&depolarizing(0.5).unwrap(), &depolarizing(0.3).unwrap(), p, &quick()).unwrap();
        assert!(g.gap <= 1e-5 * g.nu_product);
        assert!(g.gap >= -1e-8);
    }

    #[test]
    fn entangled_bound_examples() {
        let p = SchattenExponent::Finite(3.0);
        let id = KrausChannel::identity(3);
        assert!((entangled_lower_bound(&id, &id, p).unwrap() - 1.0).abs() < 1e-12);
        let d1 = depolarizing(1.0).unwrap();
        assert!((entangled_lower_bound(&d1, &d1, p).unwrap() - 1.0).abs() < 1e-12);
        assert!(entangled_lower_bound(&id, &d1, p).is_err());
        let wh = werner_holevo(3).unwrap();
        let ev = output_spectrum(&tensor(&wh, &wh), PureState::maximally_entangled(3).vector());
        assert!((ev[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!(ev[1..].iter().all(|l| (l - 1.0 / 12.0).abs() < 1e-12));
    }

    #[test]
    fn werner_holevo_pair_beats_product_at_five() {
        let wh = werner_holevo(3).unwrap();
        let p = SchattenExponent::Finite(5.0);
        let g = multiplicativity_gap(&wh, &wh, p, &OptConfig::default()).unwrap();
        let witness = entangled_lower_bound(&wh, &wh, p).unwrap();
        assert!(g.gap > 0.0, "{g:?}");
        assert!(g.nu_joint_lower >= witness - 1e-9);
    }

    #[test]
    fn bound_check_examples() {
        let r = depolarizing_product_bound_check(&depolarizing(0.7).unwrap(), 0.5, 2.5, 500, &mut rng(61)).unwrap();
        assert!(r.min_margin >= -1e-8, "{r:?}");
        let r = depolarizing_product_bound_check(&KrausChannel::identity(2), 1.0, 3.0, 50, &mut rng(62)).unwrap();
        assert!(r.min_margin >= -1e-12);
        assert!(depolarizing_product_bound_check(&KrausChannel::identity(2), 1.0, 1.5, 5, &mut rng(0)).is_err());
    }

    #[test]
    fn state_validation() {
        assert!(matches!(DensityMatrix::new(ComplexMatrix::identity(2)), Err(Error::InvalidTrace(_))));
        assert!(matches!(DensityMatrix::new(ComplexMatrix::from_diag(&[1.5, -0.5])), Err(Error::NotPsd(_))));
        assert!(matches!(PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]), Err(Error::NotNormalized(_))));
        assert!((DensityMatrix::maximally_mixed(4).entropy() - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn channel_spec_round_trip() {
        let spec: ChannelSpec =
            r#"{"kind":"tensor","factors":[{"kind":"depolarizing","lambda":0.5},{"kind":"werner_holevo","d":3}]}"#
                .parse()
                .unwrap();
        let ch = spec.build().unwrap();
        assert_eq!((ch.dim_in(), ch.kraus().len()), (6, 12));
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json.parse::<ChannelSpec>().unwrap(), spec);
        let kraus = ChannelSpec::Kraus { ops: vec![ComplexMatrix::identity(2)] };
        let back: ChannelSpec = serde_json::to_string(&kraus).unwrap().parse().unwrap();
        assert_eq!(back.build().unwrap(), KrausChannel::identity(2));
        assert!("{\"kind\":\"nope\"}".parse::<ChannelSpec>().is_err());
    }

    #[test]
    fn too_large_search_rejected() {
        let big = tensor(&werner_holevo(3).unwrap(), &depolarizing(0.5).unwrap());
        let bigger = tensor(&big, &depolarizing(0.5).unwrap());
        assert!(matches!(nu_p(&bigger, SchattenExponent::Finite(2.0), &quick()), Err(Error::DimensionTooLarge(..))));
    }
}
