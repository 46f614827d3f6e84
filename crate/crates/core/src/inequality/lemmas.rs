//! Convexity, monotonicity and second-derivative checks that feed the
//! block inequality.

use super::{require_unit_interval, CheckRecord, InequalityId};
use crate::blockmat::PositiveBlock;
use crate::error::{Error, Result};
use crate::schatten::{HermitianMatrix, PsdMatrix, SchattenExponent};
use crate::tolerance;

/// Default step ladder for the second-derivative estimate.
pub const DEFAULT_H_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

fn trace_power(eigenvalues: &[f64], p: f64) -> f64 {
    eigenvalues.iter().map(|&l| if l > 0.0 { l.powf(p) } else { 0.0 }).sum()
}

/// `Tr M^p - Tr X^p - Tr Z^p`.
pub fn lemma2_objective(block: &PositiveBlock, p: f64) -> f64 {
    trace_power(block.assembled().eigenvalues(), p)
        - trace_power(block.x().eigenvalues(), p)
        - trace_power(block.z().eigenvalues(), p)
}

/// Joint convexity in `(X, Z)` at fixed `Y`:
/// `λ f(A) + (1-λ) f(B) - f(λA + (1-λ)B) ≥ 0`.
pub fn check_lemma2(a: &PositiveBlock, b: &PositiveBlock, p: f64, lambda: f64) -> Result<CheckRecord> {
    require_unit_interval("p", p, 1.0, 2.0)?;
    require_unit_interval("lambda", lambda, 0.0, 1.0)?;
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: b.n() });
    }
    let diff = a.y().max_abs_diff(b.y());
    if diff > 1e-12 * a.y().max_abs().max(1.0) {
        return Err(Error::InvalidPair(diff));
    }
    let mix = |u: &PsdMatrix, v: &PsdMatrix| PsdMatrix::new(&u.matrix().scale(lambda) + &v.matrix().scale(1.0 - lambda));
    let mixed = PositiveBlock::new(mix(a.x(), b.x())?, a.y().clone(), mix(a.z(), b.z())?)?;
    let lhs = lambda * lemma2_objective(a, p) + (1.0 - lambda) * lemma2_objective(b, p);
    let rhs = lemma2_objective(&mixed, p);
    Ok(CheckRecord::new(
        InequalityId::Lemma2,
        SchattenExponent::Finite(p),
        a.n(),
        lhs,
        rhs,
        lhs - rhs,
        tolerance::MARGIN_REL,
    ))
}

/// Positive definite `[[a, c], [c, b]]` with `a, b, c ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveTwoByTwo {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PositiveTwoByTwo {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && c >= 0.0) || !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::NotPositive(format!("entries a={a}, b={b}, c={c} must be finite and nonnegative")));
        }
        if a * b - c * c <= 0.0 {
            return Err(Error::NotPositive(format!("determinant {} <= 0", a * b - c * c)));
        }
        Ok(Self { a, b, c })
    }

    pub fn scaled(self, k: f64) -> Result<Self> {
        Self::new(k * self.a, k * self.b, k * self.c)
    }

    pub fn sum(self, other: Self) -> Result<Self> {
        Self::new(self.a + other.a, self.b + other.b, self.c + other.c)
    }
}

/// Eigenvalues of the symmetric `[[a, c], [c, b]]`, larger first; the
/// smaller one is formed as `det / λ₊` to avoid cancellation.
fn sym2_eigenvalues(a: f64, b: f64, c: f64) -> (f64, f64) {
    let u = 0.5 * (a + b);
    let v = (0.5 * (a - b)).hypot(c);
    let hi = u + v;
    let lo = if hi > 0.0 { (a * b - c * c) / hi } else { 0.0 };
    (hi, lo)
}

/// `g(A) = Tr [[a^{1/p}, c^{1/p}], [c^{1/p}, b^{1/p}]]^p`.
pub fn lemma3_g(m: PositiveTwoByTwo, p: f64) -> f64 {
    let r = 1.0 / p;
    let (hi, lo) = sym2_eigenvalues(m.a.powf(r), m.b.powf(r), m.c.powf(r));
    hi.powf(p) + lo.max(0.0).powf(p)
}

/// Subadditivity `g(A) + g(B) - g(A + B) ≥ 0`, together with the
/// homogeneity `g(kA) = k g(A)` for `k ∈ {1/2, 2}`.
pub fn check_lemma3(a: PositiveTwoByTwo, b: PositiveTwoByTwo, p: f64) -> Result<CheckRecord> {
    require_unit_interval("p", p, 1.0, 2.0)?;
    let sum = a.sum(b)?;
    let (ga, gb, gs) = (lemma3_g(a, p), lemma3_g(b, p), lemma3_g(sum, p));
    let lhs = ga + gb;
    let mut record = CheckRecord::new(
        InequalityId::Lemma3,
        SchattenExponent::Finite(p),
        2,
        lhs,
        gs,
        lhs - gs,
        tolerance::MARGIN_REL,
    );
    for k in [0.5, 2.0] {
        let gk = lemma3_g(a.scaled(k)?, p);
        if (gk - k * ga).abs() > 1e-10 * (k * ga).abs() {
            record.pass = false;
            record.error = Some("HOMOGENEITY".to_string());
        }
    }
    Ok(record)
}

/// `(1+x)^p - 1` accurate for small `x`.
fn pow1p_minus_one(x: f64, p: f64) -> f64 {
    (p * x.ln_1p()).exp_m1()
}

/// `h(a, b) = Tr A^p - a^p - b^p` at fixed `c`, evaluated without the
/// catastrophic cancellation of the naive form. With `a ≥ b` the
/// eigenvalues are `a + d` and `b - d`, `d = c² / (v + (a-b)/2)`.
pub fn lemma4_h(m: PositiveTwoByTwo, p: f64) -> f64 {
    let (big, small) = if m.a >= m.b { (m.a, m.b) } else { (m.b, m.a) };
    if m.c == 0.0 {
        return 0.0;
    }
    let half_gap = 0.5 * (big - small);
    let v = half_gap.hypot(m.c);
    let d = m.c * m.c / (v + half_gap);
    big.powf(p) * pow1p_minus_one(d / big, p) + small.powf(p) * pow1p_minus_one(-d / small, p)
}

/// Monotone decrease of `h` in `a` and in `b`:
/// margin `= h(a, b) - max(h(a+δ, b), h(a, b+δ))`.
pub fn check_lemma4(a: f64, b: f64, c: f64, p: f64, delta: f64) -> Result<CheckRecord> {
    require_unit_interval("p", p, 1.0, 2.0)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::OutOfRange { name: "delta", value: delta, lo: 0.0, hi: f64::INFINITY });
    }
    let base = PositiveTwoByTwo::new(a, b, c)?;
    let h0 = lemma4_h(base, p);
    let ha = lemma4_h(PositiveTwoByTwo::new(a + delta, b, c)?, p);
    let hb = lemma4_h(PositiveTwoByTwo::new(a, b + delta, c)?, p);
    let rhs = ha.max(hb);
    Ok(CheckRecord::new(
        InequalityId::Lemma4,
        SchattenExponent::Finite(p),
        2,
        h0,
        rhs,
        h0 - rhs,
        tolerance::MARGIN_REL,
    ))
}

/// Second derivative at 0 of `phi` from central differences over the
/// descending `steps`, extrapolated in `h²` (Neville tableau). Returns
/// `(estimate, previous level estimate)`; with a single step both agree.
pub fn second_derivative_richardson(phi: impl Fn(f64) -> f64, steps: &[f64]) -> Result<(f64, f64)> {
    if steps.is_empty() || steps.iter().any(|h| !(*h > 0.0 && h.is_finite())) || steps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Parse("h_steps must be a nonempty strictly descending list of positive reals".into()));
    }
    let f0 = phi(0.0);
    let mut table: Vec<f64> = steps.iter().map(|&h| (phi(h) - 2.0 * f0 + phi(-h)) / (h * h)).collect();
    let mut previous = table[table.len() - 1];
    for level in 1..steps.len() {
        previous = table[table.len() - 1];
        table = (0..table.len() - 1)
            .map(|i| {
                let ratio = (steps[i] / steps[i + level]).powi(2);
                table[i + 1] + (table[i + 1] - table[i]) / (ratio - 1.0)
            })
            .collect();
    }
    Ok((table[0], previous))
}

/// `d²/dr² (Tr|A + rB|^p)^{2/p} at r = 0  ≥  2(p-1) (Tr|B|^p)^{2/p}`,
/// with the left side estimated by finite differences.
pub fn check_lemma5(a: &HermitianMatrix, b: &HermitianMatrix, p: f64, h_steps: &[f64]) -> Result<CheckRecord> {
    require_unit_interval("p", p, 1.0, 2.0)?;
    if p == 1.0 {
        return Err(Error::OutOfRange { name: "p", value: p, lo: 1.0, hi: 2.0 });
    }
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.dim() });
    }
    let spectrum_a = a.eigenvalues()?;
    let op = spectrum_a.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let min_abs = spectrum_a.iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
    let threshold = 1e-6 * op;
    if min_abs < threshold || op == 0.0 {
        return Err(Error::NearSingular { min_abs, threshold });
    }

    let phi = |r: f64| -> f64 {
        let m = a.matrix() + &b.matrix().scale(r);
        let ev = HermitianMatrix::new(m).and_then(|h| h.eigenvalues()).expect("Hermitian eigensolver converges");
        ev.iter().map(|l| l.abs().powf(p)).sum::<f64>().powf(2.0 / p)
    };
    let (estimate, previous) = second_derivative_richardson(phi, h_steps)?;
    let tb: f64 = b.eigenvalues()?.iter().map(|l| l.abs().powf(p)).sum();
    let rhs = 2.0 * (p - 1.0) * tb.powf(2.0 / p);
    let record = CheckRecord::new(
        InequalityId::Lemma5,
        SchattenExponent::Finite(p),
        n,
        estimate,
        rhs,
        estimate - rhs,
        tolerance::FINITE_DIFFERENCE_REL,
    );
    let disagreement = (estimate - previous).abs();
    if disagreement > tolerance::RICHARDSON_AGREEMENT * record.scale {
        return Err(Error::Unstable(disagreement));
    }
    Ok(record)
}
