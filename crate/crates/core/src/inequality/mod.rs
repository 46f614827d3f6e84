//! Signed-margin evaluation of the block-matrix norm inequalities.
//!
//! Every checker returns a [`CheckRecord`] whose `margin` is oriented so
//! that `margin ≥ 0` means the inequality holds; `pass` applies the
//! relative tolerance `margin ≥ -tol · max(|lhs|, |rhs|, 1)`.

mod fuzz;
mod lemmas;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blockmat::{alpha_summary, Assemble, GeneralBlock, NormSummary, PositiveBlock};
use crate::error::{Error, Result};
use crate::schatten::{schatten_norm, SchattenExponent};
use crate::tolerance;

pub use fuzz::{
    fuzz_suite, revalidate, run_trial, sample_lemma3_pair, sample_lemma4_args, sample_lemma5_pair, summarize,
    FuzzSpec, FuzzSummary, FuzzTarget, SamplerChoice,
};
pub use lemmas::{
    check_lemma2, check_lemma3, check_lemma4, check_lemma5, lemma2_objective, lemma3_g, lemma4_h,
    second_derivative_richardson, PositiveTwoByTwo, DEFAULT_H_STEPS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InequalityId {
    Thm1a,
    Thm1b,
    Thm2a,
    Thm2b,
    Gross,
    HannerForm,
    Lemma2,
    Lemma3,
    Lemma4,
    Lemma5,
    HolderYxz,
}

impl InequalityId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Thm1a => "THM1A",
            Self::Thm1b => "THM1B",
            Self::Thm2a => "THM2A",
            Self::Thm2b => "THM2B",
            Self::Gross => "GROSS",
            Self::HannerForm => "HANNER_FORM",
            Self::Lemma2 => "LEMMA2",
            Self::Lemma3 => "LEMMA3",
            Self::Lemma4 => "LEMMA4",
            Self::Lemma5 => "LEMMA5",
            Self::HolderYxz => "HOLDER_YXZ",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_ascii_uppercase()))
            .map_err(|_| Error::Parse(format!("unknown inequality id {s:?}")))
    }
}

/// One inequality evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub inequality_id: InequalityId,
    pub p: SchattenExponent,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub seed: u64,
    pub pass: bool,
    pub scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckRecord {
    pub fn new(id: InequalityId, p: SchattenExponent, n: usize, lhs: f64, rhs: f64, margin: f64, tol_rel: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        Self {
            inequality_id: id,
            p,
            n,
            lhs,
            rhs,
            margin,
            seed: 0,
            pass: margin >= -tol_rel * scale,
            scale,
            error: None,
        }
    }

    /// A record for an evaluation that raised `err`; it never passes.
    pub fn failed(id: InequalityId, p: SchattenExponent, n: usize, err: &Error) -> Self {
        Self {
            inequality_id: id,
            p,
            n,
            lhs: 0.0,
            rhs: 0.0,
            margin: 0.0,
            seed: 0,
            pass: false,
            scale: 1.0,
            error: Some(err.tag().to_string()),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Re-applies the pass rule with a different tolerance.
    pub fn rejudge(mut self, tol_rel: f64) -> Self {
        if self.error.is_none() {
            self.pass = self.margin >= -tol_rel * self.scale;
        }
        self
    }

    /// `margin / scale`.
    pub fn relative_margin(&self) -> f64 {
        self.margin / self.scale
    }

    pub fn is_numerical_error(&self) -> bool {
        matches!(self.error.as_deref(), Some("NEAR_SINGULAR" | "UNSTABLE" | "NO_CONVERGENCE"))
    }
}

fn require_unit_interval(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, lo, hi })
    }
}

/// `||M||_p` versus `||m||_p`: `≥` for `p ≤ 2`, `≤` for `p ≥ 2`.
pub fn check_theorem1(block: &PositiveBlock, p: SchattenExponent) -> CheckRecord {
    let lhs = block.assembled().norm(p);
    let summary = NormSummary::new(block.x().norm(p), block.y_norm(p), block.z().norm(p));
    let rhs = summary.norm(p);
    let (id, margin) = if p.value() <= 2.0 {
        (InequalityId::Thm1a, lhs - rhs)
    } else {
        (InequalityId::Thm1b, rhs - lhs)
    };
    CheckRecord::new(id, p, block.n(), lhs, rhs, margin, tolerance::MARGIN_REL)
}

/// Right side of the general-block inequality,
/// `2^{1/p} [ (p-1)/2 Tr α² + (2-p)/4 (Tr α)² ]^{1/2}`, evaluated in the
/// equivalent nonnegative form
/// `2^{1/p} [ ((x+z)/2)² + (p-1)((x-z)/2)² + (p-1) y² ]^{1/2}`.
pub fn theorem2_rhs(x: f64, y: f64, z: f64, p: f64) -> f64 {
    let mean = 0.5 * (x + z);
    let half_gap = 0.5 * (x - z);
    2f64.powf(1.0 / p) * (mean * mean + (p - 1.0) * (half_gap * half_gap + y * y)).sqrt()
}

/// `||[[X, Y], [W, Z]]||_p` versus the α bound; finite `p` only.
pub fn check_theorem2(block: &GeneralBlock, p: f64) -> Result<CheckRecord> {
    let e = SchattenExponent::new(p)?;
    if e.is_infinite() {
        return Err(Error::InvalidExponent(p));
    }
    let lhs = schatten_norm(&block.assemble(), e)?;
    let alpha = alpha_summary(block, p)?;
    let rhs = theorem2_rhs(alpha.x, alpha.y, alpha.z, p);
    let (id, margin) = if p <= 2.0 {
        (InequalityId::Thm2a, lhs - rhs)
    } else {
        (InequalityId::Thm2b, rhs - lhs)
    };
    Ok(CheckRecord::new(id, e, block.n(), lhs, rhs, margin, tolerance::MARGIN_REL))
}

/// `(|a+b|^p + |a-b|^p)^{1/p} ≥ 2^{1/p} (a² + (p-1) b²)^{1/2}` for `1 ≤ p ≤ 2`.
pub fn check_gross(a: f64, b: f64, p: f64) -> Result<CheckRecord> {
    require_unit_interval("p", p, 1.0, 2.0)?;
    let lhs = SchattenExponent::Finite(p).lp_norm(&[(a + b).abs(), (a - b).abs()]);
    let rhs = 2f64.powf(1.0 / p) * (a * a + (p - 1.0) * b * b).sqrt();
    Ok(CheckRecord::new(InequalityId::Gross, SchattenExponent::Finite(p), 1, lhs, rhs, lhs - rhs, tolerance::MARGIN_REL))
}

/// `||Y||_p ≤ ||X||_p^{1/2} ||Z||_p^{1/2}` for a positive block.
pub fn check_holder(block: &PositiveBlock, p: SchattenExponent) -> CheckRecord {
    let lhs = block.y_norm(p);
    let rhs = (block.x().norm(p) * block.z().norm(p)).sqrt();
    CheckRecord::new(InequalityId::HolderYxz, p, block.n(), lhs, rhs, rhs - lhs, tolerance::MARGIN_REL)
}

/// Both sides of the Hanner-form reduction for a block with `X = Z`,
/// `Y = Y*`: `((||X+Y||_p^p + ||X-Y||_p^p)^{1/p}, ((||X||_p+||Y||_p)^p + |·|^p)^{1/p})`.
pub fn hanner_sides(block: &PositiveBlock, p: SchattenExponent) -> Result<(f64, f64)> {
    let (x, y, z) = (block.x().matrix(), block.y(), block.z().matrix());
    let defect = x.max_abs_diff(z).max(y.hermitian_defect());
    if defect > 1e-12 * (1.0 + x.max_abs()) {
        return Err(Error::NotHannerForm(defect));
    }
    let plus = schatten_norm(&(x + y), p)?;
    let minus = schatten_norm(&(x - y), p)?;
    let (nx, ny) = (block.x().norm(p), block.y_norm(p));
    Ok((p.lp_norm(&[plus, minus]), p.lp_norm(&[nx + ny, (nx - ny).abs()])))
}

/// [`check_theorem1`] orientation applied to the Hanner-form sides.
pub fn check_hanner_form(block: &PositiveBlock, p: SchattenExponent) -> Result<CheckRecord> {
    let (lhs, rhs) = hanner_sides(block, p)?;
    let margin = if p.value() <= 2.0 { lhs - rhs } else { rhs - lhs };
    Ok(CheckRecord::new(InequalityId::HannerForm, p, block.n(), lhs, rhs, margin, tolerance::MARGIN_REL))
}

#[cfg(test)]
mod tests;
