//! Seeded fuzzing campaigns over the checkers.
//!
//! Trial `i` of a campaign with seed `s` draws everything from a generator
//! seeded with `derive_seed(s, i)`; that per-trial seed is stored in each
//! record, so a record can be regenerated from `(target, sampler, n, seed, p)`
//! alone.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lemmas::{check_lemma2, check_lemma3, check_lemma4, check_lemma5, PositiveTwoByTwo, DEFAULT_H_STEPS};
use super::{check_gross, check_hanner_form, check_holder, check_theorem1, check_theorem2, CheckRecord, InequalityId};
use crate::blockmat::{
    perturb_diagonal_blocks, sample_general_block, sample_hanner_pair, sample_positive_block_with, SamplerMode,
};
use crate::error::{Error, Result};
use crate::random::{derive_seed, random_hermitian};
use crate::schatten::{HermitianMatrix, SchattenExponent};
use crate::tolerance;

/// Which inequality a campaign exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuzzTarget {
    Thm1,
    Thm2,
    Gross,
    Hanner,
    Holder,
    Lemma2,
    Lemma3,
    Lemma4,
    Lemma5,
}

impl FuzzTarget {
    pub const ALL: [FuzzTarget; 9] = [
        FuzzTarget::Thm1,
        FuzzTarget::Thm2,
        FuzzTarget::Gross,
        FuzzTarget::Hanner,
        FuzzTarget::Holder,
        FuzzTarget::Lemma2,
        FuzzTarget::Lemma3,
        FuzzTarget::Lemma4,
        FuzzTarget::Lemma5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Thm1 => "thm1",
            Self::Thm2 => "thm2",
            Self::Gross => "gross",
            Self::Hanner => "hanner",
            Self::Holder => "holder",
            Self::Lemma2 => "lemma2",
            Self::Lemma3 => "lemma3",
            Self::Lemma4 => "lemma4",
            Self::Lemma5 => "lemma5",
        }
    }

    /// Default exponent grid, dense around the transition at `p = 2`.
    pub fn default_grid(self) -> Vec<SchattenExponent> {
        let finite = |v: &[f64]| v.iter().map(|&p| SchattenExponent::Finite(p)).collect::<Vec<_>>();
        let full = [1.0, 1.1, 1.3, 1.5, 1.7, 1.9, 2.0, 2.1, 2.5, 3.0, 4.0, 7.0, 10.0];
        match self {
            Self::Thm1 | Self::Hanner | Self::Holder => {
                let mut g = finite(&full);
                g.push(SchattenExponent::Infinity);
                g
            }
            Self::Thm2 => finite(&full),
            Self::Gross => finite(&[1.0, 1.1, 1.3, 1.5, 1.7, 1.9, 2.0]),
            Self::Lemma2 | Self::Lemma3 | Self::Lemma4 => finite(&[1.05, 1.3, 1.5, 1.7, 1.95]),
            Self::Lemma5 => finite(&[1.2, 1.5, 1.8, 2.0]),
        }
    }

    fn admits(self, p: SchattenExponent) -> bool {
        match self {
            Self::Thm1 | Self::Hanner | Self::Holder => true,
            Self::Thm2 => !p.is_infinite(),
            Self::Gross | Self::Lemma2 | Self::Lemma3 | Self::Lemma4 => p.value() <= 2.0,
            Self::Lemma5 => p.value() > 1.0 && p.value() <= 2.0,
        }
    }

    fn record_id(self, p: SchattenExponent) -> InequalityId {
        let low = p.value() <= 2.0;
        match self {
            Self::Thm1 if low => InequalityId::Thm1a,
            Self::Thm1 => InequalityId::Thm1b,
            Self::Thm2 if low => InequalityId::Thm2a,
            Self::Thm2 => InequalityId::Thm2b,
            Self::Gross => InequalityId::Gross,
            Self::Hanner => InequalityId::HannerForm,
            Self::Holder => InequalityId::HolderYxz,
            Self::Lemma2 => InequalityId::Lemma2,
            Self::Lemma3 => InequalityId::Lemma3,
            Self::Lemma4 => InequalityId::Lemma4,
            Self::Lemma5 => InequalityId::Lemma5,
        }
    }
}

impl fmt::Display for FuzzTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FuzzTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let key = match key.as_str() {
            "thm1a" | "thm1b" => "thm1",
            "thm2a" | "thm2b" => "thm2",
            "hanner_form" => "hanner",
            "holder_yxz" => "holder",
            k => k,
        };
        Self::ALL
            .into_iter()
            .find(|t| t.name() == key)
            .ok_or_else(|| Error::Parse(format!("unknown inequality {s:?}")))
    }
}

/// Positive-block sampler used by a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerChoice {
    /// Each trial draws its mode from its own generator.
    Mixed,
    Fixed(SamplerMode),
}

impl SamplerChoice {
    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> SamplerMode {
        match self {
            Self::Fixed(mode) => mode,
            // generic blocks get half the weight
            Self::Mixed => match rng.random_range(0..8u32) {
                0 => SamplerMode::Boundary,
                1 => SamplerMode::ZeroCoupling,
                2 => SamplerMode::IdentityContraction,
                3 => SamplerMode::RankDeficient,
                _ => SamplerMode::Generic,
            },
        }
    }
}

impl FromStr for SamplerChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "mixed" => Ok(Self::Mixed),
            "generic" => Ok(Self::Fixed(SamplerMode::Generic)),
            "boundary" => Ok(Self::Fixed(SamplerMode::Boundary)),
            "zero_coupling" => Ok(Self::Fixed(SamplerMode::ZeroCoupling)),
            "identity_contraction" => Ok(Self::Fixed(SamplerMode::IdentityContraction)),
            "rank_deficient" => Ok(Self::Fixed(SamplerMode::RankDeficient)),
            other => Err(Error::Parse(format!("unknown sampler mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzSpec {
    pub target: FuzzTarget,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub p_grid: Vec<SchattenExponent>,
    pub seed: u64,
    pub sampler: SamplerChoice,
    pub tol_rel: f64,
    /// Worker threads; `None` uses the global pool.
    #[serde(default)]
    pub jobs: Option<usize>,
}

impl FuzzSpec {
    pub fn new(target: FuzzTarget, trials: usize, seed: u64) -> Self {
        Self {
            target,
            trials,
            dims: vec![1, 2, 3, 4],
            p_grid: target.default_grid(),
            seed,
            sampler: SamplerChoice::Mixed,
            tol_rel: tolerance::MARGIN_REL,
            jobs: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parse("trials must be at least 1".into()));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&n| n == 0 || n > 32) {
            return Err(Error::Parse("dims must be a nonempty list of integers in 1..=32".into()));
        }
        if self.p_grid.is_empty() {
            return Err(Error::Parse("p grid must not be empty".into()));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !self.target.admits(**p)) {
            return Err(Error::Parse(format!("p = {p} is outside the range of {}", self.target)));
        }
        if !(self.tol_rel >= 0.0 && self.tol_rel.is_finite()) {
            return Err(Error::Parse("tol_rel must be a nonnegative number".into()));
        }
        Ok(())
    }

    fn dim_for(&self, trial: usize) -> usize {
        self.dims[trial % self.dims.len()]
    }
}

/// Random `A`, `B` for the subadditivity check: `a, b` log-uniform over
/// four decades, `c = ρ sqrt(ab)` with `ρ < 1`.
pub fn sample_lemma3_pair<R: Rng + ?Sized>(rng: &mut R) -> (PositiveTwoByTwo, PositiveTwoByTwo) {
    let mut one = || loop {
        let a = 10f64.powf(rng.random_range(-2.0..2.0));
        let b = 10f64.powf(rng.random_range(-2.0..2.0));
        let c = rng.random_range(0.0..0.999) * (a * b).sqrt();
        if let Ok(m) = PositiveTwoByTwo::new(a, b, c) {
            break m;
        }
    };
    (one(), one())
}

/// `(a, b, c, δ)` for the monotonicity check, with `c < sqrt(ab)` and `δ`
/// log-uniform over six decades.
pub fn sample_lemma4_args<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64, f64, f64) {
    let a = 10f64.powf(rng.random_range(-2.0..2.0));
    let b = 10f64.powf(rng.random_range(-2.0..2.0));
    let c = rng.random_range(0.0..0.999) * (a * b).sqrt();
    let delta = 10f64.powf(rng.random_range(-3.0..3.0));
    (a, b, c, delta)
}

/// Hermitian pair for the second-derivative check: `A` from the Gaussian
/// ensemble, `B` Gaussian rescaled to unit Frobenius norm.
pub fn sample_lemma5_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (HermitianMatrix, HermitianMatrix) {
    let a = random_hermitian(n, rng);
    let b = random_hermitian(n, rng);
    let norm = b.matrix().frobenius_norm().max(f64::MIN_POSITIVE);
    let b = HermitianMatrix::new(b.matrix().scale(1.0 / norm)).expect("scaled Hermitian");
    (a, b)
}

fn lift(target: FuzzTarget, p: SchattenExponent, n: usize, r: Result<CheckRecord>) -> CheckRecord {
    r.unwrap_or_else(|e| CheckRecord::failed(target.record_id(p), p, n, &e))
}

/// Evaluates one trial (one sampled instance) across `grid`.
pub fn run_trial(
    target: FuzzTarget,
    sampler: SamplerChoice,
    n: usize,
    trial_seed: u64,
    grid: &[SchattenExponent],
    tol_rel: f64,
) -> Vec<CheckRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let records: Vec<CheckRecord> = match target {
        FuzzTarget::Thm1 | FuzzTarget::Holder => {
            let mode = sampler.draw(&mut rng);
            let block = sample_positive_block_with(n, &mut rng, 1.0, mode);
            grid.iter()
                .map(|&p| if target == FuzzTarget::Thm1 { check_theorem1(&block, p) } else { check_holder(&block, p) })
                .collect()
        }
        FuzzTarget::Hanner => {
            let block = sample_hanner_pair(n, &mut rng);
            grid.iter().map(|&p| lift(target, p, n, check_hanner_form(&block, p))).collect()
        }
        FuzzTarget::Thm2 => {
            let block = sample_general_block(n, &mut rng, 1.0);
            grid.iter().map(|&p| lift(target, p, n, check_theorem2(&block, p.value()))).collect()
        }
        FuzzTarget::Gross => {
            let a = rng.random_range(-10.0..10.0);
            let b = rng.random_range(-10.0..10.0);
            grid.iter().map(|&p| lift(target, p, 1, check_gross(a, b, p.value()))).collect()
        }
        FuzzTarget::Lemma2 => {
            let mode = sampler.draw(&mut rng);
            let base = sample_positive_block_with(n, &mut rng, 1.0, mode);
            let other = perturb_diagonal_blocks(&base, &mut rng, 1.0);
            let lambda = rng.random_range(0.0..=1.0);
            grid.iter().map(|&p| lift(target, p, n, check_lemma2(&base, &other, p.value(), lambda))).collect()
        }
        FuzzTarget::Lemma3 => {
            let (a, b) = sample_lemma3_pair(&mut rng);
            grid.iter().map(|&p| lift(target, p, 2, check_lemma3(a, b, p.value()))).collect()
        }
        FuzzTarget::Lemma4 => {
            let (a, b, c, delta) = sample_lemma4_args(&mut rng);
            grid.iter().map(|&p| lift(target, p, 2, check_lemma4(a, b, c, p.value(), delta))).collect()
        }
        FuzzTarget::Lemma5 => {
            let (a, b) = sample_lemma5_pair(n, &mut rng);
            grid.iter().map(|&p| lift(target, p, n, check_lemma5(&a, &b, p.value(), &DEFAULT_H_STEPS))).collect()
        }
    };
    let fd = target == FuzzTarget::Lemma5;
    records
        .into_iter()
        .map(|r| {
            let r = r.with_seed(trial_seed);
            if fd {
                r
            } else {
                r.rejudge(tol_rel)
            }
        })
        .collect()
}

/// Runs a campaign. Results are independent of thread count; failed
/// records come first, otherwise trial order is kept.
pub fn fuzz_suite(spec: &FuzzSpec) -> Result<Vec<CheckRecord>> {
    spec.validate()?;
    let work = || -> Vec<CheckRecord> {
        (0..spec.trials)
            .into_par_iter()
            .map(|t| {
                let n = spec.dim_for(t);
                run_trial(spec.target, spec.sampler, n, derive_seed(spec.seed, t as u64), &spec.p_grid, spec.tol_rel)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    let mut records = match spec.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Parse(format!("cannot build thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    records.sort_by_key(|r| r.pass);
    Ok(records)
}

/// Regenerates `record` from its seed and parameters.
pub fn revalidate(target: FuzzTarget, sampler: SamplerChoice, record: &CheckRecord, tol_rel: f64) -> CheckRecord {
    run_trial(target, sampler, record.n, record.seed, &[record.p], tol_rel)
        .pop()
        .expect("one exponent yields one record")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub inequality_id: String,
    pub trials: usize,
    pub records: usize,
    pub failures: usize,
    pub errors: usize,
    pub min_margin: f64,
    pub min_relative_margin: f64,
    pub p_grid: Vec<SchattenExponent>,
    pub seed: u64,
}

pub fn summarize(spec: &FuzzSpec, records: &[CheckRecord]) -> FuzzSummary {
    let valid = records.iter().filter(|r| r.error.is_none());
    let (min_margin, min_rel) = valid.fold((f64::INFINITY, f64::INFINITY), |(m, r), rec| {
        (m.min(rec.margin), r.min(rec.relative_margin()))
    });
    FuzzSummary {
        inequality_id: spec.target.name().to_string(),
        trials: spec.trials,
        records: records.len(),
        failures: records.iter().filter(|r| !r.pass).count(),
        errors: records.iter().filter(|r| r.error.is_some()).count(),
        min_margin: if min_margin.is_finite() { min_margin } else { 0.0 },
        min_relative_margin: if min_rel.is_finite() { min_rel } else { 0.0 },
        p_grid: spec.p_grid.clone(),
        seed: spec.seed,
    }
}
