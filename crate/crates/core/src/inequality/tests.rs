use super::*;
use crate::blockmat::{perturb_diagonal_blocks, sample_general_block, sample_hanner_pair, sample_positive_block, sample_positive_block_with, SamplerMode};
use crate::matrix::ComplexMatrix;
use crate::random::random_hermitian;
use crate::schatten::{HermitianMatrix, PsdMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn fin(p: f64) -> SchattenExponent {
    SchattenExponent::Finite(p)
}

#[test]
fn theorem1_equality_at_one_and_two() {
    let mut r = rng(3);
    for n in 1..=5 {
        for mode in SamplerMode::ALL {
            let block = sample_positive_block_with(n, &mut r, 1.0, mode);
            for p in [1.0, 2.0] {
                let rec = check_theorem1(&block, fin(p));
                assert!(rec.margin.abs() <= 1e-10 * rec.scale, "n={n} p={p} {rec:?}");
                assert!(rec.pass);
                assert_eq!(rec.inequality_id, InequalityId::Thm1a);
            }
        }
    }
}

#[test]
fn theorem1_seed_1234() {
    let block = sample_positive_block(4, &mut rng(1234), 1.0);
    let a = check_theorem1(&block, fin(1.5));
    assert_eq!(a.inequality_id, InequalityId::Thm1a);
    assert!(a.margin >= 0.0, "{a:?}");
    for p in [fin(3.0), SchattenExponent::Infinity] {
        let b = check_theorem1(&block, p);
        assert_eq!(b.inequality_id, InequalityId::Thm1b);
        assert!(b.margin >= 0.0, "{b:?}");
    }
}

#[test]
fn direction_flip_near_two() {
    let mut r = rng(8);
    for n in 1..=4 {
        let block = sample_positive_block(n, &mut r, 1.0);
        let mut previous = f64::INFINITY;
        for eps in [0.1, 0.01] {
            let below = check_theorem1(&block, fin(2.0 - eps));
            let above = check_theorem1(&block, fin(2.0 + eps));
            assert_eq!(below.inequality_id, InequalityId::Thm1a);
            assert_eq!(above.inequality_id, InequalityId::Thm1b);
            assert!(below.pass && above.pass);
            let size = below.margin.abs().max(above.margin.abs());
            assert!(size <= previous);
            previous = size;
        }
        assert!(previous < 1e-2);
    }
}

#[test]
fn hanner_consistency() {
    let mut r = rng(17);
    for n in 1..=4 {
        let block = sample_hanner_pair(n, &mut r);
        for p in [fin(1.0), fin(1.5), fin(2.0), fin(3.0), fin(7.0), SchattenExponent::Infinity] {
            let h = check_hanner_form(&block, p).unwrap();
            let t = check_theorem1(&block, p);
            assert!((h.lhs - t.lhs).abs() <= 1e-9 * t.scale);
            assert!((h.rhs - t.rhs).abs() <= 1e-9 * t.scale);
            assert!((h.margin - t.margin).abs() <= 1e-9 * t.scale);
            assert!(h.pass);
        }
    }
}

#[test]
fn hanner_rejects_other_blocks() {
    let block = sample_positive_block(3, &mut rng(2), 1.0);
    assert!(matches!(check_hanner_form(&block, fin(1.5)), Err(Error::NotHannerForm(_))));
}

#[test]
fn theorem2_zero_block() {
    let z = ComplexMatrix::zeros(2, 2);
    let block = GeneralBlock::new(z.clone(), z.clone(), z.clone(), z).unwrap();
    let rec = check_theorem2(&block, 1.5).unwrap();
    assert_eq!((rec.lhs, rec.rhs, rec.margin), (0.0, 0.0, 0.0));
}

#[test]
fn theorem2_equality_at_two() {
    let mut r = rng(9);
    for n in 1..=5 {
        let block = sample_general_block(n, &mut r, 1.0);
        let rec = check_theorem2(&block, 2.0).unwrap();
        let frob = [block.x(), block.y(), block.w(), block.z()]
            .iter()
            .map(|m| m.frobenius_norm().powi(2))
            .sum::<f64>()
            .sqrt();
        assert!((rec.rhs - frob).abs() <= 1e-12 * frob);
        assert!(rec.margin.abs() <= 1e-10 * rec.scale, "{rec:?}");
    }
}

#[test]
fn theorem2_seed_77() {
    let block = sample_general_block(3, &mut rng(77), 1.0);
    let a = check_theorem2(&block, 1.4).unwrap();
    let b = check_theorem2(&block, 3.5).unwrap();
    assert_eq!(a.inequality_id, InequalityId::Thm2a);
    assert_eq!(b.inequality_id, InequalityId::Thm2b);
    assert!(a.margin >= 0.0 && b.margin >= 0.0, "{a:?} {b:?}");
}

#[test]
fn theorem2_rejects_infinity() {
    let block = sample_general_block(2, &mut rng(1), 1.0);
    assert!(check_theorem2(&block, f64::INFINITY).is_err());
}

#[test]
fn theorem2_rhs_trace_form_agrees() {
    let mut r = rng(4);
    for _ in 0..200 {
        let (x, y, z): (f64, f64, f64) = (r.random(), r.random(), r.random());
        let p = r.random_range(1.0..10.0);
        let tr = x + z;
        let tr2 = x * x + z * z + 2.0 * y * y;
        let trace_form = 2f64.powf(1.0 / p) * ((p - 1.0) / 2.0 * tr2 + (2.0 - p) / 4.0 * tr * tr).sqrt();
        assert!((theorem2_rhs(x, y, z, p) - trace_form).abs() <= 1e-12 * trace_form.max(1.0));
    }
}

#[test]
fn theorem2_chain_on_positive_blocks() {
    let mut r = rng(12);
    for n in 1..=4 {
        let block = sample_positive_block(n, &mut r, 1.0);
        for p in [1.0, 1.3, 1.7, 2.0] {
            let e = fin(p);
            let t2 = check_theorem2(&block.to_general(), p).unwrap();
            let t1 = check_theorem1(&block, e);
            let (u, v) = NormSummary::new(block.x().norm(e), block.y_norm(e), block.z().norm(e)).u_v();
            let chain = 2f64.powf(1.0 / p) * (u * u + (p - 1.0) * v * v).sqrt();
            let tol = 1e-10 * t1.scale;
            assert!(t2.rhs <= chain + tol);
            assert!(chain <= t1.rhs + tol);
            assert!(t1.rhs <= t1.lhs + tol);
        }
    }
}

#[test]
fn scale_invariance() {
    let mut r = rng(10);
    let block = sample_positive_block(3, &mut r, 1.0);
    let big = block.scaled(10.0).unwrap();
    for p in [fin(1.2), fin(2.5), SchattenExponent::Infinity] {
        let (m1, m10) = (check_theorem1(&block, p).margin, check_theorem1(&big, p).margin);
        assert!((m10 - 10.0 * m1).abs() <= 1e-8 * m10.abs().max(1.0));
        let (h1, h10) = (check_holder(&block, p).margin, check_holder(&big, p).margin);
        assert!((h10 - 10.0 * h1).abs() <= 1e-8 * h10.abs().max(1.0));
    }
    let g = sample_general_block(3, &mut r, 1.0);
    for p in [1.2, 2.5] {
        let m1 = check_theorem2(&g, p).unwrap().margin;
        let m10 = check_theorem2(&g.scaled(10.0), p).unwrap().margin;
        assert!((m10 - 10.0 * m1).abs() <= 1e-8 * m10.abs().max(1.0));
    }
}

#[test]
fn gross_examples() {
    for p in [1.0, 1.3, 2.0] {
        let rec = check_gross(-3.5, 0.0, p).unwrap();
        assert!(rec.margin.abs() <= 1e-12 * rec.scale);
    }
    for (a, b) in [(1.0, 2.0), (-7.5, 3.0), (0.0, 10.0)] {
        assert!(check_gross(a, b, 2.0).unwrap().margin.abs() <= 1e-12 * 20.0);
    }
    let rec = check_gross(0.0, 2.0, 1.5).unwrap();
    let expected = 2f64.powf(2.0 / 3.0) * 2.0 * (1.0 - 0.5f64.sqrt());
    assert!((rec.margin - expected).abs() < 1e-12);
    assert!(matches!(check_gross(1.0, 1.0, 2.5), Err(Error::OutOfRange { .. })));
}

#[test]
fn holder_holds_on_samples() {
    let mut r = rng(14);
    for n in 1..=4 {
        for mode in SamplerMode::ALL {
            let block = sample_positive_block_with(n, &mut r, 1.0, mode);
            for p in FuzzTarget::Holder.default_grid() {
                assert!(check_holder(&block, p).pass);
            }
        }
    }
}

#[test]
fn lemma2_trivial_cases() {
    let mut r = rng(20);
    let a = sample_positive_block(3, &mut r, 1.0);
    let rec = check_lemma2(&a, &a, 1.5, 0.3).unwrap();
    assert!(rec.margin.abs() <= 1e-12 * rec.scale);
    let b = perturb_diagonal_blocks(&a, &mut r, 1.0);
    for lambda in [0.0, 1.0] {
        let rec = check_lemma2(&a, &b, 1.5, lambda).unwrap();
        assert!(rec.margin.abs() <= 1e-12 * rec.scale);
    }
}

#[test]
fn lemma2_seed_21() {
    let mut r = rng(21);
    let a = sample_positive_block(3, &mut r, 1.0);
    let b = perturb_diagonal_blocks(&a, &mut r, 1.0);
    let rec = check_lemma2(&a, &b, 1.5, 0.5).unwrap();
    assert!(rec.margin >= -1e-9 * rec.scale, "{rec:?}");
}

#[test]
fn lemma2_rejects_mismatched_y() {
    let mut r = rng(22);
    let a = sample_positive_block(2, &mut r, 1.0);
    let b = sample_positive_block(2, &mut r, 1.0);
    assert!(matches!(check_lemma2(&a, &b, 1.5, 0.5), Err(Error::InvalidPair(_))));
}

#[test]
fn lemma3_trivial_cases() {
    let a = PositiveTwoByTwo::new(2.0, 3.0, 1.5).unwrap();
    let rec = check_lemma3(a, a, 1.4).unwrap();
    assert!(rec.margin.abs() <= 1e-12 * rec.scale && rec.pass);
    let d1 = PositiveTwoByTwo::new(2.0, 3.0, 0.0).unwrap();
    let d2 = PositiveTwoByTwo::new(0.5, 7.0, 0.0).unwrap();
    assert!((lemma3_g(d1, 1.7) - 5.0).abs() < 1e-12);
    assert!(check_lemma3(d1, d2, 1.7).unwrap().margin.abs() < 1e-12);
}

#[test]
fn lemma3_rejects_non_positive() {
    assert!(matches!(PositiveTwoByTwo::new(1.0, 1.0, 1.0), Err(Error::NotPositive(_))));
    assert!(matches!(PositiveTwoByTwo::new(-1.0, 1.0, 0.0), Err(Error::NotPositive(_))));
}

#[test]
fn lemma3_seed_31_and_midpoint_convexity() {
    let mut r = rng(31);
    for _ in 0..200 {
        let (a, b) = sample_lemma3_pair(&mut r);
        let rec = check_lemma3(a, b, 1.3).unwrap();
        assert!(rec.error.is_none());
        assert!(rec.margin >= -1e-9 * rec.scale, "{rec:?}");
        let mid = a.sum(b).unwrap().scaled(0.5).unwrap();
        let avg = 0.5 * (lemma3_g(a, 1.3) + lemma3_g(b, 1.3));
        assert!(lemma3_g(mid, 1.3) <= avg + 1e-9 * avg.max(1.0));
    }
}

fn naive_h(a: f64, b: f64, c: f64, p: f64) -> f64 {
    let u = 0.5 * (a + b);
    let v = (0.5 * (a - b)).hypot(c);
    (u + v).powf(p) + (u - v).powf(p) - a.powf(p) - b.powf(p)
}

#[test]
fn lemma4_stable_form_matches_naive() {
    let mut r = rng(40);
    for _ in 0..500 {
        let a: f64 = r.random_range(0.1..10.0);
        let b: f64 = r.random_range(0.1..10.0);
        let c = r.random_range(0.05..0.95) * (a * b).sqrt();
        let p = r.random_range(1.0..2.0);
        let stable = lemma4_h(PositiveTwoByTwo::new(a, b, c).unwrap(), p);
        let naive = naive_h(a, b, c, p);
        assert!((stable - naive).abs() <= 1e-10 * a.max(b).powf(p), "{a} {b} {c} {p}");
    }
}

#[test]
fn lemma4_examples() {
    let rec = check_lemma4(2.0, 3.0, 0.0, 1.5, 0.7).unwrap();
    assert_eq!(rec.margin, 0.0);

    let (a, b, c, p): (f64, f64, f64, f64) = (1.0, 2.0, 0.8, 1.5);
    let delta = 1e6 * a - a;
    let far = lemma4_h(PositiveTwoByTwo::new(a + delta, b, c).unwrap(), p);
    let asymptotic = p * c * c * (a + delta).powf(p - 2.0);
    assert!(far > 0.0 && (far - asymptotic).abs() <= 1e-2 * asymptotic);
    let rec = check_lemma4(a, b, c, p, delta).unwrap();
    let h0 = lemma4_h(PositiveTwoByTwo::new(a, b, c).unwrap(), p);
    assert!(rec.margin >= 0.0 && (rec.margin - h0).abs() <= far.max(lemma4_h(PositiveTwoByTwo::new(a, b + delta, c).unwrap(), p)) + 1e-15);
}

#[test]
fn lemma4_seed_41() {
    let mut r = rng(41);
    for _ in 0..300 {
        let (a, b, c, delta) = sample_lemma4_args(&mut r);
        for p in [1.1, 1.5, 1.9] {
            let rec = check_lemma4(a, b, c, p, delta).unwrap();
            assert!(rec.margin >= -1e-9 * rec.scale, "{rec:?}");
        }
    }
}

#[test]
fn lemma_exponent_range() {
    assert!(matches!(check_lemma4(1.0, 1.0, 0.5, 2.5, 0.1), Err(Error::OutOfRange { .. })));
    let a = PositiveTwoByTwo::new(1.0, 1.0, 0.5).unwrap();
    assert!(check_lemma3(a, a, 0.5).is_err());
    let h = HermitianMatrix::new(ComplexMatrix::identity(2)).unwrap();
    assert!(matches!(check_lemma5(&h, &h, 1.0, &DEFAULT_H_STEPS), Err(Error::OutOfRange { .. })));
}

#[test]
fn richardson_on_polynomial() {
    let (est, prev) = second_derivative_richardson(|r| 3.0 * r.powi(4) + r * r - r + 2.0, &DEFAULT_H_STEPS).unwrap();
    assert!((est - 2.0).abs() < 1e-9, "{est}");
    assert!((prev - 2.0).abs() < 1e-3);
    assert!(second_derivative_richardson(|r| r, &[1e-3, 1e-2]).is_err());
    assert!(second_derivative_richardson(|r| r, &[]).is_err());
}

#[test]
fn lemma5_exact_quadratic() {
    let a = HermitianMatrix::new(ComplexMatrix::identity(2)).unwrap();
    let b = HermitianMatrix::new(ComplexMatrix::from_diag(&[1.0, -1.0])).unwrap();
    let rec = check_lemma5(&a, &b, 2.0, &DEFAULT_H_STEPS).unwrap();
    assert!((rec.lhs - 4.0).abs() < 1e-6 && (rec.rhs - 4.0).abs() < 1e-12);
    assert!(rec.margin.abs() < 1e-6 && rec.pass);
}

#[test]
fn lemma5_zero_direction() {
    let a = random_hermitian(3, &mut rng(50));
    let b = HermitianMatrix::new(ComplexMatrix::zeros(3, 3)).unwrap();
    let rec = check_lemma5(&a, &b, 1.5, &DEFAULT_H_STEPS).unwrap();
    assert_eq!(rec.rhs, 0.0);
    assert!(rec.lhs.abs() < 1e-9 && rec.pass);
}

#[test]
fn lemma5_seed_51() {
    let (a, b) = sample_lemma5_pair(4, &mut rng(51));
    let rec = check_lemma5(&a, &b, 1.5, &DEFAULT_H_STEPS).unwrap();
    assert!(rec.margin >= -1e-4 * rec.scale, "{rec:?}");
}

#[test]
fn lemma5_near_singular() {
    let a = HermitianMatrix::new(ComplexMatrix::from_diag(&[1.0, 1e-9])).unwrap();
    let b = HermitianMatrix::new(ComplexMatrix::identity(2)).unwrap();
    assert!(matches!(check_lemma5(&a, &b, 1.5, &DEFAULT_H_STEPS), Err(Error::NearSingular { .. })));
    let _ = PsdMatrix::identity(1);
}

#[test]
fn record_pass_rule() {
    let rec = CheckRecord::new(InequalityId::Gross, fin(1.5), 1, 100.0, 100.0 + 5e-7, -5e-7, 1e-8);
    assert_eq!(rec.scale, 100.0 + 5e-7);
    assert!(rec.pass);
    assert!(!rec.clone().rejudge(1e-10).pass);
    let json = serde_json::to_string(&rec).unwrap();
    assert!(json.contains("\"inequality_id\":\"GROSS\""));
    assert_eq!(serde_json::from_str::<CheckRecord>(&json).unwrap(), rec);
    assert_eq!("hanner_form".parse::<InequalityId>().unwrap(), InequalityId::HannerForm);
}

#[test]
fn fuzz_is_deterministic_and_orders_failures_first() {
    let mut spec = FuzzSpec::new(FuzzTarget::Thm1, 40, 5);
    spec.dims = vec![1, 3];
    let a = fuzz_suite(&spec).unwrap();
    spec.jobs = Some(1);
    let b = fuzz_suite(&spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 40 * spec.p_grid.len());
    assert!(a.iter().all(|r| r.pass));

    let mut strict = spec.clone();
    strict.tol_rel = 0.0;
    let recs = fuzz_suite(&strict).unwrap();
    let first_pass = recs.iter().position(|r| r.pass).unwrap_or(recs.len());
    assert!(recs[first_pass..].iter().all(|r| r.pass));
}

#[test]
fn fuzz_records_revalidate() {
    for target in FuzzTarget::ALL {
        let mut spec = FuzzSpec::new(target, 6, 99);
        spec.dims = vec![2, 3];
        for rec in fuzz_suite(&spec).unwrap() {
            let again = revalidate(target, spec.sampler, &rec, spec.tol_rel);
            assert_eq!(again, rec, "{target}");
        }
        let summary = summarize(&spec, &fuzz_suite(&spec).unwrap());
        assert_eq!(summary.inequality_id, target.name());
        assert_eq!(summary.trials, 6);
    }
}

#[test]
fn fuzz_spec_validation() {
    let mut spec = FuzzSpec::new(FuzzTarget::Thm2, 1, 0);
    spec.p_grid = vec![SchattenExponent::Infinity];
    assert!(fuzz_suite(&spec).is_err());
    spec = FuzzSpec::new(FuzzTarget::Lemma4, 1, 0);
    spec.p_grid = vec![fin(3.0)];
    assert!(fuzz_suite(&spec).is_err());
    spec = FuzzSpec::new(FuzzTarget::Thm1, 0, 0);
    assert!(fuzz_suite(&spec).is_err());
    assert_eq!("THM1B".parse::<FuzzTarget>().unwrap(), FuzzTarget::Thm1);
    assert_eq!("rank-deficient".parse::<SamplerChoice>().unwrap(), SamplerChoice::Fixed(SamplerMode::RankDeficient));
}
