//! Seeded random matrices and states.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::ComplexMatrix;
use crate::schatten::{HermitianMatrix, PsdMatrix};

/// Deterministic generator for trial `index` of a campaign seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, index))
}

/// SplitMix64 mix of `(seed, index)`; used to give every trial its own seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian: `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// `scale · G G* / n` with `G` an `n × rank` Gaussian matrix. `rank = 0`
/// gives the zero matrix.
pub fn wishart<R: Rng + ?Sized>(n: usize, rank: usize, scale: f64, rng: &mut R) -> PsdMatrix {
    if rank == 0 {
        return PsdMatrix::zeros(n);
    }
    let g = gaussian_matrix(n, rank, rng);
    let w = (&g * &g.adjoint()).scale(scale / n as f64);
    PsdMatrix::new(w).expect("Gram matrices are PSD")
}

/// GUE-like Hermitian matrix `(G + G*) / 2`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianMatrix {
    let g = gaussian_matrix(n, n, rng);
    HermitianMatrix::new(g.hermitian_part()).expect("symmetrized matrix is Hermitian")
}

/// Haar unitary from Gram–Schmidt QR of a Gaussian matrix (phases fixed by
/// the positive diagonal of R).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = gaussian_matrix(n, n, rng);
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v: Vec<Complex64> = (0..n).map(|i| g[(i, j)]).collect();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for u in &q {
                let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= norm;
        }
        q.push(v);
    }
    ComplexMatrix::from_fn(n, n, |i, j| q[j][i])
}

/// Haar-random unit vector in `C^d`.
pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Random density matrix of the given rank (`rank = d` is full rank,
/// `rank = 1` a Haar pure state).
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let w = wishart(d, rank.max(1), 1.0, rng);
    let t = w.trace();
    w.matrix().scale(1.0 / t)
}

/// Random qubit-or-larger unitary mixture `Σ w_i U_i ρ U_i*`, returned as Kraus operators.
pub fn random_unitary_mixture<R: Rng + ?Sized>(d: usize, terms: usize, rng: &mut R) -> Vec<ComplexMatrix> {
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .map(|w| random_unitary(d, rng).scale((w / total).sqrt()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..7 {
            let u = random_unitary(n, &mut rng);
            let g = &u.adjoint() * &u;
            assert!(g.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-13);
        }
    }

    #[test]
    fn trial_streams_are_deterministic_and_distinct() {
        let a: f64 = trial_rng(5, 0).random();
        let b: f64 = trial_rng(5, 0).random();
        let c: f64 = trial_rng(5, 1).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn density_has_unit_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(4, 2, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-14);
        let psd = PsdMatrix::new(rho).unwrap();
        assert!(psd.eigenvalues()[2] < 1e-12);
    }
}
