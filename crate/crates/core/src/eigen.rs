//! Cyclic Jacobi methods: Hermitian eigendecomposition and one-sided
//! (Hestenes) singular values.
//!
//! Both routines reduce every 2x2 pivot to a real symmetric problem by a
//! phase rotation. With `a_pq = r e^{iφ}` the combined unitary acting on
//! columns `p, q` is
//!
//! ```text
//! G = [[ c,       s      ],
//!      [-s e^{-iφ}, c e^{-iφ}]]
//! ```
//!
//! with `t = sgn(θ) / (|θ| + sqrt(θ² + 1))`, `θ = (a_qq - a_pp) / 2r`,
//! `c = 1/sqrt(1 + t²)`, `s = t c`, which annihilates the pivot.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

/// Sweep cap for both Jacobi variants.
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, Copy)]
struct Rotation {
    c: f64,
    s: f64,
    /// `e^{iφ}` of the pivot.
    phase: Complex64,
}

impl Rotation {
    /// Rotation annihilating `pq` of the Hermitian 2x2 `[[app, apq], [conj(apq), aqq]]`.
    fn for_pivot(app: f64, aqq: f64, apq: Complex64) -> Self {
        let r = apq.norm();
        let phase = apq / r;
        let theta = (aqq - app) / (2.0 * r);
        let t = if theta.is_infinite() {
            0.0
        } else {
            theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        Rotation { c, s: t * c, phase }
    }

    /// `(x, y) <- (x, y) G` for a row pair of entries in columns `p, q`.
    #[inline]
    fn apply_right(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let ey = y * self.phase.conj();
        (x * self.c - ey * self.s, x * self.s + ey * self.c)
    }

    /// `(x, y) <- G* (x, y)` for a column pair of entries in rows `p, q`.
    #[inline]
    fn apply_left_adjoint(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let ey = y * self.phase;
        (x * self.c - ey * self.s, x * self.s + ey * self.c)
    }
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues (descending) and optionally eigenvectors (columns) of a
/// Hermitian matrix given as a square `ComplexMatrix`. The caller is
/// responsible for Hermiticity; only the upper triangle's partner
/// relation is assumed.
pub fn jacobi_eigh(m: &ComplexMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<ComplexMatrix>)> {
    let n = m.require_square()?;
    let mut a: Vec<Complex64> = m.data().to_vec();
    let mut v: Option<Vec<Complex64>> = want_vectors.then(|| ComplexMatrix::identity(n).data().to_vec());

    let total = m.frobenius_norm();
    let target = f64::EPSILON * total;
    let mut converged = n == 1 || total == 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.norm() <= f64::MIN_POSITIVE {
                    continue;
                }
                let rot = Rotation::for_pivot(a[p * n + p].re, a[q * n + q].re, apq);
                for k in 0..n {
                    let (x, y) = rot.apply_right(a[k * n + p], a[k * n + q]);
                    a[k * n + p] = x;
                    a[k * n + q] = y;
                }
                for k in 0..n {
                    let (x, y) = rot.apply_left_adjoint(a[p * n + k], a[q * n + k]);
                    a[p * n + k] = x;
                    a[q * n + k] = y;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p].im = 0.0;
                a[q * n + q].im = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let (x, y) = rot.apply_right(v[k * n + p], v[k * n + q]);
                        v[k * n + p] = x;
                        v[k * n + q] = y;
                    }
                }
            }
        }
        converged = off_diagonal_norm(&a, n) <= target;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps, residual: off_diagonal_norm(&a, n) });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = v.map(|v| ComplexMatrix::from_fn(n, n, |i, j| v[i * n + order[j]]));
    Ok((values, vectors))
}

/// Singular values (descending) by one-sided Jacobi on the columns of `m`
/// (or of `m*` when `m` is wide). Small singular values keep their
/// relative accuracy, unlike the square roots of eigenvalues of `m* m`.
pub fn jacobi_singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let owned;
    let m = if m.cols() > m.rows() {
        owned = m.adjoint();
        &owned
    } else {
        m
    };
    let (rows, cols) = (m.rows(), m.cols());
    // column-major working copy
    let mut cols_data: Vec<Vec<Complex64>> = (0..cols).map(|j| (0..rows).map(|i| m[(i, j)]).collect()).collect();

    let mut sweeps = 0;
    let mut converged = cols == 1;
    let mut residual = 0.0f64;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        converged = true;
        residual = 0.0;
        for p in 0..cols - 1 {
            for q in p + 1..cols {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols_data[p], &cols_data[q]);
                    let alpha: f64 = cp.iter().map(|z| z.norm_sqr()).sum();
                    let beta: f64 = cq.iter().map(|z| z.norm_sqr()).sum();
                    let gamma: Complex64 = cp.iter().zip(cq).map(|(x, y)| x.conj() * y).sum();
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g <= f64::EPSILON * (alpha * beta).sqrt() || g <= f64::MIN_POSITIVE {
                    continue;
                }
                residual = residual.max(g / (alpha * beta).sqrt());
                converged = false;
                let rot = Rotation::for_pivot(alpha, beta, gamma);
                let (left, right) = cols_data.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
                    let (nx, ny) = rot.apply_right(*x, *y);
                    *x = nx;
                    *y = ny;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps, residual });
    }
    let mut sv: Vec<f64> = cols_data.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}
