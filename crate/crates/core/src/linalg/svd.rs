//! Singular values by one-sided Jacobi rotations.
//!
//! Rows are orthogonalised pairwise, so the singular values come out as row
//! norms with absolute error near `ε‖A‖` and no squaring of small values.
//! The rows are first rotated into the eigenbasis of `AA†`, which leaves them
//! nearly orthogonal so that only a few sweeps are needed.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use super::eig::hermitian_eig;
use super::matrix::ComplexMatrix;
use crate::error::{tolerance, Result};

const MAX_SWEEPS: usize = 60;

/// Singular values of `a`, descending.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let m = if a.rows() <= a.cols() { a.clone() } else { a.adjoint() };
    let gram = m.matmul_adjoint(&m).hermitian_part();
    let m = hermitian_eig(&gram)?.vectors.adjoint().matmul(&m);
    let (rows, cols) = (m.rows(), m.cols());
    let mut data = m.into_vec();
    let mut norms: Vec<f64> = (0..rows).map(|i| row_norm_sqr(&data[i * cols..(i + 1) * cols])).collect();
    let eps = f64::EPSILON;
    let tol = eps * (rows as f64).sqrt();
    // rows this small cannot move any singular value by more than ε‖A‖
    let negligible = (eps * norms.iter().sum::<f64>().sqrt()).powi(2);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..rows {
            for q in p + 1..rows {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let (head, tail) = data.split_at_mut(q * cols);
                let rp = &mut head[p * cols..(p + 1) * cols];
                let rq = &mut tail[..cols];
                let gamma: C64 = rp.iter().zip(rq.iter()).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
                    let yt = *y * phase.conj();
                    let nx = *x * c - yt * s;
                    let ny = *x * s + yt * c;
                    *x = nx;
                    *y = ny * phase;
                }
                norms[p] = row_norm_sqr(rp);
                norms[q] = row_norm_sqr(rq);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(tolerance!("Jacobi SVD did not converge in {} sweeps", MAX_SWEEPS));
    }
    let mut values: Vec<f64> = norms.iter().map(|n| n.sqrt()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

fn row_norm_sqr(row: &[C64]) -> f64 {
    row.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_rank_one() {
        let d = ComplexMatrix::from_diag(&[C64::new(0.0, -3.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let s = singular_values(&d).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 1.0).abs() < 1e-14 && s[2].abs() < 1e-14);
        let v = [C64::new(1.0, 1.0), C64::new(0.0, 2.0)];
        let w = [C64::new(3.0, 0.0), C64::new(0.0, -4.0), C64::new(1.0, 0.0)];
        let r = ComplexMatrix::outer(&v, &w);
        let s = singular_values(&r).unwrap();
        assert!((s[0] - 6.0f64.sqrt() * 26.0f64.sqrt()).abs() < 1e-12);
        assert!(s[1] < 1e-12);
    }

    #[test]
    fn matches_gram_eigenvalues() {
        let a =
            ComplexMatrix::from_fn(5, 4, |i, j| C64::new((i * 3 + j) as f64 * 0.1 - 0.7, (i as f64 - j as f64).sin()));
        let s = singular_values(&a).unwrap();
        let gram = a.adjoint().matmul(&a);
        let eig = super::super::hermitian_eig(&gram.hermitian_part()).unwrap();
        let mut from_eig: Vec<f64> = eig.values.iter().map(|l| l.max(0.0).sqrt()).collect();
        from_eig.sort_by(|a, b| b.total_cmp(a));
        for (x, y) in s.iter().zip(&from_eig) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
