//! Dense Hermitian eigensolver.
//!
//! Householder reduction to a Hermitian tridiagonal matrix, a diagonal phase
//! change that makes the off-diagonal real, then implicit QL iterations with
//! Wilkinson-type shifts on the real symmetric tridiagonal matrix. Rotations
//! are accumulated directly onto the complex basis.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use super::matrix::ComplexMatrix;
use crate::error::{domain, tolerance, Result};
use crate::tolerance::Tolerances;

const MAX_QL_SWEEPS: usize = 60;

/// `M = V diag(λ) V†` with eigenvalues ascending and `V` unitary.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(λ)) V†`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let weights: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        let scaled = ComplexMatrix::from_fn(n, n, |i, k| self.vectors[(i, k)] * weights[k]);
        scaled.matmul_adjoint(&self.vectors)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| C64::new(l, 0.0))
    }

    /// `exp(-i λ t)` applied through the eigenbasis.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        self.map_spectrum(|l| C64::new(0.0, -l * t).exp())
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

/// Eigendecomposition of a Hermitian matrix using the default tolerances.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eig_with(m, &Tolerances::default())
}

pub fn hermitian_eig_with(m: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(domain!("eigendecomposition needs a square matrix, got {}x{}", m.rows(), m.cols()));
    }
    if !m.is_hermitian(tol.hermiticity) {
        return Err(domain!(
            "matrix is not Hermitian: defect {:.3e} vs scale {:.3e}",
            m.hermiticity_defect(),
            m.max_abs()
        ));
    }
    let n = m.dim();
    if n == 1 {
        return Ok(HermitianEigen { values: vec![m[(0, 0)].re], vectors: ComplexMatrix::identity(1) });
    }
    let herm = m.hermitian_part();
    let (mut diag, mut off, basis) = tridiagonalize(herm.as_slice(), n);
    // Row j of `rows` holds basis column j, so QL rotations touch contiguous memory.
    let mut rows = basis.transpose().into_vec();
    tridiagonal_ql(&mut diag, &mut off, &mut rows, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap_or(core::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| diag[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, j| rows[order[j] * n + r]);
    Ok(HermitianEigen { values, vectors })
}

/// Returns `(d, e, Z)` with `A = Z T Z†`, `T` real symmetric tridiagonal with
/// diagonal `d` and subdiagonal `e[0..n-1]` (`e[n-1] = 0`).
fn tridiagonalize(src: &[C64], n: usize) -> (Vec<f64>, Vec<f64>, ComplexMatrix) {
    let mut a = src.to_vec();
    let mut q = ComplexMatrix::identity(n);
    let mut v = vec![C64::zero(); n];
    let mut p = vec![C64::zero(); n];

    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let tail: f64 = (lo + 1..n).map(|i| a[i * n + k].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let x0 = a[lo * n + k];
        let xnorm = (tail + x0.norm_sqr()).sqrt();
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;

        for i in lo..n {
            v[i] = a[i * n + k];
        }
        v[lo] -= alpha;
        let vnorm = (lo..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for vi in &mut v[lo..n] {
            *vi /= vnorm;
        }

        // Trailing block B <- H B H with H = I - 2 v v†.
        for i in lo..n {
            let row = &a[i * n..(i + 1) * n];
            p[i] = (lo..n).map(|j| row[j] * v[j]).sum();
        }
        let c: f64 = (lo..n).map(|i| (v[i].conj() * p[i]).re).sum();
        for i in lo..n {
            p[i] -= v[i] * c;
        }
        for i in lo..n {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[i * n..(i + 1) * n];
            for j in lo..n {
                row[j] -= (vi * p[j].conj() + wi * v[j].conj()) * 2.0;
            }
        }
        a[lo * n + k] = alpha;
        a[k * n + lo] = alpha.conj();
        for i in lo + 1..n {
            a[i * n + k] = C64::zero();
            a[k * n + i] = C64::zero();
        }

        // Q <- Q H
        for r in 0..n {
            let qrow = &mut q.as_mut_slice()[r * n..(r + 1) * n];
            let s: C64 = (lo..n).map(|j| qrow[j] * v[j]).sum::<C64>() * 2.0;
            for j in lo..n {
                qrow[j] -= s * v[j].conj();
            }
        }
        for vi in &mut v[lo..n] {
            *vi = C64::zero();
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut off = vec![0.0; n];
    let mut phases = vec![C64::new(1.0, 0.0); n];
    for i in 0..n - 1 {
        let t = a[(i + 1) * n + i];
        off[i] = t.norm();
        phases[i + 1] = if off[i] > 0.0 { phases[i] * (t / off[i]) } else { phases[i] };
    }
    let z = ComplexMatrix::from_fn(n, n, |r, j| q[(r, j)] * phases[j]);
    (diag, off, z)
}

/// Implicit QL on a real symmetric tridiagonal matrix; `rows` holds one basis
/// vector per row and receives the accumulated rotations.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], rows: &mut [C64], n: usize) -> Result<()> {
    let eps = f64::EPSILON;
    let mut shift_total = 0.0;
    let mut scale = 0.0f64;
    for l in 0..n {
        scale = scale.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * scale {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(tolerance!("QL iteration did not converge for eigenvalue {}", l));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                shift_total += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate_rows(rows, n, i, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * scale {
                    break;
                }
            }
        }
        d[l] += shift_total;
        e[l] = 0.0;
    }
    Ok(())
}

#[inline]
fn rotate_rows(rows: &mut [C64], n: usize, i: usize, c: f64, s: f64) {
    let (head, tail) = rows.split_at_mut((i + 1) * n);
    let ri = &mut head[i * n..];
    let rj = &mut tail[..n];
    for (x, y) in ri.iter_mut().zip(rj.iter_mut()) {
        let h = *y;
        *y = *x * s + h * c;
        *x = *x * c - h * s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unitarity_defect(v: &ComplexMatrix) -> f64 {
        v.adjoint().matmul(v).max_abs_diff(&ComplexMatrix::identity(v.rows()))
    }

    #[test]
    fn diagonal_input_sorts_and_permutes() {
        let m = ComplexMatrix::from_real_diag(&[3.0, 1.0]);
        let eig = hermitian_eig(&m).unwrap();
        assert_eq!(eig.values, vec![1.0, 3.0]);
        assert!((eig.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((eig.vectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_x() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let eig = hermitian_eig(&m).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_three_by_three() {
        let m = ComplexMatrix::from_vec(
            3,
            3,
            vec![
                C64::new(2.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(1.0, -1.0),
                C64::new(0.0, -1.0),
                C64::new(-1.0, 0.0),
                C64::new(0.5, 0.0),
                C64::new(1.0, 1.0),
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let eig = hermitian_eig(&m).unwrap();
        assert!(eig.reconstruct().max_abs_diff(&m) < 1e-13);
        assert!(unitarity_defect(&eig.vectors) < 1e-13);
    }

    #[test]
    fn degenerate_spectrum() {
        let m = ComplexMatrix::identity(5).scale_real(2.5);
        let eig = hermitian_eig(&m).unwrap();
        assert!(eig.values.iter().all(|&l| (l - 2.5).abs() < 1e-14));
        assert!(unitarity_defect(&eig.vectors) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(crate::Error::Domain(_))));
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&r), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn zero_matrix() {
        let eig = hermitian_eig(&ComplexMatrix::zeros(4, 4)).unwrap();
        assert!(eig.values.iter().all(|&l| l == 0.0));
        assert!(unitarity_defect(&eig.vectors) < 1e-15);
    }
}
