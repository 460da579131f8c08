//! Dense complex linear algebra: matrices, the Hermitian eigensolver,
//! propagators and tensor-product bookkeeping.

mod eig;
mod matrix;
pub(crate) mod sparse;
mod svd;
mod tensor;

pub use eig::{hermitian_eig, hermitian_eig_with, HermitianEigen};
pub use matrix::{inner, vec_norm, ComplexMatrix};
pub use svd::singular_values;
pub use tensor::{kron, kron_vec, partial_trace, partial_transpose, CompositeSpace};

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::Result;

/// `U = exp(-iHt)` through the eigendecomposition of `H`.
pub fn unitary_from_hamiltonian(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(h)?.propagator(t))
}

/// A Hamiltonian with its eigendecomposition cached, for sampling `exp(-iHt)`
/// at many times.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigen: HermitianEigen,
}

impl Propagator {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        Ok(Propagator { eigen: hermitian_eig(h)? })
    }

    pub fn dim(&self) -> usize {
        self.eigen.dim()
    }

    pub fn unitary(&self, t: f64) -> ComplexMatrix {
        self.eigen.propagator(t)
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    /// `Re Tr[O ρ(t)]` with `ρ(t) = e^{-iHt} ρ₀ e^{iHt}` for every observable
    /// and time. Works in the eigenbasis, so each sample costs O(n²).
    pub fn expectation_series(
        &self,
        rho0: &ComplexMatrix,
        observables: &[&ComplexMatrix],
        times: &[f64],
    ) -> Vec<Vec<f64>> {
        self.trace_series(rho0, observables, times).into_iter().map(|s| s.into_iter().map(|z| z.re).collect()).collect()
    }

    /// `Tr[O ρ(t)]` for operators that need not be Hermitian, such as `a`.
    pub fn trace_series(&self, rho0: &ComplexMatrix, operators: &[&ComplexMatrix], times: &[f64]) -> Vec<Vec<C64>> {
        let n = self.dim();
        let rho_e = self.to_eigenbasis(rho0);
        let weights: Vec<ComplexMatrix> = operators
            .iter()
            .map(|o| {
                let o_e = self.to_eigenbasis(o);
                ComplexMatrix::from_fn(n, n, |j, k| o_e[(k, j)] * rho_e[(j, k)])
            })
            .collect();
        let mut out = vec![Vec::with_capacity(times.len()); operators.len()];
        let mut phases = vec![C64::new(0.0, 0.0); n];
        for &t in times {
            for (p, &l) in phases.iter_mut().zip(&self.eigen.values) {
                *p = C64::new(0.0, -l * t).exp();
            }
            for (w, series) in weights.iter().zip(out.iter_mut()) {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..n {
                    let inner: C64 = w.row(j).iter().zip(&phases).map(|(x, p)| x * p.conj()).sum();
                    acc += phases[j] * inner;
                }
                series.push(acc);
            }
        }
        out
    }

    /// `V† M V`, with `M V` done in compressed-row form when `M` is mostly zero.
    fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.eigen.vectors;
        let n = self.dim();
        let nnz = m.as_slice().iter().filter(|z| z.re != 0.0 || z.im != 0.0).count();
        let mv = if nnz * 8 < n * n {
            let mut out = vec![C64::new(0.0, 0.0); n * n];
            sparse::CsrOperator::from_dense(m).left_mul_acc(v.as_slice(), C64::new(1.0, 0.0), &mut out);
            ComplexMatrix::from_vec(n, n, out).expect("square product")
        } else {
            m.matmul(v)
        };
        v.adjoint().matmul(&mv)
    }
}
