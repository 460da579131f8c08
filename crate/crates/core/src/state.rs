//! Density matrices and joint atom–field states.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use num_traits::Zero;

use crate::error::{domain, Result};
use crate::linalg::{hermitian_eig, vec_norm, ComplexMatrix, CompositeSpace};
use crate::Tolerances;

/// Trace-one Hermitian matrix. Positivity is checked on demand
/// ([`DensityMatrix::check_positive`]) since it costs an eigensolve.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::new_with(m, &Tolerances::default())
    }

    pub fn new_with(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !m.is_square() {
            return Err(domain!("density matrix must be square, got {}x{}", m.rows(), m.cols()));
        }
        if !m.is_hermitian(tol.hermiticity) {
            return Err(domain!("density matrix is not Hermitian (defect {:.3e})", m.hermiticity_defect()));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol.trace_drift {
            return Err(domain!("density matrix trace is {:.12} instead of 1", tr));
        }
        Ok(DensityMatrix(m))
    }

    /// Rescales to unit trace and Hermitian-symmetrizes before validating.
    pub fn normalized(m: ComplexMatrix) -> Result<Self> {
        let tr = m.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(domain!("cannot normalize an operator with trace {}", tr));
        }
        Self::new(m.hermitian_part().scale_real(1.0 / tr))
    }

    pub(crate) fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        DensityMatrix(m)
    }

    /// `|ψ⟩⟨ψ|` for a normalized `ψ`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm = vec_norm(psi);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(domain!("state vector has norm {} instead of 1", norm));
        }
        Self::new(ComplexMatrix::outer(psi, psi))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }

    /// `Tr[ρ O]`
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        self.0.trace_product(op)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eig(&self.0)?.values[0])
    }

    pub fn check_positive(&self, floor: f64) -> Result<()> {
        let lo = self.min_eigenvalue()?;
        if lo < floor {
            return Err(domain!("density matrix has eigenvalue {:.3e} below {:.1e}", lo, floor));
        }
        Ok(())
    }

    /// `U ρ U†`; trace and Hermiticity are preserved by construction.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Self {
        DensityMatrix(self.0.conjugate_by(u).hermitian_part())
    }
}

/// Atom–field state on `atom ⊗ mode₁ [⊗ mode₂]`.
///
/// The state may be stored in a displaced frame: `frame[k]` is the coherent
/// amplitude by which mode `k` has been shifted out of the representation, so
/// the laboratory state is `D(frame) ρ D(frame)†`. A zero frame is the
/// laboratory frame.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub rho: DensityMatrix,
    pub space: CompositeSpace,
    pub time: f64,
    pub frame: Vec<C64>,
}

impl JointState {
    pub fn new(rho: DensityMatrix, space: CompositeSpace) -> Result<Self> {
        if rho.dim() != space.total_dim() {
            return Err(domain!("state dimension {} does not match space {}", rho.dim(), space.total_dim()));
        }
        if space.num_factors() < 2 || space.factor_dim(0) != 2 {
            return Err(domain!("joint space must be atom (dimension 2) followed by at least one mode"));
        }
        let modes = space.num_factors() - 1;
        Ok(JointState { rho, space, time: 0.0, frame: vec![C64::zero(); modes] })
    }

    pub fn with_frame(mut self, frame: &[C64]) -> Result<Self> {
        if frame.len() != self.num_modes() {
            return Err(domain!("frame has {} amplitudes for {} modes", frame.len(), self.num_modes()));
        }
        self.frame = frame.to_vec();
        Ok(self)
    }

    pub fn num_modes(&self) -> usize {
        self.space.num_factors() - 1
    }

    pub fn mode_dim(&self, mode: usize) -> usize {
        self.space.factor_dim(mode + 1)
    }

    pub fn is_lab_frame(&self) -> bool {
        self.frame.iter().all(|z| z.is_zero())
    }

    /// Reduced atomic density matrix.
    pub fn atom_state(&self) -> Result<ComplexMatrix> {
        crate::linalg::partial_trace(self.rho.matrix(), &self.space, &[0])
    }

    /// `(P_e, P_g)` from the atomic populations.
    pub fn atom_populations(&self) -> (f64, f64) {
        let block = self.space.total_dim() / 2;
        let m = self.rho.matrix();
        let pe: f64 = (0..block).map(|i| m[(i, i)].re).sum();
        let pg: f64 = (block..2 * block).map(|i| m[(i, i)].re).sum();
        (pe, pg)
    }

    /// Unnormalized field block `⟨a|ρ|b⟩` for atomic indices `a, b` (0 = e, 1 = g).
    pub fn atom_block(&self, a: usize, b: usize) -> ComplexMatrix {
        let block = self.space.total_dim() / 2;
        self.rho.matrix().block(a * block, b * block, block, block)
    }

    /// Field state conditioned on the atom being found in `|e⟩` (0) or `|g⟩` (1).
    pub fn project_atom(&self, outcome: usize) -> Result<(DensityMatrix, f64)> {
        if outcome > 1 {
            return Err(domain!("atomic outcome must be 0 (e) or 1 (g)"));
        }
        let b = self.atom_block(outcome, outcome);
        let p = b.trace().re;
        if p <= 1e-14 {
            return Err(domain!("atomic outcome {} has vanishing probability {:.3e}", outcome, p));
        }
        Ok((DensityMatrix::normalized(b)?, p))
    }

    /// Field state with the atom traced out.
    pub fn field_state(&self) -> Result<DensityMatrix> {
        let keep: Vec<usize> = (1..self.space.num_factors()).collect();
        let m = crate::linalg::partial_trace(self.rho.matrix(), &self.space, &keep)?;
        DensityMatrix::normalized(m)
    }

    /// The space of the field factors alone.
    pub fn field_space(&self) -> Result<CompositeSpace> {
        let keep: Vec<usize> = (1..self.space.num_factors()).collect();
        self.space.subspace(&keep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_trace_and_non_hermitian() {
        let m = ComplexMatrix::from_real_diag(&[0.5, 0.4]);
        assert!(DensityMatrix::new(m).is_err());
        let m = ComplexMatrix::from_real(2, 2, &[0.5, 0.1, 0.0, 0.5]).unwrap();
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn pure_state_has_unit_purity() {
        let s = 0.5f64.sqrt();
        let psi = [C64::new(s, 0.0), C64::new(0.0, s)];
        let rho = DensityMatrix::pure(&psi).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-15);
        rho.check_positive(-1e-12).unwrap();
    }

    #[test]
    fn projection_and_populations() {
        let space = CompositeSpace::new(&[2, 2]).unwrap();
        let m = ComplexMatrix::from_real_diag(&[0.1, 0.2, 0.3, 0.4]);
        let js = JointState::new(DensityMatrix::new(m).unwrap(), space).unwrap();
        let (pe, pg) = js.atom_populations();
        assert!((pe - 0.3).abs() < 1e-15 && (pg - 0.7).abs() < 1e-15);
        let (field, p) = js.project_atom(1).unwrap();
        assert!((p - 0.7).abs() < 1e-15);
        assert!((field.matrix()[(0, 0)].re - 3.0 / 7.0).abs() < 1e-15);
        assert!(js.project_atom(2).is_err());
    }
}
