//! Distinguishability and entanglement measures on dense density matrices.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{domain, Result};
use crate::fock::{displaced_thermal_state, truncation_for, FockSpace, ThermalParams, DEFAULT_TAIL_TOL};
use crate::linalg::{hermitian_eig, partial_transpose, singular_values, ComplexMatrix, CompositeSpace};
use crate::state::DensityMatrix;
use crate::Tolerances;

/// A split of a composite space into two complementary factor sets.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteSplit {
    space: CompositeSpace,
    a: Vec<usize>,
    b: Vec<usize>,
}

impl BipartiteSplit {
    pub fn new(space: CompositeSpace, a: &[usize], b: &[usize]) -> Result<Self> {
        let n = space.num_factors();
        let mut seen = alloc::vec![0u8; n];
        for &k in a.iter().chain(b) {
            if k >= n {
                return Err(domain!("factor {} out of range for {} factors", k, n));
            }
            seen[k] += 1;
        }
        if a.is_empty() || b.is_empty() || seen.iter().any(|&c| c != 1) {
            return Err(domain!("partition {:?} | {:?} must cover all {} factors exactly once", a, b, n));
        }
        Ok(BipartiteSplit { space, a: a.to_vec(), b: b.to_vec() })
    }

    /// First factor against the rest.
    pub fn first_vs_rest(space: CompositeSpace) -> Result<Self> {
        let rest: Vec<usize> = (1..space.num_factors()).collect();
        Self::new(space, &[0], &rest)
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn part_a(&self) -> &[usize] {
        &self.a
    }

    pub fn part_b(&self) -> &[usize] {
        &self.b
    }
}

/// `ρ^{T_B}` with the transpose applied to every factor of part B.
pub fn partial_transpose_split(rho: &ComplexMatrix, split: &BipartiteSplit) -> Result<ComplexMatrix> {
    let mut out = rho.clone();
    for &k in &split.b {
        out = partial_transpose(&out, &split.space, k)?;
    }
    Ok(out)
}

/// `(‖ρ^{T_B}‖₁ - 1)/2`, the magnitude of the negative spectrum of the
/// partial transpose.
pub fn negativity(rho: &DensityMatrix, split: &BipartiteSplit) -> Result<f64> {
    if rho.dim() != split.space.total_dim() {
        return Err(domain!("state dimension {} does not match split space {}", rho.dim(), split.space.total_dim()));
    }
    let pt = partial_transpose_split(rho.matrix(), split)?;
    let eig = hermitian_eig(&pt.hermitian_part())?;
    Ok(eig.values.iter().filter(|&&l| l < 0.0).map(|l| -l).sum())
}

fn check_pair(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(domain!("states have dimensions {} and {}", rho.dim(), sigma.dim()));
    }
    Ok(())
}

/// `√ρ` from the eigendecomposition, rejecting eigenvalues below the floor.
fn psd_sqrt(rho: &ComplexMatrix, floor: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(rho)?;
    if eig.values[0] < floor {
        return Err(domain!("state has eigenvalue {:.3e} below {:.1e}", eig.values[0], floor));
    }
    Ok(eig.map_spectrum(|l| C64::new(l.max(0.0).sqrt(), 0.0)))
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`, evaluated as the squared sum of the
/// singular values of `√ρ √σ`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    fidelity_with(rho, sigma, &Tolerances::default())
}

pub fn fidelity_with(rho: &DensityMatrix, sigma: &DensityMatrix, tol: &Tolerances) -> Result<f64> {
    check_pair(rho, sigma)?;
    let floor = tol.positivity_floor;
    let a = psd_sqrt(rho.matrix(), floor)?;
    let b = psd_sqrt(sigma.matrix(), floor)?;
    let root: f64 = singular_values(&a.matmul(&b))?.iter().sum();
    Ok((root * root).min(1.0))
}

/// `½‖ρ - σ‖₁`
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_pair(rho, sigma)?;
    let diff = (rho.matrix() - sigma.matrix()).hermitian_part();
    let eig = hermitian_eig(&diff)?;
    Ok((0.5 * eig.values.iter().map(|l| l.abs()).sum::<f64>()).min(1.0))
}

/// `Tr[ρ₋ ρ₊]` for the two paths `ρ∓ = D(α)D(∓β)ρ_th D(∓β)†D(α)†`.
///
/// Both paths are the displaced thermal states centred at `α ∓ β`.
pub fn branch_overlap(alpha: C64, params: ThermalParams, beta: C64) -> Result<f64> {
    let reach = alpha.norm() + beta.norm();
    let n = truncation_for(C64::new(reach, 0.0).into(), params, DEFAULT_TAIL_TOL * 1e-3);
    let space = FockSpace::new(n)?;
    let minus = displaced_thermal_state((alpha - beta).into(), params, &space)?;
    let plus = displaced_thermal_state((alpha + beta).into(), params, &space)?;
    Ok(minus.matrix().trace_product(plus.matrix()).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> DensityMatrix {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        DensityMatrix::pure(&[C64::new(s, 0.0), z, z, C64::new(s, 0.0)]).unwrap()
    }

    #[test]
    fn bell_state_negativity_is_half() {
        let space = CompositeSpace::new(&[2, 2]).unwrap();
        let split = BipartiteSplit::new(space, &[0], &[1]).unwrap();
        assert!((negativity(&bell(), &split).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn split_must_partition() {
        let space = CompositeSpace::new(&[2, 2, 3]).unwrap();
        assert!(BipartiteSplit::new(space.clone(), &[0], &[1]).is_err());
        assert!(BipartiteSplit::new(space.clone(), &[0, 1], &[1, 2]).is_err());
        assert!(BipartiteSplit::new(space, &[0, 2], &[1]).is_ok());
    }

    #[test]
    fn fidelity_and_distance_extremes() {
        let e = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let g = DensityMatrix::pure(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert!(fidelity(&e, &g).unwrap().abs() < 1e-12);
        assert!((fidelity(&e, &e).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_distance(&e, &g).unwrap() - 1.0).abs() < 1e-12);
        assert!(trace_distance(&e, &e).unwrap().abs() < 1e-12);
    }

    #[test]
    fn overlap_closed_forms() {
        let th = ThermalParams::new(0.7).unwrap();
        let at_zero = branch_overlap(C64::new(2.0, 0.0), th, C64::new(0.0, 0.0)).unwrap();
        assert!((at_zero - 1.0 / 2.4).abs() < 1e-9);
        let beta = C64::new(0.0, 0.8);
        let coherent = branch_overlap(C64::new(1.0, 0.0), ThermalParams::vacuum(), beta).unwrap();
        assert!((coherent - (-4.0 * 0.64f64).exp()).abs() < 1e-9);
    }
}
