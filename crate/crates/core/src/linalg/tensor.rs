use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use num_traits::Zero;

use super::matrix::ComplexMatrix;
use crate::error::{domain, Result};

/// Ordered tensor factorization `atom ⊗ mode₁ [⊗ mode₂]`.
///
/// The first factor is the most significant digit of the joint index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositeSpace {
    factor_dims: Vec<usize>,
    total_dim: usize,
}

impl CompositeSpace {
    pub fn new(factor_dims: &[usize]) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(domain!("composite space needs at least one factor"));
        }
        if let Some(bad) = factor_dims.iter().find(|&&d| d < 2) {
            return Err(domain!("every factor dimension must be at least 2, got {}", bad));
        }
        Ok(CompositeSpace { factor_dims: factor_dims.to_vec(), total_dim: factor_dims.iter().product() })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn factor_dim(&self, k: usize) -> usize {
        self.factor_dims[k]
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factor_dims.len()];
        for k in (0..self.factor_dims.len() - 1).rev() {
            strides[k] = strides[k + 1] * self.factor_dims[k + 1];
        }
        strides
    }

    /// Splits a joint index into per-factor digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factor_dims.len()];
        for k in (0..self.factor_dims.len()).rev() {
            out[k] = index % self.factor_dims[k];
            index /= self.factor_dims[k];
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.factor_dims).fold(0, |acc, (&d, &n)| acc * n + d)
    }

    /// The subspace made of the listed factors, in their original order.
    pub fn subspace(&self, factors: &[usize]) -> Result<CompositeSpace> {
        let sorted = self.check_factor_set(factors)?;
        CompositeSpace::new(&sorted.iter().map(|&k| self.factor_dims[k]).collect::<Vec<_>>())
    }

    fn check_factor_set(&self, factors: &[usize]) -> Result<Vec<usize>> {
        let mut sorted = factors.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != factors.len() {
            return Err(domain!("factor set {:?} has duplicates", factors));
        }
        if let Some(&bad) = sorted.iter().find(|&&k| k >= self.num_factors()) {
            return Err(domain!("factor {} out of range for {} factors", bad, self.num_factors()));
        }
        Ok(sorted)
    }

    fn check_operator(&self, m: &ComplexMatrix) -> Result<()> {
        if !m.is_square() || m.rows() != self.total_dim {
            return Err(domain!(
                "operator is {}x{} but the space {:?} has dimension {}",
                m.rows(),
                m.cols(),
                self.factor_dims,
                self.total_dim
            ));
        }
        Ok(())
    }

    /// Embeds a single-factor operator as `I ⊗ … ⊗ op ⊗ … ⊗ I`.
    pub fn embed(&self, factor: usize, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        if factor >= self.num_factors() || op.rows() != self.factor_dims[factor] || !op.is_square() {
            return Err(domain!("cannot embed {}x{} operator at factor {}", op.rows(), op.cols(), factor));
        }
        let mut out: Option<ComplexMatrix> = None;
        for (k, &d) in self.factor_dims.iter().enumerate() {
            let piece = if k == factor { op.clone() } else { ComplexMatrix::identity(d) };
            out = Some(match out {
                None => piece,
                Some(acc) => kron(&acc, &piece),
            });
        }
        Ok(out.expect("at least one factor"))
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s.is_zero() {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Traces out every factor not listed in `keep`.
pub fn partial_trace(rho: &ComplexMatrix, space: &CompositeSpace, keep: &[usize]) -> Result<ComplexMatrix> {
    space.check_operator(rho)?;
    let keep = space.check_factor_set(keep)?;
    if keep.is_empty() {
        return Err(domain!("partial trace must keep at least one factor"));
    }
    let traced: Vec<usize> = (0..space.num_factors()).filter(|k| !keep.contains(k)).collect();
    let kept_space = space.subspace(&keep)?;
    let traced_dim: usize = traced.iter().map(|&k| space.factor_dim(k)).product();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| space.factor_dim(k)).collect();

    // Bucket joint indices by their traced-factor digits.
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); traced_dim];
    for r in 0..space.total_dim() {
        let d = space.digits(r);
        let k_idx = keep.iter().fold(0, |acc, &k| acc * space.factor_dim(k) + d[k]);
        let t_idx = traced.iter().zip(&traced_dims).fold(0, |acc, (&k, &n)| acc * n + d[k]);
        groups[t_idx].push((r, k_idx));
    }
    let mut out = ComplexMatrix::zeros(kept_space.total_dim(), kept_space.total_dim());
    for group in &groups {
        for &(r, kr) in group {
            for &(c, kc) in group {
                out[(kr, kc)] += rho[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Transposes the indices of one tensor factor, leaving the others untouched.
pub fn partial_transpose(rho: &ComplexMatrix, space: &CompositeSpace, factor: usize) -> Result<ComplexMatrix> {
    space.check_operator(rho)?;
    if factor >= space.num_factors() {
        return Err(domain!("factor {} out of range for {} factors", factor, space.num_factors()));
    }
    let stride = space.strides()[factor];
    let d = space.factor_dim(factor);
    let n = space.total_dim();
    let digit = |i: usize| (i / stride) % d;
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        let dr = digit(r);
        let r_base = r - dr * stride;
        for c in 0..n {
            let dc = digit(c);
            let c_base = c - dc * stride;
            out[(r_base + dc * stride, c_base + dr * stride)] = rho[(r, c)];
        }
    }
    Ok(out)
}

/// Kronecker product of state vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}
