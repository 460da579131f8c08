use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;

/// Compressed-row copy of a mostly-zero operator, used to apply Hamiltonians
/// and jump operators to dense density matrices in O(nnz · n).
#[derive(Debug, Clone)]
pub(crate) struct CsrOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl CsrOperator {
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let dim = m.rows();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v.re != 0.0 || v.im != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrOperator { dim, row_ptr, cols, vals }
    }

    pub fn adjoint(&self) -> Self {
        let mut triplets: Vec<(usize, usize, C64)> = Vec::with_capacity(self.vals.len());
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                triplets.push((self.cols[k], i, self.vals[k].conj()));
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = alloc::vec![0; self.dim + 1];
        for &(r, _, _) in &triplets {
            row_ptr[r + 1] += 1;
        }
        for i in 0..self.dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrOperator {
            dim: self.dim,
            row_ptr,
            cols: triplets.iter().map(|t| t.1).collect(),
            vals: triplets.iter().map(|t| t.2).collect(),
        }
    }

    /// `out += s · (self · rho)`
    pub fn left_mul_acc(&self, rho: &[C64], s: C64, out: &mut [C64]) {
        let n = self.dim;
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.vals[k] * s;
                let src = &rho[self.cols[k] * n..(self.cols[k] + 1) * n];
                for (o, &r) in out_row.iter_mut().zip(src) {
                    *o += a * r;
                }
            }
        }
    }

    /// `out += s · (rho · self)`
    pub fn right_mul_acc(&self, rho: &[C64], s: C64, out: &mut [C64]) {
        let n = self.dim;
        for i in 0..n {
            let src_row = &rho[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (p, &r) in src_row.iter().enumerate() {
                if r.re == 0.0 && r.im == 0.0 {
                    continue;
                }
                let rs = r * s;
                for k in self.row_ptr[p]..self.row_ptr[p + 1] {
                    out_row[self.cols[k]] += rs * self.vals[k];
                }
            }
        }
    }
}
