//! Wigner functions on rectangular phase-space grids, `γ = x + ip`.
//!
//! `W(γ) = (2/π) Tr[ρ D(γ) Π D†(γ)]`. Since `D(γ)ΠD†(γ) = D(2γ)Π`, every
//! grid point needs only the block `⟨n|D(2γ)|m⟩` on the state's own cutoff,
//! which is generated by a normalized Laguerre recurrence.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{domain, truncation, Result};
use crate::fock::FockSpace;
use crate::state::DensityMatrix;

const FRAC_2_PI: f64 = core::f64::consts::FRAC_2_PI;

/// Sampling rectangle `[x_min, x_max] × [p_min, p_max]` with `nx × np` points.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    x_range: (f64, f64),
    p_range: (f64, f64),
    nx: usize,
    np: usize,
}

impl PhaseSpaceGrid {
    pub fn new(x_range: (f64, f64), p_range: (f64, f64), nx: usize, np: usize) -> Result<Self> {
        let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.1 > r.0;
        if !ok(x_range) || !ok(p_range) {
            return Err(domain!("grid ranges must be finite and nonempty: {:?} × {:?}", x_range, p_range));
        }
        if nx < 2 || np < 2 {
            return Err(domain!("grid needs at least two points per axis, got {} × {}", nx, np));
        }
        Ok(PhaseSpaceGrid { x_range, p_range, nx, np })
    }

    /// Square-pixel grid covering every center by `margin` on all sides,
    /// with `per_unit` points per unit length.
    pub fn covering(centers: &[C64], margin: f64, per_unit: f64) -> Result<Self> {
        if centers.is_empty() || !(margin > 0.0) || !(per_unit > 0.0) {
            return Err(domain!("covering grid needs centers, a positive margin and a positive density"));
        }
        let fold = |f: fn(&C64) -> f64, init: f64, pick: fn(f64, f64) -> f64| centers.iter().map(f).fold(init, pick);
        let x0 = fold(|c| c.re, f64::INFINITY, f64::min) - margin;
        let x1 = fold(|c| c.re, f64::NEG_INFINITY, f64::max) + margin;
        let p0 = fold(|c| c.im, f64::INFINITY, f64::min) - margin;
        let p1 = fold(|c| c.im, f64::NEG_INFINITY, f64::max) + margin;
        let count = |a: f64, b: f64| (((b - a) * per_unit).round() as usize + 1).max(2);
        Self::new((x0, x1), (p0, p1), count(x0, x1), count(p0, p1))
    }

    /// Grid around the branch centers with a margin of four thermal widths.
    pub fn for_branches(centers: &[C64], n_bar: f64, per_unit: f64) -> Result<Self> {
        let width = ((2.0 * n_bar + 1.0) / 4.0).sqrt();
        Self::covering(centers, 4.0 * width.max(0.5), per_unit)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.x_range
    }

    pub fn p_range(&self) -> (f64, f64) {
        self.p_range
    }

    pub fn dx(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_range.1 - self.p_range.0) / (self.np - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_range.0 + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_range.0 + j as f64 * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.np).map(|j| self.p(j)).collect()
    }

    /// The same grid moved by `shift`.
    pub fn translated(&self, shift: C64) -> Self {
        PhaseSpaceGrid {
            x_range: (self.x_range.0 + shift.re, self.x_range.1 + shift.re),
            p_range: (self.p_range.0 + shift.im, self.p_range.1 + shift.im),
            ..self.clone()
        }
    }
}

/// Wigner samples, `values[i * np + j] = W(x_i + i p_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub grid: PhaseSpaceGrid,
    pub values: Vec<f64>,
    /// Largest `|Im W|` met while summing, a check on Hermiticity.
    pub imaginary_residue: f64,
}

impl WignerGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.np + j]
    }

    /// Riemann sum of `W dx dp`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dp()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, point: C64) -> Option<f64> {
        let g = &self.grid;
        let u = (point.re - g.x_range.0) / g.dx();
        let v = (point.im - g.p_range.0) / g.dp();
        let eps = 1e-9;
        if !(u >= -eps && v >= -eps && u <= (g.nx - 1) as f64 + eps && v <= (g.np - 1) as f64 + eps) {
            return None;
        }
        let i = (u.floor().max(0.0) as usize).min(g.nx - 2);
        let j = (v.floor().max(0.0) as usize).min(g.np - 2);
        let (fu, fv) = (u - i as f64, v - j as f64);
        Some(
            self.at(i, j) * (1.0 - fu) * (1.0 - fv)
                + self.at(i + 1, j) * fu * (1.0 - fv)
                + self.at(i, j + 1) * (1.0 - fu) * fv
                + self.at(i + 1, j + 1) * fu * fv,
        )
    }
}

/// `⟨n|D(β)|m⟩` for `n, m < dim`, row-major in `n`.
pub(crate) fn displacement_elements(beta: C64, dim: usize, out: &mut [C64]) {
    let x = beta.norm_sqr();
    let r = beta.norm();
    let phase = if r > 0.0 { beta / r } else { C64::new(1.0, 0.0) };
    let mut ln_fact = 0.0;
    for k in 0..dim {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        // ⟨m+k|D(β)|m⟩ = phase^k e^{ln_mag} g_m with g the normalized Laguerre recurrence
        let ln_mag = if k == 0 {
            -0.5 * x
        } else if r == 0.0 {
            f64::NEG_INFINITY
        } else {
            k as f64 * r.ln() - 0.5 * x - 0.5 * ln_fact
        };
        let lower = phase.powu(k as u32);
        let upper = (-phase.conj()).powu(k as u32);
        let kf = k as f64;
        let (mut prev, mut cur, mut ln_scale) = (0.0, 1.0, ln_mag);
        for m in 0..dim - k {
            if m > 0 {
                let mf = (m - 1) as f64;
                let next = ((2.0 * mf + 1.0 + kf - x) * cur - (mf * (mf + kf)).sqrt() * prev)
                    / ((mf + 1.0) * (mf + 1.0 + kf)).sqrt();
                prev = cur;
                cur = next;
                if cur.abs() > 1e150 {
                    prev *= 1e-150;
                    cur *= 1e-150;
                    ln_scale += 150.0 * core::f64::consts::LN_10;
                }
            }
            let v = cur * ln_scale.exp();
            out[(m + k) * dim + m] = lower * v;
            if k > 0 {
                out[m * dim + m + k] = upper * v;
            }
        }
    }
}

/// Largest `|W|` on the grid edge, relative to the peak, for the state to
/// count as contained. A Gaussian cut at two standard deviations sits at 0.135.
const EDGE_RATIO: f64 = 0.15;

/// Wigner function of a single-mode state on `grid`.
///
/// Fails with a truncation error when the top Fock level is populated or
/// when the grid edge cuts through the state, i.e. some edge sample exceeds
/// `EDGE_RATIO` times the peak magnitude.
pub fn wigner(rho: &DensityMatrix, grid: &PhaseSpaceGrid, space: &FockSpace) -> Result<WignerGrid> {
    let n = space.dim();
    if rho.dim() != n {
        return Err(domain!("state dimension {} does not match the mode cutoff {}", rho.dim(), n));
    }
    let m = rho.matrix();
    let top = m[(n - 1, n - 1)].re;
    if top > 1e-8 {
        return Err(truncation!("state populates the top Fock level ({:.3e})", top));
    }
    let w = wigner_unchecked(rho, grid);
    check_containment(&w)?;
    Ok(w)
}

fn check_containment(w: &WignerGrid) -> Result<()> {
    let (nx, np) = (w.grid.nx, w.grid.np);
    let peak = w.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut edge: f64 = 0.0;
    for i in 0..nx {
        for j in 0..np {
            if i == 0 || j == 0 || i + 1 == nx || j + 1 == np {
                edge = edge.max(w.at(i, j).abs());
            }
        }
    }
    if edge > EDGE_RATIO * peak {
        return Err(truncation!(
            "grid {:?} × {:?} cuts through the state: edge |W| = {:.3e} against peak {:.3e}",
            w.grid.x_range,
            w.grid.p_range,
            edge,
            peak
        ));
    }
    Ok(())
}

/// Wigner samples without the containment checks.
pub fn wigner_unchecked(rho: &DensityMatrix, grid: &PhaseSpaceGrid) -> WignerGrid {
    let n = rho.dim();
    let m = rho.matrix();
    let mut block = vec![C64::zero(); n * n];
    let mut values = Vec::with_capacity(grid.nx * grid.np);
    let mut residue: f64 = 0.0;
    for i in 0..grid.nx {
        for j in 0..grid.np {
            let gamma = C64::new(grid.x(i), grid.p(j));
            displacement_elements(gamma * 2.0, n, &mut block);
            // Σ_{m,k} ρ_{mk} ⟨k|D(2γ)|m⟩ (-1)^m
            let mut acc = C64::zero();
            for row in 0..n {
                let sign = if row % 2 == 0 { 1.0 } else { -1.0 };
                let rho_row = m.row(row);
                let mut s = C64::zero();
                for k in 0..n {
                    s += rho_row[k] * block[k * n + row];
                }
                acc += s * sign;
            }
            residue = residue.max(acc.im.abs());
            values.push(FRAC_2_PI * acc.re);
        }
    }
    WignerGrid { grid: grid.clone(), values, imaginary_residue: FRAC_2_PI * residue }
}

/// Interference visibility between two branches centred at `c1` and `c2`.
///
/// Samples `W` along the line through the midpoint perpendicular to the
/// separation, over two fringe periods `π/(2d)` on each side (`d` is half the
/// separation), and divides half the peak-to-peak swing by twice the
/// geometric mean of the branch heights. A pure even cat gives values near
/// one and an incoherent mixture gives zero. Clamped to `[0, 1]`.
pub fn fringe_contrast(w: &WignerGrid, c1: C64, c2: C64) -> Result<f64> {
    let sep = c2 - c1;
    let d = sep.norm() / 2.0;
    if !(d > 1e-9) {
        return Err(domain!("branch centers coincide"));
    }
    let mid = (c1 + c2) * 0.5;
    let normal = C64::new(-sep.im, sep.re) / sep.norm();
    let period = core::f64::consts::PI / (2.0 * d);
    let h1 = w.interpolate(c1).ok_or_else(|| domain!("center {} lies outside the grid", c1))?;
    let h2 = w.interpolate(c2).ok_or_else(|| domain!("center {} lies outside the grid", c2))?;
    let samples = 401;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in 0..samples {
        let t = -period + 2.0 * period * s as f64 / (samples - 1) as f64;
        let v =
            w.interpolate(mid + normal * t).ok_or_else(|| domain!("fringe line leaves the grid at offset {:.3}", t))?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let heights = (h1 * h2).max(0.0).sqrt();
    if heights == 0.0 {
        return Ok(0.0);
    }
    Ok((0.5 * (hi - lo) / (2.0 * heights)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{displacement_operator, thermal_state, ThermalParams};

    #[test]
    fn vacuum_and_thermal_origin_values() {
        let space = FockSpace::new(30).unwrap();
        let grid = PhaseSpaceGrid::new((-3.0, 3.0), (-3.0, 3.0), 61, 61).unwrap();
        let vac = thermal_state(ThermalParams::vacuum(), &space).unwrap();
        let w = wigner(&vac, &grid, &space).unwrap();
        assert!((w.at(30, 30) - FRAC_2_PI).abs() < 1e-12);
        assert!((w.at(40, 30) - FRAC_2_PI * (-2.0f64).exp()).abs() < 1e-12);
        let th = thermal_state(ThermalParams::new(0.8).unwrap(), &space).unwrap();
        let w = wigner(&th, &grid, &space).unwrap();
        assert!((w.at(30, 30) - FRAC_2_PI / 2.6).abs() < 1e-10);
        assert!((w.integral() - 1.0).abs() < 0.02);
    }

    #[test]
    fn elements_match_matrix_exponential() {
        let beta = C64::new(1.3, -0.7);
        let n = 12;
        let mut block = vec![C64::zero(); n * n];
        displacement_elements(beta, n, &mut block);
        let d = displacement_operator(beta.into(), &FockSpace::new(80).unwrap()).unwrap();
        for r in 0..n {
            for c in 0..n {
                assert!((block[r * n + c] - d[(r, c)]).norm() < 1e-10, "({}, {})", r, c);
            }
        }
    }

    #[test]
    fn grid_validation_and_containment() {
        assert!(PhaseSpaceGrid::new((1.0, 1.0), (0.0, 1.0), 4, 4).is_err());
        assert!(PhaseSpaceGrid::new((0.0, 1.0), (0.0, 1.0), 1, 4).is_err());
        let space = FockSpace::new(30).unwrap();
        let vac = thermal_state(ThermalParams::vacuum(), &space).unwrap();
        let grid = PhaseSpaceGrid::new((2.0, 4.0), (-3.0, 3.0), 5, 5).unwrap();
        assert!(matches!(wigner(&vac, &grid, &space), Err(crate::Error::Truncation(_))));
    }
}
