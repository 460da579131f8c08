//! Cavity decay: `dρ/dt = -i[H,ρ] + κ(n̄_b+1)𝒟[a]ρ + κ n̄_b 𝒟[a†]ρ` for every
//! mode, integrated with fixed-step RK4 on sparse operators.
//!
//! States held in a displaced frame are handled exactly: shifting `a → a + A`
//! inside the dissipators leaves them unchanged up to the extra Hamiltonian
//! `(iκ/2)(A* a - A a†)`, which is added automatically from `state.frame`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{domain, tolerance, truncation, Result};
use crate::fock::FockSpace;
use crate::linalg::sparse::CsrOperator;
use crate::linalg::ComplexMatrix;
use crate::state::{DensityMatrix, JointState};

/// Cavity energy decay rate and bath occupation (0 for a zero-temperature bath).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams {
    pub kappa: f64,
    pub bath_occupation: f64,
}

impl DecayParams {
    pub fn new(kappa: f64, bath_occupation: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(domain!("decay rate must be finite and non-negative, got {}", kappa));
        }
        if !(bath_occupation >= 0.0) || !bath_occupation.is_finite() {
            return Err(domain!("bath occupation must be finite and non-negative, got {}", bath_occupation));
        }
        Ok(DecayParams { kappa, bath_occupation })
    }

    pub fn zero_temperature(kappa: f64) -> Result<Self> {
        Self::new(kappa, 0.0)
    }

    pub fn closed() -> Self {
        DecayParams { kappa: 0.0, bath_occupation: 0.0 }
    }

    /// `κ ≪ g` and `κt ≪ 1`, read as a factor of ten.
    pub fn is_weak(&self, g: f64, t: f64) -> bool {
        self.kappa <= 0.1 * g && self.kappa * t <= 0.1
    }
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladOptions {
    pub dt: f64,
    /// Largest accepted change of `Tr ρ` in one step.
    pub step_trace_tol: f64,
    /// Largest population allowed in the top Fock level of any mode.
    pub corner_tol: f64,
    pub max_halvings: u32,
    /// Most negative eigenvalue accepted at the end of a run.
    pub positivity_floor: f64,
}

impl LindbladOptions {
    pub fn with_dt(dt: f64) -> Self {
        LindbladOptions { dt, step_trace_tol: 1e-10, corner_tol: 1e-6, max_halvings: 20, positivity_floor: -1e-6 }
    }
}

/// What an integration actually did.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LindbladReport {
    pub steps: usize,
    pub dt_used: f64,
    pub max_step_trace_drift: f64,
    pub total_trace_drift: f64,
    pub min_eigenvalue: f64,
}

struct Generator {
    dim: usize,
    k: CsrOperator,
    k_adj: CsrOperator,
    jumps: Vec<(CsrOperator, CsrOperator)>,
    bound: f64,
    corner: Vec<Vec<usize>>,
}

fn row_sum_norm(m: &ComplexMatrix) -> f64 {
    (0..m.rows()).map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

impl Generator {
    fn new(state: &JointState, h: &ComplexMatrix, decay: &DecayParams) -> Result<Self> {
        let dim = state.space.total_dim();
        if h.rows() != dim || !h.is_square() {
            return Err(domain!("Hamiltonian is {}x{} but the state has dimension {}", h.rows(), h.cols(), dim));
        }
        let i = C64::new(0.0, 1.0);
        let mut h_total = h.clone();
        let mut jump_ops = Vec::new();
        for m in 0..state.num_modes() {
            let mode = FockSpace::new(state.mode_dim(m))?;
            let a = state.space.embed(m + 1, mode.annihilation())?;
            let a_dag = a.adjoint();
            let shift = state.frame[m];
            if decay.kappa > 0.0 && !shift.is_zero() {
                let hx = &a.scale(i * decay.kappa * 0.5 * shift.conj()) - &a_dag.scale(i * decay.kappa * 0.5 * shift);
                h_total += &hx;
            }
            let down = decay.kappa * (decay.bath_occupation + 1.0);
            let up = decay.kappa * decay.bath_occupation;
            if down > 0.0 {
                jump_ops.push(a.scale_real(down.sqrt()));
            }
            if up > 0.0 {
                jump_ops.push(a_dag.scale_real(up.sqrt()));
            }
        }
        let mut k = h_total.scale(-i);
        for c in &jump_ops {
            k -= &c.adjoint().matmul(c).scale_real(0.5);
        }
        let bound = 2.0 * row_sum_norm(&k) + jump_ops.iter().map(|c| row_sum_norm(c).powi(2)).sum::<f64>();
        let corner = (0..state.num_modes())
            .map(|m| {
                let top = state.mode_dim(m) - 1;
                (0..dim).filter(|&r| state.space.digits(r)[m + 1] == top).collect()
            })
            .collect();
        let k = CsrOperator::from_dense(&k);
        Ok(Generator {
            dim,
            k_adj: k.adjoint(),
            k,
            jumps: jump_ops
                .iter()
                .map(|c| {
                    let c = CsrOperator::from_dense(c);
                    let adj = c.adjoint();
                    (c, adj)
                })
                .collect(),
            bound,
            corner,
        })
    }

    /// `out = Kρ + ρK† + Σ c ρ c†`
    fn apply(&self, rho: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        let one = C64::new(1.0, 0.0);
        out.iter_mut().for_each(|z| *z = C64::zero());
        self.k.left_mul_acc(rho, one, out);
        self.k_adj.right_mul_acc(rho, one, out);
        for (c, c_adj) in &self.jumps {
            scratch.iter_mut().for_each(|z| *z = C64::zero());
            c.left_mul_acc(rho, one, scratch);
            c_adj.right_mul_acc(scratch, one, out);
        }
    }

    fn trace(&self, rho: &[C64]) -> f64 {
        (0..self.dim).map(|i| rho[i * self.dim + i].re).sum()
    }

    fn corner_population(&self, rho: &[C64]) -> f64 {
        self.corner.iter().map(|idx| idx.iter().map(|&r| rho[r * self.dim + r].re).sum::<f64>()).fold(0.0, f64::max)
    }
}

struct Rk4 {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
    scratch: Vec<C64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        let z = vec![C64::zero(); n];
        Rk4 { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z.clone(), scratch: z }
    }

    fn step(&mut self, gen: &Generator, rho: &[C64], dt: f64, out: &mut [C64]) {
        gen.apply(rho, &mut self.k1, &mut self.scratch);
        for ((t, r), k) in self.tmp.iter_mut().zip(rho).zip(&self.k1) {
            *t = r + k * (0.5 * dt);
        }
        gen.apply(&self.tmp, &mut self.k2, &mut self.scratch);
        for ((t, r), k) in self.tmp.iter_mut().zip(rho).zip(&self.k2) {
            *t = r + k * (0.5 * dt);
        }
        gen.apply(&self.tmp, &mut self.k3, &mut self.scratch);
        for ((t, r), k) in self.tmp.iter_mut().zip(rho).zip(&self.k3) {
            *t = r + k * dt;
        }
        gen.apply(&self.tmp, &mut self.k4, &mut self.scratch);
        for (i, o) in out.iter_mut().enumerate() {
            *o = rho[i] + (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * (dt / 6.0);
        }
    }
}

/// Integrates the master equation over `t` and returns the final state.
pub fn lindblad_evolve(
    state: &JointState,
    h: &ComplexMatrix,
    decay: &DecayParams,
    t: f64,
    dt: f64,
) -> Result<JointState> {
    Ok(lindblad_series(state, h, decay, &[t], &LindbladOptions::with_dt(dt), &[])?.0)
}

/// Integrates through the elapsed times `offsets` (non-decreasing, measured
/// from `state.time`), sampling `Re Tr[O ρ]` for every observable at each one.
pub fn lindblad_series(
    state: &JointState,
    h: &ComplexMatrix,
    decay: &DecayParams,
    offsets: &[f64],
    options: &LindbladOptions,
    observables: &[&ComplexMatrix],
) -> Result<(JointState, Vec<Vec<f64>>, LindbladReport)> {
    if !(options.dt > 0.0) || !options.dt.is_finite() {
        return Err(domain!("time step must be positive, got {}", options.dt));
    }
    if offsets.iter().any(|t| !(*t >= 0.0)) || offsets.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain!("sample offsets must be non-negative and non-decreasing"));
    }
    let gen = Generator::new(state, h, decay)?;
    let n = gen.dim;
    for o in observables {
        if o.rows() != n || o.cols() != n {
            return Err(domain!("observable does not match the state dimension"));
        }
    }
    let mut dt_max = options.dt;
    let mut halvings = 0;
    while dt_max * gen.bound > 2.5 && halvings < options.max_halvings {
        dt_max *= 0.5;
        halvings += 1;
    }

    let mut rho = state.rho.matrix().as_slice().to_vec();
    let mut next = vec![C64::zero(); n * n];
    let mut rk = Rk4::new(n * n);
    let initial_trace = gen.trace(&rho);
    let mut report = LindbladReport { dt_used: dt_max, ..LindbladReport::default() };
    let mut samples = vec![Vec::with_capacity(offsets.len()); observables.len()];
    let mut elapsed = 0.0;

    for &target in offsets {
        let span = target - elapsed;
        if span > 0.0 {
            let mut steps = (span / dt_max).ceil().max(1.0) as usize;
            let mut dt = span / steps as f64;
            let mut k = 0;
            while k < steps {
                rk.step(&gen, &rho, dt, &mut next);
                let drift = (gen.trace(&next) - gen.trace(&rho)).abs();
                if !(drift <= options.step_trace_tol) || next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    if halvings >= options.max_halvings {
                        return Err(tolerance!("master-equation step of {:.3e} drifts the trace by {:.3e}", dt, drift));
                    }
                    halvings += 1;
                    let remaining = (steps - k) as f64 * dt;
                    dt *= 0.5;
                    dt_max = dt_max.min(dt);
                    steps = k + (remaining / dt).round() as usize;
                    continue;
                }
                report.max_step_trace_drift = report.max_step_trace_drift.max(drift);
                core::mem::swap(&mut rho, &mut next);
                let corner = gen.corner_population(&rho);
                if corner > options.corner_tol {
                    return Err(truncation!(
                        "top Fock level holds population {:.3e} during the master-equation run",
                        corner
                    ));
                }
                report.steps += 1;
                k += 1;
            }
            report.dt_used = report.dt_used.min(dt);
            elapsed = target;
        }
        let m = ComplexMatrix::from_vec(n, n, rho.clone())?;
        for (o, s) in observables.iter().zip(samples.iter_mut()) {
            s.push(m.trace_product(o).re);
        }
    }

    let m = ComplexMatrix::from_vec(n, n, rho)?.hermitian_part();
    report.total_trace_drift = (m.trace().re - initial_trace).abs();
    if report.total_trace_drift > 1e-8 {
        return Err(tolerance!("master-equation run drifted the trace by {:.3e}", report.total_trace_drift));
    }
    let out = DensityMatrix::normalized(m)?;
    report.min_eigenvalue = out.min_eigenvalue()?;
    if report.min_eigenvalue < options.positivity_floor {
        return Err(tolerance!(
            "master-equation state has eigenvalue {:.3e} below {:.1e}",
            report.min_eigenvalue,
            options.positivity_floor
        ));
    }
    let final_state =
        JointState { rho: out, space: state.space.clone(), time: state.time + elapsed, frame: state.frame.clone() };
    Ok((final_state, samples, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CompositeSpace;

    #[test]
    fn rejects_bad_parameters() {
        assert!(DecayParams::new(-1.0, 0.0).is_err());
        assert!(DecayParams::new(1.0, -0.1).is_err());
        assert!(DecayParams::new(0.01, 0.0).unwrap().is_weak(1.0, 5.0));
        assert!(!DecayParams::new(0.5, 0.0).unwrap().is_weak(1.0, 1.0));
    }

    #[test]
    fn amplitude_damping_of_one_photon() {
        let space = CompositeSpace::new(&[2, 4]).unwrap();
        let mut diag = vec![0.0; 8];
        diag[5] = 1.0;
        let st = JointState::new(DensityMatrix::new(ComplexMatrix::from_real_diag(&diag)).unwrap(), space).unwrap();
        let h = ComplexMatrix::zeros(8, 8);
        let decay = DecayParams::zero_temperature(0.3).unwrap();
        let out = lindblad_evolve(&st, &h, &decay, 2.0, 0.01).unwrap();
        let n = crate::dynamics::lab_mean_photon(&out, 0).unwrap();
        assert!((n - (-0.6f64).exp()).abs() < 1e-6);
    }
}
