//! Phase-kick echo: evolve for `t_kick`, flip the sign of the atomic
//! coherences with `S_z`, evolve again. Because `S_z H S_z = -H` the second
//! leg undoes the first and the initial state returns at `2 t_kick`.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{AtomBasis, AtomState, CavitySystem};
use crate::entanglement::fidelity;
use crate::error::{domain, Result};
use crate::fock::{
    displaced_thermal_fock_coeff, fock_series_cutoff, truncation_for, FockSpace, TailPolicy, ThermalParams,
};
use crate::linalg::{ComplexMatrix, CompositeSpace, Propagator};
use crate::lindblad::{lindblad_series, DecayParams, LindbladOptions};
use crate::series::{uniform_grid, TimeSeries};
use crate::state::{DensityMatrix, JointState};

/// Kick time, total duration and sampling grid of an echo run.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoSchedule {
    t_kick: f64,
    t_total: f64,
    times: Vec<f64>,
}

impl EchoSchedule {
    pub fn new(t_kick: f64, t_total: f64, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(domain!("an echo schedule needs at least two samples"));
        }
        Self::with_times(t_kick, t_total, uniform_grid(0.0, t_total, samples))
    }

    pub fn with_times(t_kick: f64, t_total: f64, times: Vec<f64>) -> Result<Self> {
        if !(t_kick > 0.0) || !(t_total > t_kick) || !t_total.is_finite() {
            return Err(domain!("need 0 < t_kick < t_total, got t_kick = {}, t_total = {}", t_kick, t_total));
        }
        if times.first().is_some_and(|&t| t < 0.0) || times.last().is_some_and(|&t| t > t_total) {
            return Err(domain!("samples must lie in [0, {}]", t_total));
        }
        TimeSeries::new(times.clone())?;
        Ok(EchoSchedule { t_kick, t_total, times })
    }

    pub fn t_kick(&self) -> f64 {
        self.t_kick
    }

    pub fn t_total(&self) -> f64 {
        self.t_total
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn revival_time(&self) -> f64 {
        2.0 * self.t_kick
    }
}

/// `(S_z ⊗ I) ρ (S_z ⊗ I)`: the atomic coherence blocks change sign.
pub fn phase_kick(state: &JointState) -> JointState {
    let n = state.space.total_dim();
    let half = n / 2;
    let m = state.rho.matrix();
    let kicked = ComplexMatrix::from_fn(n, n, |i, j| if (i < half) != (j < half) { -m[(i, j)] } else { m[(i, j)] });
    JointState { rho: DensityMatrix::from_matrix_unchecked(kicked), ..state.clone() }
}

/// `S_z ⊗ I` on the given joint space.
pub fn kick_operator(space: &CompositeSpace) -> Result<ComplexMatrix> {
    space.embed(0, &AtomBasis::inversion())
}

/// Result of an echo run.
#[derive(Debug, Clone)]
pub struct EchoOutcome {
    /// Columns `Pe` and `Pg` on the schedule's grid.
    pub series: TimeSeries,
    /// Fidelity of the state at `2 t_kick` with the kicked initial state.
    pub revival_fidelity: Option<f64>,
    pub revival_pg: Option<f64>,
    /// Largest entry of `ρ(2 t_kick) - S_z ρ(0) S_z`.
    pub revival_deviation: Option<f64>,
    pub final_state: JointState,
}

fn projectors(space: &CompositeSpace) -> Result<(ComplexMatrix, ComplexMatrix)> {
    Ok((space.embed(0, &AtomBasis::excited_projector())?, space.embed(0, &AtomBasis::ground_projector())?))
}

fn revival(initial: &JointState, state: &JointState) -> Result<(f64, f64, f64)> {
    let reference = phase_kick(initial);
    let fid = fidelity(&state.rho, &reference.rho)?;
    let dev = state.rho.matrix().max_abs_diff(reference.rho.matrix());
    Ok((fid, state.atom_populations().1, dev))
}

/// Closed-system echo on a single mode. The atom starts in `|g⟩` and the
/// field in `D(α)ρ_th D†(α)`; evolution uses the Jaynes–Cummings Hamiltonian.
pub fn echo_run(
    g: f64,
    alpha: C64,
    params: ThermalParams,
    schedule: &EchoSchedule,
    space: &FockSpace,
) -> Result<EchoOutcome> {
    let system = CavitySystem::single(g, space.clone())?;
    let initial = system.initial_state(AtomState::Ground, &[params], &[alpha], &TailPolicy::default())?;
    echo_from_state(&system.hamiltonian(), &initial, schedule)
}

/// Closed-system echo from an arbitrary joint state under `h`.
pub fn echo_from_state(h: &ComplexMatrix, initial: &JointState, schedule: &EchoSchedule) -> Result<EchoOutcome> {
    let prop = Propagator::new(h)?;
    if prop.dim() != initial.space.total_dim() {
        return Err(domain!("Hamiltonian does not match the state dimension"));
    }
    let (pe_op, pg_op) = projectors(&initial.space)?;
    let obs = [&pe_op, &pg_op];
    let tk = schedule.t_kick;
    let split = schedule.times.partition_point(|&t| t <= tk);
    let (before, after) = schedule.times.split_at(split);

    let mut pe = Vec::with_capacity(schedule.times.len());
    let mut pg = Vec::with_capacity(schedule.times.len());
    let first = prop.expectation_series(initial.rho.matrix(), &obs, before);
    pe.extend_from_slice(&first[0]);
    pg.extend_from_slice(&first[1]);

    let u = prop.unitary(tk);
    let at_kick = JointState { rho: initial.rho.conjugated(&u), time: initial.time + tk, ..initial.clone() };
    let kicked = phase_kick(&at_kick);
    let shifted: Vec<f64> = after.iter().map(|t| t - tk).collect();
    let second = prop.expectation_series(kicked.rho.matrix(), &obs, &shifted);
    pe.extend_from_slice(&second[0]);
    pg.extend_from_slice(&second[1]);

    let tail = schedule.t_total - tk;
    let final_state = JointState {
        rho: kicked.rho.conjugated(&prop.unitary(tail)),
        time: initial.time + schedule.t_total,
        ..kicked.clone()
    };
    let (revival_fidelity, revival_pg, revival_deviation) = if schedule.revival_time() <= schedule.t_total {
        let back = JointState { rho: kicked.rho.conjugated(&u), ..kicked.clone() };
        let (f, p, d) = revival(initial, &back)?;
        (Some(f), Some(p), Some(d))
    } else {
        (None, None, None)
    };
    let series = TimeSeries::new(schedule.times.clone())?.with_column("Pe", pe)?.with_column("Pg", pg)?;
    Ok(EchoOutcome { series, revival_fidelity, revival_pg, revival_deviation, final_state })
}

/// Echo with cavity decay during both legs, integrated by the master equation.
pub fn echo_run_dissipative(
    h: &ComplexMatrix,
    initial: &JointState,
    schedule: &EchoSchedule,
    decay: &DecayParams,
    dt: f64,
) -> Result<EchoOutcome> {
    let (pe_op, pg_op) = projectors(&initial.space)?;
    let obs = [&pe_op, &pg_op];
    let options = LindbladOptions::with_dt(dt);
    let tk = schedule.t_kick;
    let split = schedule.times.partition_point(|&t| t <= tk);
    let (before, after) = schedule.times.split_at(split);

    let mut first_offsets = before.to_vec();
    first_offsets.push(tk);
    let (at_kick, first, _) = lindblad_series(initial, h, decay, &first_offsets, &options, &obs)?;
    let kicked = phase_kick(&at_kick);

    let revival_time = schedule.revival_time();
    let mut second_offsets: Vec<f64> = after.iter().map(|t| t - tk).collect();
    let revival_index = if revival_time <= schedule.t_total {
        let off = revival_time - tk;
        let idx = second_offsets.partition_point(|&t| t < off);
        second_offsets.insert(idx, off);
        Some(idx)
    } else {
        None
    };
    second_offsets.push(schedule.t_total - tk);
    let (final_state, mut second, _) = lindblad_series(&kicked, h, decay, &second_offsets, &options, &obs)?;

    let revival_pg = revival_index.map(|i| second[1][i]);
    if let Some(i) = revival_index {
        second[0].remove(i);
        second[1].remove(i);
    }
    let mut pe = first[0][..before.len()].to_vec();
    let mut pg = first[1][..before.len()].to_vec();
    pe.extend_from_slice(&second[0][..after.len()]);
    pg.extend_from_slice(&second[1][..after.len()]);
    let series = TimeSeries::new(schedule.times.clone())?.with_column("Pe", pe)?.with_column("Pg", pg)?;
    Ok(EchoOutcome { series, revival_fidelity: None, revival_pg, revival_deviation: None, final_state })
}

/// Contrast deficit of the Rabi signal after time `t` with cavity decay,
/// from the perturbative sum over the photon distribution of
/// `D(α)ρ_th D†(α)`:
///
/// `Σ_n κ√(1+2n̄) ρ_nn {t(2n-1)/4 + s(n) - s(n-1) - [√n(4n-3) sin(x√n) cos(x√(n-1)) - √(n-1)(4n-1) sin(x√(n-1)) cos(x√n)]/(4g)}`
///
/// with `x = gt` and `s(k) = sin(x√k)/(4g√k)`. The `n = 0` term is taken as
/// zero and `s(0)` as its limit `t/4`.
pub fn contrast_reduction_perturbative(g: f64, n_bar_th: f64, alpha: C64, kappa: f64, t: f64) -> Result<f64> {
    if !(g > 0.0) || !(kappa >= 0.0) || !(t >= 0.0) {
        return Err(domain!("need g > 0, κ ≥ 0 and t ≥ 0"));
    }
    if kappa == 0.0 {
        return Ok(0.0);
    }
    let params = ThermalParams::new(n_bar_th)?;
    let n_max = truncation_for(alpha.into(), params, 1e-14);
    let cutoff = fock_series_cutoff(n_bar_th, 1e-13);
    let x = g * t;
    let s = |k: f64| if k == 0.0 { t / 4.0 } else { (x * k.sqrt()).sin() / (4.0 * g * k.sqrt()) };
    let mut total = 0.0;
    for n in 1..n_max {
        let rho_nn = displaced_thermal_fock_coeff(alpha, n_bar_th, n, n, cutoff)?.re;
        let nf = n as f64;
        let (r, rm) = (nf.sqrt(), (nf - 1.0).sqrt());
        let bracket = r * (4.0 * nf - 3.0) * (x * r).sin() * (x * rm).cos()
            - rm * (4.0 * nf - 1.0) * (x * rm).sin() * (x * r).cos();
        let term = t * (2.0 * nf - 1.0) / 4.0 + s(nf) - s(nf - 1.0) - bracket / (4.0 * g);
        total += rho_nn * term;
    }
    Ok(kappa * (1.0 + 2.0 * n_bar_th).sqrt() * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kick_is_involutive_and_flips_coherence() {
        let space = CompositeSpace::new(&[2, 2]).unwrap();
        let plus = AtomState::Plus.density();
        let rho = crate::linalg::kron(&plus, &ComplexMatrix::from_real_diag(&[0.6, 0.4]));
        let st = JointState::new(DensityMatrix::new(rho).unwrap(), space).unwrap();
        let once = phase_kick(&st);
        let atom = once.atom_state().unwrap();
        assert!((atom[(0, 1)].re + 0.5).abs() < 1e-15);
        assert_eq!(phase_kick(&once), st);
    }

    #[test]
    fn schedule_validation() {
        assert!(EchoSchedule::new(0.0, 1.0, 10).is_err());
        assert!(EchoSchedule::new(2.0, 1.0, 10).is_err());
        assert_eq!(EchoSchedule::new(1.0, 3.0, 7).unwrap().revival_time(), 2.0);
    }

    #[test]
    fn perturbative_deficit_is_linear_in_kappa() {
        let a = contrast_reduction_perturbative(1.0, 0.3, C64::new(3.0, 0.0), 0.005, 2.0).unwrap();
        let b = contrast_reduction_perturbative(1.0, 0.3, C64::new(3.0, 0.0), 0.010, 2.0).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-14 * b.abs().max(1.0));
        assert_eq!(contrast_reduction_perturbative(1.0, 0.3, C64::new(3.0, 0.0), 0.0, 2.0).unwrap(), 0.0);
    }
}
