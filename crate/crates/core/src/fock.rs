//! A single bosonic mode on the truncated Fock basis `|0⟩ … |N-1⟩`:
//! ladder operators, thermal and displaced thermal states, displacement
//! operators, and the Fock-basis series for displaced thermal states.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{domain, truncation, Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix};
use crate::state::DensityMatrix;

/// Default bound on the photon-number mass allowed above the cutoff.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

const HBAR: f64 = 1.054_571_817e-34;
const K_BOLTZMANN: f64 = 1.380_649e-23;

/// Truncated mode of dimension `N` with cached `a`, `a†` and `n̂ = a†a`.
///
/// `[a, a†] = I` holds except at the corner `(N-1, N-1)`, where the
/// truncation leaves `-(N-1)`.
#[derive(Debug, Clone)]
pub struct FockSpace {
    dim: usize,
    a: ComplexMatrix,
    a_dag: ComplexMatrix,
    number: ComplexMatrix,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(domain!("Fock space dimension must be at least 2, got {}", dim));
        }
        let mut a = ComplexMatrix::zeros(dim, dim);
        for n in 1..dim {
            a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        let a_dag = a.adjoint();
        let number = ComplexMatrix::from_real_diag(&(0..dim).map(|n| n as f64).collect::<Vec<_>>());
        Ok(FockSpace { dim, a, a_dag, number })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn annihilation(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn creation(&self) -> &ComplexMatrix {
        &self.a_dag
    }

    pub fn number(&self) -> &ComplexMatrix {
        &self.number
    }

    /// Photon-number parity `diag((-1)ⁿ)`.
    pub fn parity(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&(0..self.dim).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>())
    }
}

/// `(a, a†)` for the given space.
pub fn ladder_operators(space: &FockSpace) -> (ComplexMatrix, ComplexMatrix) {
    (space.a.clone(), space.a_dag.clone())
}

/// Mean thermal occupation `n̄_th`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    mean_occupation: f64,
}

impl ThermalParams {
    pub fn new(mean_occupation: f64) -> Result<Self> {
        if !(mean_occupation >= 0.0) || !mean_occupation.is_finite() {
            return Err(domain!("mean thermal occupation must be finite and non-negative, got {}", mean_occupation));
        }
        Ok(ThermalParams { mean_occupation })
    }

    pub fn vacuum() -> Self {
        ThermalParams { mean_occupation: 0.0 }
    }

    /// Bose–Einstein occupation `1/(exp(ħω/k_B T) - 1)` for angular frequency
    /// `omega` in rad/s and temperature in kelvin.
    pub fn from_temperature(omega: f64, temperature: f64) -> Result<Self> {
        if !(omega > 0.0) || !(temperature >= 0.0) {
            return Err(domain!("need omega > 0 and temperature >= 0, got {} and {}", omega, temperature));
        }
        if temperature == 0.0 {
            return Ok(Self::vacuum());
        }
        let x = HBAR * omega / (K_BOLTZMANN * temperature);
        Self::new(1.0 / x.exp_m1())
    }

    pub fn mean_occupation(&self) -> f64 {
        self.mean_occupation
    }

    /// `p_n = n̄ⁿ / (1+n̄)ⁿ⁺¹`
    pub fn probability(&self, n: usize) -> f64 {
        let nb = self.mean_occupation;
        if nb == 0.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        (n as f64 * (nb / (1.0 + nb)).ln()).exp() / (1.0 + nb)
    }

    /// Mass of the geometric distribution at `n ≥ dim`.
    pub fn tail_mass(&self, dim: usize) -> f64 {
        let nb = self.mean_occupation;
        if nb == 0.0 {
            return 0.0;
        }
        (dim as f64 * (nb / (1.0 + nb)).ln()).exp()
    }

    /// Photon-number variance of the displaced thermal state `D(α)ρ_th D†(α)`.
    pub fn displaced_variance(&self, alpha: C64) -> f64 {
        let nb = self.mean_occupation;
        nb * (nb + 1.0) + alpha.norm_sqr() * (2.0 * nb + 1.0)
    }
}

/// Complex displacement amplitude `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementAmplitude(C64);

impl DisplacementAmplitude {
    pub fn new(alpha: C64) -> Result<Self> {
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(domain!("displacement amplitude must be finite"));
        }
        Ok(DisplacementAmplitude(alpha))
    }

    pub fn real(alpha: f64) -> Result<Self> {
        Self::new(C64::new(alpha, 0.0))
    }

    pub fn value(&self) -> C64 {
        self.0
    }
}

impl From<f64> for DisplacementAmplitude {
    fn from(x: f64) -> Self {
        DisplacementAmplitude(C64::new(x, 0.0))
    }
}

impl From<C64> for DisplacementAmplitude {
    fn from(z: C64) -> Self {
        DisplacementAmplitude(z)
    }
}

/// How strictly state constructors police the Fock cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPolicy {
    pub tail_tol: f64,
    pub enforce: bool,
}

impl TailPolicy {
    pub fn unchecked() -> Self {
        TailPolicy { tail_tol: DEFAULT_TAIL_TOL, enforce: false }
    }
}

impl Default for TailPolicy {
    fn default() -> Self {
        TailPolicy { tail_tol: DEFAULT_TAIL_TOL, enforce: true }
    }
}

/// A state built on a truncated space together with the probability mass
/// that did not fit.
#[derive(Debug, Clone)]
pub struct PreparedState {
    pub rho: DensityMatrix,
    pub discarded_mass: f64,
}

/// Thermal state with geometric photon statistics, renormalized after
/// truncation.
pub fn thermal_state(params: ThermalParams, space: &FockSpace) -> Result<DensityMatrix> {
    Ok(thermal_state_with(params, space, &TailPolicy::default())?.rho)
}

pub fn thermal_state_with(params: ThermalParams, space: &FockSpace, policy: &TailPolicy) -> Result<PreparedState> {
    let tail = params.tail_mass(space.dim);
    if policy.enforce && tail >= policy.tail_tol {
        return Err(truncation!(
            "thermal state with n̄ = {} leaves tail mass {:.3e} above dimension {}",
            params.mean_occupation,
            tail,
            space.dim
        ));
    }
    let mut p: Vec<f64> = (0..space.dim).map(|n| params.probability(n)).collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    Ok(PreparedState {
        rho: DensityMatrix::from_matrix_unchecked(ComplexMatrix::from_real_diag(&p)),
        discarded_mass: tail,
    })
}

/// Mass of the Poisson distribution with mean `mu` at `n ≥ dim`.
fn poisson_tail(mu: f64, dim: usize) -> f64 {
    if mu == 0.0 {
        return 0.0;
    }
    let ln_p = -mu + dim as f64 * mu.ln() - ln_factorial(dim);
    let mut term = ln_p.exp();
    let mut total = 0.0;
    let mut n = dim;
    loop {
        total += term;
        n += 1;
        term *= mu / n as f64;
        if (n as f64 > mu && term < total * 1e-17) || term == 0.0 {
            break;
        }
    }
    total
}

/// Unitary `exp(-iK)` with Hermitian `K = i(α a† - α* a)`, which equals `D(α)`.
fn displacement_unchecked(alpha: C64, space: &FockSpace) -> Result<ComplexMatrix> {
    if alpha.is_zero() {
        return Ok(ComplexMatrix::identity(space.dim));
    }
    let i = C64::new(0.0, 1.0);
    let generator = &space.a_dag.scale(i * alpha) - &space.a.scale(i * alpha.conj());
    Ok(hermitian_eig(&generator)?.propagator(1.0))
}

/// `D(α) = exp(α a† - α* a)` on the truncated space. The coherent state
/// `D(α)|0⟩` must fit below the cutoff.
pub fn displacement_operator(alpha: DisplacementAmplitude, space: &FockSpace) -> Result<ComplexMatrix> {
    displacement_operator_with(alpha, space, &TailPolicy::default())
}

pub fn displacement_operator_with(
    alpha: DisplacementAmplitude,
    space: &FockSpace,
    policy: &TailPolicy,
) -> Result<ComplexMatrix> {
    let alpha = alpha.value();
    if policy.enforce {
        let tail = poisson_tail(alpha.norm_sqr(), space.dim);
        if tail >= policy.tail_tol {
            return Err(truncation!(
                "coherent amplitude |α| = {:.3} leaves tail mass {:.3e} above dimension {}",
                alpha.norm(),
                tail,
                space.dim
            ));
        }
    }
    displacement_unchecked(alpha, space)
}

/// Exact entries `⟨m|D(α)|n⟩` for `m < rows`, `n < cols`, taken from the
/// truncated operator on a dimension padded well past where the displaced
/// columns can reach.
pub fn displacement_block(alpha: C64, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 {
        return Err(domain!("displacement block needs positive dimensions"));
    }
    let reach = (cols as f64).sqrt() + alpha.norm();
    let padded = ((reach * reach + 12.0 * reach + 24.0).ceil() as usize).max(rows).max(cols) + 8;
    let d = displacement_unchecked(alpha, &FockSpace::new(padded)?)?;
    Ok(d.block(0, 0, rows, cols))
}

/// `D(α) ρ_th D†(α)`.
pub fn displaced_thermal_state(
    alpha: DisplacementAmplitude,
    params: ThermalParams,
    space: &FockSpace,
) -> Result<DensityMatrix> {
    Ok(displaced_thermal_state_with(alpha, params, space, &TailPolicy::default())?.rho)
}

pub fn displaced_thermal_state_with(
    alpha: DisplacementAmplitude,
    params: ThermalParams,
    space: &FockSpace,
    policy: &TailPolicy,
) -> Result<PreparedState> {
    let a = alpha.value();
    let discarded_mass = if policy.enforce {
        let dist = displaced_thermal_distribution(a, params)?;
        let tail: f64 = dist.iter().skip(space.dim).sum();
        if tail >= policy.tail_tol {
            return Err(truncation!(
                "displaced thermal state (|α| = {:.3}, n̄ = {}) leaves tail mass {:.3e} above dimension {}",
                a.norm(),
                params.mean_occupation,
                tail,
                space.dim
            ));
        }
        tail
    } else {
        params.tail_mass(space.dim)
    };
    let thermal = thermal_state_with(params, space, &TailPolicy::unchecked())?;
    if a.is_zero() {
        return Ok(PreparedState { rho: thermal.rho, discarded_mass });
    }
    let d = displacement_unchecked(a, space)?;
    Ok(PreparedState { rho: thermal.rho.conjugated(&d), discarded_mass })
}

fn trial_dimension(alpha: C64, params: ThermalParams) -> usize {
    let nb = params.mean_occupation;
    let mean = nb + alpha.norm_sqr();
    let sigma = params.displaced_variance(alpha).sqrt();
    let mut trial = mean + 20.0 * sigma + 40.0;
    if nb > 0.0 {
        // geometric tail of the thermal weights down to 1e-22
        let q = (nb / (1.0 + nb)).ln();
        trial = trial.max(mean + (-50.66) / q + 20.0);
    }
    trial.ceil() as usize
}

/// Photon-number distribution of `D(α)ρ_th D†(α)`, computed on a generous
/// trial dimension well beyond the bulk of the state.
pub fn displaced_thermal_distribution(alpha: C64, params: ThermalParams) -> Result<Vec<f64>> {
    let trial = trial_dimension(alpha, params);
    let space = FockSpace::new(trial)?;
    let weights: Vec<f64> = {
        let mut w: Vec<f64> = (0..trial).map(|n| params.probability(n)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        w
    };
    if alpha.is_zero() {
        return Ok(weights);
    }
    let d = displacement_unchecked(alpha, &space)?;
    Ok((0..trial).map(|n| d.row(n).iter().zip(&weights).map(|(z, w)| z.norm_sqr() * w).sum()).collect())
}

/// Smallest cutoff `N ≥ 2` whose photon-number mass above `N - 1` is below
/// `tail_tol` for the displaced thermal state.
///
/// Panics if `tail_tol` is not in `(0, 1)`.
pub fn truncation_for(alpha: DisplacementAmplitude, params: ThermalParams, tail_tol: f64) -> usize {
    assert!(tail_tol > 0.0 && tail_tol < 1.0, "tail tolerance must lie in (0, 1)");
    let dist = displaced_thermal_distribution(alpha.value(), params)
        .expect("trial dimension is at least 2 and the generator is Hermitian");
    let mut tail = 0.0;
    let mut cutoff = dist.len();
    for n in (0..dist.len()).rev() {
        if tail + dist[n] >= tail_tol {
            break;
        }
        tail += dist[n];
        cutoff = n;
    }
    cutoff.max(2)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn ln_factorial_table(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 2..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

/// `⟨m|D(α)|ν⟩ = √(ν! m!) e^{-|α|²/2} Σ_{l=0}^{min(ν,m)} (-α*)^{ν-l} α^{m-l} / (l! (ν-l)! (m-l)!)`.
pub fn displacement_matrix_element(alpha: C64, m: usize, nu: usize) -> C64 {
    let table = ln_factorial_table(m.max(nu));
    displacement_element_with_table(alpha, m, nu, &table)
}

fn displacement_element_with_table(alpha: C64, m: usize, nu: usize, ln_fact: &[f64]) -> C64 {
    let r = alpha.norm();
    if r == 0.0 {
        return if m == nu { C64::new(1.0, 0.0) } else { C64::zero() };
    }
    let phase = alpha / r;
    let neg_conj_phase = -phase.conj();
    let ln_r = r.ln();
    let prefactor = 0.5 * (ln_fact[nu] + ln_fact[m]) - 0.5 * r * r;
    let mut sum = C64::zero();
    for l in 0..=m.min(nu) {
        let (p, q) = (nu - l, m - l);
        let ln_mag = prefactor + (p + q) as f64 * ln_r - ln_fact[l] - ln_fact[p] - ln_fact[q];
        sum += neg_conj_phase.powu(p as u32) * phase.powu(q as u32) * ln_mag.exp();
    }
    sum
}

/// Number of thermal weights needed so that the neglected weight is below `tol`.
pub fn fock_series_cutoff(n_bar: f64, tol: f64) -> usize {
    if n_bar == 0.0 {
        return 0;
    }
    let q = n_bar / (1.0 + n_bar);
    (tol.ln() / q.ln()).ceil().max(0.0) as usize
}

/// Fock-basis entry `ρ_{m,n}` of `D(α)ρ_th D†(α)` from the thermal-weight
/// series `Σ_ν n̄^ν/(1+n̄)^{ν+1} C_{ν,m} C*_{ν,n}` truncated at `ν ≤ cutoff`.
pub fn displaced_thermal_fock_coeff(alpha: C64, n_bar: f64, m: usize, n: usize, cutoff: usize) -> Result<C64> {
    let params = ThermalParams::new(n_bar)?;
    let neglected = params.tail_mass(cutoff + 1);
    if neglected > 1e-12 {
        return Err(Error::Series(alloc::format!(
            "cutoff {} leaves thermal weight {:.3e} for n̄ = {}",
            cutoff,
            neglected,
            n_bar
        )));
    }
    let table = ln_factorial_table(cutoff.max(m).max(n));
    let mut acc = C64::zero();
    for nu in 0..=cutoff {
        let w = params.probability(nu);
        if w == 0.0 {
            continue;
        }
        let cm = displacement_element_with_table(alpha, m, nu, &table);
        let cn = displacement_element_with_table(alpha, n, nu, &table);
        acc += cm * cn.conj() * w;
    }
    if !acc.re.is_finite() || !acc.im.is_finite() {
        return Err(Error::Series(alloc::format!("series for ({}, {}) overflowed", m, n)));
    }
    Ok(acc)
}
