//! Closed-form large-displacement predictions, kept apart from the exact
//! numerics they are compared against.
//!
//! In the frame displaced by `α` and after dropping the terms rotating at
//! `2Ω`, the atom dressed states `|±⟩` pick up phases `e^{∓iθ}` and displace
//! the field by `∓β`. An atom starting in `|g⟩ = (|+⟩ - |-⟩)/√2` therefore
//! ends in
//!
//! `½ [(e^{-iθ}D(-β) - e^{iθ}D(β)) |e⟩ + (e^{-iθ}D(-β) + e^{iθ}D(β)) |g⟩]`
//!
//! acting on the undisplaced thermal field. With two modes the phase is
//! `α(g₁+g₂)τ`, which is `2θ` for equal couplings.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::to_lab;
use crate::error::{domain, Result};
use crate::fock::{displacement_block, thermal_state_with, FockSpace, TailPolicy, ThermalParams};
use crate::linalg::{kron, ComplexMatrix, CompositeSpace};
use crate::series::TimeSeries;
use crate::state::{DensityMatrix, JointState};

/// Field operators `(K_e, K_g)` attached to the atomic outcomes, given the
/// dressed-state phase `phi` and the displacement operators `D(-β)`, `D(β)`.
fn branch_kraus(phi: f64, d_minus: &ComplexMatrix, d_plus: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let a = d_minus.scale(C64::from_polar(0.5, -phi));
    let b = d_plus.scale(C64::from_polar(0.5, phi));
    (&a - &b, &a + &b)
}

fn assemble(
    k_e: &ComplexMatrix,
    k_g: &ComplexMatrix,
    field: &ComplexMatrix,
    space: CompositeSpace,
) -> Result<JointState> {
    let kraus = [k_e, k_g];
    let n = field.rows();
    let mut rho = ComplexMatrix::zeros(2 * n, 2 * n);
    for (a, ka) in kraus.iter().enumerate() {
        let left = ka.matmul(field);
        for (b, kb) in kraus.iter().enumerate() {
            let blk = left.matmul_adjoint(kb);
            for i in 0..n {
                for j in 0..n {
                    rho[(a * n + i, b * n + j)] = blk[(i, j)];
                }
            }
        }
    }
    JointState::new(DensityMatrix::normalized(rho)?, space)
}

fn check_regime(g: &[f64], tau: f64) -> Result<()> {
    if g.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(domain!("couplings must be positive, got {:?}", g));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(domain!("interaction time must be non-negative, got {}", tau));
    }
    Ok(())
}

/// Displaced-frame form of the single-mode cat state: the field factor is
/// built around the undisplaced thermal state and `frame = [α]`.
pub fn analytic_cat_state_in_frame(
    g: f64,
    alpha: f64,
    params: ThermalParams,
    tau: f64,
    space: &FockSpace,
) -> Result<JointState> {
    check_regime(&[g], tau)?;
    let policy = TailPolicy::default();
    let thermal = thermal_state_with(params, space, &policy)?.rho;
    let beta = C64::new(0.0, g * tau / 2.0);
    let n = space.dim();
    let d_minus = displacement_block(-beta, n, n)?;
    let d_plus = displacement_block(beta, n, n)?;
    let (k_e, k_g) = branch_kraus(alpha * g * tau, &d_minus, &d_plus);
    let joint = CompositeSpace::new(&[2, space.dim()])?;
    assemble(&k_e, &k_g, thermal.matrix(), joint)?.with_frame(&[C64::new(alpha, 0.0)])
}

/// `D(α)|φ(τ)⟩⟨φ(τ)| ⊗ ρ_th D†(α)` in the laboratory frame on `space`.
/// Valid for `α ≫ 1`; no check is made.
pub fn analytic_cat_joint_state(
    g: f64,
    alpha: f64,
    params: ThermalParams,
    tau: f64,
    space: &FockSpace,
) -> Result<JointState> {
    let work = frame_dimension(params, g * tau / 2.0);
    let frame = analytic_cat_state_in_frame(g, alpha, params, tau, &FockSpace::new(work)?)?;
    let mut lab = to_lab(&frame, &[space.dim()], 1e-9)?;
    lab.time = tau;
    Ok(lab)
}

/// Cutoff that holds a thermal state displaced by up to `reach`.
pub fn frame_dimension(params: ThermalParams, reach: f64) -> usize {
    crate::fock::truncation_for(C64::new(reach, 0.0).into(), params, 1e-13) + 4
}

/// Two-mode entangled displaced thermal state, represented in the frame
/// displaced by `(α, α)`.
#[allow(clippy::too_many_arguments)]
pub fn two_mode_analytic_state(
    g1: f64,
    g2: f64,
    alpha: f64,
    thermal1: ThermalParams,
    thermal2: ThermalParams,
    tau: f64,
    space1: &FockSpace,
    space2: &FockSpace,
) -> Result<JointState> {
    check_regime(&[g1, g2], tau)?;
    let policy = TailPolicy::default();
    let rho1 = thermal_state_with(thermal1, space1, &policy)?.rho;
    let rho2 = thermal_state_with(thermal2, space2, &policy)?.rho;
    let field = kron(rho1.matrix(), rho2.matrix());
    let shift =
        |g: f64, s: &FockSpace, sign: f64| displacement_block(C64::new(0.0, sign * g * tau / 2.0), s.dim(), s.dim());
    let d_minus = kron(&shift(g1, space1, -1.0)?, &shift(g2, space2, -1.0)?);
    let d_plus = kron(&shift(g1, space1, 1.0)?, &shift(g2, space2, 1.0)?);
    let (k_e, k_g) = branch_kraus(alpha * (g1 + g2) * tau, &d_minus, &d_plus);
    let joint = CompositeSpace::new(&[2, space1.dim(), space2.dim()])?;
    assemble(&k_e, &k_g, &field, joint)?.with_frame(&[C64::new(alpha, 0.0), C64::new(alpha, 0.0)])
}

/// `½(1 + e^{-(gτ)²(n̄+2)/4} cos(2Ωτ))` with `Ω = αg`, as printed for the
/// single-mode Rabi signal.
pub fn rabi_probability_analytic(g: f64, alpha: f64, n_bar: f64, times: &[f64]) -> Result<TimeSeries> {
    let omega = alpha * g;
    let p = times
        .iter()
        .map(|&t| 0.5 * (1.0 + (-(g * t).powi(2) * (n_bar + 2.0) / 4.0).exp() * (2.0 * omega * t).cos()))
        .collect();
    let mut ts = TimeSeries::new(times.to_vec())?.with_column("P_analytic", p)?;
    ts.set_meta("g", g);
    ts.set_meta("alpha", alpha);
    ts.set_meta("nbar_th", n_bar);
    Ok(ts)
}

/// `P_g` obtained from the dressed-state solution above:
/// `½(1 + e^{-(gτ)²(n̄+½)} cos(2Ωτ))`.
pub fn rabi_ground_probability_dressed(g: f64, alpha: f64, n_bar: f64, t: f64) -> f64 {
    0.5 * (1.0 + (-(g * t).powi(2) * (n_bar + 0.5)).exp() * (2.0 * alpha * g * t).cos())
}

/// `τ_c = 2 / (g √(n̄+2))`: the orthogonality criterion `gτ√(n̄+2)/2 = 1`.
pub fn collapse_time(g: f64, n_bar: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(domain!("coupling g must be positive, got {}", g));
    }
    if !(n_bar >= 0.0) {
        return Err(domain!("thermal occupation must be non-negative, got {}", n_bar));
    }
    Ok(2.0 / (g * (n_bar + 2.0).sqrt()))
}

/// 1/e width of the dressed-state envelope `e^{-(gτ)²(n̄+½)}`.
pub fn dressed_collapse_time(g: f64, n_bar: f64) -> f64 {
    1.0 / (g * (n_bar + 0.5).sqrt())
}

/// `½(1 + e^{-[(g₁τ)²+(g₂τ)²](n̄+2)/4} cos(4Ωτ))` with `4Ω = 2α(g₁+g₂)`,
/// which is `4αg` for equal couplings.
pub fn two_mode_rabi_analytic(g1: f64, g2: f64, alpha: f64, n_bar: f64, times: &[f64]) -> Result<TimeSeries> {
    let four_omega = 2.0 * alpha * (g1 + g2);
    let p = times
        .iter()
        .map(|&t| {
            let env = (-((g1 * t).powi(2) + (g2 * t).powi(2)) * (n_bar + 2.0) / 4.0).exp();
            0.5 * (1.0 + env * (four_omega * t).cos())
        })
        .collect();
    let mut ts = TimeSeries::new(times.to_vec())?.with_column("P_analytic", p)?;
    ts.set_meta("g1", g1);
    ts.set_meta("g2", g2);
    ts.set_meta("alpha", alpha);
    ts.set_meta("nbar_th", n_bar);
    Ok(ts)
}

/// `|⟨D(γ)⟩|` over a thermal state: `e^{-|γ|²(n̄+½)}`.
pub fn thermal_characteristic(gamma: C64, n_bar: f64) -> f64 {
    (-gamma.norm_sqr() * (n_bar + 0.5)).exp()
}

/// Weights `(P_e, P_g)` of the two analytic branches at time `τ`.
pub fn branch_weights(g: f64, alpha: f64, n_bar: f64, tau: f64) -> (f64, f64) {
    let pg = rabi_ground_probability_dressed(g, alpha, n_bar, tau);
    (1.0 - pg, pg)
}

/// Analytic atom-sector blocks in the frame: `[(e,e), (e,g), (g,e), (g,g)]`.
pub fn cat_blocks(state: &JointState) -> Vec<ComplexMatrix> {
    let mut out = vec![];
    for a in 0..2 {
        for b in 0..2 {
            out.push(state.atom_block(a, b));
        }
    }
    out
}
