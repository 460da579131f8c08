//! Atom–cavity Hamiltonians and exact unitary propagation on the truncated
//! joint space `atom ⊗ mode₁ [⊗ mode₂]`.
//!
//! The atom basis is index 0 = `|e⟩`, index 1 = `|g⟩`, so `S⁺ = |e⟩⟨g|` is
//! the matrix `[[0, 1], [0, 0]]`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::error::{domain, truncation, Result};
use crate::fock::{displaced_thermal_state_with, displacement_operator, FockSpace, TailPolicy, ThermalParams};
use crate::linalg::{kron, ComplexMatrix, CompositeSpace, Propagator};
use crate::series::TimeSeries;
use crate::state::{DensityMatrix, JointState};

/// Largest joint dimension accepted for dense propagation.
pub const MAX_JOINT_DIM: usize = 20_000;

/// Two-level atom basis and operators.
pub struct AtomBasis;

impl AtomBasis {
    pub fn excited() -> [C64; 2] {
        [C64::new(1.0, 0.0), C64::zero()]
    }

    pub fn ground() -> [C64; 2] {
        [C64::zero(), C64::new(1.0, 0.0)]
    }

    /// `(|e⟩ + |g⟩)/√2`
    pub fn plus() -> [C64; 2] {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        [C64::new(s, 0.0), C64::new(s, 0.0)]
    }

    /// `(|e⟩ - |g⟩)/√2`
    pub fn minus() -> [C64; 2] {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        [C64::new(s, 0.0), C64::new(-s, 0.0)]
    }

    /// `S⁺ = |e⟩⟨g|`
    pub fn raising() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).expect("2x2")
    }

    /// `S⁻ = |g⟩⟨e|`
    pub fn lowering() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]).expect("2x2")
    }

    /// Inversion `S_z = |e⟩⟨e| - |g⟩⟨g|`.
    pub fn inversion() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[1.0, -1.0])
    }

    pub fn excited_projector() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[1.0, 0.0])
    }

    pub fn ground_projector() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[0.0, 1.0])
    }
}

/// Initial atomic state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomState {
    Excited,
    Ground,
    Plus,
    Minus,
}

impl AtomState {
    pub fn vector(self) -> [C64; 2] {
        match self {
            AtomState::Excited => AtomBasis::excited(),
            AtomState::Ground => AtomBasis::ground(),
            AtomState::Plus => AtomBasis::plus(),
            AtomState::Minus => AtomBasis::minus(),
        }
    }

    pub fn density(self) -> ComplexMatrix {
        let v = self.vector();
        ComplexMatrix::outer(&v, &v)
    }
}

/// Single-mode coupling and the derived large-displacement quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    pub g: f64,
    pub alpha: f64,
}

impl CouplingParams {
    pub fn new(g: f64, alpha: f64) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() || !alpha.is_finite() {
            return Err(domain!("coupling must be positive and finite, got g = {}", g));
        }
        Ok(CouplingParams { g, alpha })
    }

    /// `Ω = α g`
    pub fn omega(&self) -> f64 {
        self.alpha * self.g
    }

    /// `θ = Ω τ`
    pub fn theta(&self, tau: f64) -> f64 {
        self.omega() * tau
    }

    /// `β = i g τ / 2`
    pub fn beta(&self, tau: f64) -> C64 {
        C64::new(0.0, self.g * tau / 2.0)
    }
}

/// Which generator drives a propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianChoice {
    /// Resonant Jaynes–Cummings Hamiltonian in the laboratory frame.
    Full,
    /// Exact similarity transform `D†(α) H D(α)`, evolved in the displaced frame.
    Displaced,
    /// Displaced frame after dropping the terms rotating at `2Ω`.
    Rwa,
}

/// An atom coupled to one or two truncated cavity modes.
#[derive(Debug, Clone)]
pub struct CavitySystem {
    modes: Vec<FockSpace>,
    couplings: Vec<f64>,
    space: CompositeSpace,
}

impl CavitySystem {
    pub fn new(modes: Vec<FockSpace>, couplings: Vec<f64>) -> Result<Self> {
        if modes.is_empty() || modes.len() > 2 {
            return Err(domain!("one or two cavity modes are supported, got {}", modes.len()));
        }
        if couplings.len() != modes.len() {
            return Err(domain!("{} couplings for {} modes", couplings.len(), modes.len()));
        }
        if couplings.iter().any(|&g| !(g >= 0.0) || !g.is_finite()) {
            return Err(domain!("couplings must be finite and non-negative: {:?}", couplings));
        }
        let mut dims = vec![2];
        dims.extend(modes.iter().map(FockSpace::dim));
        let space = CompositeSpace::new(&dims)?;
        if space.total_dim() > MAX_JOINT_DIM {
            return Err(truncation!("joint dimension {} exceeds the dense limit {}", space.total_dim(), MAX_JOINT_DIM));
        }
        Ok(CavitySystem { modes, couplings, space })
    }

    pub fn single(g: f64, mode: FockSpace) -> Result<Self> {
        if !(g > 0.0) {
            return Err(domain!("coupling g must be positive, got {}", g));
        }
        Self::new(vec![mode], vec![g])
    }

    pub fn two_mode(g1: f64, g2: f64, mode1: FockSpace, mode2: FockSpace) -> Result<Self> {
        Self::new(vec![mode1, mode2], vec![g1, g2])
    }

    pub fn space(&self) -> &CompositeSpace {
        &self.space
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn mode(&self, k: usize) -> &FockSpace {
        &self.modes[k]
    }

    pub fn coupling(&self, k: usize) -> f64 {
        self.couplings[k]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    fn embed(&self, factor: usize, op: &ComplexMatrix) -> ComplexMatrix {
        self.space.embed(factor, op).expect("operator sized from the system")
    }

    /// `atom_op ⊗ I`
    pub fn atom_operator(&self, atom_op: &ComplexMatrix) -> ComplexMatrix {
        self.embed(0, atom_op)
    }

    /// `a_k` on the joint space.
    pub fn annihilation(&self, k: usize) -> ComplexMatrix {
        self.embed(k + 1, self.modes[k].annihilation())
    }

    pub fn number(&self, k: usize) -> ComplexMatrix {
        self.embed(k + 1, self.modes[k].number())
    }

    /// `atom_op ⊗ field_op` with `field_op` acting on mode `k`.
    fn atom_field(&self, atom_op: &ComplexMatrix, k: usize, field_op: &ComplexMatrix) -> ComplexMatrix {
        let mut field = None::<ComplexMatrix>;
        for (j, m) in self.modes.iter().enumerate() {
            let piece = if j == k { field_op.clone() } else { ComplexMatrix::identity(m.dim()) };
            field = Some(match field {
                None => piece,
                Some(acc) => kron(&acc, &piece),
            });
        }
        kron(atom_op, &field.expect("at least one mode"))
    }

    /// `Σ_k g_k (a_k† S⁻ + a_k S⁺)`
    pub fn hamiltonian(&self) -> ComplexMatrix {
        let (sp, sm) = (AtomBasis::raising(), AtomBasis::lowering());
        let mut h = ComplexMatrix::zeros(self.dim(), self.dim());
        for (k, m) in self.modes.iter().enumerate() {
            let g = self.couplings[k];
            h += &self.atom_field(&sm, k, m.creation()).scale_real(g);
            h += &self.atom_field(&sp, k, m.annihilation()).scale_real(g);
        }
        h
    }

    fn drive(frame: &[C64], couplings: &[f64]) -> C64 {
        frame.iter().zip(couplings).map(|(a, g)| a * *g).sum()
    }

    fn check_frame(&self, frame: &[C64]) -> Result<()> {
        if frame.len() != self.num_modes() {
            return Err(domain!("{} frame amplitudes for {} modes", frame.len(), self.num_modes()));
        }
        Ok(())
    }

    /// `D†(α) H D(α) = H + Σ_k g_k (α_k* S⁻ + α_k S⁺)`, written out from
    /// `D†aD = a + α`. Exact on the untruncated space.
    pub fn frame_hamiltonian(&self, frame: &[C64]) -> Result<ComplexMatrix> {
        self.check_frame(frame)?;
        let drive = Self::drive(frame, &self.couplings);
        let atom = &AtomBasis::raising().scale(drive) + &AtomBasis::lowering().scale(drive.conj());
        Ok(&self.hamiltonian() + &self.atom_operator(&atom))
    }

    /// Frame Hamiltonian with the atom–field coupling restricted to the part
    /// diagonal in the eigenbasis of the displacement drive
    /// `A S⁺ + A* S⁻` (`A = Σ g_k α_k`); the dropped terms rotate at `2|A|`.
    pub fn rwa_frame_hamiltonian(&self, frame: &[C64]) -> Result<ComplexMatrix> {
        self.check_frame(frame)?;
        let drive = Self::drive(frame, &self.couplings);
        if drive.norm() == 0.0 {
            return Err(domain!("the rotating-wave form needs a nonzero displacement"));
        }
        let sp = AtomBasis::raising();
        let sm = AtomBasis::lowering();
        let atom_drive = &sp.scale(drive) + &sm.scale(drive.conj());
        let m = atom_drive.scale_real(1.0 / drive.norm());
        let secular = |x: &ComplexMatrix| (x + &m.matmul(x).matmul(&m)).scale_real(0.5);
        let (sp_sec, sm_sec) = (secular(&sp), secular(&sm));
        let mut h = self.atom_operator(&atom_drive);
        for (k, mode) in self.modes.iter().enumerate() {
            let g = self.couplings[k];
            h += &self.atom_field(&sm_sec, k, mode.creation()).scale_real(g);
            h += &self.atom_field(&sp_sec, k, mode.annihilation()).scale_real(g);
        }
        Ok(h)
    }

    /// `Σ_k (g_k/2)(a_k + a_k†)(S⁺ + S⁻)`
    pub fn conditional_displacement_hamiltonian(&self) -> ComplexMatrix {
        let sx = &AtomBasis::raising() + &AtomBasis::lowering();
        let mut h = ComplexMatrix::zeros(self.dim(), self.dim());
        for (k, m) in self.modes.iter().enumerate() {
            let quad = m.annihilation() + m.creation();
            h += &self.atom_field(&sx, k, &quad).scale_real(self.couplings[k] / 2.0);
        }
        h
    }

    /// `|e⟩⟨e| + Σ_k a_k† a_k`
    pub fn excitation_number(&self) -> ComplexMatrix {
        let mut n = self.atom_operator(&AtomBasis::excited_projector());
        for k in 0..self.num_modes() {
            n += &self.number(k);
        }
        n
    }

    /// Generator for the requested route. `frame` is ignored for `Full`.
    pub fn generator(&self, choice: HamiltonianChoice, frame: &[C64]) -> Result<ComplexMatrix> {
        match choice {
            HamiltonianChoice::Full => Ok(self.hamiltonian()),
            HamiltonianChoice::Displaced => self.frame_hamiltonian(frame),
            HamiltonianChoice::Rwa => self.rwa_frame_hamiltonian(frame),
        }
    }

    /// `|atom⟩⟨atom| ⊗ D(α₁)ρ_th,1 D†(α₁) [⊗ …]` in the laboratory frame.
    pub fn initial_state(
        &self,
        atom: AtomState,
        thermal: &[ThermalParams],
        displacements: &[C64],
        policy: &TailPolicy,
    ) -> Result<JointState> {
        if thermal.len() != self.num_modes() || displacements.len() != self.num_modes() {
            return Err(domain!("need one thermal parameter and one displacement per mode"));
        }
        let mut rho = atom.density();
        for (k, mode) in self.modes.iter().enumerate() {
            let field = displaced_thermal_state_with(displacements[k].into(), thermal[k], mode, policy)?;
            rho = kron(&rho, field.rho.matrix());
        }
        JointState::new(DensityMatrix::from_matrix_unchecked(rho), self.space.clone())
    }

    /// Same state represented in the frame displaced by `displacements`:
    /// the field factors are undisplaced thermal states and `frame` records
    /// the shift.
    pub fn initial_state_in_frame(
        &self,
        atom: AtomState,
        thermal: &[ThermalParams],
        displacements: &[C64],
        policy: &TailPolicy,
    ) -> Result<JointState> {
        let zeros = vec![C64::zero(); self.num_modes()];
        self.initial_state(atom, thermal, &zeros, policy)?.with_frame(displacements)
    }
}

/// `g (a† S⁻ + a S⁺)` on `atom ⊗ mode`.
pub fn jcm_hamiltonian(g: f64, space: &FockSpace) -> ComplexMatrix {
    CavitySystem::new(vec![space.clone()], vec![g]).expect("single mode").hamiltonian()
}

/// `D†(α) H D(α)` formed by matrix products with the truncated displacement
/// operator. Accurate on the block well below the cutoff.
pub fn displaced_hamiltonian(g: f64, alpha: C64, space: &FockSpace) -> Result<ComplexMatrix> {
    let d = displacement_operator(alpha.into(), space)?;
    let full = kron(&ComplexMatrix::identity(2), &d);
    let h = jcm_hamiltonian(g, space);
    Ok(full.adjoint().matmul(&h).matmul(&full).hermitian_part())
}

/// `H + g(α* S⁻ + α S⁺)`: the displaced-frame Hamiltonian from the operator
/// identity `D†aD = a + α`, free of truncation error in the shift.
pub fn displaced_frame_hamiltonian(g: f64, alpha: C64, space: &FockSpace) -> ComplexMatrix {
    CavitySystem::new(vec![space.clone()], vec![g]).and_then(|s| s.frame_hamiltonian(&[alpha])).expect("single mode")
}

/// Displaced-frame Hamiltonian after the rotating-wave step:
/// `2Ω σ_z + (g/2)(a + a†)(S⁺ + S⁻)` for real `α`.
pub fn rwa_displaced_hamiltonian(g: f64, alpha: C64, space: &FockSpace) -> Result<ComplexMatrix> {
    CavitySystem::new(vec![space.clone()], vec![g])?.rwa_frame_hamiltonian(&[alpha])
}

/// `(g/2)(a + a†)(S⁻ + S⁺)`: block diagonal in the `|±⟩` atomic basis.
pub fn conditional_displacement_hamiltonian(g: f64, space: &FockSpace) -> ComplexMatrix {
    CavitySystem::new(vec![space.clone()], vec![g]).expect("single mode").conditional_displacement_hamiltonian()
}

/// `(g₁a† + g₂b†) S⁻ + (g₁a + g₂b) S⁺` on `atom ⊗ mode₁ ⊗ mode₂`.
pub fn two_mode_hamiltonian(g1: f64, g2: f64, space1: &FockSpace, space2: &FockSpace) -> Result<ComplexMatrix> {
    Ok(CavitySystem::two_mode(g1, g2, space1.clone(), space2.clone())?.hamiltonian())
}

/// `ρ → U ρ U†` with `U = exp(-iHt)`.
pub fn evolve(state: &JointState, h: &ComplexMatrix, t: f64) -> Result<JointState> {
    if h.rows() != state.space.total_dim() || !h.is_square() {
        return Err(domain!(
            "Hamiltonian is {}x{} but the state has dimension {}",
            h.rows(),
            h.cols(),
            state.space.total_dim()
        ));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let u = crate::linalg::unitary_from_hamiltonian(h, t)?;
    Ok(JointState { rho: state.rho.conjugated(&u), time: state.time + t, ..state.clone() })
}

/// Same as [`evolve`] with a cached eigendecomposition.
pub fn evolve_with(state: &JointState, propagator: &Propagator, t: f64) -> Result<JointState> {
    if propagator.dim() != state.space.total_dim() {
        return Err(domain!("propagator dimension does not match the state"));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let u = propagator.unitary(t);
    Ok(JointState { rho: state.rho.conjugated(&u), time: state.time + t, ..state.clone() })
}

/// Exact `P_e(τ)` and `P_g(τ)` for an atom starting in `|g⟩` and the field
/// in `D(α)ρ_th D†(α)`.
///
/// `Full` propagates the laboratory state under the Jaynes–Cummings
/// Hamiltonian; `Displaced` propagates the undisplaced thermal state under
/// the exact displaced-frame Hamiltonian (populations are frame independent).
pub fn rabi_probability_exact(
    g: f64,
    alpha: C64,
    params: ThermalParams,
    times: &[f64],
    space: &FockSpace,
    choice: HamiltonianChoice,
) -> Result<TimeSeries> {
    let system = CavitySystem::single(g, space.clone())?;
    let state = match choice {
        HamiltonianChoice::Full => {
            system.initial_state(AtomState::Ground, &[params], &[alpha], &TailPolicy::default())?
        }
        _ => system.initial_state_in_frame(AtomState::Ground, &[params], &[alpha], &TailPolicy::default())?,
    };
    let h = system.generator(choice, &[alpha])?;
    let propagator = Propagator::new(&h)?;
    let pe_op = system.atom_operator(&AtomBasis::excited_projector());
    let pg_op = system.atom_operator(&AtomBasis::ground_projector());
    let mut series = propagator.expectation_series(state.rho.matrix(), &[&pe_op, &pg_op], times);
    let pg = series.pop().expect("two observables");
    let pe = series.pop().expect("two observables");
    let mut ts = TimeSeries::new(times.to_vec())?.with_column("Pe", pe)?.with_column("Pg", pg)?;
    ts.set_meta("g", g);
    ts.set_meta("alpha_re", alpha.re);
    ts.set_meta("alpha_im", alpha.im);
    ts.set_meta("nbar_th", params.mean_occupation());
    ts.set_meta("truncation", space.dim());
    ts.set_meta(
        "hamiltonian",
        match choice {
            HamiltonianChoice::Full => "full",
            HamiltonianChoice::Displaced => "displaced",
            HamiltonianChoice::Rwa => "rwa",
        },
    );
    Ok(ts)
}

/// Re-expresses a displaced-frame state in the laboratory frame on modes of
/// dimension `mode_dims`. Fails if the displaced state does not fit.
pub fn to_lab(state: &JointState, mode_dims: &[usize], tail_tol: f64) -> Result<JointState> {
    if mode_dims.len() != state.num_modes() {
        return Err(domain!("{} lab dimensions for {} modes", mode_dims.len(), state.num_modes()));
    }
    let mut map = ComplexMatrix::identity(2);
    for (k, &n) in mode_dims.iter().enumerate() {
        let block = crate::fock::displacement_block(state.frame[k], n, state.mode_dim(k))?;
        map = kron(&map, &block);
    }
    let rho = map.matmul(state.rho.matrix()).matmul_adjoint(&map);
    let lost = 1.0 - rho.trace().re;
    if lost > tail_tol {
        return Err(truncation!("laboratory-frame state loses mass {:.3e} above dimensions {:?}", lost, mode_dims));
    }
    let mut dims = vec![2];
    dims.extend_from_slice(mode_dims);
    let space = CompositeSpace::new(&dims)?;
    let mut out = JointState::new(DensityMatrix::normalized(rho)?, space)?;
    out.time = state.time;
    Ok(out)
}

/// Laboratory `⟨a_k†a_k⟩` of a frame state: `⟨a†a⟩' + 2 Re(A*⟨a⟩') + |A|²`.
pub fn lab_mean_photon(state: &JointState, k: usize) -> Result<f64> {
    if k >= state.num_modes() {
        return Err(domain!("mode {} out of range", k));
    }
    let mode = FockSpace::new(state.mode_dim(k))?;
    let a = state.space.embed(k + 1, mode.annihilation())?;
    let n = state.space.embed(k + 1, mode.number())?;
    let shift = state.frame[k];
    let mean_a = state.rho.expectation(&a);
    Ok(state.rho.expectation(&n).re + 2.0 * (shift.conj() * mean_a).re + shift.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_excitation_entry_and_dark_state() {
        let s = FockSpace::new(5).unwrap();
        let h = jcm_hamiltonian(0.7, &s);
        // |e,0⟩ is index 0, |g,1⟩ is index 5 + 1
        assert!((h[(6, 0)].re - 0.7).abs() < 1e-15);
        let ground_vacuum = 5;
        assert!((0..10).all(|i| h[(i, ground_vacuum)].norm() == 0.0));
    }

    #[test]
    fn two_mode_entries_and_reduction() {
        let (m1, m2) = (FockSpace::new(3).unwrap(), FockSpace::new(3).unwrap());
        let h = two_mode_hamiltonian(0.4, 0.9, &m1, &m2).unwrap();
        let sys = CavitySystem::two_mode(0.4, 0.9, m1.clone(), m2.clone()).unwrap();
        let e00 = sys.space().index_of(&[0, 0, 0]);
        let g10 = sys.space().index_of(&[1, 1, 0]);
        let g01 = sys.space().index_of(&[1, 0, 1]);
        assert!((h[(g10, e00)].re - 0.4).abs() < 1e-15);
        assert!((h[(g01, e00)].re - 0.9).abs() < 1e-15);

        let h0 = two_mode_hamiltonian(0.4, 0.0, &m1, &m2).unwrap();
        let single = kron(&jcm_hamiltonian(0.4, &m1), &ComplexMatrix::identity(3));
        assert!(h0.max_abs_diff(&single) < 1e-15);
    }

    #[test]
    fn joint_dimension_cap() {
        let big = FockSpace::new(101).unwrap();
        assert!(matches!(CavitySystem::two_mode(1.0, 1.0, big.clone(), big), Err(crate::Error::Truncation(_))));
    }

    #[test]
    fn evolve_rejects_mismatch() {
        let s = FockSpace::new(3).unwrap();
        let sys = CavitySystem::single(1.0, s.clone()).unwrap();
        let st = sys
            .initial_state(AtomState::Ground, &[ThermalParams::vacuum()], &[C64::zero()], &TailPolicy::default())
            .unwrap();
        let h = jcm_hamiltonian(1.0, &FockSpace::new(4).unwrap());
        assert!(matches!(evolve(&st, &h, 1.0), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn rwa_needs_displacement() {
        let s = FockSpace::new(3).unwrap();
        assert!(rwa_displaced_hamiltonian(1.0, C64::zero(), &s).is_err());
        let h = rwa_displaced_hamiltonian(1.0, C64::new(2.0, 0.0), &s).unwrap();
        let expected = &displaced_frame_hamiltonian(1.0, C64::new(2.0, 0.0), &s) - &jcm_hamiltonian(1.0, &s);
        let expected = &expected + &conditional_displacement_hamiltonian(1.0, &s);
        assert!(h.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn coupling_params_derived_quantities() {
        let c = CouplingParams::new(2.0, 3.0).unwrap();
        assert_eq!(c.omega(), 6.0);
        assert_eq!(c.theta(0.5), 3.0);
        assert_eq!(c.beta(0.5), C64::new(0.0, 0.5));
        assert!(CouplingParams::new(0.0, 1.0).is_err());
    }
}
