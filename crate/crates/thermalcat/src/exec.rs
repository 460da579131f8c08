//! Executes a validated program. The joint state is carried in the displaced
//! frame: the field factors stay near the thermal state and `frame` holds the
//! coherent amplitudes, so displacements are exact and free.

use std::collections::BTreeMap;

use serde::Serialize;
use thermalcat_core::analytic::{
    analytic_cat_state_in_frame, collapse_time, rabi_probability_analytic, two_mode_analytic_state,
    two_mode_rabi_analytic,
};
use thermalcat_core::dynamics::{AtomBasis, AtomState, CavitySystem};
use thermalcat_core::echo::phase_kick;
use thermalcat_core::entanglement::{fidelity_with, negativity, BipartiteSplit};
use thermalcat_core::fit::fit_gaussian_envelope;
use thermalcat_core::fock::{truncation_for, FockSpace, TailPolicy, ThermalParams};
use thermalcat_core::linalg::{partial_trace, ComplexMatrix, Propagator};
use thermalcat_core::lindblad::{lindblad_series, DecayParams, LindbladOptions};
use thermalcat_core::phase_space::{wigner, PhaseSpaceGrid};
use thermalcat_core::state::{DensityMatrix, JointState};
use thermalcat_core::{Tolerances, C64};

use crate::error::RunError;
use crate::profile::ToleranceProfile;
use crate::program::{
    AnalyticModel, AtomSpec, GridSpec, HamiltonianKind, Observable, Projection, PulseProgram, Snapshot, Split, Step,
    Truncation,
};

/// Largest population tolerated in the top Fock level after a step, before
/// the profile factor.
const CORNER_TOL: f64 = 1e-6;

/// Everything a run produces, before it is written to disk.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub columns: Vec<String>,
    pub rows: Vec<(f64, Vec<f64>)>,
    pub summary: Summary,
    pub wigners: Vec<WignerArtifact>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    /// The program with its truncation resolved.
    pub program: PulseProgram,
    pub truncation: Vec<usize>,
    pub discarded_tail_mass: Vec<f64>,
    pub tolerance_profile: String,
    pub samples: usize,
    pub scalars: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// Wigner samples of one mode in laboratory coordinates.
#[derive(Debug, Clone)]
pub struct WignerArtifact {
    pub index: usize,
    pub mode: usize,
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    /// `values[i * ps.len() + j] = W(x_i + i p_j)`
    pub values: Vec<f64>,
}

/// Per-mode cutoff for `auto` truncation: the thermal state widened by the
/// largest bath occupation, displaced by the furthest the branches can
/// drift in the frame.
pub fn auto_truncation(program: &PulseProgram) -> Vec<usize> {
    let s = &program.system;
    let interaction = program.total_duration();
    let mut reach_amp = s.alpha.iter().map(|a| a.re().hypot(a.im())).fold(0.0, f64::max);
    let mut damping = 0.0;
    let mut n_bath: f64 = 0.0;
    for step in &program.steps {
        match step {
            Step::Displace { amplitude, .. } => reach_amp += amplitude.re().hypot(amplitude.im()),
            Step::Lindblad { duration, kappa, n_bar_b, .. } => {
                damping += kappa * duration;
                n_bath = n_bath.max(*n_bar_b);
            }
            _ => {}
        }
    }
    (0..s.modes)
        .map(|k| {
            let reach = s.g[k] * interaction / 2.0 + 1.0 + reach_amp * (damping / 2.0).min(1.0);
            let params = ThermalParams::new(s.n_bar_th[k].max(n_bath)).expect("validated occupation");
            truncation_for(C64::new(reach, 0.0).into(), params, s.tail_tol) + 4
        })
        .collect()
}

struct Ops {
    pe: ComplexMatrix,
    number: Vec<ComplexMatrix>,
    lowering: Vec<ComplexMatrix>,
}

impl Ops {
    fn new(system: &CavitySystem) -> Self {
        Ops {
            pe: system.atom_operator(&AtomBasis::excited_projector()),
            number: (0..system.num_modes()).map(|k| system.number(k)).collect(),
            lowering: (0..system.num_modes()).map(|k| system.annihilation(k)).collect(),
        }
    }

    /// `[Pe, n_k.., a_k..]`
    fn operators(&self) -> Vec<&ComplexMatrix> {
        let mut v = vec![&self.pe];
        v.extend(self.number.iter());
        v.extend(self.lowering.iter());
        v
    }

    /// `[Pe, Pg, n_k.., x_k.., p_k..]` from the traces of `operators()`,
    /// with `x = Re⟨a⟩` and `p = Im⟨a⟩`.
    fn linear(traces: &[C64], trace: f64) -> Vec<f64> {
        let m = (traces.len() - 1) / 2;
        let mut out = vec![traces[0].re, trace - traces[0].re];
        out.extend(traces[1..=m].iter().map(|z| z.re));
        out.extend(traces[m + 1..].iter().map(|z| z.re));
        out.extend(traces[m + 1..].iter().map(|z| z.im));
        out
    }
}

struct Executor<'p> {
    program: &'p PulseProgram,
    system: CavitySystem,
    state: JointState,
    profile: ToleranceProfile,
    tol: Tolerances,
    ops: Ops,
    observables: Vec<Observable>,
    clock: f64,
    /// Clock and frame when the first interaction began.
    interaction_start: Option<(f64, Vec<C64>)>,
    /// State when the first interaction began, the reference for a revival.
    start_state: Option<JointState>,
    cadence: Option<(f64, f64)>,
    next_sample: u64,
    rows: Vec<(f64, Vec<f64>)>,
    scalars: BTreeMap<String, f64>,
    notes: Vec<String>,
    wigners: Vec<WignerArtifact>,
    snapshots: usize,
    /// Kicked copy of the pre-interaction state and the clock at which it should return.
    revival: Option<(f64, JointState)>,
    kicked: bool,
}

/// Runs `program` and returns its artifacts.
pub fn execute(program: &PulseProgram, profile: ToleranceProfile) -> Result<RunOutput, RunError> {
    program.validate().map_err(|e| RunError::Parse(e.join("; ")))?;
    let s = &program.system;
    let cutoffs = match &s.truncation {
        Truncation::Auto => auto_truncation(program),
        Truncation::Explicit(v) => v.clone(),
    };
    let modes = cutoffs.iter().map(|&n| FockSpace::new(n)).collect::<Result<Vec<_>, _>>()?;
    let system = CavitySystem::new(modes, s.g.clone())?;
    let thermal = s.n_bar_th.iter().map(|&n| ThermalParams::new(n)).collect::<Result<Vec<_>, _>>()?;
    let frame: Vec<C64> = s.alpha.iter().map(|a| C64::new(a.re(), a.im())).collect();
    let atom = match s.atom {
        AtomSpec::Ground => AtomState::Ground,
        AtomSpec::Excited => AtomState::Excited,
        AtomSpec::Plus => AtomState::Plus,
        AtomSpec::Minus => AtomState::Minus,
    };
    let policy = TailPolicy { tail_tol: s.tail_tol, enforce: true };
    let state = system.initial_state_in_frame(atom, &thermal, &frame, &policy)?;
    let discarded = thermal.iter().zip(&cutoffs).map(|(t, &n)| t.tail_mass(n)).collect();

    let mut resolved = program.clone();
    resolved.system.truncation = Truncation::Explicit(cutoffs.clone());
    let ops = Ops::new(&system);
    let mut exec = Executor {
        program,
        system,
        state,
        profile,
        tol: profile.tolerances(),
        ops,
        observables: program.observables(),
        clock: 0.0,
        interaction_start: None,
        start_state: None,
        cadence: None,
        next_sample: 0,
        rows: Vec::new(),
        scalars: BTreeMap::new(),
        notes: Vec::new(),
        wigners: Vec::new(),
        snapshots: 0,
        revival: None,
        kicked: false,
    };
    for (k, step) in program.steps.iter().enumerate() {
        exec.step(step).map_err(|e| locate(e, k, step))?;
    }
    exec.finish()?;
    let columns = exec.columns();
    Ok(RunOutput {
        columns,
        summary: Summary {
            program: resolved,
            truncation: cutoffs,
            discarded_tail_mass: discarded,
            tolerance_profile: profile.to_string(),
            samples: exec.rows.len(),
            scalars: exec.scalars,
            notes: exec.notes,
        },
        rows: exec.rows,
        wigners: exec.wigners,
    })
}

fn locate(e: RunError, k: usize, step: &Step) -> RunError {
    let at = format!("step {} ({})", k + 1, step.kind());
    match e {
        RunError::Parse(m) => RunError::Parse(format!("{at}: {m}")),
        RunError::Truncation(m) => RunError::Truncation(format!("{at}: {m}")),
        RunError::Tolerance(m) => RunError::Tolerance(format!("{at}: {m}")),
        other => other,
    }
}

impl Executor<'_> {
    fn modes(&self) -> usize {
        self.system.num_modes()
    }

    fn columns(&self) -> Vec<String> {
        let mut cols = Vec::new();
        for o in &self.observables {
            if *o == Observable::MeanN && self.modes() == 2 {
                cols.push("mean_n1".to_string());
                cols.push("mean_n2".to_string());
            } else {
                cols.push(o.to_string());
            }
        }
        cols
    }

    fn step(&mut self, step: &Step) -> Result<(), RunError> {
        match step {
            Step::Displace { mode, amplitude } => {
                self.state.frame[mode - 1] += C64::new(amplitude.re(), amplitude.im());
            }
            Step::Evolve { duration, hamiltonian } => self.evolve(*duration, *hamiltonian)?,
            Step::Kick {} => self.kick(),
            Step::Lindblad { duration, kappa, n_bar_b, dt } => {
                let decay = DecayParams::new(*kappa, *n_bar_b)?;
                self.lindblad(*duration, &decay, *dt)?;
            }
            Step::Measure { cadence, .. } => {
                let now = self.state.clone();
                self.record(self.clock, &now)?;
                self.cadence = cadence.map(|c| (self.clock, c));
                self.next_sample = 1;
            }
            Step::Snapshot(snap) => {
                self.snapshots += 1;
                self.snapshot(snap)?;
            }
        }
        Ok(())
    }

    fn begin_interaction(&mut self) {
        if self.interaction_start.is_none() {
            self.interaction_start = Some((self.clock, self.state.frame.clone()));
            self.start_state = Some(self.state.clone());
        }
    }

    /// Elapsed interaction time and the frame amplitudes it started from.
    fn interaction(&self) -> (f64, Vec<C64>) {
        match &self.interaction_start {
            Some((t0, f)) => (self.clock - t0, f.clone()),
            None => (0.0, self.state.frame.clone()),
        }
    }

    fn kick(&mut self) {
        if self.revival.is_none() {
            let (elapsed, _) = self.interaction();
            if elapsed > 0.0 {
                if let Some(start) = &self.start_state {
                    self.revival = Some((self.clock + elapsed, phase_kick(start)));
                }
            }
        }
        self.kicked = true;
        self.state = phase_kick(&self.state);
    }

    /// Offsets from the current clock of the cadence samples in `(0, d]`.
    fn sample_offsets(&mut self, d: f64) -> Vec<f64> {
        let Some((origin, c)) = self.cadence else { return Vec::new() };
        let mut out = Vec::new();
        let end = self.clock + d;
        loop {
            let t = origin + self.next_sample as f64 * c;
            if t > end + 1e-9 * c {
                break;
            }
            if t > self.clock {
                out.push((t - self.clock).min(d));
            }
            self.next_sample += 1;
        }
        out
    }

    fn hamiltonian(&self, kind: HamiltonianKind) -> Result<ComplexMatrix, RunError> {
        Ok(match kind {
            HamiltonianKind::Full | HamiltonianKind::Displaced => self.system.frame_hamiltonian(&self.state.frame)?,
            HamiltonianKind::Rwa => self.system.rwa_frame_hamiltonian(&self.state.frame)?,
        })
    }

    fn revival_offset(&self, d: f64) -> Option<f64> {
        let (target, _) = self.revival.as_ref()?;
        let off = target - self.clock;
        (off > 0.0 && off <= d * (1.0 + 1e-12)).then_some(off.min(d))
    }

    fn evolve(&mut self, d: f64, kind: HamiltonianKind) -> Result<(), RunError> {
        self.begin_interaction();
        if d == 0.0 {
            return Ok(());
        }
        let h = self.hamiltonian(kind)?;
        let prop = Propagator::new(&h)?;
        let offsets = self.sample_offsets(d);
        if !offsets.is_empty() {
            let series = prop.trace_series(self.state.rho.matrix(), &self.ops.operators(), &offsets);
            let purity = self.state.rho.purity();
            let trace = self.state.rho.trace();
            for (i, &off) in offsets.iter().enumerate() {
                let traces: Vec<C64> = series.iter().map(|s| s[i]).collect();
                let linear = Ops::linear(&traces, trace);
                let t = self.clock + off;
                let row = self.row_from_linear(t, &linear, purity)?;
                self.push_row(t, row);
            }
        }
        if let Some(off) = self.revival_offset(d) {
            let u = prop.unitary(off);
            let at = JointState { rho: self.state.rho.conjugated(&u), ..self.state.clone() };
            self.score_revival(&at)?;
        }
        let u = prop.unitary(d);
        self.state = JointState { rho: self.state.rho.conjugated(&u), time: self.state.time + d, ..self.state.clone() };
        self.clock += d;
        self.check_corner()
    }

    fn lindblad(&mut self, d: f64, decay: &DecayParams, dt: f64) -> Result<(), RunError> {
        self.begin_interaction();
        if d == 0.0 {
            return Ok(());
        }
        let h = self.system.frame_hamiltonian(&self.state.frame)?;
        let mut options = LindbladOptions::with_dt(dt);
        options.step_trace_tol = self.profile.scale(options.step_trace_tol);
        options.corner_tol = self.profile.scale(CORNER_TOL);
        options.positivity_floor = self.profile.scale(options.positivity_floor);

        let revival = self.revival_offset(d);
        let mut stops: Vec<(f64, bool, bool)> = self.sample_offsets(d).into_iter().map(|o| (o, true, false)).collect();
        if let Some(r) = revival {
            stops.push((r, false, true));
        }
        stops.push((d, false, false));
        stops.sort_by(|a, b| a.0.total_cmp(&b.0));

        let start = self.clock;
        let mut done = 0.0;
        for (off, sample, score) in stops {
            if off > done {
                let (next, _, report) = lindblad_series(&self.state, &h, decay, &[off - done], &options, &[])?;
                if report.total_trace_drift > self.tol.trace_drift {
                    return Err(RunError::Tolerance(format!(
                        "trace drift {:.3e} exceeds {:.1e}",
                        report.total_trace_drift, self.tol.trace_drift
                    )));
                }
                self.state = next;
                done = off;
                self.clock = start + done;
            }
            if sample {
                let state = self.state.clone();
                self.record(self.clock, &state)?;
            }
            if score {
                let state = self.state.clone();
                self.score_revival(&state)?;
            }
        }
        self.clock = start + d;
        Ok(())
    }

    fn check_corner(&self) -> Result<(), RunError> {
        let pops = self.state.rho.populations();
        let limit = self.profile.scale(CORNER_TOL);
        for k in 0..self.modes() {
            let top = self.state.mode_dim(k) - 1;
            let mass: f64 = pops
                .iter()
                .enumerate()
                .filter(|(i, _)| self.state.space.digits(*i)[k + 1] == top)
                .map(|(_, p)| p)
                .sum();
            if mass > limit {
                return Err(RunError::Truncation(format!(
                    "mode {} populates its top Fock level with {mass:.3e} (limit {limit:.1e}); raise the truncation",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    fn score_revival(&mut self, state: &JointState) -> Result<(), RunError> {
        let Some((target, reference)) = self.revival.take() else { return Ok(()) };
        if reference.frame != state.frame {
            self.notes.push("revival not scored: the frame moved between kick and revival".into());
            return Ok(());
        }
        let f = fidelity_with(&state.rho, &reference.rho, &self.tol)?;
        self.scalars.insert("revival.time".into(), target);
        self.scalars.insert("revival.fidelity".into(), f);
        self.scalars.insert("revival.Pg".into(), state.atom_populations().1);
        self.scalars.insert("revival.deviation".into(), state.rho.matrix().max_abs_diff(reference.rho.matrix()));
        Ok(())
    }

    fn linear_values(&self, state: &JointState) -> Vec<f64> {
        let traces: Vec<C64> = self.ops.operators().iter().map(|o| state.rho.expectation(o)).collect();
        Ops::linear(&traces, state.rho.trace())
    }

    /// One CSV row from `[Pe, Pg, n_k.., x_k.., p_k..]` in the frame.
    fn row_from_linear(&self, t: f64, linear: &[f64], purity: f64) -> Result<Vec<f64>, RunError> {
        let m = self.modes();
        let mut row = Vec::new();
        for o in &self.observables {
            match o {
                Observable::Pe => row.push(linear[0]),
                Observable::Pg => row.push(linear[1]),
                Observable::MeanN => {
                    for k in 0..m {
                        let f = self.state.frame[k];
                        let (n, x, p) = (linear[2 + k], linear[2 + m + k], linear[2 + 2 * m + k]);
                        row.push(n + 2.0 * (f.re * x + f.im * p) + f.norm_sqr());
                    }
                }
                Observable::Purity => row.push(purity),
                Observable::PAnalytic => row.push(self.analytic_pg(t)?),
            }
        }
        Ok(row)
    }

    fn analytic_pg(&self, t: f64) -> Result<f64, RunError> {
        let (start, frame) = match &self.interaction_start {
            Some((t0, f)) => (*t0, f.clone()),
            None => (self.clock, self.state.frame.clone()),
        };
        let tau = (t - start).max(0.0);
        let s = &self.program.system;
        let series = if self.modes() == 1 {
            rabi_probability_analytic(s.g[0], frame[0].norm(), s.n_bar_th[0], &[tau])?
        } else {
            if frame[0] != frame[1] || s.n_bar_th[0] != s.n_bar_th[1] {
                return Err(RunError::Parse("P_analytic for two modes needs equal amplitudes and occupations".into()));
            }
            two_mode_rabi_analytic(s.g[0], s.g[1], frame[0].norm(), s.n_bar_th[0], &[tau])?
        };
        let col = series.columns().first().ok_or_else(|| RunError::Tolerance("empty analytic series".into()))?;
        Ok(col.values[0])
    }

    fn record(&mut self, t: f64, state: &JointState) -> Result<(), RunError> {
        let linear = self.linear_values(state);
        let row = self.row_from_linear(t, &linear, state.rho.purity())?;
        self.push_row(t, row);
        Ok(())
    }

    fn push_row(&mut self, t: f64, row: Vec<f64>) {
        if self.rows.last().is_some_and(|(last, _)| t <= *last + 1e-12) {
            return;
        }
        self.rows.push((t, row));
    }

    fn snapshot(&mut self, snap: &Snapshot) -> Result<(), RunError> {
        let i = self.snapshots;
        match snap {
            Snapshot::Wigner { mode, grid } => self.wigner_snapshot(i, *mode, grid),
            Snapshot::Negativity { split, project } => {
                let (value, prob) = self.negativity(*split, *project)?;
                self.scalars.insert(format!("negativity.{i}"), value);
                if let Some(p) = prob {
                    self.scalars.insert(format!("negativity.{i}.probability"), p);
                }
                Ok(())
            }
            Snapshot::FidelityVs { model } => {
                let f = self.fidelity_vs(*model)?;
                self.scalars.insert(format!("fidelity_vs.{i}"), f);
                Ok(())
            }
        }
    }

    fn negativity(&self, split: Split, project: Projection) -> Result<(f64, Option<f64>), RunError> {
        let space = self.state.space.clone();
        let value = match (split, project) {
            (Split::AtomField, _) => {
                let rest: Vec<usize> = (1..space.num_factors()).collect();
                negativity(&self.state.rho, &BipartiteSplit::new(space, &[0], &rest)?)?
            }
            (Split::Modes, Projection::None) => {
                let field = self.state.field_state()?;
                negativity(&field, &BipartiteSplit::new(self.state.field_space()?, &[0], &[1])?)?
            }
            (Split::Modes, p) => {
                let outcome = if p == Projection::E { 0 } else { 1 };
                let (field, prob) = self.state.project_atom(outcome)?;
                let n = negativity(&field, &BipartiteSplit::new(self.state.field_space()?, &[0], &[1])?)?;
                return Ok((n, Some(prob)));
            }
        };
        Ok((value, None))
    }

    fn fidelity_vs(&self, model: AnalyticModel) -> Result<f64, RunError> {
        let (tau, start_frame) = self.interaction();
        if start_frame != self.state.frame {
            return Err(RunError::Parse(
                "analytic comparison needs an unchanged frame since the interaction began".into(),
            ));
        }
        if start_frame.iter().any(|f| f.im != 0.0) || start_frame.iter().any(|f| *f != start_frame[0]) {
            return Err(RunError::Parse("analytic models need equal real amplitudes".into()));
        }
        let s = &self.program.system;
        let alpha = start_frame[0].re;
        let analytic = match model {
            AnalyticModel::Cat => analytic_cat_state_in_frame(
                s.g[0],
                alpha,
                ThermalParams::new(s.n_bar_th[0])?,
                tau,
                self.system.mode(0),
            )?,
            AnalyticModel::TwoMode => two_mode_analytic_state(
                s.g[0],
                s.g[1],
                alpha,
                ThermalParams::new(s.n_bar_th[0])?,
                ThermalParams::new(s.n_bar_th[1])?,
                tau,
                self.system.mode(0),
                self.system.mode(1),
            )?,
        };
        Ok(fidelity_with(&self.state.rho, &analytic.rho, &self.tol)?)
    }

    fn wigner_snapshot(&mut self, index: usize, mode: usize, spec: &GridSpec) -> Result<(), RunError> {
        let k = mode - 1;
        let reduced = partial_trace(self.state.rho.matrix(), &self.state.space, &[k + 1])?;
        let rho = DensityMatrix::new_with(reduced.hermitian_part(), &self.tol)?;
        let space = self.system.mode(k).clone();
        let f = self.state.frame[k];
        let (x_range, p_range) = match (spec.x, spec.p) {
            (Some(x), Some(p)) => ((x[0], x[1]), (p[0], p[1])),
            _ => {
                let a = rho.expectation(space.annihilation());
                let n = rho.expectation(space.number()).re;
                let a2 = rho.expectation(&space.annihilation().matmul(space.annihilation())).re;
                let var_x = 0.25 * (2.0 * a2 + 2.0 * n + 1.0) - a.re * a.re;
                let var_p = 0.25 * (-2.0 * a2 + 2.0 * n + 1.0) - a.im * a.im;
                let half = 4.0 * var_x.max(var_p).max(0.25).sqrt() + 0.5;
                let c = a + f;
                ((c.re - half, c.re + half), (c.im - half, c.im + half))
            }
        };
        let lab = PhaseSpaceGrid::new(x_range, p_range, spec.points, spec.points)?;
        let w = wigner(&rho, &lab.translated(-f), &space)?;
        self.scalars.insert(format!("wigner.{index}.integral"), w.integral());
        self.scalars.insert(format!("wigner.{index}.min"), w.min());
        self.scalars.insert(format!("wigner.{index}.max"), w.max());
        self.wigners.push(WignerArtifact { index, mode, xs: lab.xs(), ps: lab.ps(), values: w.values });
        Ok(())
    }

    fn finish(&mut self) -> Result<(), RunError> {
        if let Some((target, _)) = &self.revival {
            self.notes.push(format!("revival time {target} was not reached"));
        }
        let state = self.state.clone();
        let linear = self.linear_values(&state);
        let row = self.row_from_linear(self.clock, &linear, state.rho.purity())?;
        for (name, v) in self.columns().into_iter().zip(row) {
            self.scalars.insert(format!("final.{name}"), v);
        }
        self.fit_envelope();
        Ok(())
    }

    /// Gaussian-envelope fit of the `Pg` column for single-mode runs without kicks.
    fn fit_envelope(&mut self) {
        if self.modes() != 1 || self.kicked || self.rows.len() < 8 {
            return;
        }
        let Some(col) = self.columns().iter().position(|c| c == "Pg") else { return };
        let times: Vec<f64> = self.rows.iter().map(|(t, _)| *t).collect();
        let values: Vec<f64> = self.rows.iter().map(|(_, r)| r[col]).collect();
        match fit_gaussian_envelope(&times, &values) {
            Ok(fit) => {
                let s = &self.program.system;
                self.scalars.insert("envelope.tau_c".into(), fit.tau_c);
                self.scalars.insert("envelope.omega".into(), fit.omega);
                self.scalars.insert("envelope.contrast".into(), 2.0 * fit.amplitude);
                self.scalars.insert("envelope.rms_residual".into(), fit.rms_residual);
                if let Ok(tc) = collapse_time(s.g[0], s.n_bar_th[0]) {
                    self.scalars.insert("envelope.collapse_time".into(), tc);
                    self.scalars.insert("envelope.width_ratio".into(), fit.tau_c / tc);
                }
            }
            Err(e) => self.notes.push(format!("envelope fit skipped: {e}")),
        }
    }
}
