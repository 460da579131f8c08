//! Pulse programs: a TOML document with a `[system]` table, an ordered
//! `[[steps]]` list and an optional `[output]` table. See `docs/program-format.md`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::RunError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseProgram {
    pub system: SystemSpec,
    pub steps: Vec<Step>,
    #[serde(default, skip_serializing_if = "OutputSpec::is_default")]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub modes: usize,
    /// One coupling per mode.
    pub g: Vec<f64>,
    pub n_bar_th: Vec<f64>,
    /// Initial coherent displacement per mode.
    pub alpha: Vec<Amplitude>,
    #[serde(default)]
    pub atom: AtomSpec,
    #[serde(default)]
    pub truncation: Truncation,
    /// Thermal and displacement tail mass allowed above the cutoff.
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

fn default_tail_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomSpec {
    #[default]
    Ground,
    Excited,
    Plus,
    Minus,
}

/// `"auto"` or one explicit cutoff per mode.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Truncation {
    #[default]
    Auto,
    Explicit(Vec<usize>),
}

impl Serialize for Truncation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Truncation::Auto => s.serialize_str("auto"),
            Truncation::Explicit(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Truncation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            List(Vec<usize>),
        }
        match Raw::deserialize(d)? {
            Raw::Word(w) if w == "auto" => Ok(Truncation::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("truncation must be \"auto\" or a list, got {w:?}"))),
            Raw::List(v) => Ok(Truncation::Explicit(v)),
        }
    }
}

/// A real amplitude or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    pub fn re(self) -> f64 {
        match self {
            Amplitude::Real(x) => x,
            Amplitude::Complex([x, _]) => x,
        }
    }

    pub fn im(self) -> f64 {
        match self {
            Amplitude::Real(_) => 0.0,
            Amplitude::Complex([_, y]) => y,
        }
    }

    fn is_finite(self) -> bool {
        self.re().is_finite() && self.im().is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianKind {
    Full,
    Displaced,
    Rwa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    Pe,
    Pg,
    #[serde(rename = "mean_n")]
    MeanN,
    #[serde(rename = "purity")]
    Purity,
    #[serde(rename = "P_analytic")]
    PAnalytic,
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observable::Pe => "Pe",
            Observable::Pg => "Pg",
            Observable::MeanN => "mean_n",
            Observable::Purity => "purity",
            Observable::PAnalytic => "P_analytic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Displace {
        mode: usize,
        amplitude: Amplitude,
    },
    Evolve {
        duration: f64,
        hamiltonian: HamiltonianKind,
    },
    Kick {},
    Lindblad {
        duration: f64,
        kappa: f64,
        n_bar_b: f64,
        dt: f64,
    },
    Measure {
        observables: Vec<Observable>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cadence: Option<f64>,
    },
    Snapshot(Snapshot),
}

impl Step {
    pub fn kind(&self) -> &'static str {
        match self {
            Step::Displace { .. } => "displace",
            Step::Evolve { .. } => "evolve",
            Step::Kick {} => "kick",
            Step::Lindblad { .. } => "lindblad",
            Step::Measure { .. } => "measure",
            Step::Snapshot(_) => "snapshot",
        }
    }

    /// Interaction time the step adds.
    pub fn duration(&self) -> f64 {
        match self {
            Step::Evolve { duration, .. } | Step::Lindblad { duration, .. } => *duration,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Snapshot {
    Wigner {
        mode: usize,
        grid: GridSpec,
    },
    Negativity {
        split: Split,
        #[serde(default)]
        project: Projection,
    },
    FidelityVs {
        model: AnalyticModel,
    },
}

/// `points` per axis over explicit `x` and `p` ranges, or over a window
/// around the state when both are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<[f64; 2]>,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    #[serde(rename = "atom|field")]
    AtomField,
    #[serde(rename = "mode1|mode2")]
    Modes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    #[default]
    None,
    E,
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticModel {
    Cat,
    TwoMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Stem of every artifact file name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Output directory, overridden by `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl OutputSpec {
    fn is_default(&self) -> bool {
        *self == OutputSpec::default()
    }
}

impl PulseProgram {
    /// Every observable named by any measure step, in column order.
    pub fn observables(&self) -> Vec<Observable> {
        let set: BTreeSet<Observable> = self
            .steps
            .iter()
            .filter_map(|s| match s {
                Step::Measure { observables, .. } => Some(observables.iter().copied()),
                _ => None,
            })
            .flatten()
            .collect();
        set.into_iter().collect()
    }

    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(Step::duration).sum()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("programs serialize to TOML")
    }

    /// Checks everything the type system does not.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let s = &self.system;
        if !(1..=2).contains(&s.modes) {
            errs.push(format!("system.modes must be 1 or 2, got {}", s.modes));
        }
        let per_mode = |name: &str, len: usize, errs: &mut Vec<String>| {
            if len != s.modes {
                errs.push(format!("system.{name} needs {} entries, got {len}", s.modes));
            }
        };
        per_mode("g", s.g.len(), &mut errs);
        per_mode("n_bar_th", s.n_bar_th.len(), &mut errs);
        per_mode("alpha", s.alpha.len(), &mut errs);
        if let Truncation::Explicit(v) = &s.truncation {
            per_mode("truncation", v.len(), &mut errs);
            if v.iter().any(|&n| n < 2) {
                errs.push("system.truncation entries must be at least 2".into());
            }
        }
        if s.g.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            errs.push("system.g entries must be positive and finite".into());
        }
        if s.n_bar_th.iter().any(|n| !(*n >= 0.0) || !n.is_finite()) {
            errs.push("system.n_bar_th entries must be non-negative and finite".into());
        }
        if s.alpha.iter().any(|a| !a.is_finite()) {
            errs.push("system.alpha entries must be finite".into());
        }
        if !(s.tail_tol > 0.0 && s.tail_tol < 1e-3) {
            errs.push(format!("system.tail_tol must lie in (0, 1e-3), got {}", s.tail_tol));
        }

        let mut records = false;
        for (k, step) in self.steps.iter().enumerate() {
            let at = format!("step {} ({})", k + 1, step.kind());
            let check_mode = |mode: usize, errs: &mut Vec<String>| {
                if mode == 0 || mode > s.modes {
                    errs.push(format!("{at}: mode {mode} is not declared (system has {} mode(s))", s.modes));
                }
            };
            match step {
                Step::Displace { mode, amplitude } => {
                    check_mode(*mode, &mut errs);
                    if !amplitude.is_finite() {
                        errs.push(format!("{at}: amplitude must be finite"));
                    }
                }
                Step::Evolve { duration, .. } => {
                    if !(*duration >= 0.0) || !duration.is_finite() {
                        errs.push(format!("{at}: duration must be non-negative, got {duration}"));
                    }
                }
                Step::Kick {} => {}
                Step::Lindblad { duration, kappa, n_bar_b, dt } => {
                    if !(*duration >= 0.0) || !duration.is_finite() {
                        errs.push(format!("{at}: duration must be non-negative, got {duration}"));
                    }
                    if !(*kappa >= 0.0) || !(*n_bar_b >= 0.0) {
                        errs.push(format!("{at}: kappa and n_bar_b must be non-negative"));
                    }
                    if !(*dt > 0.0) || !dt.is_finite() {
                        errs.push(format!("{at}: dt must be positive, got {dt}"));
                    }
                }
                Step::Measure { observables, cadence } => {
                    records = true;
                    if observables.is_empty() {
                        errs.push(format!("{at}: observables must not be empty"));
                    }
                    if let Some(c) = cadence {
                        if !(*c > 0.0) || !c.is_finite() {
                            errs.push(format!("{at}: cadence must be positive, got {c}"));
                        }
                    }
                }
                Step::Snapshot(snap) => {
                    records = true;
                    match snap {
                        Snapshot::Wigner { mode, grid } => {
                            check_mode(*mode, &mut errs);
                            if grid.points < 2 {
                                errs.push(format!("{at}: grid needs at least 2 points per axis"));
                            }
                            for r in [grid.x, grid.p].into_iter().flatten() {
                                if !(r[1] > r[0]) {
                                    errs.push(format!("{at}: grid range {r:?} is empty"));
                                }
                            }
                            if grid.x.is_some() != grid.p.is_some() {
                                errs.push(format!("{at}: give both x and p ranges or neither"));
                            }
                        }
                        Snapshot::Negativity { split, project } => {
                            if *split == Split::Modes && s.modes != 2 {
                                errs.push(format!("{at}: split mode1|mode2 needs two modes"));
                            }
                            if *split == Split::AtomField && *project != Projection::None {
                                errs.push(format!("{at}: split atom|field cannot follow an atomic projection"));
                            }
                        }
                        Snapshot::FidelityVs { model } => {
                            let need = if *model == AnalyticModel::Cat { 1 } else { 2 };
                            if s.modes != need {
                                errs.push(format!("{at}: model {model:?} needs {need} mode(s)"));
                            }
                            if s.atom != AtomSpec::Ground {
                                errs.push(format!("{at}: analytic models start from the ground state"));
                            }
                        }
                    }
                }
            }
        }
        if !records {
            errs.push("program needs at least one measure or snapshot step".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// Line of the `index`-th `[[steps]]` header, if the steps are written as an
/// array of tables.
fn step_line(text: &str, index: usize) -> Option<usize> {
    text.lines().enumerate().filter(|(_, l)| l.trim_start().starts_with("[[steps]]")).nth(index).map(|(n, _)| n + 1)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Parses and validates a program. In strict mode unknown keys are errors;
/// otherwise they are returned as warnings.
pub fn parse_program(text: &str, strict: bool) -> Result<(PulseProgram, Vec<String>), RunError> {
    let mut unknown = Vec::new();
    let de = toml::Deserializer::new(text);
    let program: PulseProgram = serde_ignored::deserialize(de, |path| unknown.push(path.to_string())).map_err(|e| {
        let at = e.span().map(|s| line_col(text, s.start));
        let msg = e.message().trim().to_string();
        match at {
            Some((l, c)) => RunError::Parse(format!("line {l}, column {c}: {msg}")),
            None => RunError::Parse(msg),
        }
    })?;
    let unknown: Vec<String> = unknown.into_iter().map(|p| format!("unknown key `{p}`")).collect();
    if strict && !unknown.is_empty() {
        return Err(RunError::Parse(unknown.join("; ")));
    }
    program.validate().map_err(|errs| {
        let located: Vec<String> = errs
            .into_iter()
            .map(|e| match e.strip_prefix("step ").and_then(|r| r.split(' ').next()?.parse::<usize>().ok()) {
                Some(k) => match step_line(text, k - 1) {
                    Some(line) => format!("line {line}: {e}"),
                    None => e,
                },
                None => e,
            })
            .collect();
        RunError::Parse(located.join("; "))
    })?;
    Ok((program, unknown))
}
