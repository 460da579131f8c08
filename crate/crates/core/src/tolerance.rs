/// Numerical tolerances used for validation throughout the crate.
///
/// The std companion scales these by 1 (strict) or 10 (relaxed) from the
/// `THERMALCAT_TOL_PROFILE` environment variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative bound on `max|M - M†| / max|M|` for Hermitian inputs.
    pub hermiticity: f64,
    /// Bound on `max|U U† - I|`.
    pub unitarity: f64,
    /// Bound on `|Tr ρ - 1|` accumulated over a run.
    pub trace_drift: f64,
    /// Lowest eigenvalue accepted for a density matrix.
    pub positivity_floor: f64,
}

impl Tolerances {
    pub const STRICT: Tolerances =
        Tolerances { hermiticity: 1e-12, unitarity: 1e-10, trace_drift: 1e-8, positivity_floor: -1e-10 };

    pub fn scaled(self, factor: f64) -> Tolerances {
        Tolerances {
            hermiticity: self.hermiticity * factor,
            unitarity: self.unitarity * factor,
            trace_drift: self.trace_drift * factor,
            positivity_floor: self.positivity_floor * factor,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::STRICT
    }
}
