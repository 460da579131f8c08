use std::env;
use std::fmt;
use std::str::FromStr;

use thermalcat_core::Tolerances;

/// Environment variable selecting the tolerance profile.
pub const PROFILE_ENV: &str = "THERMALCAT_TOL_PROFILE";

/// `strict` uses the substrate tolerances as they are, `relaxed` loosens all
/// of them tenfold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ToleranceProfile {
    #[default]
    Strict,
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown tolerance profile {0:?} (expected strict or relaxed)")]
pub struct UnknownProfile(pub String);

impl FromStr for ToleranceProfile {
    type Err = UnknownProfile;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "strict" => Ok(ToleranceProfile::Strict),
            "relaxed" => Ok(ToleranceProfile::Relaxed),
            _ => Err(UnknownProfile(s.to_string())),
        }
    }
}

impl fmt::Display for ToleranceProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ToleranceProfile::Strict => "strict",
            ToleranceProfile::Relaxed => "relaxed",
        })
    }
}

impl ToleranceProfile {
    /// Reads the profile from the environment; unset means strict.
    pub fn from_env() -> Result<Self, UnknownProfile> {
        match env::var(PROFILE_ENV) {
            Ok(v) if !v.trim().is_empty() => v.parse(),
            _ => Ok(ToleranceProfile::Strict),
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            ToleranceProfile::Strict => 1.0,
            ToleranceProfile::Relaxed => 10.0,
        }
    }

    pub fn tolerances(self) -> Tolerances {
        Tolerances::STRICT.scaled(self.factor())
    }

    /// Scales an arbitrary tolerance by the profile factor.
    pub fn scale(self, tol: f64) -> f64 {
        tol * self.factor()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_scales() {
        assert_eq!("Strict".parse::<ToleranceProfile>().unwrap(), ToleranceProfile::Strict);
        assert_eq!("relaxed".parse::<ToleranceProfile>().unwrap().factor(), 10.0);
        assert!("loose".parse::<ToleranceProfile>().is_err());
        let t = ToleranceProfile::Relaxed.tolerances();
        assert!((t.unitarity - 1e-9).abs() < 1e-24);
    }
}
