use alloc::string::String;

/// Failure modes shared by every module of the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Shape mismatch, non-Hermitian input, invalid parameter and the like.
    #[error("domain error: {0}")]
    Domain(String),
    /// The Fock cutoff is too small for the requested state or dynamics.
    #[error("truncation error: {0}")]
    Truncation(String),
    /// A numerical tolerance could not be met (step rejection, drift, no convergence).
    #[error("numerical tolerance error: {0}")]
    Tolerance(String),
    /// A series expansion did not converge within its cutoff.
    #[error("series error: {0}")]
    Series(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(alloc::format!($($arg)*)) };
}
macro_rules! truncation {
    ($($arg:tt)*) => { $crate::error::Error::Truncation(alloc::format!($($arg)*)) };
}
macro_rules! tolerance {
    ($($arg:tt)*) => { $crate::error::Error::Tolerance(alloc::format!($($arg)*)) };
}
pub(crate) use {domain, tolerance, truncation};
