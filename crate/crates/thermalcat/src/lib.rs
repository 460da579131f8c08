//! Pulse-program runner and file formats for the thermalcat simulation core.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub use thermalcat_core as sim;

pub mod error;
pub mod exec;
pub mod output;
pub mod profile;
pub mod program;
pub mod sweep;

pub use profile::{ToleranceProfile, PROFILE_ENV};
