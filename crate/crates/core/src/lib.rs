//! Numerical cavity-QED laboratory: a resonant two-level atom coupled to one
//! or two cavity modes prepared in displaced thermal states.
//!
//! Everything here is pure computation on dense complex matrices over a
//! truncated Fock basis; the crate needs only `alloc`. File formats, the
//! experiment runner and the command line live in the `thermalcat` crate.
//!
//! Tensor ordering is fixed as `atom ⊗ mode₁ [⊗ mode₂]`, with atom index 0
//! the excited state `|e⟩` and index 1 the ground state `|g⟩`.

#![no_std]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod dynamics;
pub mod echo;
pub mod entanglement;
mod error;
pub mod fit;
pub mod fock;
pub mod linalg;
pub mod lindblad;
pub mod phase_space;
pub mod series;
pub mod state;
mod tolerance;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use tolerance::Tolerances;
