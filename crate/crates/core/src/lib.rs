//! Self-normalized confidence bounds for vector-valued sub-ψ processes.
//!
//! The crate is organised bottom-up:
//!
//! * [`psi`]: CGF-like functions ψ: evaluation, inversion, Legendre-Fenchel
//!   conjugates and the conjugate maximizer.
//! * [`matstats`]: symmetric positive-definite matrices with cached
//!   factorizations (log-determinants, extreme eigenvalues, generalized
//!   Rayleigh quotients, self-normalized norms).
//! * [`processes`]: accumulators for `(S_t, V_t)` pairs and seeded
//!   matrix-growth scenarios.
//! * [`bounds`]: every confidence radius together with a component breakdown.
//! * [`experiments`]: figure tables, Monte Carlo coverage and bound comparison.
//! * [`config`]: the TOML run configuration consumed by the `snconc` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod config;
pub mod error;
pub mod experiments;
pub mod matstats;
pub mod processes;
pub mod psi;
mod roots;

pub use bounds::{BoundKind, BoundResult, BoundSpec};
pub use error::{Error, Result};
pub use matstats::SymPosDef;
pub use processes::ProcessState;
pub use psi::{Family, PsiSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
