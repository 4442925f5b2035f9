//! Viscosity solutions of complex Hessian equations f(λ(Hu)) = ψ(z, u) on
//! balls and boxes in ℂⁿ: symmetric functions and their cones, Hermitian
//! spectra and mixed forms, grids, certification, barriers and a monotone
//! relaxation solver.

// `!(x > 0.0)` is the NaN-rejecting form used for parameter guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barriers;
#[cfg(feature = "cli")]
pub mod cli;
pub mod cones;
pub mod error;
pub mod grid;
pub mod hermitian;
pub mod regularize;
pub mod report;
pub mod solver;
pub mod symfun;
pub mod viscosity;

pub use error::{Error, Result};

/// Version string embedded in every report.
pub const VERSION: &str = concat!("hessiasol ", env!("CARGO_PKG_VERSION"));
