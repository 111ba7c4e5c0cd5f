//! Reflection spectroscopy of strongly driven multi-level transmons coupled to
//! a semi-infinite 1D waveguide.
//!
//! The library computes the weak-probe reflection amplitude `r` of a transmon
//! (or a small array of transmons) in front of a mirror, driven by a strong
//! coherent field. Three computation routes are provided:
//!
//! - [`response`]: steady state of the driven master equation plus first-order
//!   linear response in the probe — the full-model ground truth.
//! - [`dressed`]: dressed-state (Rabi sideband) analysis and a reduced
//!   M-sideband interference model that explains where gain comes from.
//! - [`oracle`]: direct time-domain integration with an explicit oscillating
//!   probe term and lock-in demodulation, used to cross-validate the
//!   perturbative route.
//!
//! All frequencies and rates are expressed in units of the base decay rate
//! `gamma10`; positions in units of `v_g / gamma10`.

pub mod cli;
pub mod config;
pub mod dressed;
pub mod model;
pub mod operators;
pub mod oracle;
pub mod presets;
pub mod response;

pub use model::{ArraySpec, DriveSpec, ProbeSpec, RateTable, TransmonSpec};

use thiserror::Error;

/// Errors shared across the solver modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system specification: {0}")]
    InvalidSpec(String),
    #[error("Hilbert space dimension {0} exceeds the configured cap {1}")]
    DimensionOverflow(usize, usize),
    #[error("steady-state null space is degenerate (dimension {dim} at tolerance {tol:e})")]
    DegenerateSteadyState { dim: usize, tol: f64 },
    #[error("linear-response operator is singular at zero probe-drive detuning; offset the probe grid")]
    SingularAtZeroDetuning,
    #[error("reduced-model coefficient matrix is singular (condition number {cond:e})")]
    SingularPi { cond: f64 },
    #[error("sideband relaxation rate is zero; single-sideband formula undefined")]
    ZeroRelaxation,
    #[error("time-domain integration did not settle: relative drift {drift:e} over the last window")]
    NonConvergence { drift: f64 },
    #[error("demodulation window cannot cover an integer number of beat periods")]
    WindowMismatch,
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
