//! Numerical laboratory for the radial nonlinear wave equation
//! `u_tt - Δu + σ |u|^p u = 0` in dimensions 3 through 9, in the
//! energy-supercritical regime.
//!
//! The crate is layered bottom-up:
//!
//! - [`exponents`]: the scaling calculus — critical regularity, the
//!   admissible power window per dimension, Strichartz admissibility, and
//!   the bootstrap exponent bookkeeping;
//! - [`grid`]: a cell-centered radial grid with a flux-form Laplacian whose
//!   discrete operator is exactly self-adjoint in the weighted inner
//!   product;
//! - [`spectral`]: the eigenbasis of that operator, giving exact linear
//!   propagation, Parseval-consistent Sobolev norms, and frequency-space
//!   diagnostics;
//! - [`state`], [`evolve`]: field states, leapfrog and split-step
//!   integrators with blowup and boundary monitors, the exact linear
//!   propagator, and a Duhamel-residual check tying the nonlinear flow to
//!   its integral form;
//! - [`diagnostics`]: energy, space-time scattering size, the weighted
//!   virial/Morawetz functional with its interior monotonicity estimate,
//!   support and concentration observables, and the CSV record schema;
//! - [`experiments`]: the four laboratory protocols (scattering detection,
//!   perturbative stability, blowup contrast, dispersal probe).

pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod exponents;
pub mod grid;
pub mod spectral;
pub mod state;

pub use error::{Error, Result};
pub use evolve::{
    cfl_dt, evolve_nonlinear, evolve_split, evolve_streaming, evolve_with, stiff_dt, RunOptions,
    StreamSummary, Trajectory,
};
pub use exponents::{ModelParams, Sign};
pub use grid::RadialGrid;
pub use spectral::SpectralBasis;
pub use state::FieldState;
