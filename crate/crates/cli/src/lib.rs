//! Operational surface of the supercritical-wave laboratory: scenario files,
//! run orchestration, artifact persistence, and the self-check suite. The
//! `supercrit` binary is a thin argument-parsing shell over this library,
//! which keeps every behavior (including exit-code policy) testable in
//! process.

pub mod error;
pub mod run;
pub mod scenario;
pub mod selftest;

pub use error::{Error, Result};
pub use run::{dispatch_scenario, exponents_report, out_root, run_dir, RunArtifacts};
pub use scenario::Scenario;
