//! Front-end error type: wraps the solver-core errors and adds the
//! scenario-file and I/O failure modes that only exist at this layer.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Scenario file could not be read, parsed, or validated.
    #[error("scenario: {0}")]
    Scenario(String),

    /// A protocol precondition failed or the solver aborted.
    #[error(transparent)]
    Core(#[from] supercrit_core::Error),

    /// Filesystem or serialization trouble while writing outputs.
    #[error("output: {0}")]
    Output(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Output(e.to_string())
    }
}

impl Error {
    /// Process exit code for this failure.
    ///
    /// * `1` — hard failure: bad input, bad scenario, I/O trouble.
    /// * `3` — the run itself stopped early in a physically meaningful way
    ///   (amplitude overflow or wall contact); outputs up to the stop are
    ///   still written, and the condition is flagged in the report.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(supercrit_core::Error::Halted { .. })
            | Error::Core(supercrit_core::Error::BoundaryTouched) => 3,
            _ => 1,
        }
    }
}
