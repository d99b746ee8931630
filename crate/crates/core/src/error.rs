//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation precondition (length mismatch, negative
    /// density, non-mass-preserving perturbation, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Wavefunction with no usable amplitude anywhere.
    #[error("degenerate wavefunction: {0}")]
    DegenerateState(String),

    /// A stationary density does not decay below the required threshold at
    /// the grid edges; the grid is too narrow for the requested state.
    #[error("boundary decay violated: {0}")]
    BoundaryDecay(String),

    /// The eigensolver found no acceptable eigenpair near the guess.
    #[error("no normalizable eigenstate near E = {guess}: {reason}")]
    EigenNotFound { guess: f64, reason: String },

    /// The eigensolver converged to something unusable.
    #[error("eigensolver failure: {0}")]
    SolverFailure(String),

    /// Requested time step violates the solver's step bound.
    #[error("time step too large: {0}")]
    TimeStep(String),

    /// A field picked up a NaN or infinity during time integration.
    #[error("solution diverged at node {node}, t = {t}")]
    Diverged { node: usize, t: f64 },

    /// Scenario file could not be parsed.
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// Scenario parsed but is not runnable.
    #[error("invalid scenario: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line driver: 2 for
    /// configuration problems, 3 for numerical divergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Config(_) => 2,
            Error::Diverged { .. } => 3,
            _ => 1,
        }
    }
}
