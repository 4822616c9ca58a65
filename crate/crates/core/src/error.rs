use thiserror::Error;

/// Errors produced by the simulator and the diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("Dirichlet director boundary requires boundary data")]
    MissingBoundaryData,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("potential evaluation is not finite at d = {point:?}")]
    PotentialNotFinite { point: [f64; 3] },

    #[error("coercivity constants infeasible: worst violation {violation:.3e} on sample field {field}")]
    Infeasible { field: usize, violation: f64 },

    #[error("{solver} did not converge after {iterations} iterations (last residual {residual:.3e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("CFL violation at step {step}: dt = {dt:.3e} exceeds {kind} limit {limit:.3e}")]
    Cfl {
        step: usize,
        kind: &'static str,
        dt: f64,
        limit: f64,
    },

    #[error("non-finite state detected at step {step}")]
    Blowup { step: usize },

    #[error("initial director incompatible with boundary datum: mismatch {mismatch:.3e}")]
    Incompatible { mismatch: f64 },

    #[error("time {t} is not on the sample lattice")]
    OffLattice { t: f64 },

    #[error("series duration {duration} shorter than one window")]
    TooShort { duration: f64 },

    #[error("non-positive excess energy at sample {index}")]
    NonPositiveExcess { index: usize },

    #[error("empty set")]
    EmptySet,

    #[error("unknown program `{0}`")]
    UnknownProgram(String),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
