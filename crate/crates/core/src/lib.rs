//! Simulator and diagnostics for a nematic liquid-crystal flow model:
//! incompressible Navier–Stokes coupled to a director equation with
//! stretching terms, on a staggered grid in a box.

pub mod dynamics;
pub mod energy;
pub mod error;
pub mod fields;
pub mod operators;
pub mod potential;
pub mod program;
pub mod trajectory;

pub use dynamics::{run, step, ForcingSignal, ModelParams, Simulator, StepReport};
pub use energy::{audit_energy, dissipative_envelope, energy, fit_decay_rate, EnergyAudit, EnergyBreakdown, StepRecord};
pub use error::{Error, Result};
pub use fields::{BoundaryProgram, BoundarySpec, DirectorField, Grid, State, VelocityField};
pub use operators::{Discretization, DirectorBc};
pub use potential::{check_assumption, estimate_prelim_constants, Assumption, AssumptionReport, Potential, PrelimConstants};
pub use trajectory::{translate, Trajectory};
