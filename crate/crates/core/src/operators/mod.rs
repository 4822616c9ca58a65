//! Discrete differential operators, spectral solvers and the Stokes operator.

mod basis;
mod calculus;
mod spectral;
mod stokes;

pub use basis::{Basis, BasisKind};
pub use calculus::{
    boundary_pairing, director_gradient_energy, director_laplacian, dirichlet_lift, divergence,
    grad_director, gradient, stream_velocity, velocity_gradient_energy, velocity_laplacian, DirectorBc,
};
pub(crate) use calculus::{shifted, step};
pub use spectral::{Discretization, LaplacianSpec, ScalarBc};
pub use stokes::{
    dual_norm_vdiv, inverse_power_iteration, leray_project, stokes_lambda1, StokesSpectrum,
};
