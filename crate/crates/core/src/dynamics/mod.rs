//! Time integration of the coupled velocity/director system.
//!
//! One step of size `dt` from `(uⁿ, dⁿ)`:
//!
//! 1. `(I − dtΔ_h) dⁿ⁺¹ = dⁿ + dt (C_{dⁿ} uⁿ − ∇W(dⁿ))`, boundary data at `tⁿ⁺¹`;
//! 2. `qⁿ⁺¹ = Δ_h dⁿ⁺¹ − ∇W(dⁿ⁺¹)`;
//! 3. `(I − νdtΔ_h) u* = uⁿ + dt (−N(uⁿ)uⁿ + C_{dⁿ}ᵀ qⁿ⁺¹)`;
//! 4. `uⁿ⁺¹ = P(u* + dt h(tⁿ⁺¹))`.
//!
//! `C_d` is the transport/stretching operator of the director equation and
//! its adjoint is the elastic force, so the exchange terms cancel in the
//! energy balance up to `O(dt)`.

mod advection;
mod coupling;
mod forcing;

pub use advection::advect;
pub use coupling::Coupling;
pub use forcing::ForcingSignal;

use crate::energy::{step_record, StepRecord};
use crate::error::{Error, Result};
use crate::fields::{BoundarySpec, DirectorField, Grid, State, VelocityField};
use crate::operators::{
    director_laplacian, dirichlet_lift, divergence, velocity_laplacian, DirectorBc, Discretization,
};
use crate::potential::Potential;
use crate::trajectory::Trajectory;
use std::fmt;
use std::sync::Arc;

type SourceFn = dyn Fn(&Grid, f64) -> DirectorField + Send + Sync;

/// Extra right-hand side of the director equation, used by manufactured solutions.
#[derive(Clone)]
pub struct DirectorSource(pub Arc<SourceFn>);

impl fmt::Debug for DirectorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("DirectorSource")
    }
}

#[derive(Debug, Clone)]
pub struct ModelParams {
    pub nu: f64,
    pub alpha: f64,
    pub potential: Potential,
    pub bc: BoundarySpec,
    pub forcing: ForcingSignal,
    /// Stabilisation weight `s` adding `s(dⁿ⁺¹ − dⁿ)` to the director equation.
    pub stabilization: f64,
    pub director_source: Option<DirectorSource>,
}

impl ModelParams {
    /// Unforced Neumann model.
    pub fn new(nu: f64, alpha: f64, potential: Potential) -> Self {
        Self {
            nu,
            alpha,
            potential,
            bc: BoundarySpec::Neumann,
            forcing: ForcingSignal::zero(),
            stabilization: 0.0,
            director_source: None,
        }
    }

    pub fn with_bc(mut self, bc: BoundarySpec) -> Self {
        self.bc = bc;
        self
    }

    pub fn with_forcing(mut self, forcing: ForcingSignal) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("nu must be positive, got {}", self.nu)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.stabilization >= 0.0) {
            return Err(Error::InvalidArgument("stabilization must be non-negative".into()));
        }
        Ok(())
    }

    /// Parameters of the time-shifted problem `T(s)`: forcing and boundary data advance by `s`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.forcing = self.forcing.shifted(s);
        out.bc = self.bc.shifted(s);
        if let Some(src) = &self.director_source {
            let f = src.0.clone();
            out.director_source = Some(DirectorSource(Arc::new(move |g, t| f(g, t + s))));
        }
        out
    }
}

/// Diagnostics of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub max_divergence: f64,
    /// `dt · max|u| / h`
    pub cfl_advective: f64,
    /// `dt / h²`
    pub cfl_elastic: f64,
    pub director_max: f64,
}

/// `q = Δ_h d − ∇W(d)`.
pub fn chemical_force(d: &DirectorField, grid: &Grid, p: &Potential, bc: DirectorBc) -> Result<DirectorField> {
    let mut q = director_laplacian(d, grid, bc)?;
    q.axpy(-1.0, &p.grad_field(d, grid)?);
    Ok(q)
}

/// `−u·∇d + α(∇u)d − (1−α)(∇u)ᵀd + q`.
pub fn director_rhs(
    u: &VelocityField,
    d: &DirectorField,
    alpha: f64,
    q: &DirectorField,
    grid: &Grid,
    bc: DirectorBc,
) -> Result<DirectorField> {
    u.check(grid)?;
    let mut out = Coupling::new(grid, d, bc, alpha)?.apply(u);
    out.axpy(1.0, q);
    Ok(out)
}

/// Momentum right-hand side without pressure and body force:
/// `νΔ_h u − N(u)u + C_dᵀ q`.
///
/// The elastic part `C_dᵀ q = −(∇d)ᵀq − div(αq⊗d − (1−α)d⊗q)` differs from
/// `−div(∇d⊙∇d) − div(αq⊗d − (1−α)d⊗q)` by the gradient
/// `∇(½|∇d|² + W(d))`, which the projection removes.
pub fn stress_divergence(
    u: &VelocityField,
    d: &DirectorField,
    q: &DirectorField,
    nu: f64,
    alpha: f64,
    grid: &Grid,
    bc: DirectorBc,
) -> Result<VelocityField> {
    let mut out = velocity_laplacian(u, grid)?.scaled(nu);
    out.axpy(-1.0, &advect(u, u, grid));
    out.axpy(1.0, &Coupling::new(grid, d, bc, alpha)?.apply_transpose(q));
    Ok(out)
}

/// Largest `|1.5 d₀ − 0.5 d₁ − g|` over wall cells, where `d₀`, `d₁` are the
/// first two cells inward from a wall.
pub fn boundary_mismatch(d: &DirectorField, grid: &Grid, g: [f64; 3]) -> Result<f64> {
    d.check(grid)?;
    let mut worst: f64 = 0.0;
    for c in 0..3 {
        let f = &d.comps[c];
        for a in 0..grid.dim() {
            let n = grid.n(a);
            for (idx, &v) in f.indexed_iter() {
                let idx = [idx.0, idx.1, idx.2];
                for (wall, inward) in [(0, 1), (n - 1, n - 2)] {
                    if idx[a] == wall {
                        let mut m = idx;
                        m[a] = inward;
                        worst = worst.max((1.5 * v - 0.5 * f[m] - g[c]).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Stepper with the spectral operators of one grid precomputed.
pub struct Simulator {
    grid: Grid,
    params: ModelParams,
    disc: Discretization,
}

impl Simulator {
    pub fn new(grid: &Grid, params: ModelParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            grid: *grid,
            disc: Discretization::new(grid),
            params,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    fn check_cfl(&self, state: &State, dt: f64, index: usize) -> Result<()> {
        let h = self.grid.min_spacing();
        let umax = state.u.max_abs();
        if umax > 0.0 && dt > 0.5 * h / umax {
            return Err(Error::Cfl {
                step: index,
                kind: "advective",
                dt,
                limit: 0.5 * h / umax,
            });
        }
        if dt > 0.25 * h * h {
            return Err(Error::Cfl {
                step: index,
                kind: "elastic",
                dt,
                limit: 0.25 * h * h,
            });
        }
        Ok(())
    }

    /// Advances `state` by `dt`; `index` labels errors.
    pub fn step(&self, state: &State, dt: f64, index: usize) -> Result<(State, StepReport)> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        state.u.check(&self.grid)?;
        state.d.check(&self.grid)?;
        self.check_cfl(state, dt, index)?;
        let g = &self.grid;
        let p = &self.params;
        let t1 = state.t + dt;
        let bc0 = DirectorBc::at(&p.bc, state.t);
        let bc1 = DirectorBc::at(&p.bc, t1);

        // director
        let coupling = Coupling::new(g, &state.d, bc0, p.alpha)?;
        let mut rhs = coupling.apply(&state.u);
        rhs.axpy(-1.0, &p.potential.grad_field(&state.d, g)?);
        if let Some(src) = &p.director_source {
            rhs.axpy(1.0, &(src.0)(g, t1));
        }
        let s = p.stabilization;
        let mut rhs = rhs.scaled(dt);
        rhs.axpy(1.0 + dt * s, &state.d);
        let rhs = rhs.scaled(1.0 / (1.0 + dt * s));
        let sigma = dt / (1.0 + dt * s);
        let d_new = match bc1 {
            DirectorBc::Neumann => solve_cells(&self.disc.neumann, &rhs, sigma)?,
            DirectorBc::Dirichlet(gv) => {
                let mut r = rhs;
                r.axpy(sigma, &dirichlet_lift(g, gv));
                solve_cells(&self.disc.dirichlet, &r, sigma)?
            }
        };

        // velocity
        let q = chemical_force(&d_new, g, &p.potential, bc1)?;
        let mut u_rhs = state.u.clone();
        u_rhs.axpy(-dt, &advect(&state.u, &state.u, g));
        u_rhs.axpy(dt, &coupling.apply_transpose(&q));
        let mut u_star = self.disc.velocity_helmholtz(&u_rhs, p.nu * dt)?;
        if !p.forcing.is_zero() {
            u_star.axpy(dt, &p.forcing.eval(g, t1));
        }
        let mut u_new = self.disc.leray_project(&u_star)?;
        u_new.enforce_no_flux();

        if !u_new.is_finite() || !d_new.is_finite() {
            return Err(Error::Blowup { step: index });
        }
        let h = g.min_spacing();
        let max_divergence = divergence(&u_new, g)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let report = StepReport {
            dt,
            max_divergence,
            cfl_advective: dt * state.u.max_abs() / h,
            cfl_elastic: dt / (h * h),
            director_max: d_new.max_abs(),
        };
        Ok((State::new(*g, u_new, d_new, t1)?, report))
    }

    /// Energy, dissipation rate, work and boundary rates of one state.
    pub fn record(&self, state: &State) -> Result<StepRecord> {
        step_record(state, &self.params)
    }

    /// Integrates to time `t_final`, keeping every `sample_every`-th state.
    ///
    /// Step failures stop the run; the partial trajectory is returned with
    /// `failure` set.
    pub fn run(&self, initial: &State, t_final: f64, dt: f64, sample_every: usize) -> Result<Trajectory> {
        if !(dt > 0.0) || !(t_final >= 0.0) || sample_every == 0 {
            return Err(Error::InvalidArgument(format!(
                "need dt > 0, T >= 0, sample_every >= 1 (dt = {dt}, T = {t_final}, sample_every = {sample_every})"
            )));
        }
        let steps = (t_final / dt).round() as usize;
        if ((steps as f64) * dt - t_final).abs() > 1e-9 * t_final.max(1.0) {
            return Err(Error::InvalidArgument(format!("T = {t_final} is not a multiple of dt = {dt}")));
        }
        State::new(self.grid, initial.u.clone(), initial.d.clone(), initial.t)?;
        if let Some(prog) = self.params.bc.program() {
            let mismatch = boundary_mismatch(&initial.d, &self.grid, prog.value(initial.t))?;
            if mismatch > 1e-8 {
                return Err(Error::Incompatible { mismatch });
            }
        }

        let mut traj = Trajectory::empty(self.params.clone(), dt, sample_every);
        let mut state = initial.clone();
        traj.push_record(self.record(&state)?);
        traj.push_sample(state.clone());
        for k in 1..=steps {
            match self.step(&state, dt, k) {
                Ok((next, report)) => {
                    state = next;
                    // keep time stamps on the lattice
                    state.t = initial.t + k as f64 * dt;
                    traj.push_record(self.record(&state)?);
                    traj.reports.push(report);
                    if k % sample_every == 0 {
                        traj.push_sample(state.clone());
                    }
                }
                Err(e) => {
                    traj.failure = Some(e.to_string());
                    break;
                }
            }
        }
        Ok(traj)
    }
}

fn solve_cells(spec: &crate::operators::LaplacianSpec, rhs: &DirectorField, sigma: f64) -> Result<DirectorField> {
    let comps = [
        spec.helmholtz_solve(&rhs.comps[0], sigma)?,
        spec.helmholtz_solve(&rhs.comps[1], sigma)?,
        spec.helmholtz_solve(&rhs.comps[2], sigma)?,
    ];
    Ok(DirectorField { comps })
}

/// One step with freshly built operators.
pub fn step(state: &State, params: &ModelParams, dt: f64) -> Result<(State, StepReport)> {
    Simulator::new(&state.grid, params.clone())?.step(state, dt, 1)
}

/// Runs from `initial` to `t_final` with step `dt`, sampling every `sample_every` steps.
pub fn run(initial: &State, params: &ModelParams, t_final: f64, dt: f64, sample_every: usize) -> Result<Trajectory> {
    Simulator::new(&initial.grid, params.clone())?.run(initial, t_final, dt, sample_every)
}
