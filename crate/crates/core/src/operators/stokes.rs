//! Leray projection, the discrete Stokes operator `A = P(−Δ_h)` and its spectrum.

use super::calculus::{divergence, gradient, velocity_laplacian};
use super::spectral::Discretization;
use crate::error::{Error, Result};
use crate::fields::{Grid, VelocityField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smallest eigenpair of the discrete Stokes operator.
#[derive(Debug, Clone)]
pub struct StokesSpectrum {
    pub lambda1: f64,
    /// Unit-norm, discretely divergence-free eigenfield.
    pub w1: VelocityField,
    pub iterations: usize,
}

impl Discretization {
    /// `v − ∇φ` with `Δ_h φ = div v`, solved on the cosine basis.
    pub fn leray_project(&self, v: &VelocityField) -> Result<VelocityField> {
        let g = self.grid();
        let div = divergence(v, g)?;
        let phi = self.neumann.inverse_laplacian(&div.mapv(|x| -x))?;
        Ok(v.sub(&gradient(&phi, g)?))
    }

    /// Applies `(I − σΔ_h)⁻¹` to every velocity component.
    pub fn velocity_helmholtz(&self, rhs: &VelocityField, sigma: f64) -> Result<VelocityField> {
        rhs.check(self.grid())?;
        let comps = rhs
            .comps
            .iter()
            .zip(&self.faces)
            .map(|(c, spec)| spec.helmholtz_solve(c, sigma))
            .collect::<Result<Vec<_>>>()?;
        Ok(VelocityField { comps })
    }

    fn stokes_apply(&self, v: &VelocityField) -> Result<VelocityField> {
        let lap = velocity_laplacian(v, self.grid())?;
        self.leray_project(&lap.scaled(-1.0))
    }

    fn stokes_precondition(&self, r: &VelocityField) -> Result<VelocityField> {
        let comps = r
            .comps
            .iter()
            .zip(&self.faces)
            .map(|(c, spec)| spec.inverse_laplacian(c))
            .collect::<Result<Vec<_>>>()?;
        self.leray_project(&VelocityField { comps })
    }

    /// Solves `A z = b` for divergence-free `b` by preconditioned conjugate
    /// gradients, preconditioner `P(−Δ_h)⁻¹P`.
    pub fn stokes_solve(&self, b: &VelocityField, rel_tol: f64) -> Result<VelocityField> {
        let g = self.grid();
        let bnorm = b.norm(g);
        let mut x = VelocityField::zeros(g);
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b.clone();
        let mut z = self.stokes_precondition(&r)?;
        let mut p = z.clone();
        let mut rz = r.dot(&z, g);
        let max_iter = 500;
        let mut res = 1.0;
        for _ in 0..max_iter {
            let ap = self.stokes_apply(&p)?;
            let alpha = rz / p.dot(&ap, g);
            x.axpy(alpha, &p);
            r.axpy(-alpha, &ap);
            res = r.norm(g) / bnorm;
            if !res.is_finite() {
                break;
            }
            if res <= rel_tol {
                return Ok(x);
            }
            z = self.stokes_precondition(&r)?;
            let rz_new = r.dot(&z, g);
            let beta = rz_new / rz;
            rz = rz_new;
            let mut next = z.clone();
            next.axpy(beta, &p);
            p = next;
        }
        Err(Error::NoConvergence {
            solver: "stokes conjugate gradient",
            iterations: max_iter,
            residual: res,
        })
    }

    /// `‖h‖_{V'_div} = sqrt(⟨Ph, A⁻¹Ph⟩)`.
    pub fn dual_norm_vdiv(&self, h: &VelocityField) -> Result<f64> {
        if !h.is_finite() {
            return Err(Error::NonFinite { what: "force", index: 0 });
        }
        let ph = self.leray_project(h)?;
        let z = self.stokes_solve(&ph, 1e-10)?;
        Ok(ph.dot(&z, self.grid()).max(0.0).sqrt())
    }

    pub fn stokes_lambda1(&self, tol: f64) -> Result<StokesSpectrum> {
        let g = *self.grid();
        // a fixed pseudo-random start has a component on every symmetry class
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut start = VelocityField::zeros(&g);
        for c in &mut start.comps {
            c.mapv_inplace(|_| rng.random_range(-1.0..1.0));
        }
        start.enforce_no_flux();
        let x0 = self.leray_project(&start)?;
        let (lambda1, mut w1, iterations) = inverse_power_iteration(
            x0,
            |v| self.stokes_solve(v, 1e-12),
            |a, b| a.dot(b, &g),
            |v, s| v.scale(s),
            tol,
            200,
        )?;
        // the eigenfield lives in the range of P; remove rounding drift
        w1 = self.leray_project(&w1)?;
        let norm = w1.norm(&g);
        w1.scale(1.0 / norm);
        Ok(StokesSpectrum {
            lambda1,
            w1,
            iterations,
        })
    }
}

/// Inverse power iteration for the smallest eigenvalue of a symmetric positive operator.
///
/// `solve` applies the inverse. Stops when the relative change of the
/// Rayleigh quotient drops below `tol`; returns the eigenvalue, the unit
/// eigenvector and the iteration count.
pub fn inverse_power_iteration<T: Clone>(
    x0: T,
    mut solve: impl FnMut(&T) -> Result<T>,
    dot: impl Fn(&T, &T) -> f64,
    scale: impl Fn(&mut T, f64),
    tol: f64,
    max_iter: usize,
) -> Result<(f64, T, usize)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut x = x0;
    let n0 = dot(&x, &x).sqrt();
    if !(n0 > 0.0) {
        return Err(Error::InvalidArgument("zero start vector".into()));
    }
    scale(&mut x, 1.0 / n0);
    let mut prev = f64::INFINITY;
    let mut change = f64::INFINITY;
    for it in 1..=max_iter {
        let mut y = solve(&x)?;
        // A y = x, so the Rayleigh quotient of y is <x, y> / <y, y>
        let yy = dot(&y, &y);
        let lambda = dot(&x, &y) / yy;
        scale(&mut y, 1.0 / yy.sqrt());
        x = y;
        change = ((lambda - prev) / lambda).abs();
        if change < tol {
            return Ok((lambda, x, it));
        }
        prev = lambda;
    }
    Err(Error::NoConvergence {
        solver: "inverse power iteration",
        iterations: max_iter,
        residual: change,
    })
}

/// Convenience wrapper building the spectral operators for `grid`.
pub fn leray_project(v: &VelocityField, grid: &Grid) -> Result<VelocityField> {
    Discretization::new(grid).leray_project(v)
}

pub fn stokes_lambda1(grid: &Grid, tol: f64) -> Result<StokesSpectrum> {
    Discretization::new(grid).stokes_lambda1(tol)
}

pub fn dual_norm_vdiv(h: &VelocityField, grid: &Grid) -> Result<f64> {
    Discretization::new(grid).dual_norm_vdiv(h)
}
