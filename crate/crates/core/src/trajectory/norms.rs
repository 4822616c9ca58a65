//! Spatial norms used by the trajectory analytics.

use crate::error::{Error, Result};
use crate::fields::{pairwise_sum, DirectorField, Grid, State, VelocityField};
use crate::operators::{velocity_gradient_energy, Discretization};

/// Spatial norm selector for translation-bounded norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialNorm {
    L2,
    /// `‖∇u‖`
    Vdiv,
    /// Spectral `H²`.
    H2,
    /// `‖·‖_{V'_div}`
    DualVdiv,
    /// `L^{3/2}` quadrature.
    L32,
}

/// Norm evaluator bound to one grid.
#[derive(Debug, Clone)]
pub struct Norms {
    disc: Discretization,
}

impl Norms {
    pub fn new(grid: &Grid) -> Self {
        Self {
            disc: Discretization::new(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.disc.grid()
    }

    pub fn velocity_l2(&self, u: &VelocityField) -> Result<f64> {
        u.check(self.grid())?;
        Ok(u.norm(self.grid()))
    }

    pub fn velocity_vdiv(&self, u: &VelocityField) -> Result<f64> {
        Ok(velocity_gradient_energy(u, self.grid())?.max(0.0).sqrt())
    }

    pub fn velocity_dual(&self, u: &VelocityField) -> Result<f64> {
        self.disc.dual_norm_vdiv(u)
    }

    /// Spectral `H^s` norm with no-slip eigenfunctions, `s ∈ [−1, 2]`.
    pub fn velocity_sobolev(&self, u: &VelocityField, s: f64) -> Result<f64> {
        u.check(self.grid())?;
        let mut sq = 0.0;
        for (c, spec) in u.comps.iter().zip(&self.disc.faces) {
            sq += spec.sobolev_norm_sq(c, s)?;
        }
        Ok(sq.sqrt())
    }

    /// Spectral `H^s` norm with Neumann eigenfunctions, `s ∈ [−1, 2]`.
    pub fn director_sobolev(&self, d: &DirectorField, s: f64) -> Result<f64> {
        d.check(self.grid())?;
        let mut sq = 0.0;
        for c in &d.comps {
            sq += self.disc.neumann.sobolev_norm_sq(c, s)?;
        }
        Ok(sq.sqrt())
    }

    /// `(∫|d|^p)^{1/p}` by midpoint quadrature.
    pub fn director_lp(&self, d: &DirectorField, p: f64) -> Result<f64> {
        d.check(self.grid())?;
        if !(p >= 1.0) {
            return Err(Error::InvalidArgument(format!("L^p exponent must be >= 1, got {p}")));
        }
        let terms: Vec<f64> = d
            .magnitude()
            .iter()
            .map(|m| m.powf(p))
            .collect();
        Ok((pairwise_sum(&terms) * self.grid().cell_volume()).powf(1.0 / p))
    }

    fn velocity_lp(&self, u: &VelocityField, p: f64) -> Result<f64> {
        let terms: Vec<f64> = u.comps.iter().flat_map(|c| c.iter().map(|v| v.abs().powf(p))).collect();
        Ok((pairwise_sum(&terms) * self.grid().cell_volume()).powf(1.0 / p))
    }

    pub fn velocity(&self, u: &VelocityField, norm: SpatialNorm) -> Result<f64> {
        match norm {
            SpatialNorm::L2 => self.velocity_l2(u),
            SpatialNorm::Vdiv => self.velocity_vdiv(u),
            SpatialNorm::H2 => self.velocity_sobolev(u, 2.0),
            SpatialNorm::DualVdiv => self.velocity_dual(u),
            SpatialNorm::L32 => self.velocity_lp(u, 1.5),
        }
    }

    pub fn director(&self, d: &DirectorField, norm: SpatialNorm) -> Result<f64> {
        match norm {
            SpatialNorm::L2 => self.director_sobolev(d, 0.0),
            SpatialNorm::Vdiv => self.director_sobolev(d, 1.0),
            SpatialNorm::H2 => self.director_sobolev(d, 2.0),
            SpatialNorm::DualVdiv => self.director_sobolev(d, -1.0),
            SpatialNorm::L32 => self.director_lp(d, 1.5),
        }
    }
}

/// Distance in `H^{−δ₁} × H^{δ₂}`, or `H^{−δ₁} × (H^{δ₂} ∩ L^s)` when an
/// exponent `s` is given (director part is the max of both norms).
#[derive(Debug, Clone)]
pub struct YMetric {
    norms: Norms,
    pub delta1: f64,
    pub delta2: f64,
    pub s: Option<f64>,
}

impl YMetric {
    pub fn new(grid: &Grid, delta1: f64, delta2: f64, s: Option<f64>) -> Result<Self> {
        for d in [delta1, delta2] {
            if !(0.0..1.0).contains(&d) {
                return Err(Error::InvalidArgument(format!("smoothness indices must lie in [0, 1), got {d}")));
            }
        }
        if let Some(s) = s {
            if !(s >= 1.0) {
                return Err(Error::InvalidArgument(format!("L^s exponent must be >= 1, got {s}")));
            }
        }
        Ok(Self {
            norms: Norms::new(grid),
            delta1,
            delta2,
            s,
        })
    }

    pub fn distance(&self, a: &State, b: &State) -> Result<f64> {
        let du = a.u.sub(&b.u);
        let dd = a.d.sub(&b.d);
        let mut director = self.norms.director_sobolev(&dd, self.delta2)?;
        if let Some(s) = self.s {
            director = director.max(self.norms.director_lp(&dd, s)?);
        }
        Ok(self.norms.velocity_sobolev(&du, -self.delta1)? + director)
    }
}
