//! The transport/stretching operator `C_d u = −u·∇d + α(∇u)d − (1−α)(∇u)ᵀd`
//! and its exact discrete adjoint.
//!
//! `C_d` is linear in `u`, so it is described once as a list of
//! (cell, component, face, weight) entries; `apply` and `apply_transpose`
//! walk the same list, which makes them adjoint to rounding. The momentum
//! equation uses `C_dᵀ q`, the director equation `C_d u`, and the two
//! exchanges cancel in the energy balance.
//!
//! Velocity gradients at cells: `∂_k ū_k` is the compact face difference,
//! `∂_j ū_k` (`j ≠ k`) the centered difference of cell averages with odd
//! ghosts at walls.

use crate::error::Result;
use crate::fields::{CellField, DirectorField, Grid, VelocityField};
use crate::operators::{grad_director, shifted, step, DirectorBc};

pub struct Coupling<'a> {
    grid: &'a Grid,
    d: &'a DirectorField,
    alpha: f64,
    grad: Vec<Vec<CellField>>,
}

impl<'a> Coupling<'a> {
    pub fn new(grid: &'a Grid, d: &'a DirectorField, bc: DirectorBc, alpha: f64) -> Result<Self> {
        Ok(Self {
            grid,
            d,
            alpha,
            grad: grad_director(d, grid, bc)?,
        })
    }

    /// Emits `(cell, output component, velocity component, face, weight)`.
    fn visit(&self, mut emit: impl FnMut([usize; 3], usize, usize, [usize; 3], f64)) {
        let g = self.grid;
        let dim = g.dim();
        let (n0, n1, n2) = g.cell_shape();
        for i in 0..n0 {
            for j in 0..n1 {
                for l in 0..n2 {
                    let idx = [i, j, l];
                    let dv = self.d.at(idx);
                    for a in 0..dim {
                        let hi = shifted(idx, a);
                        for c in 0..3 {
                            let w = -0.5 * self.grad[c][a][idx];
                            if w != 0.0 {
                                emit(idx, c, a, idx, w);
                                emit(idx, c, a, hi, w);
                            }
                        }
                    }
                    for k in 0..dim {
                        for jj in 0..dim {
                            // G_{k,jj} feeds α d_jj into S_k and −(1−α) d_k into S_jj
                            let targets = [(k, self.alpha * dv[jj]), (jj, -(1.0 - self.alpha) * dv[k])];
                            for (c, f) in targets {
                                if f != 0.0 {
                                    self.velocity_gradient(idx, k, jj, f, |face, w| emit(idx, c, k, face, w));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Stencil of `f · ∂_j ū_k` at cell `idx` as (face of component `k`, weight).
    fn velocity_gradient(&self, idx: [usize; 3], k: usize, j: usize, f: f64, mut emit: impl FnMut([usize; 3], f64)) {
        let g = self.grid;
        if k == j {
            let h = g.spacing(k);
            emit(shifted(idx, k), f / h);
            emit(idx, -f / h);
            return;
        }
        let s = f / (2.0 * g.spacing(j));
        for (up, sign) in [(true, 1.0), (false, -1.0)] {
            let w = 0.5 * sign * s;
            match step(idx, j, up, g.n(j)) {
                Some(m) => {
                    emit(m, w);
                    emit(shifted(m, k), w);
                }
                None => {
                    emit(idx, -w);
                    emit(shifted(idx, k), -w);
                }
            }
        }
    }

    pub fn apply(&self, u: &VelocityField) -> DirectorField {
        let mut out = DirectorField::zeros(self.grid);
        self.visit(|cell, c, a, face, w| out.comps[c][cell] += w * u.comps[a][face]);
        out
    }

    /// Adjoint of [`apply`](Self::apply) on no-flux velocity fields.
    pub fn apply_transpose(&self, q: &DirectorField) -> VelocityField {
        let mut out = VelocityField::zeros(self.grid);
        self.visit(|cell, c, a, face, w| out.comps[a][face] += w * q.comps[c][cell]);
        out.enforce_no_flux();
        out
    }
}
