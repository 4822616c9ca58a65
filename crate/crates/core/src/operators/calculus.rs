//! Finite-difference stencils on the staggered grid.
//!
//! Director ghosts: mirror (`d_ghost = d`) for the Neumann wall and odd
//! reflection through the wall value (`d_ghost = 2g − d`) for Dirichlet data.
//! Tangential velocity ghosts are odd (`u_ghost = −u`), giving zero on the wall.

use crate::error::{Error, Result};
use crate::fields::{BoundarySpec, CellField, DirectorField, Grid, VelocityField};
use ndarray::Array3;

/// Director boundary data frozen at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectorBc {
    Neumann,
    Dirichlet([f64; 3]),
}

impl DirectorBc {
    pub fn at(spec: &BoundarySpec, t: f64) -> Self {
        match spec.program() {
            Some(p) => DirectorBc::Dirichlet(p.value(t)),
            None => DirectorBc::Neumann,
        }
    }

    /// Ghost value of component `c` behind a wall next to an interior value `inside`.
    #[inline]
    pub fn ghost(&self, c: usize, inside: f64) -> f64 {
        match self {
            DirectorBc::Neumann => inside,
            DirectorBc::Dirichlet(g) => 2.0 * g[c] - inside,
        }
    }
}

#[inline]
pub(crate) fn step(idx: [usize; 3], a: usize, up: bool, n: usize) -> Option<[usize; 3]> {
    let mut m = idx;
    if up {
        if idx[a] + 1 >= n {
            return None;
        }
        m[a] += 1;
    } else {
        if idx[a] == 0 {
            return None;
        }
        m[a] -= 1;
    }
    Some(m)
}

#[inline]
pub(crate) fn shifted(idx: [usize; 3], a: usize) -> [usize; 3] {
    let mut m = idx;
    m[a] += 1;
    m
}

/// Two-point face-difference divergence at cell centers.
pub fn divergence(u: &VelocityField, grid: &Grid) -> Result<CellField> {
    u.check(grid)?;
    let mut out = grid.zeros_cells();
    for a in 0..grid.dim() {
        let h = grid.spacing(a);
        let c = &u.comps[a];
        for (idx, v) in out.indexed_iter_mut() {
            let idx = [idx.0, idx.1, idx.2];
            *v += (c[shifted(idx, a)] - c[idx]) / h;
        }
    }
    Ok(out)
}

/// Cell-to-face gradient on interior faces; wall faces are zero.
/// This is the negative adjoint of [`divergence`].
pub fn gradient(phi: &CellField, grid: &Grid) -> Result<VelocityField> {
    grid.check_cells(phi, "potential")?;
    let comps = (0..grid.dim())
        .map(|a| {
            let h = grid.spacing(a);
            let n = grid.n(a);
            Array3::from_shape_fn(grid.face_shape(a), |(i, j, k)| {
                let idx = [i, j, k];
                if idx[a] == 0 || idx[a] == n {
                    0.0
                } else {
                    let mut lo = idx;
                    lo[a] -= 1;
                    (phi[idx] - phi[lo]) / h
                }
            })
        })
        .collect();
    Ok(VelocityField { comps })
}

/// Discretely divergence-free planar velocity `(∂_y ψ, −∂_x ψ)` from a
/// stream function sampled at cell corners. `ψ` should vanish on the walls.
pub fn stream_velocity(grid: &Grid, psi: impl Fn(f64, f64) -> f64) -> Result<VelocityField> {
    if grid.dim() != 2 {
        return Err(Error::InvalidArgument("stream functions need a 2D grid".into()));
    }
    let (hx, hy) = (grid.spacing(0), grid.spacing(1));
    let corner = |i: usize, j: usize| psi(i as f64 * hx, j as f64 * hy);
    let mut u = VelocityField::zeros(grid);
    for ((i, j, _), v) in u.comps[0].indexed_iter_mut() {
        *v = (corner(i, j + 1) - corner(i, j)) / hy;
    }
    for ((i, j, _), v) in u.comps[1].indexed_iter_mut() {
        *v = -(corner(i + 1, j) - corner(i, j)) / hx;
    }
    u.enforce_no_flux();
    Ok(u)
}

/// `Δ_h d` per component with boundary ghosts.
pub fn director_laplacian(d: &DirectorField, grid: &Grid, bc: DirectorBc) -> Result<DirectorField> {
    d.check(grid)?;
    let mut out = DirectorField::zeros(grid);
    for c in 0..3 {
        let f = &d.comps[c];
        for (idx, o) in out.comps[c].indexed_iter_mut() {
            let idx = [idx.0, idx.1, idx.2];
            let v = f[idx];
            let mut acc = 0.0;
            for a in 0..grid.dim() {
                let n = grid.n(a);
                let lo = step(idx, a, false, n).map_or_else(|| bc.ghost(c, v), |m| f[m]);
                let hi = step(idx, a, true, n).map_or_else(|| bc.ghost(c, v), |m| f[m]);
                acc += (lo - 2.0 * v + hi) / grid.spacing(a).powi(2);
            }
            *o = acc;
        }
    }
    Ok(out)
}

/// The inhomogeneous part of `Δ_h` under Dirichlet data `g`:
/// `Δ_h d = Δ_0 d + lift(g)` with `Δ_0` the zero-wall Laplacian.
pub fn dirichlet_lift(grid: &Grid, g: [f64; 3]) -> DirectorField {
    let mut out = DirectorField::zeros(grid);
    for c in 0..3 {
        for (idx, o) in out.comps[c].indexed_iter_mut() {
            let idx = [idx.0, idx.1, idx.2];
            let mut acc = 0.0;
            for a in 0..grid.dim() {
                let walls = (idx[a] == 0) as usize + (idx[a] + 1 == grid.n(a)) as usize;
                acc += walls as f64 * 2.0 * g[c] / grid.spacing(a).powi(2);
            }
            *o = acc;
        }
    }
    out
}

/// Centered-difference director gradient; entry `[c][a]` holds `∂_a d_c`.
pub fn grad_director(d: &DirectorField, grid: &Grid, bc: DirectorBc) -> Result<Vec<Vec<CellField>>> {
    d.check(grid)?;
    Ok((0..3)
        .map(|c| {
            let f = &d.comps[c];
            (0..grid.dim())
                .map(|a| {
                    let n = grid.n(a);
                    let h = grid.spacing(a);
                    Array3::from_shape_fn(grid.cell_shape(), |(i, j, k)| {
                        let idx = [i, j, k];
                        let v = f[idx];
                        let lo = step(idx, a, false, n).map_or_else(|| bc.ghost(c, v), |m| f[m]);
                        let hi = step(idx, a, true, n).map_or_else(|| bc.ghost(c, v), |m| f[m]);
                        (hi - lo) / (2.0 * h)
                    })
                })
                .collect()
        })
        .collect())
}

/// Face-based `‖∇_h d‖²`.
///
/// Interior faces use the two-point difference. Under Dirichlet data each
/// wall face uses `(d − g)/(h/2)` over a half cell; Neumann walls carry no
/// gradient. The first variation of this quantity is `−2 Δ_h d`.
pub fn director_gradient_energy(d: &DirectorField, grid: &Grid, bc: DirectorBc) -> Result<f64> {
    d.check(grid)?;
    let mut parts = Vec::with_capacity(3 * grid.dim());
    for c in 0..3 {
        let f = &d.comps[c];
        for a in 0..grid.dim() {
            let h2 = grid.spacing(a).powi(2);
            let n = grid.n(a);
            let mut terms = Vec::with_capacity(f.len());
            for (idx, &v) in f.indexed_iter() {
                let idx = [idx.0, idx.1, idx.2];
                let mut t = match step(idx, a, true, n) {
                    Some(m) => (f[m] - v).powi(2) / h2,
                    None => 0.0,
                };
                if let DirectorBc::Dirichlet(g) = bc {
                    let walls = (idx[a] == 0) as usize + (idx[a] + 1 == n) as usize;
                    t += walls as f64 * 2.0 * (v - g[c]).powi(2) / h2;
                }
                terms.push(t);
            }
            parts.push(crate::fields::pairwise_sum(&terms));
        }
    }
    Ok(parts.iter().sum::<f64>() * grid.cell_volume())
}

/// Discrete `⟨g_t, ∂_n d⟩` over all walls, with the outward normal
/// derivative `2(g − d_wall_cell)/h`. This is the exact time-derivative
/// companion of the wall part of [`director_gradient_energy`].
pub fn boundary_pairing(d: &DirectorField, grid: &Grid, g: [f64; 3], g_t: [f64; 3]) -> Result<f64> {
    d.check(grid)?;
    let mut total = 0.0;
    for c in 0..3 {
        if g_t[c] == 0.0 {
            continue;
        }
        let mut terms = Vec::new();
        for a in 0..grid.dim() {
            let h = grid.spacing(a);
            let area = grid.cell_volume() / h;
            let n = grid.n(a);
            for (idx, &v) in d.comps[c].indexed_iter() {
                let idx = [idx.0, idx.1, idx.2];
                let walls = (idx[a] == 0) as usize + (idx[a] + 1 == n) as usize;
                if walls > 0 {
                    terms.push(walls as f64 * g_t[c] * 2.0 * (g[c] - v) / h * area);
                }
            }
        }
        total += crate::fields::pairwise_sum(&terms);
    }
    Ok(total)
}

/// `Δ_h u` for each velocity component with no-slip walls. Wall normal faces stay zero.
pub fn velocity_laplacian(u: &VelocityField, grid: &Grid) -> Result<VelocityField> {
    u.check(grid)?;
    let comps = u
        .comps
        .iter()
        .enumerate()
        .map(|(k, f)| {
            let shape = grid.face_shape(k);
            let nk = grid.n(k);
            Array3::from_shape_fn(shape, |(i, j, l)| {
                let idx = [i, j, l];
                if idx[k] == 0 || idx[k] == nk {
                    return 0.0;
                }
                let v = f[idx];
                let mut acc = 0.0;
                for a in 0..grid.dim() {
                    let len = if a == k { nk + 1 } else { grid.n(a) };
                    let ghost = if a == k { 0.0 } else { -v };
                    let lo = step(idx, a, false, len).map_or(ghost, |m| f[m]);
                    let hi = step(idx, a, true, len).map_or(ghost, |m| f[m]);
                    acc += (lo - 2.0 * v + hi) / grid.spacing(a).powi(2);
                }
                acc
            })
        })
        .collect();
    Ok(VelocityField { comps })
}

/// `‖∇_h u‖² = ⟨u, −Δ_h u⟩` assembled from face differences.
pub fn velocity_gradient_energy(u: &VelocityField, grid: &Grid) -> Result<f64> {
    u.check(grid)?;
    let mut parts = Vec::new();
    for (k, f) in u.comps.iter().enumerate() {
        for a in 0..grid.dim() {
            let h2 = grid.spacing(a).powi(2);
            let len = f.shape()[a];
            let mut terms = Vec::with_capacity(f.len());
            for (idx, &v) in f.indexed_iter() {
                let idx = [idx.0, idx.1, idx.2];
                let mut t = match step(idx, a, true, len) {
                    Some(m) => (f[m] - v).powi(2) / h2,
                    None => 0.0,
                };
                if a != k {
                    // odd ghost across the wall: difference 2u/h over half a cell
                    let walls = (idx[a] == 0) as usize + (idx[a] + 1 == len) as usize;
                    t += walls as f64 * 2.0 * v * v / h2;
                }
                terms.push(t);
            }
            parts.push(crate::fields::pairwise_sum(&terms));
        }
    }
    Ok(parts.iter().sum::<f64>() * grid.cell_volume())
}
