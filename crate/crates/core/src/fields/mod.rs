//! Staggered-grid field storage on a rectangular box.
//!
//! Velocity components live on cell faces (MAC layout): component `a` is
//! stored on the faces normal to axis `a`, so its array has one extra entry
//! along that axis. The director is cell-centered and always has three
//! components, also in two dimensions. Two-dimensional grids keep the third
//! array axis with length one.

mod boundary;
mod quadrature;
pub mod snapshot;

pub use boundary::{BoundaryProgram, BoundarySpec};
pub use quadrature::{
    integrate_scalar, interp_face_to_center, l2_norm, l2_norm_cells, linf_norm, pairwise_sum,
};

use crate::error::{Error, Result};
use ndarray::Array3;

/// Cell-centered scalar field.
pub type CellField = Array3<f64>;

/// Rectangular box discretised into `n[a]` cells per active axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: [usize; 3],
    extent: [f64; 3],
}

impl Grid {
    pub fn new(dim: usize, n: &[usize], extent: &[f64]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if n.len() != dim || extent.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} cell counts and extents, got {} and {}",
                n.len(),
                extent.len()
            )));
        }
        let mut cells = [1usize; 3];
        let mut len = [1.0f64; 3];
        for a in 0..dim {
            if n[a] < 4 {
                return Err(Error::InvalidGrid(format!("n[{a}] = {} < 4", n[a])));
            }
            if !(extent[a] > 0.0 && extent[a].is_finite()) {
                return Err(Error::InvalidGrid(format!("extent[{a}] = {}", extent[a])));
            }
            cells[a] = n[a];
            len[a] = extent[a];
        }
        Ok(Self {
            dim,
            n: cells,
            extent: len,
        })
    }

    /// Square (or cube) with `n` cells of the same size on each axis.
    pub fn cube(dim: usize, n: usize, extent: f64) -> Result<Self> {
        Self::new(dim, &vec![n; dim], &vec![extent; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cell count along axis `a` (1 for the inactive axis of a 2D grid).
    pub fn n(&self, a: usize) -> usize {
        self.n[a]
    }

    pub fn extent(&self, a: usize) -> f64 {
        self.extent[a]
    }

    pub fn spacing(&self, a: usize) -> f64 {
        if a < self.dim {
            self.extent[a] / self.n[a] as f64
        } else {
            1.0
        }
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|a| self.extent[a]).product()
    }

    pub fn cell_shape(&self) -> (usize, usize, usize) {
        (self.n[0], self.n[1], self.n[2])
    }

    /// Shape of the array holding velocity component `a`.
    pub fn face_shape(&self, a: usize) -> (usize, usize, usize) {
        let mut s = self.n;
        s[a] += 1;
        (s[0], s[1], s[2])
    }

    pub fn cell_count(&self) -> usize {
        self.n.iter().product()
    }

    /// Physical coordinates of the center of cell `(i, j, k)`.
    pub fn cell_center(&self, idx: [usize; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = (idx[a] as f64 + 0.5) * self.spacing(a);
        }
        x
    }

    /// Coordinates of the face-center carrying velocity component `a` at array index `idx`.
    pub fn face_center(&self, a: usize, idx: [usize; 3]) -> [f64; 3] {
        let mut x = self.cell_center(idx);
        x[a] = idx[a] as f64 * self.spacing(a);
        x
    }

    pub fn zeros_cells(&self) -> CellField {
        Array3::zeros(self.cell_shape())
    }

    pub fn cells_from_fn(&self, mut f: impl FnMut([f64; 3]) -> f64) -> CellField {
        Array3::from_shape_fn(self.cell_shape(), |(i, j, k)| f(self.cell_center([i, j, k])))
    }

    pub fn check_cells(&self, f: &CellField, what: &str) -> Result<()> {
        if f.dim() != self.cell_shape() {
            return Err(Error::Shape(format!(
                "{what}: expected {:?}, got {:?}",
                self.cell_shape(),
                f.dim()
            )));
        }
        Ok(())
    }
}

/// Face-centered velocity, one array per spatial dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub comps: Vec<Array3<f64>>,
}

impl VelocityField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            comps: (0..grid.dim())
                .map(|a| Array3::zeros(grid.face_shape(a)))
                .collect(),
        }
    }

    /// Samples `f` at face centers. Normal components on the walls are set to zero.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let comps = (0..grid.dim())
            .map(|a| {
                let na = grid.n(a);
                Array3::from_shape_fn(grid.face_shape(a), |(i, j, k)| {
                    let idx = [i, j, k];
                    if idx[a] == 0 || idx[a] == na {
                        0.0
                    } else {
                        f(grid.face_center(a, idx))[a]
                    }
                })
            })
            .collect();
        Self { comps }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        if self.comps.len() != grid.dim() {
            return Err(Error::Shape(format!(
                "velocity has {} components on a {}D grid",
                self.comps.len(),
                grid.dim()
            )));
        }
        for (a, c) in self.comps.iter().enumerate() {
            if c.dim() != grid.face_shape(a) {
                return Err(Error::Shape(format!(
                    "velocity component {a}: expected {:?}, got {:?}",
                    grid.face_shape(a),
                    c.dim()
                )));
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for c in &mut self.comps {
            c.mapv_inplace(|v| v * s);
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Self) {
        for (c, o) in self.comps.iter_mut().zip(&other.comps) {
            c.scaled_add(s, o);
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Discrete L² inner product. Boundary normal faces carry zero by construction.
    pub fn dot(&self, other: &Self, grid: &Grid) -> f64 {
        let parts: Vec<f64> = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| {
                let prod: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x * y).collect();
                pairwise_sum(&prod)
            })
            .collect();
        parts.iter().sum::<f64>() * grid.cell_volume()
    }

    pub fn norm(&self, grid: &Grid) -> f64 {
        self.dot(self, grid).max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }

    /// Zeroes the normal component on every wall face.
    pub fn enforce_no_flux(&mut self) {
        for (a, c) in self.comps.iter_mut().enumerate() {
            let na = c.shape()[a] - 1;
            for (idx, v) in c.indexed_iter_mut() {
                let idx = [idx.0, idx.1, idx.2];
                if idx[a] == 0 || idx[a] == na {
                    *v = 0.0;
                }
            }
        }
    }
}

/// Cell-centered director, always three components.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectorField {
    pub comps: [Array3<f64>; 3],
}

impl DirectorField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            comps: std::array::from_fn(|_| grid.zeros_cells()),
        }
    }

    pub fn constant(grid: &Grid, value: [f64; 3]) -> Self {
        Self {
            comps: std::array::from_fn(|k| Array3::from_elem(grid.cell_shape(), value[k])),
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for i in 0..grid.n(0) {
            for j in 0..grid.n(1) {
                for k in 0..grid.n(2) {
                    let v = f(grid.cell_center([i, j, k]));
                    for c in 0..3 {
                        out.comps[c][[i, j, k]] = v[c];
                    }
                }
            }
        }
        out
    }

    pub fn check(&self, grid: &Grid) -> Result<()> {
        for c in &self.comps {
            grid.check_cells(c, "director")?;
        }
        Ok(())
    }

    pub fn at(&self, idx: [usize; 3]) -> [f64; 3] {
        std::array::from_fn(|c| self.comps[c][idx])
    }

    pub fn axpy(&mut self, s: f64, other: &Self) {
        for (c, o) in self.comps.iter_mut().zip(&other.comps) {
            c.scaled_add(s, o);
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            comps: std::array::from_fn(|c| self.comps[c].mapv(|v| v * s)),
        }
    }

    pub fn dot(&self, other: &Self, grid: &Grid) -> f64 {
        let parts: Vec<f64> = (0..3)
            .map(|c| {
                let prod: Vec<f64> = self.comps[c]
                    .iter()
                    .zip(other.comps[c].iter())
                    .map(|(x, y)| x * y)
                    .collect();
                pairwise_sum(&prod)
            })
            .collect();
        parts.iter().sum::<f64>() * grid.cell_volume()
    }

    pub fn norm(&self, grid: &Grid) -> f64 {
        self.dot(self, grid).max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Pointwise Euclidean length, as a cell field.
    pub fn magnitude(&self) -> CellField {
        let mut out = self.comps[0].mapv(|v| v * v);
        out.zip_mut_with(&self.comps[1], |o, v| *o += v * v);
        out.zip_mut_with(&self.comps[2], |o, v| *o += v * v);
        out.mapv_inplace(f64::sqrt);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|v| v.is_finite()))
    }
}

/// One solution snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub grid: Grid,
    pub u: VelocityField,
    pub d: DirectorField,
    pub t: f64,
}

impl State {
    pub fn new(grid: Grid, u: VelocityField, d: DirectorField, t: f64) -> Result<Self> {
        u.check(&grid)?;
        d.check(&grid)?;
        Ok(Self { grid, u, d, t })
    }

    /// Quiescent flow with a uniform director.
    pub fn uniform(grid: Grid, director: [f64; 3]) -> Self {
        Self {
            grid,
            u: VelocityField::zeros(&grid),
            d: DirectorField::constant(&grid, director),
            t: 0.0,
        }
    }
}
