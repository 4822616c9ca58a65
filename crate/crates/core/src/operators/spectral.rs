//! Diagonalised discrete Laplacians: modal solves and spectral Sobolev norms.

use super::basis::{Basis, BasisKind};
use crate::error::{Error, Result};
use crate::fields::Grid;
use ndarray::{s, Array3};

/// Boundary condition fixing the eigenbasis of a cell-centered Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarBc {
    Neumann,
    DirichletZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Cells(ScalarBc),
    /// Velocity component on faces normal to the given axis, no-slip walls.
    Face(usize),
}

/// Eigendecomposition of one discrete Laplacian on a grid.
#[derive(Debug, Clone)]
pub struct LaplacianSpec {
    grid: Grid,
    layout: Layout,
    bases: [Basis; 3],
}

impl LaplacianSpec {
    pub fn cells(grid: &Grid, bc: ScalarBc) -> Self {
        let kind = match bc {
            ScalarBc::Neumann => BasisKind::Cosine,
            ScalarBc::DirichletZero => BasisKind::HalfSine,
        };
        Self::build(grid, Layout::Cells(bc), |_| kind)
    }

    /// Laplacian acting on velocity component `axis` with no-slip walls.
    pub fn faces(grid: &Grid, axis: usize) -> Self {
        Self::build(grid, Layout::Face(axis), |a| {
            if a == axis {
                BasisKind::Sine
            } else {
                BasisKind::HalfSine
            }
        })
    }

    fn build(grid: &Grid, layout: Layout, kind: impl Fn(usize) -> BasisKind) -> Self {
        let bases = std::array::from_fn(|a| {
            if a < grid.dim() {
                Basis::new(kind(a), grid.n(a), grid.spacing(a))
            } else {
                Basis::new(BasisKind::Identity, 1, 1.0)
            }
        });
        Self {
            grid: *grid,
            layout,
            bases,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// True when a constant (zero-eigenvalue) mode exists.
    pub fn has_null_mode(&self) -> bool {
        self.layout == Layout::Cells(ScalarBc::Neumann)
    }

    /// Shape of the array this operator acts on.
    pub fn field_shape(&self) -> (usize, usize, usize) {
        match self.layout {
            Layout::Cells(_) => self.grid.cell_shape(),
            Layout::Face(a) => self.grid.face_shape(a),
        }
    }

    /// Shape of the modal coefficient array.
    pub fn mode_shape(&self) -> (usize, usize, usize) {
        (self.bases[0].len(), self.bases[1].len(), self.bases[2].len())
    }

    /// Eigenvalue `μ ≥ 0` of `−Δ_h` for the mode with multi-index `k`.
    pub fn eigenvalue(&self, k: [usize; 3]) -> f64 {
        (0..3).map(|a| self.bases[a].eigenvalue(k[a])).sum()
    }

    fn check(&self, f: &Array3<f64>) -> Result<()> {
        if f.dim() != self.field_shape() {
            return Err(Error::Shape(format!(
                "spectral operand: expected {:?}, got {:?}",
                self.field_shape(),
                f.dim()
            )));
        }
        Ok(())
    }

    /// Orthonormal modal coefficients of `f`. Wall faces are ignored.
    pub fn to_modes(&self, f: &Array3<f64>) -> Result<Array3<f64>> {
        self.check(f)?;
        let mut c = match self.layout {
            Layout::Cells(_) => f.clone(),
            Layout::Face(a) => {
                let n = self.grid.n(a);
                match a {
                    0 => f.slice(s![1..n, .., ..]).to_owned(),
                    1 => f.slice(s![.., 1..n, ..]).to_owned(),
                    _ => f.slice(s![.., .., 1..n]).to_owned(),
                }
            }
        };
        for a in 0..self.grid.dim() {
            self.bases[a].transform_axis(&mut c, a, true);
        }
        Ok(c)
    }

    /// Inverse of [`to_modes`](Self::to_modes); wall faces are set to zero.
    pub fn from_modes(&self, coeffs: &Array3<f64>) -> Result<Array3<f64>> {
        if coeffs.dim() != self.mode_shape() {
            return Err(Error::Shape(format!(
                "modal coefficients: expected {:?}, got {:?}",
                self.mode_shape(),
                coeffs.dim()
            )));
        }
        let mut c = coeffs.clone();
        for a in 0..self.grid.dim() {
            self.bases[a].transform_axis(&mut c, a, false);
        }
        Ok(match self.layout {
            Layout::Cells(_) => c,
            Layout::Face(a) => {
                let n = self.grid.n(a);
                let mut out = Array3::zeros(self.field_shape());
                match a {
                    0 => out.slice_mut(s![1..n, .., ..]).assign(&c),
                    1 => out.slice_mut(s![.., 1..n, ..]).assign(&c),
                    _ => out.slice_mut(s![.., .., 1..n]).assign(&c),
                }
                out
            }
        })
    }

    fn modal_map(&self, f: &Array3<f64>, g: impl Fn(f64) -> f64) -> Result<Array3<f64>> {
        let mut c = self.to_modes(f)?;
        for ((i, j, k), v) in c.indexed_iter_mut() {
            *v *= g(self.eigenvalue([i, j, k]));
        }
        self.from_modes(&c)
    }

    /// Grid samples of the orthonormal eigenfunction `k`.
    pub fn eigenfunction(&self, k: [usize; 3]) -> Result<Array3<f64>> {
        let (m0, m1, m2) = self.mode_shape();
        if k[0] >= m0 || k[1] >= m1 || k[2] >= m2 {
            return Err(Error::InvalidArgument(format!("mode {k:?} out of range")));
        }
        let mut c = Array3::zeros(self.mode_shape());
        c[k] = 1.0;
        self.from_modes(&c)
    }

    /// Solves `(I − σΔ_h) x = rhs` by modal division.
    pub fn helmholtz_solve(&self, rhs: &Array3<f64>, sigma: f64) -> Result<Array3<f64>> {
        if !(sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("helmholtz needs sigma > 0, got {sigma}")));
        }
        self.modal_map(rhs, |mu| 1.0 / (1.0 + sigma * mu))
    }

    /// Solves `−Δ_h x = rhs`. On the Neumann basis the mean of `rhs` is
    /// discarded and `x` has zero mean.
    pub fn inverse_laplacian(&self, rhs: &Array3<f64>) -> Result<Array3<f64>> {
        self.modal_map(rhs, |mu| if mu > 0.0 { 1.0 / mu } else { 0.0 })
    }

    /// `−Δ_h f` evaluated modally.
    pub fn apply_neg_laplacian(&self, f: &Array3<f64>) -> Result<Array3<f64>> {
        self.modal_map(f, |mu| mu)
    }

    /// `sqrt(vol · Σ (1+μ_k)^s f̂_k²)`, the spectral `H^s` norm of one scalar array.
    pub fn sobolev_norm(&self, f: &Array3<f64>, s: f64) -> Result<f64> {
        Ok(self.sobolev_norm_sq(f, s)?.sqrt())
    }

    pub fn sobolev_norm_sq(&self, f: &Array3<f64>, s: f64) -> Result<f64> {
        if !(-1.0..=2.0).contains(&s) {
            return Err(Error::InvalidArgument(format!("Sobolev exponent {s} outside [-1, 2]")));
        }
        if let Some(index) = f.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "sobolev operand", index });
        }
        let c = self.to_modes(f)?;
        let terms: Vec<f64> = c
            .indexed_iter()
            .map(|((i, j, k), v)| (1.0 + self.eigenvalue([i, j, k])).powf(s) * v * v)
            .collect();
        Ok(crate::fields::pairwise_sum(&terms) * self.grid.cell_volume())
    }
}

/// Every spectral operator needed on one grid, built once.
#[derive(Debug, Clone)]
pub struct Discretization {
    grid: Grid,
    pub neumann: LaplacianSpec,
    pub dirichlet: LaplacianSpec,
    pub faces: Vec<LaplacianSpec>,
}

impl Discretization {
    pub fn new(grid: &Grid) -> Self {
        Self {
            grid: *grid,
            neumann: LaplacianSpec::cells(grid, ScalarBc::Neumann),
            dirichlet: LaplacianSpec::cells(grid, ScalarBc::DirichletZero),
            faces: (0..grid.dim()).map(|a| LaplacianSpec::faces(grid, a)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cells(&self, bc: ScalarBc) -> &LaplacianSpec {
        match bc {
            ScalarBc::Neumann => &self.neumann,
            ScalarBc::DirichletZero => &self.dirichlet,
        }
    }
}
