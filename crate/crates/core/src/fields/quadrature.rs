use super::{CellField, Grid, VelocityField};
use crate::error::{Error, Result};
use ndarray::Array3;

const PAIRWISE_BLOCK: usize = 64;

/// Pairwise summation with a fixed split pattern, so the result depends only
/// on the input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn sum_array(f: &CellField) -> f64 {
    match f.as_slice() {
        Some(s) => pairwise_sum(s),
        None => pairwise_sum(&f.iter().copied().collect::<Vec<_>>()),
    }
}

/// Midpoint-rule integral over the box.
pub fn integrate_scalar(f: &CellField, grid: &Grid) -> Result<f64> {
    grid.check_cells(f, "integrand")?;
    Ok(sum_array(f) * grid.cell_volume())
}

fn check_finite(f: &CellField) -> Result<()> {
    match f.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            what: "field",
            index,
        }),
        None => Ok(()),
    }
}

pub fn linf_norm(f: &CellField) -> Result<f64> {
    check_finite(f)?;
    Ok(f.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

pub fn l2_norm(f: &CellField, grid: &Grid) -> Result<f64> {
    check_finite(f)?;
    integrate_scalar(&f.mapv(|v| v * v), grid).map(f64::sqrt)
}

/// L² norm of a cell-centered vector field given component-wise.
pub fn l2_norm_cells(comps: &[CellField], grid: &Grid) -> Result<f64> {
    let mut total = 0.0;
    for c in comps {
        check_finite(c)?;
        total += integrate_scalar(&c.mapv(|v| v * v), grid)?;
    }
    Ok(total.sqrt())
}

/// Two-point average of each face component onto cell centers.
pub fn interp_face_to_center(u: &VelocityField, grid: &Grid) -> Result<Vec<CellField>> {
    u.check(grid)?;
    let (n0, n1, n2) = grid.cell_shape();
    Ok(u
        .comps
        .iter()
        .enumerate()
        .map(|(a, c)| {
            Array3::from_shape_fn((n0, n1, n2), |(i, j, k)| {
                let mut hi = [i, j, k];
                hi[a] += 1;
                0.5 * (c[[i, j, k]] + c[hi])
            })
        })
        .collect())
}
