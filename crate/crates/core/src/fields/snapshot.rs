//! Binary snapshot files.
//!
//! Layout (all little-endian): magic `NEMA1\0`, `u32` dim, `u32` cell count per
//! axis, `f64` extent per axis, `f64` time, `u8` boundary tag, then every
//! velocity component array followed by the three director arrays as `f64`
//! in C order.

use super::{DirectorField, Grid, State, VelocityField};
use crate::error::{Error, Result};
use ndarray::Array3;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 6] = b"NEMA1\0";

pub fn write_snapshot<W: Write>(mut w: W, state: &State, bc_tag: u8) -> Result<()> {
    let g = &state.grid;
    w.write_all(MAGIC)?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    for a in 0..g.dim() {
        w.write_all(&(g.n(a) as u32).to_le_bytes())?;
    }
    for a in 0..g.dim() {
        w.write_all(&g.extent(a).to_le_bytes())?;
    }
    w.write_all(&state.t.to_le_bytes())?;
    w.write_all(&[bc_tag])?;
    let mut buf = Vec::new();
    for c in state.u.comps.iter().chain(state.d.comps.iter()) {
        for v in c.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_array<R: Read>(r: &mut R, shape: (usize, usize, usize)) -> Result<Array3<f64>> {
    let len = shape.0 * shape.1 * shape.2;
    let mut bytes = vec![0u8; len * 8];
    r.read_exact(&mut bytes)?;
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Array3::from_shape_vec(shape, data).map_err(|e| Error::Format(e.to_string()))
}

/// Reads a snapshot, returning the state and the boundary tag.
pub fn read_snapshot<R: Read>(mut r: R) -> Result<(State, u8)> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let dim = read_u32(&mut r)? as usize;
    if dim != 2 && dim != 3 {
        return Err(Error::Format(format!("unsupported dim {dim}")));
    }
    let n = (0..dim)
        .map(|_| read_u32(&mut r).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let ext = (0..dim)
        .map(|_| read_f64(&mut r))
        .collect::<Result<Vec<_>>>()?;
    let grid = Grid::new(dim, &n, &ext)?;
    let t = read_f64(&mut r)?;
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag)?;
    let comps = (0..dim)
        .map(|a| read_array(&mut r, grid.face_shape(a)))
        .collect::<Result<Vec<_>>>()?;
    let d0 = read_array(&mut r, grid.cell_shape())?;
    let d1 = read_array(&mut r, grid.cell_shape())?;
    let d2 = read_array(&mut r, grid.cell_shape())?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes".into()));
    }
    Ok((
        State {
            grid,
            u: VelocityField { comps },
            d: DirectorField {
                comps: [d0, d1, d2],
            },
            t,
        },
        tag[0],
    ))
}

pub fn save(path: &Path, state: &State, bc_tag: u8) -> Result<()> {
    let mut buf = Vec::new();
    write_snapshot(&mut buf, state, bc_tag)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(State, u8)> {
    let bytes = std::fs::read(path)?;
    read_snapshot(bytes.as_slice())
}
