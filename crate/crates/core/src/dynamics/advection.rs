//! Skew-symmetric convective term on the staggered grid.
//!
//! The divergence form `D(u)v ≈ div(u ⊗ v)` uses two-point averages of the
//! advecting and the advected velocity at flux points (cell centers for the
//! own-axis flux, cell edges otherwise). The scheme advances with
//! `N(u) = (D(u) − D(u)ᵀ)/2`, which satisfies `⟨v, N(u)v⟩ = 0` exactly.

use crate::fields::{Grid, VelocityField};
use crate::operators::shifted;

/// Emits `(component, out face, in face, weight)` of `D(u)`.
fn visit(u: &VelocityField, grid: &Grid, mut emit: impl FnMut(usize, [usize; 3], [usize; 3], f64)) {
    let dim = grid.dim();
    for k in 0..dim {
        let nk = grid.n(k);
        let wall = |f: [usize; 3]| f[k] == 0 || f[k] == nk;
        let (s0, s1, s2) = grid.face_shape(k);
        for j in 0..dim {
            let h = grid.spacing(j);
            let nj = grid.n(j);
            for i0 in 0..s0 {
                for i1 in 0..s1 {
                    for i2 in 0..s2 {
                        let f = [i0, i1, i2];
                        // flux point between faces f and f + e_j of component k
                        let advecting = if j == k {
                            if f[k] + 1 > nk {
                                continue;
                            }
                            0.5 * (u.comps[k][f] + u.comps[k][shifted(f, k)])
                        } else {
                            if f[j] + 1 >= nj || wall(f) {
                                continue;
                            }
                            let mut m = f;
                            m[j] += 1;
                            let mut lo = m;
                            lo[k] -= 1;
                            0.5 * (u.comps[j][m] + u.comps[j][lo])
                        };
                        let g = shifted(f, j);
                        let w = 0.5 * advecting / h;
                        for (out, sign) in [(f, 1.0), (g, -1.0)] {
                            if wall(out) {
                                continue;
                            }
                            for inp in [f, g] {
                                if !wall(inp) {
                                    emit(k, out, inp, sign * w);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// `N(u)v` in skew-symmetric form.
pub fn advect(u: &VelocityField, v: &VelocityField, grid: &Grid) -> VelocityField {
    let mut out = VelocityField::zeros(grid);
    visit(u, grid, |k, o, i, w| {
        out.comps[k][o] += 0.5 * w * v.comps[k][i];
        out.comps[k][i] -= 0.5 * w * v.comps[k][o];
    });
    out
}
