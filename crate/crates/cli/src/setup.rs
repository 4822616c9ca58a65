//! Initial data for experiments.

use crate::config::{ExperimentConfig, InitKind};
use anyhow::Result;
use nematic_core::operators::stream_velocity;
use nematic_core::{BoundarySpec, DirectorField, Grid, State, VelocityField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn grid(c: &ExperimentConfig) -> Result<Grid> {
    Ok(Grid::cube(c.dim, c.n, c.extent)?)
}

/// Smooth bump equal to one in the middle and vanishing on `[0, 0.2] ∪ [0.8, 1]`.
fn bump(t: f64) -> f64 {
    if (0.2..=0.8).contains(&t) {
        (PI * (t - 0.2) / 0.6).sin().powi(2)
    } else {
        0.0
    }
}

/// Initial state for ensemble member `member`.
///
/// With Dirichlet data the perturbation is supported away from the walls and
/// the background director is `g(0)`, so the data are compatible.
pub fn initial_state(c: &ExperimentConfig, member: u64) -> Result<State> {
    let g = grid(c)?;
    let dirichlet = matches!(c.bc, BoundarySpec::Dirichlet(_));
    let background = match &c.bc {
        BoundarySpec::Dirichlet(p) => p.value(0.0),
        BoundarySpec::Neumann => [1.0, 0.0, 0.0],
    };
    if c.init == InitKind::Uniform {
        return Ok(State::uniform(g, background));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed.wrapping_mul(0x9e37_79b9).wrapping_add(member));
    let modes: Vec<(usize, [f64; 3], f64)> = (0..12)
        .map(|i| {
            let k = [
                rng.random_range(0..3) as f64,
                rng.random_range(0..3) as f64,
                rng.random_range(0..3) as f64,
            ];
            (i % 3, k, rng.random_range(-1.0..1.0))
        })
        .collect();
    let ext = [g.extent(0), g.extent(1), if c.dim == 3 { g.extent(2) } else { 1.0 }];
    let dim = c.dim;
    let amp = c.init_amp;
    let d = DirectorField::from_fn(&g, |x| {
        let s = [x[0] / ext[0], x[1] / ext[1], x[2] / ext[2]];
        let mut w = 1.0;
        if dirichlet {
            for a in 0..dim {
                w *= bump(s[a]);
            }
        }
        let mut v = background;
        for (comp, k, a) in &modes {
            let mut m = *a;
            for ax in 0..dim {
                m *= (k[ax] * PI * s[ax]).cos();
            }
            v[*comp] += amp * w * m / 2.0;
        }
        v
    });
    let u = if c.u_amp != 0.0 && c.dim == 2 {
        let a: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (lx, ly) = (ext[0], ext[1]);
        stream_velocity(&g, |x, y| {
            let (sx, sy) = (x / lx, y / ly);
            let base = (PI * sx).sin().powi(2) * (PI * sy).sin().powi(2);
            c.u_amp * base * (a[0] + a[1] * (PI * sx).cos() + a[2] * (PI * sy).cos()) / PI
        })?
    } else {
        VelocityField::zeros(&g)
    };
    Ok(State::new(g, u, d, 0.0)?)
}
