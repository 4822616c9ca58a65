use nematic_core::operators::{divergence, stream_velocity};
use nematic_core::trajectory::{read_archive, section, write_archive};
use nematic_core::{
    energy, estimate_prelim_constants, run, translate, DirectorField, Grid, ModelParams, Potential, State,
    VelocityField,
};
use ndarray::{s, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_state(g: &Grid, seed: u64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
    let d = DirectorField::from_fn(g, |x| {
        let (cx, cy) = ((PI * x[0]).cos(), (PI * x[1]).cos());
        [
            1.0 + 0.2 * (a[0] * cx + a[1] * cy + a[2] * cx * cy),
            0.2 * (a[3] * cx + a[4] * (2.0 * PI * x[1]).cos() + a[5] * cx * cy),
            0.2 * (a[6] + a[7] * cx + a[8] * cy),
        ]
    });
    let u = stream_velocity(g, |x, y| {
        let b = (PI * x).sin().powi(2) * (PI * y).sin().powi(2);
        0.5 * b * (a[9] + a[10] * (PI * x).cos() + a[11] * (PI * y).sin()) / PI
    })
    .unwrap();
    State::new(*g, u, d, 0.0).unwrap()
}

fn flip(a: &Array3<f64>, axis: usize) -> Array3<f64> {
    match axis {
        0 => a.slice(s![..;-1, .., ..]).to_owned(),
        1 => a.slice(s![.., ..;-1, ..]).to_owned(),
        _ => a.slice(s![.., .., ..;-1]).to_owned(),
    }
}

/// Reflection `x_a ↦ L_a − x_a`, acting on vectors by negating component `a`.
fn mirror(s: &State, axis: usize) -> State {
    let sign = |c: usize| if c == axis { -1.0 } else { 1.0 };
    let u = VelocityField {
        comps: s.u.comps.iter().enumerate().map(|(c, v)| flip(v, axis) * sign(c)).collect(),
    };
    let d = DirectorField {
        comps: [0, 1, 2].map(|c| flip(&s.d.comps[c], axis) * sign(c)),
    };
    State::new(s.grid, u, d, s.t).unwrap()
}

#[test]
fn mirrored_data_give_mirrored_trajectories() {
    let g = Grid::cube(2, 12, 1.0).unwrap();
    let p = ModelParams::new(0.7, 0.5, Potential::double_well());
    let s0 = random_state(&g, 4);
    let direct = run(&s0, &p, 0.02, 1e-3, 5).unwrap();
    for axis in 0..2 {
        let mirrored = run(&mirror(&s0, axis), &p, 0.02, 1e-3, 5).unwrap();
        assert!(mirrored.failure.is_none());
        for (a, b) in direct.samples.iter().zip(&mirrored.samples) {
            let m = mirror(a, axis);
            assert!(m.u.sub(&b.u).max_abs() <= 1e-12, "axis {axis}");
            assert!(m.d.sub(&b.d).max_abs() <= 1e-12, "axis {axis}");
        }
    }
}

#[test]
fn constant_critical_directors_are_fixed_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for dim in [2, 3] {
        let g = Grid::cube(dim, 8, 1.0).unwrap();
        let p = ModelParams::new(1.0, 0.5, Potential::double_well());
        for _ in 0..3 {
            let v: [f64; 3] = [0, 1, 2].map(|_| rng.random_range(-1.0..1.0));
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            let s0 = State::uniform(g, v.map(|x| x / r));
            let traj = run(&s0, &p, 0.01, 1e-3, 1).unwrap();
            for s in &traj.samples {
                assert!(s.u.max_abs() <= 1e-13);
                assert!(s.d.sub(&s0.d).max_abs() <= 1e-13);
            }
        }
    }
}

#[test]
fn samples_stay_divergence_free() {
    let g = Grid::cube(2, 12, 1.0).unwrap();
    let p = ModelParams::new(1.0, 0.5, Potential::double_well());
    let traj = run(&random_state(&g, 2), &p, 0.05, 1e-3, 5).unwrap();
    for s in &traj.samples {
        let div = divergence(&s.u, &g).unwrap();
        assert!(div.iter().all(|v| v.abs() <= 1e-9));
    }
}

#[test]
fn unforced_energy_enters_the_absorbing_ball() {
    let g = Grid::cube(2, 12, 1.0).unwrap();
    let p = ModelParams::new(1.0, 0.5, Potential::double_well());
    let traj = run(&random_state(&g, 5), &p, 2.0, 1e-3, 50).unwrap();
    let dirs: Vec<_> = traj.samples.iter().map(|s| s.d.clone()).collect();
    let c = estimate_prelim_constants(&p.potential, &g, &dirs).unwrap();
    let k = c.eta.min(2.0 * c.kappa);
    // sup of E over the second half of [0, T], minus the ball radius l/k
    let excess = |t_end: f64| {
        traj.samples
            .iter()
            .filter(|s| s.t >= t_end / 2.0 - 1e-12 && s.t <= t_end + 1e-12)
            .map(|s| energy(s, &p.potential, &p.bc).unwrap().total)
            .fold(f64::NEG_INFINITY, f64::max)
            - c.l / k
    };
    let (e1, e2) = (excess(1.0), excess(2.0));
    assert!(e2 < e1, "{e1} {e2}");
    assert!(e2 <= 1e-2 * energy(&traj.samples[0], &p.potential, &p.bc).unwrap().total);
}

#[test]
fn translation_commutes_with_section() {
    let g = Grid::cube(2, 8, 1.0).unwrap();
    let p = ModelParams::new(1.0, 0.5, Potential::double_well());
    let w = run(&random_state(&g, 6), &p, 0.1, 1e-3, 10).unwrap();
    for (shift, t) in [(0.02, 0.03), (0.05, 0.0), (0.0, 0.07)] {
        let a = section(&[translate(&w, shift).unwrap()], t).unwrap();
        let b = section(std::slice::from_ref(&w), shift + t).unwrap();
        assert_eq!(a[0].u, b[0].u);
        assert_eq!(a[0].d, b[0].d);
    }
}

#[test]
fn archives_round_trip_through_disk() {
    let g = Grid::cube(2, 8, 1.0).unwrap();
    let p = ModelParams::new(0.8, 0.3, Potential::double_well());
    let w = run(&random_state(&g, 7), &p, 0.03, 1e-3, 10).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_archive(dir.path(), &w).unwrap();
    let back = read_archive(dir.path()).unwrap().into_trajectory(None).unwrap();
    assert_eq!(back.samples, w.samples);
    assert_eq!(back.records, w.records);
    assert_eq!((back.dt, back.delta, back.sample_every), (w.dt, w.delta, w.sample_every));
    assert_eq!((back.params.nu, back.params.alpha), (0.8, 0.3));
}
