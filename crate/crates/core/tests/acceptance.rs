//! Acceptance suite: every primary criterion at its stated tolerance, one
//! PASS/FAIL line each. Exits nonzero when any criterion fails.

use nematic_core::dynamics::{advect, stress_divergence, DirectorSource, Simulator};
use nematic_core::energy::{audit_energy, dissipative_envelope, EnergyAudit};
use nematic_core::operators::{
    divergence, gradient, leray_project, stokes_lambda1, stream_velocity, LaplacianSpec, ScalarBc,
};
use nematic_core::potential::{check_assumption, estimate_prelim_constants, Assumption, CoercivityTerms};
use nematic_core::trajectory::{
    attraction_curve, forcing_norm_series, hull_sample, rho_metric, tb_norm, translate, SpatialNorm, TbNormSpec,
    YMetric,
};
use nematic_core::{
    BoundaryProgram, BoundarySpec, DirectorBc, DirectorField, ForcingSignal, Grid, ModelParams, Potential, State,
    Trajectory, VelocityField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `(1,0,0)` plus a few random cosine modes of amplitude `amp` per component,
/// optionally multiplied by a bump vanishing near the walls.
fn smooth_director(g: &Grid, seed: u64, amp: f64, interior: bool) -> DirectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = Vec::new();
    for c in 0..3 {
        for _ in 0..4 {
            let kx: f64 = rng.random_range(0..3) as f64;
            let ky: f64 = rng.random_range(0..3) as f64;
            let a: f64 = rng.random_range(-1.0..1.0);
            coeffs.push((c, kx, ky, a));
        }
    }
    let bump = |t: f64| {
        if (0.2..=0.8).contains(&t) {
            (PI * (t - 0.2) / 0.6).sin().powi(2)
        } else {
            0.0
        }
    };
    DirectorField::from_fn(g, |x| {
        let mut v = [1.0, 0.0, 0.0];
        let w = if interior { bump(x[0]) * bump(x[1]) } else { 1.0 };
        for &(c, kx, ky, a) in &coeffs {
            v[c] += amp * w * a * (kx * PI * x[0]).cos() * (ky * PI * x[1]).cos() / 2.0;
        }
        v
    })
}

fn random_velocity(g: &Grid, seed: u64, amp: f64) -> VelocityField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    stream_velocity(g, |x, y| {
        let s = (PI * x).sin().powi(2) * (PI * y).sin().powi(2);
        amp * s * (a[0] + a[1] * (PI * x).cos() + a[2] * (PI * y).cos() + a[3] * (2.0 * PI * x).sin()) / PI
    })
    .unwrap()
}

struct Refinement {
    coarse: Trajectory,
    fine: Trajectory,
    audit_coarse: EnergyAudit,
    audit_fine: EnergyAudit,
    dt: f64,
}

impl Refinement {
    fn run(initial: &State, params: &ModelParams, t_final: f64, dt: f64, delta: f64) -> Result<Self, String> {
        let sim = Simulator::new(&initial.grid, params.clone()).map_err(err)?;
        let go = |h: f64| -> Result<Trajectory, String> {
            let every = (delta / h).round() as usize;
            let t = sim.run(initial, t_final, h, every).map_err(err)?;
            match &t.failure {
                Some(f) => Err(format!("run at dt = {h} failed: {f}")),
                None => Ok(t),
            }
        };
        let (coarse, fine) = rayon::join(|| go(dt), || go(dt / 2.0));
        let (coarse, fine) = (coarse?, fine?);
        let audit_coarse = audit_energy(&coarse).map_err(err)?;
        let audit_fine = audit_energy(&fine).map_err(err)?;
        Ok(Self {
            coarse,
            fine,
            audit_coarse,
            audit_fine,
            dt,
        })
    }

    fn ratio(&self) -> f64 {
        self.audit_coarse.max_abs_residual() / self.audit_fine.max_abs_residual()
    }

    /// Constant `C` with `max|r| = C dt` on the coarse run.
    fn constant(&self) -> f64 {
        self.audit_coarse.max_abs_residual() / self.dt
    }

    /// Residual halves within 25% and energy increases stay below `C dt`.
    fn law_holds(&self) -> (bool, String) {
        let ratio = self.ratio();
        let c = self.constant();
        let inc = (
            self.audit_coarse.max_increase(),
            self.audit_fine.max_increase(),
        );
        let signed = (self.audit_coarse.max_residual(), self.audit_fine.max_residual());
        let ok = (ratio / 2.0 - 1.0).abs() <= 0.25
            && inc.0 <= c * self.dt
            && inc.1 <= c * self.dt / 2.0
            && signed.0 <= c * self.dt
            && signed.1 <= c * self.dt / 2.0;
        (
            ok,
            format!(
                "max|r| = {:.3e} (dt = {:.1e}), {:.3e} (dt/2), ratio {:.3}, C = {:.3e}, max rise {:.1e}/{:.1e}",
                self.audit_coarse.max_abs_residual(),
                self.dt,
                self.audit_fine.max_abs_residual(),
                ratio,
                c,
                inc.0,
                inc.1
            ),
        )
    }
}

const N_MAIN: usize = 32;
const DT_MAIN: f64 = 2e-4;

fn decay_setup() -> (State, ModelParams) {
    let g = Grid::cube(2, N_MAIN, 1.0).unwrap();
    let d = smooth_director(&g, 1, 0.3, false);
    let s = State::new(g, VelocityField::zeros(&g), d, 0.0).unwrap();
    (s, ModelParams::new(1.0, 0.5, Potential::double_well()))
}

fn energy_law_neumann(r: &Refinement) -> Outcome {
    let (ok, detail) = r.law_holds();
    check(ok, detail)
}

fn energy_law_dirichlet() -> Outcome {
    let g = Grid::cube(2, N_MAIN, 1.0).unwrap();
    let d = smooth_director(&g, 2, 0.3, true);
    let s = State::new(g, VelocityField::zeros(&g), d, 0.0).unwrap();
    let base = ModelParams::new(1.0, 0.5, Potential::double_well());
    let fixed = base
        .clone()
        .with_bc(BoundarySpec::Dirichlet(BoundaryProgram::constant([1.0, 0.0, 0.0])));
    let moving = base.with_bc(BoundarySpec::Dirichlet(BoundaryProgram::rotating(2.0)));
    let (a, b) = rayon::join(
        || Refinement::run(&s, &fixed, 1.0, DT_MAIN, 0.01),
        || Refinement::run(&s, &moving, 1.0, DT_MAIN, 0.01),
    );
    let (a, b) = (a?, b?);
    let (ok_a, da) = a.law_holds();
    let zero_boundary = a
        .audit_coarse
        .rows
        .iter()
        .chain(&a.audit_fine.rows)
        .all(|r| r.boundary_cum == 0.0);
    let ratio_b = b.ratio();
    let ok_b = (ratio_b / 2.0 - 1.0).abs() <= 0.25;
    let boundary_total = b.audit_fine.rows.last().map(|r| r.boundary_cum).unwrap_or(0.0);
    check(
        ok_a && zero_boundary && ok_b,
        format!(
            "constant g: {da}, boundary integral zero: {zero_boundary}; rotating g: max|r| = {:.3e}/{:.3e}, ratio {:.3}, boundary integral {:.3e}",
            b.audit_coarse.max_abs_residual(),
            b.audit_fine.max_abs_residual(),
            ratio_b,
            boundary_total
        ),
    )
}

fn coercivity(run: &Trajectory) -> Result<(nematic_core::PrelimConstants, String), String> {
    let g = *run.grid().map_err(err)?;
    let p = Potential::double_well();
    let mut set: Vec<DirectorField> = (0..20).map(|k| smooth_director(&g, 100 + k, 1.0, false)).collect();
    set.extend(run.samples.iter().map(|s| s.d.clone()));
    let c = estimate_prelim_constants(&p, &g, &set).map_err(err)?;
    let mut worst = f64::INFINITY;
    for d in &set {
        let t = CoercivityTerms::evaluate(&p, &g, d).map_err(err)?;
        worst = worst.min(c.margin(&t));
    }
    if worst >= 0.0 {
        Ok((
            c,
            format!(
                "kappa = {:.4}, eta = {:.4}, l = {:.4}, min margin {:.3e} over {} fields",
                c.kappa,
                c.eta,
                c.l,
                worst,
                set.len()
            ),
        ))
    } else {
        Err(format!("min margin {worst:.3e} < 0"))
    }
}

fn envelope(r: &Refinement, constants: &nematic_core::PrelimConstants) -> Outcome {
    let dir = LaplacianSpec::cells(&Grid::cube(2, 64, 1.0).unwrap(), ScalarBc::DirichletZero).eigenvalue([0, 0, 0]);
    let dir_err = (dir / (2.0 * PI * PI) - 1.0).abs();
    let l32 = stokes_lambda1(&Grid::cube(2, 32, 1.0).unwrap(), 1e-12).map_err(err)?.lambda1;
    let l64 = stokes_lambda1(&Grid::cube(2, 64, 1.0).unwrap(), 1e-12).map_err(err)?.lambda1;
    let stokes_change = (l32 / l64 - 1.0).abs();
    let nu = r.fine.params.nu;
    let k = constants.eta.min(2.0 * constants.kappa).min(nu * l32);
    let c = r.constant();
    let mut margins = Vec::new();
    for (t, h) in [(&r.coarse, r.dt), (&r.fine, r.dt / 2.0)] {
        let env = dissipative_envelope(t, k, constants.l, &[]).map_err(err)?;
        margins.push((env.min_margin(), h));
    }
    let env_ok = margins.iter().all(|&(m, h)| m >= -c * h);
    check(
        dir_err <= 0.01 && stokes_change <= 0.02 && env_ok,
        format!(
            "k = {k:.4} (lambda1 = {l32:.3}), min margin {:.3e}/{:.3e}; Dirichlet 2pi^2 error {:.2}%; Stokes lambda1 n=32 vs 64 change {:.2}%",
            margins[0].0,
            margins[1].0,
            100.0 * dir_err,
            100.0 * stokes_change
        ),
    )
}

fn incompressibility(runs: &[&Trajectory]) -> Outcome {
    let mut max_div: f64 = 0.0;
    let mut count = 0;
    for t in runs {
        for s in &t.samples {
            let dv = divergence(&s.u, &s.grid).map_err(err)?;
            max_div = dv.iter().fold(max_div, |m, v| m.max(v.abs()));
            count += 1;
        }
    }
    let mut idem: f64 = 0.0;
    let mut pgrad: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (dim, n) in [(2, 32), (3, 12)] {
        let g = Grid::cube(dim, n, 1.0).unwrap();
        let mut v = VelocityField::zeros(&g);
        for c in &mut v.comps {
            c.mapv_inplace(|_| rng.random_range(-1.0..1.0));
        }
        v.enforce_no_flux();
        let pv = leray_project(&v, &g).map_err(err)?;
        let ppv = leray_project(&pv, &g).map_err(err)?;
        idem = idem.max(ppv.sub(&pv).max_abs());
        let phi = g.cells_from_fn(|_| rng.random_range(-1.0..1.0));
        let gp = gradient(&phi, &g).map_err(err)?;
        pgrad = pgrad.max(leray_project(&gp, &g).map_err(err)?.max_abs());
    }
    check(
        max_div <= 1e-9 && idem <= 1e-12 && pgrad <= 1e-10,
        format!("max|div u| = {max_div:.2e} over {count} samples, idempotence {idem:.2e}, |P grad phi| = {pgrad:.2e}"),
    )
}

fn potential_assumptions() -> Outcome {
    let dw = Potential::double_well();
    let mut parts = Vec::new();
    let mut ok = true;
    for a in Assumption::ALL {
        let r = check_assumption(&dw, a, 3.0, 10_000).map_err(err)?;
        ok &= r.passed();
        parts.push(format!("{a}: {:?}", r.verdict));
        if a == Assumption::W3 {
            let p = r.constant("p").unwrap_or(f64::NAN);
            ok &= p == 4.0;
            parts.push(format!("p = {p}"));
        }
    }
    let q = check_assumption(&Potential::quadratic(), Assumption::W1, 3.0, 10_000).map_err(err)?;
    ok &= !q.passed();
    parts.push(format!("quadratic W1: {:?} ({})", q.verdict, q.reason));
    check(ok, parts.join(", "))
}

fn random_traj(g: &Grid, seed: u64, count: usize, delta: f64) -> Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..count)
        .map(|k| {
            let mut u = VelocityField::zeros(g);
            for c in &mut u.comps {
                c.mapv_inplace(|_| rng.random_range(-1.0..1.0));
            }
            u.enforce_no_flux();
            let mut d = DirectorField::zeros(g);
            for c in &mut d.comps {
                c.mapv_inplace(|_| rng.random_range(-1.0..1.0));
            }
            State::new(*g, u, d, k as f64 * delta).unwrap()
        })
        .collect();
    Trajectory::from_samples(samples, delta, ModelParams::new(1.0, 0.5, Potential::double_well())).unwrap()
}

fn window_scan(series: &[f64], delta: f64, p: f64) -> f64 {
    let w = (1.0 / delta).round() as usize;
    let mut best: f64 = 0.0;
    for s in 0..series.len() - w {
        let mut acc = 0.0;
        for k in s..s + w {
            acc += delta / 2.0 * (series[k].abs().powf(p) + series[k + 1].abs().powf(p));
        }
        best = best.max(acc);
    }
    best.powf(1.0 / p)
}

fn trajectory_analytics(run: &Trajectory) -> Outcome {
    let g = Grid::cube(2, 6, 1.0).unwrap();
    let w = Potential::double_well();
    // metric axioms
    let trajs: Vec<Trajectory> = (0..12).map(|k| random_traj(&g, 500 + k, 12, 0.1)).collect();
    let mut identity = true;
    let mut symmetric = true;
    for a in &trajs {
        identity &= rho_metric(a, a, &w).map_err(err)?.total() == 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let triples: Vec<(usize, usize, usize)> = (0..50)
        .map(|_| (rng.random_range(0..12), rng.random_range(0..12), rng.random_range(0..12)))
        .collect();
    let mut worst_triangle = f64::NEG_INFINITY;
    for &(i, j, k) in &triples {
        let (a, b, c) = (&trajs[i], &trajs[j], &trajs[k]);
        let ab = rho_metric(a, b, &w).map_err(err)?.total();
        let ba = rho_metric(b, a, &w).map_err(err)?.total();
        symmetric &= ab == ba;
        let bc = rho_metric(b, c, &w).map_err(err)?.total();
        let ac = rho_metric(a, c, &w).map_err(err)?.total();
        worst_triangle = worst_triangle.max(ac - ab - bc);
    }
    // tb norm against the exhaustive scan
    let mut tb_err: f64 = 0.0;
    for _ in 0..200 {
        let len = rng.random_range(11..80);
        let p = rng.random_range(1.0..4.0);
        let series: Vec<f64> = (0..len).map(|_| rng.random_range(-3.0..3.0)).collect();
        let got = tb_norm(&series, 0.1, &TbNormSpec::new(p, SpatialNorm::L2)).map_err(err)?;
        let want = window_scan(&series, 0.1, p);
        tb_err = tb_err.max((got - want).abs() / want.max(1.0));
    }
    // semigroup law on lattice shifts of a simulated run
    let delta = run.delta;
    let mut semigroup = true;
    for (a, b) in [(1usize, 2usize), (3, 5), (10, 7), (0, 4)] {
        let ab = translate(&translate(run, a as f64 * delta).map_err(err)?, b as f64 * delta).map_err(err)?;
        let direct = translate(run, (a + b) as f64 * delta).map_err(err)?;
        semigroup &= ab.samples == direct.samples && ab.records == direct.records;
    }
    // translation does not increase the tb norm of hull members
    let times: Vec<f64> = (0..=20).map(|k| k as f64 * 0.5).collect();
    let values: Vec<f64> = times.iter().map(|_| rng.random_range(-2.0..2.0)).collect();
    let h0 = ForcingSignal::tabulated(times, values).map_err(err)?;
    let shifts: Vec<f64> = (0..=40).map(|k| k as f64 * 0.25).collect();
    let hull = hull_sample(&h0, &shifts).map_err(err)?;
    let fg = Grid::cube(2, 8, 1.0).unwrap();
    let hd = 0.05;
    let horizon = 12.0;
    let spec = TbNormSpec::new(2.0, SpatialNorm::DualVdiv);
    let count = |hz: f64| (hz / hd).round() as usize + 1;
    let base = tb_norm(
        &forcing_norm_series(&h0, &fg, hd, count(horizon + 10.0), spec.norm).map_err(err)?,
        hd,
        &spec,
    )
    .map_err(err)?;
    let mut hull_excess = f64::NEG_INFINITY;
    for h in &hull {
        let v = tb_norm(&forcing_norm_series(h, &fg, hd, count(horizon), spec.norm).map_err(err)?, hd, &spec)
            .map_err(err)?;
        hull_excess = hull_excess.max(v - base);
    }
    check(
        identity && symmetric && worst_triangle <= 1e-10 && tb_err <= 1e-12 && semigroup && hull_excess <= 0.0,
        format!(
            "identity {identity}, symmetry {symmetric}, worst triangle defect {worst_triangle:.2e}, tb scan error {tb_err:.1e}, semigroup exact {semigroup}, max hull excess {hull_excess:.2e}"
        ),
    )
}

fn attraction() -> Outcome {
    let g = Grid::cube(2, 16, 1.0).unwrap();
    let params = ModelParams::new(1.0, 0.5, Potential::double_well());
    let (t_final, dt, every, window) = (8.0, 5e-4, 100, 1.0);
    let family: Vec<Trajectory> = (0..8u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(900 + k);
            let mut d = smooth_director(&g, 900 + k, 0.8, false);
            // random bounded rotation of the mean director
            let th: f64 = rng.random_range(0.0..2.0 * PI);
            let base = [th.cos(), th.sin(), 0.0];
            for c in 0..3 {
                d.comps[c].mapv_inplace(|v| v + base[c] - if c == 0 { 1.0 } else { 0.0 });
            }
            let u = random_velocity(&g, 900 + k, 0.5);
            let s = State::new(g, u, d, 0.0).map_err(err)?;
            let t = nematic_core::run(&s, &params, t_final, dt, every).map_err(err)?;
            match t.failure {
                Some(f) => Err(f),
                None => Ok(t),
            }
        })
        .collect::<Result<_, _>>()?;
    let tail_start = t_final - window;
    let reference: Vec<Trajectory> = family
        .iter()
        .map(|w| translate(w, tail_start))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let times: Vec<f64> = (0..tail_start as usize).map(|k| k as f64).collect();
    let metric = YMetric::new(&g, 0.25, 0.25, None).map_err(err)?;
    let curve = attraction_curve(&family, &reference, &times, window, &metric).map_err(err)?;
    let (first, last) = (curve[0], *curve.last().unwrap());
    check(
        last <= 0.1 * first,
        format!(
            "curve {}; final/initial = {:.2e}",
            curve.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(" "),
            last / first
        ),
    )
}

/// Exact fields of the manufactured solution.
struct Manufactured;

impl Manufactured {
    fn psi(x: f64, y: f64) -> f64 {
        (PI * x).sin().powi(2) * (PI * y).sin().powi(2) / PI
    }
    fn amp(t: f64) -> f64 {
        0.5 * t.cos()
    }
    fn amp_t(t: f64) -> f64 {
        -0.5 * t.sin()
    }
    fn d(x: [f64; 3], t: f64) -> [f64; 3] {
        [
            1.0 + 0.2 * (PI * x[0]).cos() * t.cos(),
            0.3 * (PI * x[1]).cos() * (t + 0.5).sin(),
            0.1 * (PI * x[0]).cos() * (PI * x[1]).cos() * (1.0 + t),
        ]
    }
    fn d_t(x: [f64; 3], t: f64) -> [f64; 3] {
        [
            -0.2 * (PI * x[0]).cos() * t.sin(),
            0.3 * (PI * x[1]).cos() * (t + 0.5).cos(),
            0.1 * (PI * x[0]).cos() * (PI * x[1]).cos(),
        ]
    }
    fn lap_d(x: [f64; 3], t: f64) -> [f64; 3] {
        let v = Self::d(x, t);
        [-PI * PI * (v[0] - 1.0), -PI * PI * v[1], -2.0 * PI * PI * v[2]]
    }
    fn state(g: &Grid, t: f64) -> State {
        let u = stream_velocity(g, Self::psi).unwrap().scaled(Self::amp(t));
        State::new(*g, u, DirectorField::from_fn(g, |x| Self::d(x, t)), t).unwrap()
    }
}

fn scheme_consistency() -> Outcome {
    let g = Grid::cube(2, 16, 1.0).unwrap();
    let (nu, alpha) = (0.5, 0.3);
    let w = Potential::double_well();
    let bc = DirectorBc::Neumann;
    // sources built from the discrete operators, so the exact fields solve
    // the semi-discrete system and only the time error remains
    let wf = w.clone();
    let forcing = ForcingSignal::custom(move |g, t| {
        let s = Manufactured::state(g, t);
        let q = nematic_core::dynamics::chemical_force(&s.d, g, &wf, bc).unwrap();
        let stress = stress_divergence(&s.u, &s.d, &q, nu, alpha, g, bc).unwrap();
        let mut h = stream_velocity(g, Manufactured::psi).unwrap().scaled(Manufactured::amp_t(t));
        h.axpy(-1.0, &stress);
        h
    });
    let ws = w.clone();
    let source = DirectorSource(Arc::new(move |g: &Grid, t: f64| {
        let s = Manufactured::state(g, t);
        let q = nematic_core::dynamics::chemical_force(&s.d, g, &ws, bc).unwrap();
        let rhs = nematic_core::dynamics::director_rhs(&s.u, &s.d, alpha, &q, g, bc).unwrap();
        let mut src = DirectorField::from_fn(g, |x| Manufactured::d_t(x, t));
        src.axpy(-1.0, &rhs);
        src
    }));
    let mut params = ModelParams::new(nu, alpha, w.clone()).with_forcing(forcing);
    params.director_source = Some(source);
    let t_final = 0.1;
    let errors: Vec<f64> = [5e-4, 2.5e-4, 1.25e-4]
        .par_iter()
        .map(|&dt| {
            let traj = nematic_core::run(&Manufactured::state(&g, 0.0), &params, t_final, dt, 1).map_err(err)?;
            if let Some(f) = traj.failure {
                return Err(f);
            }
            let end = traj.samples.last().unwrap();
            let exact = Manufactured::state(&g, t_final);
            Ok(end.u.sub(&exact.u).max_abs() + end.d.sub(&exact.d).max_abs())
        })
        .collect::<Result<_, String>>()?;
    let time_ratios = [errors[0] / errors[1], errors[1] / errors[2]];
    let time_ok = time_ratios.iter().all(|r| (r - 2.0).abs() <= 0.5);

    // spatial truncation errors of the operators against the exact fields
    let space_err = |n: usize| -> Result<[f64; 3], String> {
        let g = Grid::cube(2, n, 1.0).unwrap();
        let t = 0.3;
        let s = Manufactured::state(&g, t);
        let q = nematic_core::dynamics::chemical_force(&s.d, &g, &w, bc).map_err(err)?;
        let q_exact = DirectorField::from_fn(&g, |x| {
            let l = Manufactured::lap_d(x, t);
            let gw = w.grad(Manufactured::d(x, t));
            [l[0] - gw[0], l[1] - gw[1], l[2] - gw[2]]
        });
        let e_q = q.sub(&q_exact).max_abs();
        // convection against nested differences of the exact velocity, away from walls
        let vel = |x: f64, y: f64| {
            let e = 1e-5;
            let a = Manufactured::amp(t);
            [
                a * (Manufactured::psi(x, y + e) - Manufactured::psi(x, y - e)) / (2.0 * e),
                -a * (Manufactured::psi(x + e, y) - Manufactured::psi(x - e, y)) / (2.0 * e),
            ]
        };
        let conv = |x: f64, y: f64| {
            let e = 1e-4;
            let u = vel(x, y);
            let dx = |c: usize| (vel(x + e, y)[c] - vel(x - e, y)[c]) / (2.0 * e);
            let dy = |c: usize| (vel(x, y + e)[c] - vel(x, y - e)[c]) / (2.0 * e);
            [u[0] * dx(0) + u[1] * dy(0), u[0] * dx(1) + u[1] * dy(1)]
        };
        let nu_h = advect(&s.u, &s.u, &g);
        let mut e_adv: f64 = 0.0;
        for k in 0..2 {
            for ((i, j, l), v) in nu_h.comps[k].indexed_iter() {
                let x = g.face_center(k, [i, j, l]);
                if (0.25..=0.75).contains(&x[0]) && (0.25..=0.75).contains(&x[1]) {
                    e_adv = e_adv.max((v - conv(x[0], x[1])[k]).abs());
                }
            }
        }
        // divergence of the stream field is exact; the director Laplacian is
        // measured through q, so the third entry tracks the viscous term
        let lap_u = nematic_core::operators::velocity_laplacian(&s.u, &g).map_err(err)?;
        let lap_exact = |x: f64, y: f64, k: usize| {
            let e = 1e-3;
            let c = |x: f64, y: f64| vel(x, y)[k];
            (c(x + e, y) + c(x - e, y) + c(x, y + e) + c(x, y - e) - 4.0 * c(x, y)) / (e * e)
        };
        let mut e_lap: f64 = 0.0;
        for k in 0..2 {
            for ((i, j, l), v) in lap_u.comps[k].indexed_iter() {
                let x = g.face_center(k, [i, j, l]);
                if (0.25..=0.75).contains(&x[0]) && (0.25..=0.75).contains(&x[1]) {
                    e_lap = e_lap.max((v - lap_exact(x[0], x[1], k)).abs());
                }
            }
        }
        Ok([e_q, e_adv, e_lap])
    };
    let (c, f) = (space_err(16)?, space_err(32)?);
    let space_ratios: Vec<f64> = (0..3).map(|i| c[i] / f[i]).collect();
    let space_ok = space_ratios.iter().all(|r| (r - 4.0).abs() <= 1.0);
    check(
        time_ok && space_ok,
        format!(
            "time errors {:.3e} {:.3e} {:.3e} (ratios {:.3}, {:.3}); spatial ratios chemical force {:.3}, convection {:.3}, viscous {:.3}",
            errors[0], errors[1], errors[2], time_ratios[0], time_ratios[1], space_ratios[0], space_ratios[1], space_ratios[2]
        ),
    )
}

fn main() -> ExitCode {
    let (s0, params) = decay_setup();
    let main_run = Refinement::run(&s0, &params, 1.0, DT_MAIN, 0.01);
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let (rest, attract) = rayon::join(
        || {
            let mut out: Vec<(&str, Outcome)> = Vec::new();
            out.push(("energy law (Neumann)", main_run.as_ref().map_err(Clone::clone).and_then(energy_law_neumann)));
            out.push(("energy law (Dirichlet)", energy_law_dirichlet()));
            let coerc = main_run
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|r| coercivity(&r.fine));
            out.push(("coercivity", coerc.as_ref().map(|c| c.1.clone()).map_err(Clone::clone)));
            out.push((
                "dissipative envelope",
                match (&main_run, &coerc) {
                    (Ok(r), Ok((c, _))) => envelope(r, c),
                    (Err(e), _) | (_, Err(e)) => Err(e.clone()),
                },
            ));
            out.push((
                "incompressibility and projection",
                match &main_run {
                    Ok(r) => incompressibility(&[&r.coarse, &r.fine]),
                    Err(e) => Err(e.clone()),
                },
            ));
            out.push(("potential assumptions", potential_assumptions()));
            out.push((
                "trajectory analytics",
                match &main_run {
                    Ok(r) => trajectory_analytics(&r.fine),
                    Err(e) => Err(e.clone()),
                },
            ));
            out
        },
        attraction,
    );
    results.extend(rest);
    results.push(("attraction", attract));
    results.push(("scheme consistency", scheme_consistency()));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
