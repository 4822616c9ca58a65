//! Subcommand implementations. Each returns the process exit code on
//! completion; configuration and I/O problems surface as errors.

use crate::config::ExperimentConfig;
use crate::setup::{grid, initial_state};
use anyhow::{bail, Context, Result};
use nematic_core::energy::{csv_number, dissipative_envelope, forcing_dual_norms, Envelope};
use nematic_core::operators::stokes_lambda1;
use nematic_core::potential::check_assumption;
use nematic_core::trajectory::{attraction_curve, read_archive, translate, write_archive, YMetric};
use nematic_core::{audit_energy, estimate_prelim_constants, fit_decay_rate, run, EnergyAudit, Trajectory};
use rayon::prelude::*;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const OK: u8 = 0;
pub const SOLVER_FAILURE: u8 = 2;
pub const CRITERION_FAILURE: u8 = 3;

/// Relative deviation allowed from first-order residual scaling.
const ORDER_TOL: f64 = 0.25;

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn simulate_one(c: &ExperimentConfig, dt: f64, sample_every: usize, member: u64) -> Result<Trajectory> {
    let s0 = initial_state(c, member)?;
    Ok(run(&s0, &c.params(), c.t_final, dt, sample_every)?)
}

/// Dissipative envelope with `k = min(η, 2κ, νλ₁)` and constants estimated on the samples.
fn envelope(traj: &Trajectory) -> Result<Envelope> {
    let g = traj.grid()?;
    let p = &traj.params;
    let dirs: Vec<_> = traj.samples.iter().map(|s| s.d.clone()).collect();
    let c = estimate_prelim_constants(&p.potential, g, &dirs)?;
    let lambda1 = stokes_lambda1(g, 1e-10)?.lambda1;
    let k = c.eta.min(2.0 * c.kappa).min(p.nu * lambda1);
    let h = forcing_dual_norms(traj)?;
    Ok(dissipative_envelope(traj, k, c.l, &h)?)
}

/// Writes `audit.csv` into `dir` and returns the audit.
fn write_audit(dir: &Path, traj: &Trajectory) -> Result<EnergyAudit> {
    let audit = audit_energy(traj)?;
    let env = match envelope(traj) {
        Ok(e) => Some(e),
        Err(e) => {
            eprintln!("note: no envelope columns ({e})");
            None
        }
    };
    let mut w = create(&dir.join("audit.csv"))?;
    audit.write_csv(&mut w, env.as_ref())?;
    w.flush()?;
    Ok(audit)
}

/// Archive plus audit; exit 2 when the run stopped early.
fn persist(dir: &Path, traj: &Trajectory) -> Result<(u8, EnergyAudit)> {
    write_archive(&dir.join("archive"), traj)?;
    let audit = write_audit(dir, traj)?;
    let code = match &traj.failure {
        Some(f) => {
            eprintln!("solver failure: {f}; partial archive written");
            SOLVER_FAILURE
        }
        None => OK,
    };
    Ok((code, audit))
}

fn residual_verdict(c: &ExperimentConfig, audit: &EnergyAudit) -> u8 {
    let r = audit.max_abs_residual();
    println!("max |residual| = {r:e}");
    match c.residual_tol {
        Some(tol) if r > tol => {
            eprintln!("residual {r:e} exceeds tolerance {tol:e}");
            CRITERION_FAILURE
        }
        _ => OK,
    }
}

pub fn simulate(c: &ExperimentConfig, out: &Path) -> Result<u8> {
    fs::create_dir_all(out)?;
    let traj = simulate_one(c, c.dt, c.sample_every, 0)?;
    let (code, audit) = persist(out, &traj)?;
    if code != OK {
        return Ok(code);
    }
    Ok(residual_verdict(c, &audit))
}

fn load_or_simulate(c: &ExperimentConfig, archive: Option<&Path>) -> Result<Trajectory> {
    match archive {
        Some(dir) => Ok(read_archive(dir)?.into_trajectory(None)?),
        None => simulate_one(c, c.dt, c.sample_every, 0),
    }
}

pub fn audit(c: &ExperimentConfig, out: &Path, archive: Option<&Path>) -> Result<u8> {
    fs::create_dir_all(out)?;
    let traj = load_or_simulate(c, archive)?;
    let audit = write_audit(out, &traj)?;
    if let Some(f) = &traj.failure {
        eprintln!("trajectory is partial: {f}");
        return Ok(SOLVER_FAILURE);
    }
    Ok(residual_verdict(c, &audit))
}

pub fn decay_fit(c: &ExperimentConfig, out: &Path, archive: Option<&Path>) -> Result<u8> {
    fs::create_dir_all(out)?;
    let traj = load_or_simulate(c, archive)?;
    if let Some(f) = &traj.failure {
        eprintln!("trajectory is partial: {f}");
        return Ok(SOLVER_FAILURE);
    }
    let window = c.fit_window.unwrap_or((0.0, traj.duration()));
    let k = fit_decay_rate(&traj, window, c.e_inf)?;
    let mut w = create(&out.join("decay_fit.csv"))?;
    writeln!(w, "t0,t1,e_inf,k_hat")?;
    let e_inf = c.e_inf.map(csv_number).unwrap_or_else(|| "final".into());
    writeln!(w, "{},{},{},{}", csv_number(window.0), csv_number(window.1), e_inf, csv_number(k))?;
    w.flush()?;
    println!("k_hat = {k}");
    Ok(OK)
}

pub fn check_potential(c: &ExperimentConfig, out: &Path) -> Result<u8> {
    fs::create_dir_all(out)?;
    let reports = c
        .assumptions
        .iter()
        .map(|&a| check_assumption(&c.potential, a, c.radius, c.samples))
        .collect::<Result<Vec<_>, _>>()?;
    let mut w = create(&out.join("assumptions.csv"))?;
    writeln!(w, "assumption,verdict,constants,reason")?;
    println!("{:<6} {:<5} {:<48} reason", "check", "pass", "constants");
    for r in &reports {
        let consts = r
            .constants
            .iter()
            .map(|(n, v)| format!("{n}={v:.4}"))
            .collect::<Vec<_>>()
            .join(" ");
        let verdict = if r.passed() { "yes" } else { "no" };
        println!("{:<6} {:<5} {:<48} {}", r.assumption.to_string(), verdict, consts, r.reason);
        writeln!(w, "{},{},{},{}", r.assumption, verdict, consts, r.reason.replace(',', ";"))?;
    }
    w.flush()?;
    Ok(if reports.iter().all(|r| r.passed()) { OK } else { CRITERION_FAILURE })
}

/// Nearest lattice index of `x` on spacing `delta`, or an error off the lattice.
fn lattice(x: f64, delta: f64, what: &str) -> Result<usize> {
    let m = (x / delta).round();
    if (m * delta - x).abs() > 1e-9 * x.abs().max(1.0) {
        bail!("`{what}` = {x} is not a multiple of the sampling interval {delta}");
    }
    Ok(m as usize)
}

pub fn attract(c: &ExperimentConfig, out: &Path) -> Result<u8> {
    if c.ensemble < 2 {
        bail!("attraction needs an ensemble of at least 2 members");
    }
    let delta = c.delta();
    lattice(c.window, delta, "window")?;
    lattice(c.attract_step, delta, "attract_step")?;
    lattice(c.t_final, delta, "T")?;
    if !(c.window > 0.0 && c.attract_step > 0.0) {
        bail!("`window` and `attract_step` must be positive");
    }
    let tail_start = c.t_final - c.window;
    if tail_start < c.window {
        bail!("horizon T = {} is shorter than twice the window {}", c.t_final, c.window);
    }
    fs::create_dir_all(out)?;
    let family = (0..c.ensemble as u64)
        .into_par_iter()
        .map(|m| simulate_one(c, c.dt, c.sample_every, m))
        .collect::<Result<Vec<_>>>()?;
    if let Some((m, f)) = family.iter().enumerate().find_map(|(m, t)| t.failure.as_ref().map(|f| (m, f))) {
        eprintln!("member {m} failed: {f}");
        return Ok(SOLVER_FAILURE);
    }
    let reference = family
        .iter()
        .map(|w| translate(w, tail_start))
        .collect::<Result<Vec<_>, _>>()?;
    let last = ((tail_start - c.window) / c.attract_step + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=last).map(|k| k as f64 * c.attract_step).collect();
    let metric = YMetric::new(&grid(c)?, c.metric_delta1, c.metric_delta2, None)?;
    let curve = attraction_curve(&family, &reference, &times, c.window, &metric)?;
    let mut w = create(&out.join("attract.csv"))?;
    writeln!(w, "t,dist")?;
    for (t, d) in times.iter().zip(&curve) {
        writeln!(w, "{},{}", csv_number(*t), csv_number(*d))?;
    }
    w.flush()?;
    let (first, final_) = (curve[0], curve[curve.len() - 1]);
    println!("initial {first:e}, final {final_:e}");
    match c.attract_ratio {
        Some(r) if final_ > r * first => {
            eprintln!("final/initial = {:e} exceeds {r}", final_ / first);
            Ok(CRITERION_FAILURE)
        }
        _ => Ok(OK),
    }
}

pub fn convergence(c: &ExperimentConfig, out: &Path) -> Result<u8> {
    let dts = if c.dts.is_empty() { vec![c.dt, c.dt / 2.0] } else { c.dts.clone() };
    let delta = c.delta();
    let plan = dts
        .iter()
        .map(|&h| Ok((h, lattice(delta, h, "dt * sample_every")?)))
        .collect::<Result<Vec<_>>>()?;
    fs::create_dir_all(out)?;
    let runs = plan
        .par_iter()
        .map(|&(h, every)| simulate_one(c, h, every, 0))
        .collect::<Result<Vec<_>>>()?;
    let mut code = OK;
    let mut residuals = Vec::new();
    for (k, traj) in runs.iter().enumerate() {
        let dir = out.join(format!("run_{k}"));
        fs::create_dir_all(&dir)?;
        let (c_k, audit) = persist(&dir, traj)?;
        code = code.max(c_k);
        residuals.push(audit.max_abs_residual());
    }
    if code != OK {
        return Ok(code);
    }
    let mut w = create(&out.join("convergence.csv"))?;
    writeln!(w, "dt,residual_max,ratio")?;
    for (k, (&h, &r)) in dts.iter().zip(&residuals).enumerate() {
        let ratio = if k == 0 { String::new() } else { csv_number(residuals[k - 1] / r) };
        writeln!(w, "{},{},{ratio}", csv_number(h), csv_number(r))?;
        if k > 0 {
            let expected = dts[k - 1] / h;
            let got = residuals[k - 1] / r;
            println!("dt {h:e}: residual {r:e}, ratio {got:.3} (expected {expected:.3})");
            if (got / expected - 1.0).abs() > ORDER_TOL {
                code = CRITERION_FAILURE;
            }
        }
    }
    w.flush()?;
    Ok(code)
}
