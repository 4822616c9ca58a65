//! Energy functional, the energy balance audit, the dissipative envelope and
//! decay-rate fits.
//!
//! The audit integrates per-step records with the trapezoid rule, so every
//! interval quantity is a difference of cumulative sums and the balance is
//! additive over adjacent intervals.

use crate::dynamics::{chemical_force, ModelParams};
use crate::error::{Error, Result};
use crate::fields::{BoundarySpec, State};
use crate::operators::{
    boundary_pairing, director_gradient_energy, velocity_gradient_energy, DirectorBc, Discretization,
};
use crate::potential::Potential;
use crate::trajectory::Trajectory;
use std::io::Write;

/// `E = ½‖u‖² + ½‖∇d‖² + ∫W(d)` split into its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub elastic: f64,
    pub potential: f64,
    pub total: f64,
}

pub fn energy(state: &State, p: &Potential, bc: &BoundarySpec) -> Result<EnergyBreakdown> {
    let g = &state.grid;
    let kinetic = 0.5 * state.u.dot(&state.u, g);
    let elastic = 0.5 * director_gradient_energy(&state.d, g, DirectorBc::at(bc, state.t))?;
    let potential = p.integrate(&state.d, g)?;
    Ok(EnergyBreakdown {
        kinetic,
        elastic,
        potential,
        total: kinetic + elastic + potential,
    })
}

/// `‖Δd − ∇W(d)‖² + ν‖∇u‖²`.
pub fn dissipation(state: &State, p: &Potential, nu: f64, bc: &BoundarySpec) -> Result<f64> {
    let g = &state.grid;
    let q = chemical_force(&state.d, g, p, DirectorBc::at(bc, state.t))?;
    Ok(q.dot(&q, g) + nu * velocity_gradient_energy(&state.u, g)?)
}

/// Energy parts and balance rates of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub potential: f64,
    /// Dissipation rate.
    pub dissipation: f64,
    /// Work rate `⟨h, u⟩`.
    pub work: f64,
    /// Boundary rate `⟨g_t, ∂_n d⟩`.
    pub boundary: f64,
}

/// Shortest round-trip text for `x`, in exponent form outside `[1e-4, 1e15)`.
pub fn csv_number(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

impl StepRecord {
    pub fn energy(&self) -> f64 {
        self.kinetic + self.elastic + self.potential
    }

    pub const CSV_HEADER: &'static str = "t,kinetic,elastic,potential,dissipation,work,boundary";

    pub fn to_csv(&self) -> String {
        [self.t, self.kinetic, self.elastic, self.potential, self.dissipation, self.work, self.boundary]
            .map(csv_number)
            .join(",")
    }

    pub fn from_csv(line: &str) -> Result<Self> {
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("record line `{line}`: {e}")))?;
        if v.len() != 7 {
            return Err(Error::Format(format!("record line `{line}` has {} fields", v.len())));
        }
        Ok(Self {
            t: v[0],
            kinetic: v[1],
            elastic: v[2],
            potential: v[3],
            dissipation: v[4],
            work: v[5],
            boundary: v[6],
        })
    }
}

/// Record of `state` under `params`.
pub fn step_record(state: &State, params: &ModelParams) -> Result<StepRecord> {
    let e = energy(state, &params.potential, &params.bc)?;
    let work = if params.forcing.is_zero() {
        0.0
    } else {
        params.forcing.eval(&state.grid, state.t).dot(&state.u, &state.grid)
    };
    let boundary = match params.bc.program() {
        Some(prog) if !prog.is_constant() => {
            boundary_pairing(&state.d, &state.grid, prog.value(state.t), prog.rate(state.t))?
        }
        _ => 0.0,
    };
    Ok(StepRecord {
        t: state.t,
        kinetic: e.kinetic,
        elastic: e.elastic,
        potential: e.potential,
        dissipation: dissipation(state, &params.potential, params.nu, &params.bc)?,
        work,
        boundary,
    })
}

/// Audit quantities at one sample, accumulated from the first sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditRow {
    pub t: f64,
    pub energy: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub potential: f64,
    pub dissipation_cum: f64,
    pub work_cum: f64,
    pub boundary_cum: f64,
}

/// Balance `r = E(t) + D − E(s) − work − boundary` over `[s, t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalResidual {
    pub s: f64,
    pub t: f64,
    pub energy_s: f64,
    pub energy_t: f64,
    pub dissipation: f64,
    pub work: f64,
    pub boundary: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyAudit {
    pub rows: Vec<AuditRow>,
    pub intervals: Vec<IntervalResidual>,
}

impl EnergyAudit {
    /// Balance over samples `i ≤ j`.
    pub fn interval(&self, i: usize, j: usize) -> IntervalResidual {
        let (a, b) = (&self.rows[i], &self.rows[j]);
        let dissipation = b.dissipation_cum - a.dissipation_cum;
        let work = b.work_cum - a.work_cum;
        let boundary = b.boundary_cum - a.boundary_cum;
        IntervalResidual {
            s: a.t,
            t: b.t,
            energy_s: a.energy,
            energy_t: b.energy,
            dissipation,
            work,
            boundary,
            residual: b.energy + dissipation - a.energy - work - boundary,
        }
    }

    /// Largest signed residual; positive values flag a violated inequality.
    pub fn max_residual(&self) -> f64 {
        self.intervals.iter().map(|r| r.residual).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.intervals.iter().map(|r| r.residual.abs()).fold(0.0, f64::max)
    }

    /// Largest energy increase between consecutive samples.
    pub fn max_increase(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(0.0, f64::max)
    }

    /// Residual from the first sample to each sample.
    pub fn residual_from_start(&self) -> Vec<f64> {
        (0..self.rows.len()).map(|j| self.interval(0, j).residual).collect()
    }

    pub const CSV_HEADER: &'static str =
        "t,E,kinetic,elastic,potential,dissipation_cum,work_cum,boundary_cum,residual,envelope_rhs,envelope_margin";

    /// Writes one row per sample; envelope columns are empty without an envelope.
    pub fn write_csv<W: Write>(&self, mut w: W, envelope: Option<&Envelope>) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        let res = self.residual_from_start();
        for (k, r) in self.rows.iter().enumerate() {
            let (rhs, margin) = match envelope.and_then(|e| e.points.get(k)) {
                Some(p) => (csv_number(p.rhs), csv_number(p.margin)),
                None => (String::new(), String::new()),
            };
            let nums = [
                r.t,
                r.energy,
                r.kinetic,
                r.elastic,
                r.potential,
                r.dissipation_cum,
                r.work_cum,
                r.boundary_cum,
                res[k],
            ]
            .map(csv_number)
            .join(",");
            writeln!(w, "{nums},{rhs},{margin}")?;
        }
        Ok(())
    }
}

/// Start indices `0, 1, 2, 4, 8, …` below `count`.
fn dyadic_starts(count: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut k = 1;
    while k < count {
        out.push(k);
        k *= 2;
    }
    out
}

/// Energy balance of a trajectory.
///
/// Uses the per-step records when present, otherwise records recomputed at
/// the samples. Residuals are reported for every pair `s < t` of samples with
/// `s` in a dyadic subset of sample indices.
pub fn audit_energy(traj: &Trajectory) -> Result<EnergyAudit> {
    let records = if traj.records.is_empty() {
        traj.samples
            .iter()
            .map(|s| step_record(s, &traj.params))
            .collect::<Result<Vec<_>>>()?
    } else {
        traj.records.clone()
    };
    let stride = if traj.records.is_empty() { 1 } else { traj.sample_every };
    let mut rows = Vec::with_capacity(traj.samples.len());
    let (mut dc, mut wc, mut bc) = (0.0, 0.0, 0.0);
    for (j, r) in records.iter().enumerate() {
        if j > 0 {
            let p = &records[j - 1];
            let h = r.t - p.t;
            dc += 0.5 * h * (p.dissipation + r.dissipation);
            wc += 0.5 * h * (p.work + r.work);
            bc += 0.5 * h * (p.boundary + r.boundary);
        }
        if j % stride == 0 && rows.len() < traj.samples.len() {
            rows.push(AuditRow {
                t: r.t,
                energy: r.energy(),
                kinetic: r.kinetic,
                elastic: r.elastic,
                potential: r.potential,
                dissipation_cum: dc,
                work_cum: wc,
                boundary_cum: bc,
            });
        }
    }
    let mut audit = EnergyAudit {
        rows,
        intervals: Vec::new(),
    };
    let n = audit.rows.len();
    for s in dyadic_starts(n) {
        for t in s + 1..n {
            let r = audit.interval(s, t);
            audit.intervals.push(r);
        }
    }
    Ok(audit)
}

/// One time of the envelope check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePoint {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub k: f64,
    pub l: f64,
    pub points: Vec<EnvelopePoint>,
}

impl Envelope {
    pub fn min_margin(&self) -> f64 {
        self.points.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min)
    }
}

/// Checks `E(t) ≤ E(s)e^{−k(t−s)} + (1/2ν)∫_s^t e^{−k(t−τ)}(‖h(τ)‖²_{V'} + 2νl) dτ`
/// at every sample with `s` the first sample.
///
/// `hvec` holds `‖h‖_{V'_div}` at the samples (empty means `h = 0`). The
/// `l` part is integrated exactly, the forcing part by the trapezoid rule.
pub fn dissipative_envelope(traj: &Trajectory, k: f64, l: f64, hvec: &[f64]) -> Result<Envelope> {
    if !(k > 0.0) || !(l >= 0.0) {
        return Err(Error::InvalidArgument(format!("envelope needs k > 0 and l >= 0, got k = {k}, l = {l}")));
    }
    if !hvec.is_empty() && hvec.len() != traj.samples.len() {
        return Err(Error::Shape(format!(
            "forcing norms: {} values for {} samples",
            hvec.len(),
            traj.samples.len()
        )));
    }
    let nu = traj.params.nu;
    let p = &traj.params;
    let energies: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| energy(s, &p.potential, &p.bc).map(|e| e.total))
        .collect::<Result<_>>()?;
    let Some(&e0) = energies.first() else {
        return Err(Error::EmptySet);
    };
    let t0 = traj.samples[0].t;
    let mut points = Vec::with_capacity(energies.len());
    // running value of ∫ e^{−k(t−τ)} ‖h(τ)‖² dτ by trapezoid
    let mut forced = 0.0;
    for (j, (&e, s)) in energies.iter().zip(&traj.samples).enumerate() {
        let dt_total = s.t - t0;
        if j > 0 && !hvec.is_empty() {
            let h = s.t - traj.samples[j - 1].t;
            forced = forced * (-k * h).exp() + 0.5 * h * ((-k * h).exp() * hvec[j - 1].powi(2) + hvec[j].powi(2));
        }
        let decay = (-k * dt_total).exp();
        let rhs = e0 * decay + forced / (2.0 * nu) + l / k * (1.0 - decay);
        points.push(EnvelopePoint {
            t: s.t,
            lhs: e,
            rhs,
            margin: rhs - e,
        });
    }
    Ok(Envelope { k, l, points })
}

/// `‖h(t)‖_{V'_div}` at every sample of a trajectory.
pub fn forcing_dual_norms(traj: &Trajectory) -> Result<Vec<f64>> {
    let f = &traj.params.forcing;
    if f.is_zero() {
        return Ok(vec![0.0; traj.samples.len()]);
    }
    let disc = Discretization::new(traj.grid()?);
    if f.amplitude(0.0).is_some() {
        let g = *disc.grid();
        let base = disc.dual_norm_vdiv(&crate::dynamics::ForcingSignal::profile(&g))?;
        return Ok(traj
            .samples
            .iter()
            .map(|s| base * f.amplitude(s.t).unwrap_or(0.0).abs())
            .collect());
    }
    traj.samples
        .iter()
        .map(|s| disc.dual_norm_vdiv(&f.eval(disc.grid(), s.t)))
        .collect()
}

/// Least-squares slope `k̂` of `log(E − E_∞) ≈ c − k̂t`.
///
/// With `e_inf = None` the final value is used as `E_∞` and the final sample
/// is left out of the fit.
pub fn fit_decay_series(times: &[f64], energies: &[f64], e_inf: Option<f64>) -> Result<f64> {
    if times.len() != energies.len() {
        return Err(Error::Shape("times and energies differ in length".into()));
    }
    let (e_inf, used) = match e_inf {
        Some(v) => (v, energies.len()),
        None => match energies.last() {
            Some(&v) => (v, energies.len() - 1),
            None => return Err(Error::EmptySet),
        },
    };
    if used < 2 {
        return Err(Error::InvalidArgument("decay fit needs at least two points".into()));
    }
    let mut xs = Vec::with_capacity(used);
    let mut ys = Vec::with_capacity(used);
    for i in 0..used {
        let ex = energies[i] - e_inf;
        if !(ex > 0.0) {
            return Err(Error::NonPositiveExcess { index: i });
        }
        xs.push(times[i]);
        ys.push(ex.ln());
    }
    let m = used as f64;
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("decay fit needs distinct times".into()));
    }
    Ok(-sxy / sxx)
}

/// Decay rate of the sampled energy on the window `[t0, t1]`.
pub fn fit_decay_rate(traj: &Trajectory, window: (f64, f64), e_inf: Option<f64>) -> Result<f64> {
    let p = &traj.params;
    let mut times = Vec::new();
    let mut energies = Vec::new();
    for s in &traj.samples {
        if s.t >= window.0 - 1e-12 && s.t <= window.1 + 1e-12 {
            times.push(s.t);
            energies.push(energy(s, &p.potential, &p.bc)?.total);
        }
    }
    fit_decay_series(&times, &energies, e_inf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run, ForcingSignal};
    use crate::fields::{BoundaryProgram, DirectorField, Grid, VelocityField};
    use crate::operators::{LaplacianSpec, ScalarBc};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn csv_numbers_round_trip() {
        for x in [0.0, 1.0, -0.25, 4.687867559034083e-28, 1e-4, 9.99e-5, 3e20, 0.1 + 0.2] {
            let t = csv_number(x);
            assert_eq!(t.parse::<f64>().unwrap(), x);
            assert!(t.len() <= 24, "{t}");
        }
    }

    fn random_state(g: Grid, seed: u64, amp: f64) -> State {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d = DirectorField::constant(&g, [1.0, 0.0, 0.0]);
        for c in &mut d.comps {
            c.mapv_inplace(|v| v + amp * rng.random_range(-1.0..1.0));
        }
        let mut u = VelocityField::zeros(&g);
        for c in &mut u.comps {
            c.mapv_inplace(|_| amp * rng.random_range(-1.0..1.0));
        }
        u.enforce_no_flux();
        let u = crate::operators::leray_project(&u, &g).unwrap();
        State::new(g, u, d, 0.0).unwrap()
    }

    #[test]
    fn energy_examples() {
        let g = Grid::cube(2, 8, 1.0).unwrap();
        let w = Potential::double_well();
        let e = energy(&State::uniform(g, [1.0, 0.0, 0.0]), &w, &BoundarySpec::Neumann).unwrap();
        assert_eq!(e.total, 0.0);
        let e = energy(&State::uniform(g, [0.0, 0.0, 0.0]), &w, &BoundarySpec::Neumann).unwrap();
        assert!((e.total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn energy_matches_resummation() {
        let g = Grid::cube(2, 8, 1.0).unwrap();
        let s = random_state(g, 5, 0.4);
        let w = Potential::double_well();
        let e = energy(&s, &w, &BoundarySpec::Neumann).unwrap();
        // plain loops in a different order
        let vol = g.cell_volume();
        let mut kin = 0.0;
        for c in &s.u.comps {
            for v in c.iter() {
                kin += 0.5 * v * v * vol;
            }
        }
        let mut el = 0.0;
        for c in &s.d.comps {
            for i in 0..7 {
                for j in 0..8 {
                    el += 0.5 * (c[[i + 1, j, 0]] - c[[i, j, 0]]).powi(2) / g.spacing(0).powi(2) * vol;
                    el += 0.5 * (c[[j, i + 1, 0]] - c[[j, i, 0]]).powi(2) / g.spacing(1).powi(2) * vol;
                }
            }
        }
        let mut pot = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                pot += w.eval(s.d.at([i, j, 0])) * vol;
            }
        }
        for (a, b) in [(e.kinetic, kin), (e.elastic, el), (e.potential, pot)] {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} {b}");
        }
        assert!((e.total - (kin + el + pot)).abs() <= 1e-12 * e.total);
    }

    #[test]
    fn dissipation_examples() {
        let g = Grid::cube(2, 8, 1.0).unwrap();
        let w = Potential::double_well();
        assert_eq!(dissipation(&State::uniform(g, [0.0, 1.0, 0.0]), &w, 1.0, &BoundarySpec::Neumann).unwrap(), 0.0);
        assert_eq!(dissipation(&State::uniform(g, [0.0; 3]), &w, 1.0, &BoundarySpec::Neumann).unwrap(), 0.0);
    }

    #[test]
    fn dissipation_is_second_order() {
        // W = 0, d = (cos πx, 0, 0), u = curl of sin²(πx)sin²(πy)/π
        // ‖q‖² = π⁴/2 and ‖∇u‖² = ‖Δψ‖² = 2π²
        let exact = 0.5 * PI.powi(4) + 0.7 * 2.0 * PI * PI;
        let err = |n: usize| {
            let g = Grid::cube(2, n, 1.0).unwrap();
            let u = crate::operators::stream_velocity(&g, |x, y| (PI * x).sin().powi(2) * (PI * y).sin().powi(2) / PI)
                .unwrap();
            let d = DirectorField::from_fn(&g, |x| [(PI * x[0]).cos(), 0.0, 0.0]);
            let s = State::new(g, u, d, 0.0).unwrap();
            (dissipation(&s, &Potential::zero(), 0.7, &BoundarySpec::Neumann).unwrap() - exact).abs()
        };
        let ratio = err(16) / err(32);
        assert!((ratio - 4.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn equilibrium_audit_is_exact() {
        let g = Grid::cube(2, 8, 1.0).unwrap();
        let params = ModelParams::new(1.0, 0.5, Potential::double_well());
        let traj = run(&State::uniform(g, [1.0, 0.0, 0.0]), &params, 0.05, 5e-3, 2).unwrap();
        let audit = audit_energy(&traj).unwrap();
        assert!(audit.max_abs_residual() <= 1e-10);
        let env = dissipative_envelope(&traj, 1.0, 0.0, &[]).unwrap();
        assert!(env.min_margin() >= 0.0);
    }

    #[test]
    fn constant_boundary_data_gives_no_boundary_term() {
        let g = Grid::cube(2, 8, 1.0).unwrap();
        let bc = BoundarySpec::Dirichlet(BoundaryProgram::constant([1.0, 0.0, 0.0]));
        let params = ModelParams::new(1.0, 0.5, Potential::double_well()).with_bc(bc);
        let mut s = State::uniform(g, [1.0, 0.0, 0.0]);
        // interior bump, so the datum is compatible at the walls
        s.d.comps[1] = g.cells_from_fn(|x| {
            let r2 = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2);
            if r2 < 0.04 { 0.1 * (1.0 - r2 / 0.04).powi(2) } else { 0.0 }
        });
        let traj = run(&s, &params, 0.02, 2e-3, 1).unwrap();
        let audit = audit_energy(&traj).unwrap();
        assert!(audit.rows.iter().all(|r| r.boundary_cum == 0.0));
    }

    #[test]
    fn envelope_closed_form_without_forcing() {
        let g = Grid::cube(2, 8, 1.0).unwrap();
        let params = ModelParams::new(1.0, 0.5, Potential::double_well());
        let s0 = random_state(g, 2, 0.2);
        let traj = run(&s0, &params, 0.05, 1e-3, 10).unwrap();
        let (k, l) = (0.8, 0.3);
        let env = dissipative_envelope(&traj, k, l, &[]).unwrap();
        let e0 = env.points[0].lhs;
        for p in &env.points {
            let want = e0 * (-k * p.t).exp() + l / k * (1.0 - (-k * p.t).exp());
            assert!((p.rhs - want).abs() < 1e-14);
        }
        assert!(dissipative_envelope(&traj, 0.0, l, &[]).is_err());
    }

    #[test]
    fn envelope_forcing_integral() {
        // constant ‖h‖ = c: ∫ e^{−k(t−τ)} c² dτ = c²(1 − e^{−kt})/k
        let g = Grid::cube(2, 8, 1.0).unwrap();
        let params = ModelParams::new(0.5, 0.5, Potential::double_well());
        let traj = run(&State::uniform(g, [1.0, 0.0, 0.0]), &params, 0.04, 1e-3, 1).unwrap();
        let c = 0.7;
        let k = 2.0;
        let env = dissipative_envelope(&traj, k, 0.0, &vec![c; traj.samples.len()]).unwrap();
        for p in &env.points {
            let want = c * c * (1.0 - (-k * p.t).exp()) / k / (2.0 * 0.5);
            assert!((p.rhs - want).abs() <= 1e-6 * want.max(1e-12), "{} {}", p.rhs, want);
        }
    }

    #[test]
    fn decay_fit_examples() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.02).collect();
        let e: Vec<f64> = t.iter().map(|t| 2.0 * (-3.0 * t).exp() + 1.0).collect();
        let k = fit_decay_series(&t, &e, Some(1.0)).unwrap();
        assert!((k - 3.0).abs() < 1e-6);
        let flat = vec![1.0; 10];
        assert!(matches!(
            fit_decay_series(&t[..10], &flat, None),
            Err(Error::NonPositiveExcess { .. })
        ));
    }

    #[test]
    fn heat_mode_decay_rate() {
        let g = Grid::cube(2, 16, 1.0).unwrap();
        let spec = LaplacianSpec::cells(&g, ScalarBc::Neumann);
        let mu = spec.eigenvalue([1, 0, 0]);
        let mut d = DirectorField::zeros(&g);
        d.comps[0] = spec.eigenfunction([1, 0, 0]).unwrap() * 1e-3;
        let s0 = State::new(g, VelocityField::zeros(&g), d, 0.0).unwrap();
        let params = ModelParams::new(1.0, 0.5, Potential::zero());
        let traj = run(&s0, &params, 0.1, 2e-4, 25).unwrap();
        let k = fit_decay_rate(&traj, (0.0, 0.1), Some(0.0)).unwrap();
        assert!((k / (2.0 * mu) - 1.0).abs() < 0.02, "{k} {}", 2.0 * mu);
    }

    #[test]
    fn audit_is_additive() {
        let g = Grid::cube(2, 8, 1.0).unwrap();
        let params = ModelParams::new(1.0, 0.5, Potential::double_well()).with_forcing(ForcingSignal::constant(0.5));
        let traj = run(&random_state(g, 9, 0.2), &params, 0.04, 1e-3, 4).unwrap();
        let a = audit_energy(&traj).unwrap();
        let n = a.rows.len();
        for m in 1..n - 1 {
            let whole = a.interval(0, n - 1);
            let l = a.interval(0, m);
            let r = a.interval(m, n - 1);
            assert!((whole.dissipation - l.dissipation - r.dissipation).abs() < 1e-10);
            assert!((whole.work - l.work - r.work).abs() < 1e-10);
            assert!((whole.residual - l.residual - r.residual).abs() < 1e-10);
        }
    }

    #[test]
    fn csv_has_documented_header() {
        let g = Grid::cube(2, 8, 1.0).unwrap();
        let params = ModelParams::new(1.0, 0.5, Potential::double_well());
        let traj = run(&State::uniform(g, [1.0, 0.0, 0.0]), &params, 0.01, 1e-3, 5).unwrap();
        let a = audit_energy(&traj).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), EnergyAudit::CSV_HEADER);
        assert_eq!(text.lines().count(), 1 + traj.samples.len());
        let r = traj.records[3];
        assert_eq!(StepRecord::from_csv(&r.to_csv()).unwrap(), r);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn parts_add_up(seed in 0u64..1000, amp in 0.0f64..1.0) {
            let g = Grid::cube(2, 6, 1.0).unwrap();
            let s = random_state(g, seed, amp);
            let e = energy(&s, &Potential::double_well(), &BoundarySpec::Neumann).unwrap();
            prop_assert!(e.kinetic >= 0.0 && e.elastic >= 0.0 && e.potential >= 0.0);
            prop_assert!((e.total - (e.kinetic + e.elastic + e.potential)).abs() <= 1e-12 * e.total.max(1e-300));
        }

        #[test]
        fn decay_fit_recovers_rate(k in 0.1f64..10.0, a in 0.1f64..5.0, e_inf in -1.0f64..1.0) {
            let t: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
            let e: Vec<f64> = t.iter().map(|t| a * (-k * t).exp() + e_inf).collect();
            let fit = fit_decay_series(&t, &e, Some(e_inf)).unwrap();
            prop_assert!((fit - k).abs() <= 1e-8 * k);
        }
    }
}
