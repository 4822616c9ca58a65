//! Sampled trajectories and trajectory-space analytics: translations,
//! translation-bounded norms, the trajectory metric, forcing hulls, sections
//! and Hausdorff semidistances.
//!
//! Infinite-horizon quantities are evaluated over the recorded horizon.

mod archive;
mod norms;

pub use archive::{read_archive, write_archive, Archive};
pub use norms::{SpatialNorm, YMetric, Norms};

use crate::dynamics::{ForcingSignal, ModelParams, StepReport};
use crate::energy::StepRecord;
use crate::error::{Error, Result};
use crate::fields::{Grid, State};
use crate::potential::Potential;
use rayon::prelude::*;

/// Tolerance for lattice membership of times.
const LATTICE_TOL: f64 = 1e-9;

/// States at uniform spacing `delta`, with the per-step energy records and
/// reports of the run that produced them.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<State>,
    /// Sample spacing.
    pub delta: f64,
    /// Time step of the producing run.
    pub dt: f64,
    pub sample_every: usize,
    /// One record per step, starting at the first sample.
    pub records: Vec<StepRecord>,
    pub reports: Vec<StepReport>,
    pub params: ModelParams,
    /// Message of the error that stopped the run, if any.
    pub failure: Option<String>,
}

impl Trajectory {
    pub fn empty(params: ModelParams, dt: f64, sample_every: usize) -> Self {
        Self {
            samples: Vec::new(),
            delta: dt * sample_every as f64,
            dt,
            sample_every,
            records: Vec::new(),
            reports: Vec::new(),
            params,
            failure: None,
        }
    }

    /// Trajectory from given samples; spacing and grids are validated.
    pub fn from_samples(samples: Vec<State>, delta: f64, params: ModelParams) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidArgument(format!("sample spacing must be positive, got {delta}")));
        }
        if let Some(first) = samples.first() {
            for (k, s) in samples.iter().enumerate() {
                if s.grid != first.grid {
                    return Err(Error::Shape(format!("sample {k} lives on a different grid")));
                }
                let want = first.t + k as f64 * delta;
                if (s.t - want).abs() > 1e-12 * want.abs().max(1.0) {
                    return Err(Error::OffLattice { t: s.t });
                }
            }
        }
        let mut out = Self::empty(params, delta, 1);
        out.samples = samples;
        Ok(out)
    }

    pub fn push_sample(&mut self, s: State) {
        self.samples.push(s);
    }

    pub fn push_record(&mut self, r: StepRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn grid(&self) -> Result<&Grid> {
        self.samples.first().map(|s| &s.grid).ok_or(Error::EmptySet)
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Recorded horizon `(count − 1)Δ`.
    pub fn duration(&self) -> f64 {
        self.samples.len().saturating_sub(1) as f64 * self.delta
    }

    pub fn forcing(&self) -> &ForcingSignal {
        &self.params.forcing
    }

    /// Boundary datum at every sample (Dirichlet runs only).
    pub fn boundary_record(&self) -> Option<Vec<[f64; 3]>> {
        let prog = self.params.bc.program()?;
        Some(self.samples.iter().map(|s| prog.value(s.t)).collect())
    }

    /// Number of samples `m` with `mΔ = shift`.
    fn lattice_index(&self, shift: f64) -> Result<usize> {
        let m = (shift / self.delta).round();
        if !(m >= 0.0) || (m * self.delta - shift).abs() > LATTICE_TOL * shift.abs().max(1.0) {
            return Err(Error::OffLattice { t: shift });
        }
        Ok(m as usize)
    }

    /// The first `window/Δ + 1` samples, i.e. the restriction to `[0, window]`.
    pub fn restrict(&self, window: f64) -> Result<Self> {
        let m = self.lattice_index(window)?;
        if m >= self.samples.len() {
            return Err(Error::InvalidArgument(format!(
                "window {window} exceeds the horizon {}",
                self.duration()
            )));
        }
        let mut out = self.clone();
        out.samples.truncate(m + 1);
        out.records.truncate(m * self.sample_every + 1);
        out.reports.truncate(m * self.sample_every);
        Ok(out)
    }
}

/// `T(shift)w`: drops the first `shift/Δ` samples and rebases time to 0.
///
/// Forcing and boundary data are shifted with the samples, so the result is
/// a trajectory of the translated problem.
pub fn translate(traj: &Trajectory, shift: f64) -> Result<Trajectory> {
    let m = traj.lattice_index(shift)?;
    if m >= traj.samples.len() {
        return Err(Error::InvalidArgument(format!(
            "shift {shift} leaves no samples (horizon {})",
            traj.duration()
        )));
    }
    let origin = traj.samples[m].t;
    let mut out = traj.clone();
    out.samples = traj.samples[m..]
        .iter()
        .enumerate()
        .map(|(k, s)| State {
            t: k as f64 * traj.delta,
            ..s.clone()
        })
        .collect();
    let first = (m * traj.sample_every).min(traj.records.len());
    out.records = traj.records[first..]
        .iter()
        .enumerate()
        .map(|(j, r)| StepRecord {
            t: j as f64 * traj.dt,
            ..*r
        })
        .collect();
    out.reports = traj.reports[first.min(traj.reports.len())..].to_vec();
    out.params = traj.params.shifted(origin);
    Ok(out)
}

/// Window length and exponent of a translation-bounded norm, and the spatial
/// norm applied at each time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TbNormSpec {
    pub window: f64,
    pub p: f64,
    pub norm: SpatialNorm,
}

impl TbNormSpec {
    pub fn new(p: f64, norm: SpatialNorm) -> Self {
        Self { window: 1.0, p, norm }
    }
}

/// `sup_s (∫_s^{s+1} f^p)^{1/p}` over lattice window starts, trapezoid in time.
///
/// `series` holds the per-sample spatial norms at spacing `delta`.
pub fn tb_norm(series: &[f64], delta: f64, spec: &TbNormSpec) -> Result<f64> {
    if !(spec.p >= 1.0) || !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tb norm needs p >= 1 and delta > 0, got p = {}, delta = {delta}",
            spec.p
        )));
    }
    let w = (spec.window / delta).round();
    if (w * delta - spec.window).abs() > LATTICE_TOL * spec.window.max(1.0) || w < 1.0 {
        return Err(Error::OffLattice { t: spec.window });
    }
    let w = w as usize;
    let duration = series.len().saturating_sub(1) as f64 * delta;
    if series.len() < w + 1 {
        return Err(Error::TooShort { duration });
    }
    let pow: Vec<f64> = series.iter().map(|v| v.abs().powf(spec.p)).collect();
    let best = (0..pow.len() - w)
        .map(|s| (s..s + w).map(|k| 0.5 * delta * (pow[k] + pow[k + 1])).sum::<f64>())
        .fold(0.0, f64::max);
    Ok(best.powf(1.0 / spec.p))
}

/// Terms of the trajectory distance, each over the recorded horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoTerms {
    /// `sup_t ‖u₁ − u₂‖_{L²} + sup_t ‖d₁ − d₂‖_{H¹}`
    pub sup_term: f64,
    /// Translation-bounded `L²` in time of `‖u₁ − u₂‖_{V_div} + ‖d₁ − d₂‖_{H²}`.
    pub tb_term: f64,
    /// Translation-bounded `L²` of the velocity difference quotients in `V'_div`.
    pub ut_term: f64,
    /// Translation-bounded `L²` of the director difference quotients in `L^{3/2}`.
    pub dt_term: f64,
    /// `(sup_t |∫W(d₁) − ∫W(d₂)|)^{1/2}`, or for the `p`-norm variant `sup_t ‖d₁ − d₂‖_{L^p}`.
    pub last_term: f64,
    pub horizon: f64,
}

impl RhoTerms {
    pub fn total(&self) -> f64 {
        self.sup_term + self.tb_term + self.ut_term + self.dt_term + self.last_term
    }
}

fn check_pair(a: &Trajectory, b: &Trajectory) -> Result<Grid> {
    let g = *a.grid()?;
    if *b.grid()? != g {
        return Err(Error::Shape("trajectories live on different grids".into()));
    }
    if a.samples.len() != b.samples.len() || (a.delta - b.delta).abs() > 1e-12 * a.delta {
        return Err(Error::Shape(format!(
            "trajectories differ in sampling: {} samples at {} vs {} at {}",
            a.samples.len(),
            a.delta,
            b.samples.len(),
            b.delta
        )));
    }
    Ok(g)
}

fn linear_terms(a: &Trajectory, b: &Trajectory, norms: &Norms) -> Result<(f64, f64, f64, f64)> {
    let delta = a.delta;
    let diffs: Vec<State> = a
        .samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| State {
            grid: x.grid,
            u: x.u.sub(&y.u),
            d: x.d.sub(&y.d),
            t: x.t,
        })
        .collect();
    let mut sup_u: f64 = 0.0;
    let mut sup_d: f64 = 0.0;
    let mut tb_series = Vec::with_capacity(diffs.len());
    for s in &diffs {
        sup_u = sup_u.max(norms.velocity_l2(&s.u)?);
        sup_d = sup_d.max(norms.director_sobolev(&s.d, 1.0)?);
        tb_series.push(norms.velocity_vdiv(&s.u)? + norms.director_sobolev(&s.d, 2.0)?);
    }
    let spec = TbNormSpec::new(2.0, SpatialNorm::L2);
    let tb_term = tb_norm(&tb_series, delta, &spec)?;
    // forward difference quotients, the last one repeated
    let n = diffs.len();
    let (ut_term, dt_term) = if n >= 2 {
        let mut ut_series = Vec::with_capacity(n);
        let mut dt_series = Vec::with_capacity(n);
        for k in 0..n {
            let (i, j) = if k + 1 < n { (k, k + 1) } else { (k - 1, k) };
            let ut = diffs[j].u.sub(&diffs[i].u).scaled(1.0 / delta);
            let dt = diffs[j].d.sub(&diffs[i].d).scaled(1.0 / delta);
            ut_series.push(norms.velocity_dual(&ut)?);
            dt_series.push(norms.director_lp(&dt, 1.5)?);
        }
        (tb_norm(&ut_series, delta, &spec)?, tb_norm(&dt_series, delta, &spec)?)
    } else {
        (0.0, 0.0)
    };
    Ok((sup_u + sup_d, tb_term, ut_term, dt_term))
}

/// Distance `ρ` between two trajectories sampled alike.
pub fn rho_metric(w1: &Trajectory, w2: &Trajectory, p: &Potential) -> Result<RhoTerms> {
    let g = check_pair(w1, w2)?;
    let norms = Norms::new(&g);
    let (sup_term, tb_term, ut_term, dt_term) = linear_terms(w1, w2, &norms)?;
    let mut gap: f64 = 0.0;
    for (a, b) in w1.samples.iter().zip(&w2.samples) {
        gap = gap.max((p.integrate(&a.d, &g)? - p.integrate(&b.d, &g)?).abs());
    }
    Ok(RhoTerms {
        sup_term,
        tb_term,
        ut_term,
        dt_term,
        last_term: gap.sqrt(),
        horizon: w1.duration(),
    })
}

/// Norm of `w1 − w2` in the space with an `L^∞(L^p)` director term.
pub fn rho_p_norm(w1: &Trajectory, w2: &Trajectory, p_exponent: f64) -> Result<RhoTerms> {
    if !(p_exponent >= 2.0) {
        return Err(Error::InvalidArgument(format!("exponent must be >= 2, got {p_exponent}")));
    }
    let g = check_pair(w1, w2)?;
    let norms = Norms::new(&g);
    let (sup_term, tb_term, ut_term, dt_term) = linear_terms(w1, w2, &norms)?;
    let mut lp: f64 = 0.0;
    for (a, b) in w1.samples.iter().zip(&w2.samples) {
        lp = lp.max(norms.director_lp(&a.d.sub(&b.d), p_exponent)?);
    }
    Ok(RhoTerms {
        sup_term,
        tb_term,
        ut_term,
        dt_term,
        last_term: lp,
        horizon: w1.duration(),
    })
}

/// The finite family `{T(t)h₀ : t ∈ shifts}` of the hull of `h₀`.
pub fn hull_sample(h0: &ForcingSignal, shifts: &[f64]) -> Result<Vec<ForcingSignal>> {
    shifts
        .iter()
        .map(|&s| {
            if s >= 0.0 {
                Ok(h0.shifted(s))
            } else {
                Err(Error::InvalidArgument(format!("hull shifts must be non-negative, got {s}")))
            }
        })
        .collect()
}

/// Spatial norm of `h(kΔ)` for `k = 0..count`.
pub fn forcing_norm_series(h: &ForcingSignal, grid: &Grid, delta: f64, count: usize, norm: SpatialNorm) -> Result<Vec<f64>> {
    let norms = Norms::new(grid);
    if h.is_zero() {
        return Ok(vec![0.0; count]);
    }
    if h.amplitude(0.0).is_some() {
        let base = norms.velocity(&ForcingSignal::profile(grid), norm)?;
        return Ok((0..count)
            .map(|k| base * h.amplitude(k as f64 * delta).unwrap_or(0.0).abs())
            .collect());
    }
    (0..count)
        .map(|k| norms.velocity(&h.eval(grid, k as f64 * delta), norm))
        .collect()
}

/// The section `{(u(t), d(t))}` of a family of trajectories.
pub fn section(trajs: &[Trajectory], t: f64) -> Result<Vec<State>> {
    trajs
        .iter()
        .map(|w| {
            w.samples
                .iter()
                .find(|s| (s.t - t).abs() <= LATTICE_TOL * t.abs().max(1.0))
                .cloned()
                .ok_or(Error::OffLattice { t })
        })
        .collect()
}

/// `max_{a∈A} min_{b∈B} ‖a − b‖_Y`.
pub fn hausdorff_semidist(a: &[State], b: &[State], metric: &YMetric) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = f64::INFINITY;
        for y in b {
            best = best.min(metric.distance(x, y)?);
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// `sup_{[0,window]}` distance in `Y` between two trajectories.
fn window_distance(a: &Trajectory, b: &Trajectory, m: usize, metric: &YMetric) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..=m {
        worst = worst.max(metric.distance(&a.samples[k], &b.samples[k])?);
    }
    Ok(worst)
}

/// For each `t`, the semidistance in `C([0, window]; Y)` from
/// `{T(t)w : w ∈ B}` to the reference family, both restricted to `[0, window]`.
pub fn attraction_curve(
    family: &[Trajectory],
    reference: &[Trajectory],
    times: &[f64],
    window: f64,
    metric: &YMetric,
) -> Result<Vec<f64>> {
    if family.is_empty() || reference.is_empty() {
        return Err(Error::EmptySet);
    }
    let delta = reference[0].delta;
    let m = (window / delta).round() as usize;
    if ((m as f64) * delta - window).abs() > LATTICE_TOL * window.max(1.0) {
        return Err(Error::OffLattice { t: window });
    }
    for r in reference {
        if r.samples.len() < m + 1 {
            return Err(Error::InvalidArgument(format!(
                "window {window} exceeds reference horizon {}",
                r.duration()
            )));
        }
    }
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        // members are independent; reduce in a fixed order
        let per_member = family
            .par_iter()
            .map(|w| {
                let shifted = translate(w, t)?;
                if shifted.samples.len() < m + 1 {
                    return Err(Error::InvalidArgument(format!(
                        "window {window} after shift {t} exceeds horizon {}",
                        w.duration()
                    )));
                }
                let mut best = f64::INFINITY;
                for r in reference {
                    best = best.min(window_distance(&shifted, r, m, metric)?);
                }
                Ok(best)
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(per_member.into_iter().fold(0.0, f64::max));
    }
    Ok(out)
}
