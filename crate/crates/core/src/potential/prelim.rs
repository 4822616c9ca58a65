//! Constants of the coercivity estimate
//! `‖−Δd + ∇W(d)‖² ≥ κ‖∇d‖² + η∫W(d) − l` for Neumann director fields.
//!
//! The constants are certified only on the supplied sample fields.

use super::{check_assumption, Assumption, Potential};
use crate::error::{Error, Result};
use crate::fields::{DirectorField, Grid};
use crate::operators::{director_gradient_energy, director_laplacian, DirectorBc};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrelimConstants {
    pub kappa: f64,
    pub eta: f64,
    pub l: f64,
}

/// The three functionals entering the estimate for one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityTerms {
    /// `‖−Δ_h d + ∇W(d)‖²`
    pub residual: f64,
    /// `‖∇_h d‖²`
    pub gradient: f64,
    /// `∫W(d)`
    pub potential: f64,
}

impl CoercivityTerms {
    pub fn evaluate(p: &Potential, grid: &Grid, d: &DirectorField) -> Result<Self> {
        let mut q = director_laplacian(d, grid, DirectorBc::Neumann)?;
        q.axpy(-1.0, &p.grad_field(d, grid)?);
        let terms = Self {
            residual: q.dot(&q, grid),
            gradient: director_gradient_energy(d, grid, DirectorBc::Neumann)?,
            potential: p.integrate(d, grid)?,
        };
        if !(terms.residual.is_finite() && terms.gradient.is_finite() && terms.potential.is_finite()) {
            return Err(Error::NonFinite { what: "coercivity terms", index: 0 });
        }
        Ok(terms)
    }
}

impl PrelimConstants {
    /// `‖q‖² − (κ‖∇d‖² + η∫W − l)`; non-negative where the estimate holds.
    pub fn margin(&self, t: &CoercivityTerms) -> f64 {
        t.residual - (self.kappa * t.gradient + self.eta * t.potential - self.l)
    }
}

fn required_l(kappa: f64, eta: f64, terms: &[CoercivityTerms]) -> f64 {
    terms
        .iter()
        .map(|t| kappa * t.gradient + eta * t.potential - t.residual)
        .fold(0.0f64, f64::max)
}

/// Largest `x` in `[lo, hi]` with `ok(x)`, assuming `ok` is monotone and `ok(lo)`.
fn bisect(lo: f64, hi: f64, ok: impl Fn(f64) -> bool) -> f64 {
    if ok(hi) {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if ok(m) {
            a = m;
        } else {
            b = m;
        }
    }
    a
}

/// Constructive choice followed by tightening on the samples.
///
/// Start: the discrete elliptic constant is `c_i = 1` because
/// `‖−Δ_h d + d‖² = Σ(1+μ)²|d̂|² ≥ Σ(1+μ)|d̂|²`, so with `ε = 1/2` the proof
/// gives `κ₀ = ε c_i / 2`; `η₀ = (1/8c₀) min W₁/W` with `c₀` from the `(w1)`
/// check; `l₀` is the smallest feasible offset for `(κ₀, η₀)`. Then `κ` and
/// `η` are raised by bisection while the offset stays at most `l₀`, and
/// finally backed off by 10 %.
pub fn estimate_prelim_constants(
    p: &Potential,
    grid: &Grid,
    samples: &[DirectorField],
) -> Result<PrelimConstants> {
    estimate_prelim_constants_capped(p, grid, samples, None)
}

/// As [`estimate_prelim_constants`], failing with [`Error::Infeasible`] when
/// the required offset exceeds `l_cap`.
pub fn estimate_prelim_constants_capped(
    p: &Potential,
    grid: &Grid,
    samples: &[DirectorField],
    l_cap: Option<f64>,
) -> Result<PrelimConstants> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("no sample fields".into()));
    }
    let terms = samples
        .iter()
        .enumerate()
        .map(|(i, d)| {
            CoercivityTerms::evaluate(p, grid, d).map_err(|_| Error::Infeasible {
                field: i,
                violation: f64::NAN,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let kappa0 = 0.25;
    let w1 = check_assumption(p, Assumption::W1Star, 3.0, 1000)?;
    let c0 = w1.constant("c0").unwrap_or(0.0);
    let ratio = super::sampling::halton_ball(3.0, 1000, 0)
        .into_iter()
        .filter(|d| d.iter().map(|v| v * v).sum::<f64>() >= 0.81 * 9.0)
        .filter_map(|d| {
            let w = p.eval(d);
            (w > 0.0).then(|| p.convex_eval(d) / w)
        })
        .fold(f64::INFINITY, f64::min);
    let eta0 = if c0 > 0.0 && ratio.is_finite() { ratio / (8.0 * c0) } else { 1.0 };
    let l0 = required_l(kappa0, eta0, &terms);

    let kappa = bisect(kappa0, 1e3 * kappa0, |k| required_l(k, eta0, &terms) <= l0);
    let eta = bisect(eta0, 1e3 * eta0.max(1e-3), |e| required_l(kappa, e, &terms) <= l0);
    let (kappa, eta) = (0.9 * kappa, 0.9 * eta);
    let l = required_l(kappa, eta, &terms);

    if let Some(cap) = l_cap {
        if l > cap {
            let (field, worst) = terms
                .iter()
                .enumerate()
                .map(|(i, t)| (i, kappa * t.gradient + eta * t.potential - t.residual))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            return Err(Error::Infeasible {
                field,
                violation: worst - cap,
            });
        }
    }
    Ok(PrelimConstants { kappa, eta, l })
}
