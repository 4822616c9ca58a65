//! Sampling-based certification of the structural assumptions on `W`.
//!
//! Global growth conditions cannot be decided from a compact sample, so every
//! check combines two ingredients: witness constants read off as extreme
//! per-point ratios over the sample (these make the inequality hold at every
//! sampled point), and a growth test on the outer shell `0.9R ≤ |d| ≤ R` that
//! rejects ratios which are still drifting towards 0 or ∞ at the edge of the
//! sampled ball.

use super::sampling::halton_ball;
use super::Potential;
use crate::error::{Error, Result};
use std::fmt;

/// Largest admissible growth (in powers of two) of an upper-bound ratio from
/// the inner half-ball to the outer shell.
const UPPER_GROWTH_TOL: f64 = 0.5;
/// Slack on local log-log exponents when certifying lower growth bounds.
const EXPONENT_TOL: f64 = 0.25;
const SHELL: f64 = 0.9;
const DELTA_CANDIDATES: [f64; 7] = [6.0, 4.0, 3.0, 2.0, 1.5, 1.0, 0.5];
const P_CANDIDATES: [f64; 7] = [8.0, 6.0, 5.0, 4.0, 3.0, 2.5, 2.25];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assumption {
    /// Non-negativity, convex split, `W₁ ≤ c₀(1+|∇W₁|²)` and `W₁ ≥ c₁|d|^{2+δ} − c₂`.
    W1,
    /// `W ≤ b(1+|d|⁶)`.
    W2,
    /// `C₁(|d|^p − 1) ≤ W ≤ C₂(1+|d|^p)` for some `p > 2`.
    W3,
    /// Non-negativity, convex split and `W₁ ≤ c₀(1+|∇W₁|²)`.
    W1Star,
}

impl Assumption {
    pub const ALL: [Assumption; 4] = [Assumption::W1, Assumption::W2, Assumption::W3, Assumption::W1Star];

    pub fn from_name(s: &str) -> Result<Self> {
        match s.trim() {
            "W1" | "w1" => Ok(Assumption::W1),
            "W2" | "w2" => Ok(Assumption::W2),
            "W3" | "w3" => Ok(Assumption::W3),
            "W1*" | "w1*" | "W1star" | "w1star" => Ok(Assumption::W1Star),
            other => Err(Error::UnknownProgram(other.to_string())),
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Assumption::W1 => "W1",
            Assumption::W2 => "W2",
            Assumption::W3 => "W3",
            Assumption::W1Star => "W1*",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub assumption: Assumption,
    pub verdict: Verdict,
    /// Witness constants by name (`c0`, `c1`, `c2`, `delta`, `b`, `C1`, `C2`, `p`, `L2`).
    pub constants: Vec<(&'static str, f64)>,
    pub counterexample: Option<[f64; 3]>,
    /// Which sub-condition failed, empty on pass.
    pub reason: String,
    pub radius: f64,
    pub count: usize,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }

    /// Largest violation of the certified inequalities over `points`,
    /// relative to `max(1, max |W|)` on those points.
    pub fn max_violation(&self, p: &Potential, points: &[[f64; 3]]) -> f64 {
        let scale = points
            .iter()
            .map(|&d| p.eval(d).abs())
            .fold(1.0f64, f64::max);
        let mut worst: f64 = 0.0;
        let get = |n: &str| self.constant(n).unwrap_or(0.0);
        for &d in points {
            let r = norm(d);
            let w = p.eval(d);
            let w1 = p.convex_eval(d);
            let g1 = norm(p.convex_grad(d));
            let mut v: f64 = (-w).max(0.0);
            match self.assumption {
                Assumption::W1 | Assumption::W1Star => {
                    v = v.max(w1 - get("c0") * (1.0 + g1 * g1));
                    if self.assumption == Assumption::W1 {
                        let e = 2.0 + get("delta");
                        v = v.max(get("c1") * r.powf(e) - get("c2") - w1);
                    }
                }
                Assumption::W2 => v = v.max(w - get("b") * (1.0 + r.powi(6))),
                Assumption::W3 => {
                    let pe = get("p");
                    v = v
                        .max(get("C1") * (r.powf(pe) - 1.0) - w)
                        .max(w - get("C2") * (1.0 + r.powf(pe)));
                }
            }
            worst = worst.max(v);
        }
        worst / scale
    }
}

fn norm(d: [f64; 3]) -> f64 {
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

fn scaled(d: [f64; 3], s: f64) -> [f64; 3] {
    [d[0] * s, d[1] * s, d[2] * s]
}

struct Sample<'a> {
    pts: &'a [[f64; 3]],
    radius: f64,
}

impl Sample<'_> {
    fn shell(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        let r0 = SHELL * self.radius;
        self.pts.iter().copied().filter(move |&d| norm(d) >= r0)
    }

    fn inner(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        let r0 = 0.5 * self.radius;
        self.pts.iter().copied().filter(move |&d| norm(d) <= r0)
    }

    /// Max of `f/g` over the sample, and whether the ratio stays bounded
    /// (shell maximum at most `2^tol` times the inner maximum).
    fn upper_ratio(
        &self,
        f: impl Fn([f64; 3]) -> f64,
        g: impl Fn([f64; 3]) -> f64,
    ) -> (f64, bool, [f64; 3]) {
        let ratio = |d| f(d) / g(d);
        let mut best = (f64::NEG_INFINITY, [0.0; 3]);
        for &d in self.pts {
            let r = ratio(d);
            if r > best.0 {
                best = (r, d);
            }
        }
        let (shell_max, shell_arg) = self
            .shell()
            .map(|d| (ratio(d), d))
            .fold((f64::NEG_INFINITY, [0.0; 3]), |a, b| if b.0 > a.0 { b } else { a });
        let inner_max = self.inner().map(ratio).fold(f64::NEG_INFINITY, f64::max);
        let bounded = if shell_max <= 0.0 {
            true
        } else if inner_max <= 0.0 {
            false
        } else {
            (shell_max / inner_max).log2() <= UPPER_GROWTH_TOL
        };
        let witness = if bounded { best.1 } else { shell_arg };
        (best.0, bounded, witness)
    }

    /// Smallest local log-log growth exponent of `f` on the outer shell,
    /// measured between `d` and `0.9 d`.
    fn min_local_exponent(&self, f: impl Fn([f64; 3]) -> f64) -> (f64, [f64; 3]) {
        let mut best = (f64::INFINITY, [0.0; 3]);
        for d in self.shell() {
            let (a, b) = (f(d), f(scaled(d, SHELL)));
            let e = if a > 0.0 && b > 0.0 {
                (a / b).ln() / (1.0 / SHELL).ln()
            } else {
                f64::NEG_INFINITY
            };
            if e < best.0 {
                best = (e, d);
            }
        }
        best
    }
}

fn check_finite(p: &Potential, pts: &[[f64; 3]]) -> Result<()> {
    for &d in pts {
        if !p.eval(d).is_finite() || !p.grad(d).iter().all(|v| v.is_finite()) {
            return Err(Error::PotentialNotFinite { point: d });
        }
    }
    Ok(())
}

const DIRECTIONS: [[f64; 3]; 7] = [
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.577_350_269_189_625_8, 0.577_350_269_189_625_8, 0.577_350_269_189_625_8],
    [0.577_350_269_189_625_8, -0.577_350_269_189_625_8, 0.577_350_269_189_625_8],
    [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8, 0.577_350_269_189_625_8],
    [0.577_350_269_189_625_8, 0.577_350_269_189_625_8, -0.577_350_269_189_625_8],
];

/// Non-negativity of `W` and the convex / Lipschitz split. Returns the first failure.
fn structural(p: &Potential, s: &Sample) -> (Option<(&'static str, [f64; 3])>, f64) {
    for &d in s.pts {
        let w = p.eval(d);
        if w < -1e-12 * w.abs().max(1.0) {
            return (Some(("W >= 0", d)), 0.0);
        }
    }
    let h = 1e-3 * s.radius.max(1.0);
    for &d in s.pts {
        let w0 = p.convex_eval(d);
        for e in DIRECTIONS {
            let plus = p.convex_eval([d[0] + h * e[0], d[1] + h * e[1], d[2] + h * e[2]]);
            let minus = p.convex_eval([d[0] - h * e[0], d[1] - h * e[1], d[2] - h * e[2]]);
            if plus + minus - 2.0 * w0 < -1e-10 * w0.abs().max(1.0) {
                return (Some(("W1 convex", d)), 0.0);
            }
        }
    }
    let eta = 1e-2;
    let local_lip = |d: [f64; 3]| {
        let g0 = p.perturbation_grad(d);
        DIRECTIONS
            .iter()
            .map(|e| {
                let g = p.perturbation_grad([d[0] + eta * e[0], d[1] + eta * e[1], d[2] + eta * e[2]]);
                norm([g[0] - g0[0], g[1] - g0[1], g[2] - g0[2]]) / eta
            })
            .fold(0.0f64, f64::max)
    };
    let (lip, bounded, arg) = s.upper_ratio(local_lip, |_| 1.0);
    if !bounded {
        return (Some(("grad W2 Lipschitz", arg)), lip);
    }
    (None, lip.max(0.0))
}

fn pass(assumption: Assumption, constants: Vec<(&'static str, f64)>, radius: f64, count: usize) -> AssumptionReport {
    AssumptionReport {
        assumption,
        verdict: Verdict::Pass,
        constants,
        counterexample: None,
        reason: String::new(),
        radius,
        count,
    }
}

fn fail(
    assumption: Assumption,
    constants: Vec<(&'static str, f64)>,
    reason: &str,
    at: [f64; 3],
    radius: f64,
    count: usize,
) -> AssumptionReport {
    AssumptionReport {
        assumption,
        verdict: Verdict::Fail,
        constants,
        counterexample: Some(at),
        reason: reason.to_string(),
        radius,
        count,
    }
}

/// Checks one assumption on `count` low-discrepancy samples of `|d| ≤ radius`.
pub fn check_assumption(
    p: &Potential,
    assumption: Assumption,
    radius: f64,
    count: usize,
) -> Result<AssumptionReport> {
    if !(radius > 0.0) || count < 1000 {
        return Err(Error::InvalidArgument(format!(
            "assumption checks need R > 0 and N >= 1000, got R = {radius}, N = {count}"
        )));
    }
    let pts = halton_ball(radius, count, 0);
    check_finite(p, &pts)?;
    let s = Sample { pts: &pts, radius };
    let (r, n) = (radius, count);

    match assumption {
        Assumption::W1 | Assumption::W1Star => {
            let (bad, lip) = structural(p, &s);
            let mut constants = vec![("L2", lip)];
            if let Some((why, at)) = bad {
                return Ok(fail(assumption, constants, why, at, r, n));
            }
            let (c0, bounded, at) = s.upper_ratio(
                |d| p.convex_eval(d),
                |d| {
                    let g = norm(p.convex_grad(d));
                    1.0 + g * g
                },
            );
            constants.push(("c0", c0.max(0.0)));
            if !bounded {
                return Ok(fail(assumption, constants, "W1 <= c0(1+|grad W1|^2)", at, r, n));
            }
            if assumption == Assumption::W1Star {
                return Ok(pass(assumption, constants, r, n));
            }
            let (exponent, at) = s.min_local_exponent(|d| p.convex_eval(d));
            let Some(delta) = DELTA_CANDIDATES
                .iter()
                .copied()
                .find(|&delta| exponent >= 2.0 + delta - EXPONENT_TOL)
            else {
                return Ok(fail(assumption, constants, "W1 >= c1|d|^(2+delta) - c2", at, r, n));
            };
            let e = 2.0 + delta;
            let c1 = s
                .shell()
                .map(|d| p.convex_eval(d) / norm(d).powf(e))
                .fold(f64::INFINITY, f64::min);
            let c2 = pts
                .iter()
                .map(|&d| c1 * norm(d).powf(e) - p.convex_eval(d))
                .fold(0.0f64, f64::max);
            constants.extend([("delta", delta), ("c1", c1), ("c2", c2)]);
            if !(c1 > 0.0) {
                return Ok(fail(assumption, constants, "c1 > 0", at, r, n));
            }
            Ok(pass(assumption, constants, r, n))
        }
        Assumption::W2 => {
            let (b, bounded, at) = s.upper_ratio(|d| p.eval(d), |d| 1.0 + norm(d).powi(6));
            let constants = vec![("b", b.max(0.0))];
            if !bounded || !(b > 0.0) {
                return Ok(fail(assumption, constants, "W <= b(1+|d|^6)", at, r, n));
            }
            Ok(pass(assumption, constants, r, n))
        }
        Assumption::W3 => {
            let (exponent, at) = s.min_local_exponent(|d| p.eval(d));
            for pe in P_CANDIDATES {
                if exponent < pe - EXPONENT_TOL {
                    continue;
                }
                let (c2, bounded, _) = s.upper_ratio(|d| p.eval(d), |d| 1.0 + norm(d).powf(pe));
                if !bounded {
                    continue;
                }
                let c1 = pts
                    .iter()
                    .filter(|&&d| norm(d) > 1.0)
                    .map(|&d| p.eval(d) / (norm(d).powf(pe) - 1.0))
                    .fold(f64::INFINITY, f64::min);
                let constants = vec![("p", pe), ("C1", c1), ("C2", c2)];
                if c1 > 0.0 && c1.is_finite() && c2 > 0.0 {
                    return Ok(pass(assumption, constants, r, n));
                }
            }
            Ok(fail(
                assumption,
                vec![("exponent", exponent)],
                "C1(|d|^p-1) <= W <= C2(1+|d|^p) for p > 2",
                at,
                r,
                n,
            ))
        }
    }
}
