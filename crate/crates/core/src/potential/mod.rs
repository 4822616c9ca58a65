//! Bulk potentials `W(d)` for the director and their convex splitting.
//!
//! Every potential here is radial, `W(d) = φ(|d|²)`, and is split as
//! `W = W₁ + W₂` with `W₁ = W + λ|d|²` convex and `W₂ = −λ|d|²` (globally
//! Lipschitz gradient).

mod assumptions;
mod prelim;
pub mod sampling;

pub use assumptions::{check_assumption, Assumption, AssumptionReport, Verdict};
pub use prelim::{estimate_prelim_constants, estimate_prelim_constants_capped, CoercivityTerms, PrelimConstants};

use crate::error::{Error, Result};
use crate::fields::{pairwise_sum, DirectorField, Grid};
use crate::program::parse_call;
use std::fmt;

/// C-order multi-index of flat cell index `i`.
fn unravel(i: usize, grid: &Grid) -> [usize; 3] {
    let (n1, n2) = (grid.n(1), grid.n(2));
    [i / (n1 * n2), (i / n2) % n1, i % n2]
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    /// `Σ c_k s^k` in `s = |d|²`.
    Polynomial(Vec<f64>),
    /// `a|d|^p + b|d|²`.
    PowerLaw { p: f64, a: f64, b: f64 },
}

impl Profile {
    /// φ(s), φ'(s), φ''(s)
    fn eval(&self, s: f64) -> (f64, f64, f64) {
        match self {
            Profile::Polynomial(c) => {
                let (mut f, mut f1, mut f2) = (0.0, 0.0, 0.0);
                for (k, &ck) in c.iter().enumerate().rev() {
                    f = f * s + ck;
                    if k >= 1 {
                        f1 = f1 * s + k as f64 * ck;
                    }
                    if k >= 2 {
                        f2 = f2 * s + (k * (k - 1)) as f64 * ck;
                    }
                }
                (f, f1, f2)
            }
            Profile::PowerLaw { p, a, b } => {
                let q = p / 2.0;
                if s == 0.0 {
                    let f1 = if q > 1.0 { 0.0 } else { a * q };
                    return (0.0, f1 + b, 0.0);
                }
                (
                    a * s.powf(q) + b * s,
                    a * q * s.powf(q - 1.0) + b,
                    a * q * (q - 1.0) * s.powf(q - 2.0),
                )
            }
        }
    }
}

/// A radial potential with its convex split.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    name: String,
    profile: Profile,
    split: f64,
}

fn norm2(d: [f64; 3]) -> f64 {
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

impl Potential {
    /// `W(d) = (|d|² − 1)²`, split as `W₁ = |d|⁴ + 1`, `W₂ = −2|d|²`.
    pub fn double_well() -> Self {
        Self {
            name: "double_well".into(),
            profile: Profile::Polynomial(vec![1.0, -2.0, 1.0]),
            split: 2.0,
        }
    }

    /// `W ≡ 0`.
    pub fn zero() -> Self {
        Self {
            name: "zero".into(),
            profile: Profile::Polynomial(vec![]),
            split: 0.0,
        }
    }

    /// `W(d) = |d|²`.
    pub fn quadratic() -> Self {
        Self {
            name: "quadratic".into(),
            profile: Profile::Polynomial(vec![0.0, 1.0]),
            split: 0.0,
        }
    }

    /// `W(d) = a|d|^p + b|d|²` with `p ≥ 2`, `a ≥ 0`.
    pub fn power_law(p: f64, a: f64, b: f64) -> Result<Self> {
        if !(p >= 2.0) || a < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "power law needs p >= 2 and a >= 0, got p = {p}, a = {a}"
            )));
        }
        Ok(Self {
            name: format!("quartic({p},{a},{b})"),
            profile: Profile::PowerLaw { p, a, b },
            split: (-b).max(0.0),
        })
    }

    /// Polynomial in `|d|²` with coefficients `c[k]` of `|d|^{2k}`.
    ///
    /// The split shift is the smallest λ on a dense radial scan that makes
    /// `W + λ|d|²` convex.
    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        let mut c = coeffs.to_vec();
        while c.last() == Some(&0.0) {
            c.pop();
        }
        if let Some(&lead) = c.last() {
            if c.len() > 1 && lead < 0.0 {
                return Err(Error::InvalidArgument(
                    "leading coefficient must be non-negative".into(),
                ));
            }
        }
        let profile = Profile::Polynomial(c.clone());
        let mut lambda: f64 = 0.0;
        for i in 0..=4000 {
            let s = 1e-3 * i as f64 + (i as f64 / 400.0).powi(4);
            let (_, f1, f2) = profile.eval(s);
            lambda = lambda.max(-f1).max(-(f1 + 2.0 * s * f2));
        }
        let name = format!(
            "custom({})",
            c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        );
        Ok(Self {
            name,
            profile,
            split: lambda,
        })
    }

    /// `double_well`, `zero`, `quadratic`, `quartic(p,a,b)` or `custom(c0,c1,...)`.
    pub fn from_name(spec: &str) -> Result<Self> {
        let (name, args) = parse_call(spec)?;
        match (name.as_str(), args.as_slice()) {
            ("double_well", []) => Ok(Self::double_well()),
            ("zero", []) => Ok(Self::zero()),
            ("quadratic", []) => Ok(Self::quadratic()),
            ("quartic", [p, a, b]) => Self::power_law(*p, *a, *b),
            ("custom", c) if !c.is_empty() => Self::polynomial(c),
            _ => Err(Error::UnknownProgram(spec.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Shift λ of the split `W₁ = W + λ|d|²`.
    pub fn split_shift(&self) -> f64 {
        self.split
    }

    pub fn params(&self) -> Vec<(String, f64)> {
        let mut out = match &self.profile {
            Profile::Polynomial(c) => c
                .iter()
                .enumerate()
                .map(|(k, v)| (format!("c{k}"), *v))
                .collect(),
            Profile::PowerLaw { p, a, b } => {
                vec![("p".into(), *p), ("a".into(), *a), ("b".into(), *b)]
            }
        };
        out.push(("lambda".into(), self.split));
        out
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.profile, Profile::Polynomial(c) if c.is_empty())
    }

    pub fn eval(&self, d: [f64; 3]) -> f64 {
        self.profile.eval(norm2(d)).0
    }

    pub fn grad(&self, d: [f64; 3]) -> [f64; 3] {
        let f1 = self.profile.eval(norm2(d)).1;
        [2.0 * f1 * d[0], 2.0 * f1 * d[1], 2.0 * f1 * d[2]]
    }

    /// Convex part `W₁`.
    pub fn convex_eval(&self, d: [f64; 3]) -> f64 {
        self.eval(d) + self.split * norm2(d)
    }

    pub fn convex_grad(&self, d: [f64; 3]) -> [f64; 3] {
        let g = self.grad(d);
        std::array::from_fn(|k| g[k] + 2.0 * self.split * d[k])
    }

    /// Perturbation part `W₂`.
    pub fn perturbation_eval(&self, d: [f64; 3]) -> f64 {
        -self.split * norm2(d)
    }

    pub fn perturbation_grad(&self, d: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|k| -2.0 * self.split * d[k])
    }

    /// Upper bound on the Lipschitz constant of `−∇W₂`, used for stabilisation.
    pub fn perturbation_lipschitz(&self) -> f64 {
        2.0 * self.split
    }

    /// Midpoint-rule `∫_Ω W(d)`.
    pub fn integrate(&self, d: &DirectorField, grid: &Grid) -> Result<f64> {
        d.check(grid)?;
        let vals: Vec<f64> = (0..grid.cell_count())
            .map(|i| {
                let idx = unravel(i, grid);
                self.eval(d.at(idx))
            })
            .collect();
        Ok(pairwise_sum(&vals) * grid.cell_volume())
    }

    /// Pointwise `∇W(d)` as a director-shaped field.
    pub fn grad_field(&self, d: &DirectorField, grid: &Grid) -> Result<DirectorField> {
        d.check(grid)?;
        let mut out = DirectorField::zeros(grid);
        for i in 0..grid.cell_count() {
            let idx = unravel(i, grid);
            let g = self.grad(d.at(idx));
            for c in 0..3 {
                out.comps[c][idx] = g[c];
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}
