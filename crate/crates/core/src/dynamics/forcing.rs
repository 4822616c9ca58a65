//! Time-dependent body force `h(t)`.
//!
//! Named forcings are products `a(t) · φ(x)` of an amplitude program and the
//! fixed shear profile `φ = (sin(2πy/L_y), 0, 0)`, so spatial norms of `h(t)`
//! are `|a(t)|` times a constant. Custom closures are accepted for
//! manufactured tests.

use crate::error::{Error, Result};
use crate::fields::{Grid, VelocityField};
use crate::program::parse_call;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

type ForceFn = dyn Fn(&Grid, f64) -> VelocityField + Send + Sync;

#[derive(Clone)]
enum Amplitude {
    Zero,
    Constant(f64),
    /// `amp · sin(2πt/period)`
    Periodic { amp: f64, period: f64 },
    /// Piecewise linear through `(times[i], values[i])`, held constant outside.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
    Custom(Arc<ForceFn>),
}

#[derive(Clone)]
pub struct ForcingSignal {
    amplitude: Amplitude,
    offset: f64,
}

impl fmt::Debug for ForcingSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ForcingSignal({self})")
    }
}

impl ForcingSignal {
    pub fn zero() -> Self {
        Self {
            amplitude: Amplitude::Zero,
            offset: 0.0,
        }
    }

    pub fn constant(a: f64) -> Self {
        Self {
            amplitude: Amplitude::Constant(a),
            offset: 0.0,
        }
    }

    pub fn periodic(amp: f64, period: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
        }
        Ok(Self {
            amplitude: Amplitude::Periodic { amp, period },
            offset: 0.0,
        })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidArgument("tabulated forcing needs matching non-empty tables".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("tabulated times must increase".into()));
        }
        Ok(Self {
            amplitude: Amplitude::Tabulated { times, values },
            offset: 0.0,
        })
    }

    /// Arbitrary `h(t)`; evaluated on demand.
    pub fn custom(f: impl Fn(&Grid, f64) -> VelocityField + Send + Sync + 'static) -> Self {
        Self {
            amplitude: Amplitude::Custom(Arc::new(f)),
            offset: 0.0,
        }
    }

    /// `zero`, `constant(a)`, `periodic(a,P)` or `tabulated(t0,v0,t1,v1,...)`.
    pub fn from_name(spec: &str) -> Result<Self> {
        let (name, args) = parse_call(spec)?;
        match (name.as_str(), args.as_slice()) {
            ("zero", []) => Ok(Self::zero()),
            ("constant", [a]) => Ok(Self::constant(*a)),
            ("periodic", [a, p]) => Self::periodic(*a, *p),
            ("tabulated", tv) if !tv.is_empty() && tv.len() % 2 == 0 => Self::tabulated(
                tv.iter().step_by(2).copied().collect(),
                tv.iter().skip(1).step_by(2).copied().collect(),
            ),
            _ => Err(Error::UnknownProgram(spec.to_string())),
        }
    }

    /// One of `zero`, `constant`, `time-periodic`, `tabulated`, `custom`.
    pub fn tag(&self) -> &'static str {
        match self.amplitude {
            Amplitude::Zero => "zero",
            Amplitude::Constant(_) => "constant",
            Amplitude::Periodic { .. } => "time-periodic",
            Amplitude::Tabulated { .. } => "tabulated",
            Amplitude::Custom(_) => "custom",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.amplitude, Amplitude::Zero)
    }

    /// Time shift `T(s)h = h(· + s)`.
    pub fn shifted(&self, s: f64) -> Self {
        Self {
            amplitude: self.amplitude.clone(),
            offset: self.offset + s,
        }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Scalar amplitude `a(t)` of a product-form forcing; `None` for custom forcings.
    pub fn amplitude(&self, t: f64) -> Option<f64> {
        let t = t + self.offset;
        Some(match &self.amplitude {
            Amplitude::Zero => 0.0,
            Amplitude::Constant(a) => *a,
            Amplitude::Periodic { amp, period } => amp * (2.0 * PI * t / period).sin(),
            Amplitude::Tabulated { times, values } => {
                let k = times.partition_point(|&s| s <= t);
                if k == 0 {
                    values[0]
                } else if k == times.len() {
                    values[k - 1]
                } else {
                    let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
                    (1.0 - w) * values[k - 1] + w * values[k]
                }
            }
            Amplitude::Custom(_) => return None,
        })
    }

    /// The fixed spatial profile multiplying the amplitude.
    pub fn profile(grid: &Grid) -> VelocityField {
        let ly = grid.extent(1);
        VelocityField::from_fn(grid, |x| [(2.0 * PI * x[1] / ly).sin(), 0.0, 0.0])
    }

    pub fn eval(&self, grid: &Grid, t: f64) -> VelocityField {
        match &self.amplitude {
            Amplitude::Zero => VelocityField::zeros(grid),
            Amplitude::Custom(f) => f(grid, t + self.offset),
            _ => Self::profile(grid).scaled(self.amplitude(t).unwrap_or(0.0)),
        }
    }
}

impl fmt::Display for ForcingSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.amplitude {
            Amplitude::Zero => write!(f, "zero")?,
            Amplitude::Constant(a) => write!(f, "constant({a})")?,
            Amplitude::Periodic { amp, period } => write!(f, "periodic({amp},{period})")?,
            Amplitude::Tabulated { times, values } => {
                let parts: Vec<String> = times
                    .iter()
                    .zip(values)
                    .map(|(t, v)| format!("{t},{v}"))
                    .collect();
                write!(f, "tabulated({})", parts.join(","))?
            }
            Amplitude::Custom(_) => write!(f, "custom")?,
        }
        if self.offset != 0.0 {
            write!(f, "@{}", self.offset)?;
        }
        Ok(())
    }
}
