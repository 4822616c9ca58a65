use crate::error::{Error, Result};
use crate::program::parse_call;
use std::fmt;

/// Time-dependent boundary trace for the director.
///
/// Values are uniform over the boundary; `offset` shifts the time origin so
/// that translated trajectories carry the translated datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryProgram {
    kind: BoundaryKind,
    offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BoundaryKind {
    Constant([f64; 3]),
    /// Unit vector rotating in the x-y plane with angular rate `omega`.
    Rotating { omega: f64 },
    /// Unit vector tilting out of plane: angle `amp * sin(omega t)` from the x axis.
    Tilting { amp: f64, omega: f64 },
}

impl BoundaryProgram {
    pub fn constant(value: [f64; 3]) -> Self {
        Self {
            kind: BoundaryKind::Constant(value),
            offset: 0.0,
        }
    }

    pub fn rotating(omega: f64) -> Self {
        Self {
            kind: BoundaryKind::Rotating { omega },
            offset: 0.0,
        }
    }

    pub fn tilting(amp: f64, omega: f64) -> Self {
        Self {
            kind: BoundaryKind::Tilting { amp, omega },
            offset: 0.0,
        }
    }

    /// `constant(a,b,c)`, `rotating(omega)` or `tilting(amp,omega)`.
    pub fn from_name(spec: &str) -> Result<Self> {
        let (name, args) = parse_call(spec)?;
        match (name.as_str(), args.as_slice()) {
            ("constant", [a, b, c]) => Ok(Self::constant([*a, *b, *c])),
            ("rotating", [w]) => Ok(Self::rotating(*w)),
            ("tilting", [a, w]) => Ok(Self::tilting(*a, *w)),
            _ => Err(Error::UnknownProgram(spec.to_string())),
        }
    }

    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            kind: self.kind,
            offset: self.offset + dt,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, BoundaryKind::Constant(_))
    }

    pub fn value(&self, t: f64) -> [f64; 3] {
        let t = t + self.offset;
        match self.kind {
            BoundaryKind::Constant(v) => v,
            BoundaryKind::Rotating { omega } => [(omega * t).cos(), (omega * t).sin(), 0.0],
            BoundaryKind::Tilting { amp, omega } => {
                let th = amp * (omega * t).sin();
                [th.cos(), 0.0, th.sin()]
            }
        }
    }

    /// Time derivative of [`value`](Self::value).
    pub fn rate(&self, t: f64) -> [f64; 3] {
        let t = t + self.offset;
        match self.kind {
            BoundaryKind::Constant(_) => [0.0; 3],
            BoundaryKind::Rotating { omega } => {
                [-omega * (omega * t).sin(), omega * (omega * t).cos(), 0.0]
            }
            BoundaryKind::Tilting { amp, omega } => {
                let th = amp * (omega * t).sin();
                let dth = amp * omega * (omega * t).cos();
                [-th.sin() * dth, 0.0, th.cos() * dth]
            }
        }
    }
}

impl fmt::Display for BoundaryProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BoundaryKind::Constant([a, b, c]) => write!(f, "constant({a},{b},{c})")?,
            BoundaryKind::Rotating { omega } => write!(f, "rotating({omega})")?,
            BoundaryKind::Tilting { amp, omega } => write!(f, "tilting({amp},{omega})")?,
        }
        if self.offset != 0.0 {
            write!(f, "@{}", self.offset)?;
        }
        Ok(())
    }
}

/// Boundary conditions. The velocity is always no-slip; this selects the director condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundarySpec {
    /// Zero normal derivative of the director on every wall.
    Neumann,
    /// Director equal to the given trace on every wall.
    Dirichlet(BoundaryProgram),
}

impl BoundarySpec {
    pub fn tag(&self) -> u8 {
        match self {
            BoundarySpec::Neumann => 0,
            BoundarySpec::Dirichlet(_) => 1,
        }
    }

    pub fn program(&self) -> Option<&BoundaryProgram> {
        match self {
            BoundarySpec::Neumann => None,
            BoundarySpec::Dirichlet(g) => Some(g),
        }
    }

    pub fn shifted(&self, dt: f64) -> Self {
        match self {
            BoundarySpec::Neumann => BoundarySpec::Neumann,
            BoundarySpec::Dirichlet(g) => BoundarySpec::Dirichlet(g.shifted(dt)),
        }
    }
}

impl fmt::Display for BoundarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundarySpec::Neumann => write!(f, "neumann"),
            BoundarySpec::Dirichlet(g) => write!(f, "dirichlet:{g}"),
        }
    }
}
