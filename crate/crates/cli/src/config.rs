//! Plain `key = value` experiment configuration, one key per line, `#` comments.

use anyhow::{anyhow, bail, Context, Result};
use nematic_core::potential::Assumption;
use nematic_core::{BoundaryProgram, BoundarySpec, ForcingSignal, ModelParams, Potential};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    /// Constant director at rest (an equilibrium of the unforced Neumann model).
    Uniform,
    /// Random smooth director and solenoidal velocity.
    Random,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub nu: f64,
    pub alpha: f64,
    pub potential: Potential,
    pub bc: BoundarySpec,
    pub forcing: ForcingSignal,
    pub stabilization: f64,
    pub dim: usize,
    pub n: usize,
    pub extent: f64,
    pub dt: f64,
    pub t_final: f64,
    pub sample_every: usize,
    pub seed: u64,
    pub init: InitKind,
    pub init_amp: f64,
    pub u_amp: f64,
    pub ensemble: usize,
    pub window: f64,
    pub attract_step: f64,
    pub attract_ratio: Option<f64>,
    pub metric_delta1: f64,
    pub metric_delta2: f64,
    pub dts: Vec<f64>,
    pub assumptions: Vec<Assumption>,
    pub radius: f64,
    pub samples: usize,
    pub fit_window: Option<(f64, f64)>,
    pub e_inf: Option<f64>,
    pub residual_tol: Option<f64>,
}

const KEYS: &[&str] = &[
    "nu",
    "alpha",
    "potential",
    "bc",
    "g",
    "h",
    "stabilization",
    "dim",
    "n",
    "L",
    "dt",
    "T",
    "sample_every",
    "seed",
    "init",
    "init_amp",
    "u_amp",
    "ensemble",
    "window",
    "attract_step",
    "attract_ratio",
    "metric_delta1",
    "metric_delta2",
    "dts",
    "assumptions",
    "radius",
    "samples",
    "fit_t0",
    "fit_t1",
    "e_inf",
    "residual_tol",
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            alpha: 0.5,
            potential: Potential::double_well(),
            bc: BoundarySpec::Neumann,
            forcing: ForcingSignal::zero(),
            stabilization: 0.0,
            dim: 2,
            n: 16,
            extent: 1.0,
            dt: 1e-3,
            t_final: 0.1,
            sample_every: 10,
            seed: 0,
            init: InitKind::Random,
            init_amp: 0.3,
            u_amp: 0.0,
            ensemble: 4,
            window: 1.0,
            attract_step: 1.0,
            attract_ratio: None,
            metric_delta1: 0.25,
            metric_delta2: 0.25,
            dts: Vec::new(),
            assumptions: Assumption::ALL.to_vec(),
            radius: 3.0,
            samples: 10_000,
            fit_window: None,
            e_inf: None,
            residual_tol: None,
        }
    }
}

fn split_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            bail!("line {}: unknown key `{k}`", lineno + 1);
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            bail!("line {}: duplicate key `{k}`", lineno + 1);
        }
    }
    Ok(map)
}

fn num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| anyhow!("`{key}`: cannot parse `{v}`")))
        .transpose()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let map = split_pairs(text)?;
        let mut c = Self::default();
        macro_rules! set {
            ($field:ident, $key:literal) => {
                if let Some(v) = num(&map, $key)? {
                    c.$field = v;
                }
            };
        }
        set!(nu, "nu");
        set!(alpha, "alpha");
        set!(stabilization, "stabilization");
        set!(dim, "dim");
        set!(n, "n");
        set!(extent, "L");
        set!(dt, "dt");
        set!(t_final, "T");
        set!(sample_every, "sample_every");
        set!(seed, "seed");
        set!(init_amp, "init_amp");
        set!(u_amp, "u_amp");
        set!(ensemble, "ensemble");
        set!(window, "window");
        set!(attract_step, "attract_step");
        set!(metric_delta1, "metric_delta1");
        set!(metric_delta2, "metric_delta2");
        set!(radius, "radius");
        set!(samples, "samples");
        c.attract_ratio = num(&map, "attract_ratio")?;
        c.e_inf = num(&map, "e_inf")?;
        c.residual_tol = num(&map, "residual_tol")?;
        if let Some(p) = map.get("potential") {
            c.potential = Potential::from_name(p).with_context(|| format!("potential `{p}`"))?;
        }
        if let Some(h) = map.get("h") {
            c.forcing = ForcingSignal::from_name(h).with_context(|| format!("forcing `{h}`"))?;
        }
        c.bc = match map.get("bc").map(String::as_str).unwrap_or("neumann") {
            "neumann" => {
                if map.contains_key("g") {
                    bail!("`g` is only meaningful with bc = dirichlet");
                }
                BoundarySpec::Neumann
            }
            "dirichlet" => {
                let g = map.get("g").map(String::as_str).unwrap_or("constant(1,0,0)");
                BoundarySpec::Dirichlet(BoundaryProgram::from_name(g).with_context(|| format!("boundary program `{g}`"))?)
            }
            other => bail!("`bc` must be neumann or dirichlet, got `{other}`"),
        };
        c.init = match map.get("init").map(String::as_str).unwrap_or("random") {
            "uniform" => InitKind::Uniform,
            "random" => InitKind::Random,
            other => bail!("`init` must be uniform or random, got `{other}`"),
        };
        if let Some(list) = map.get("dts") {
            c.dts = list
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("`dts`: cannot parse `{s}`")))
                .collect::<Result<_>>()?;
        }
        if let Some(list) = map.get("assumptions") {
            c.assumptions = list
                .split(',')
                .map(|s| Assumption::from_name(s).map_err(|_| anyhow!("unknown assumption `{}`", s.trim())))
                .collect::<Result<_>>()?;
        }
        c.fit_window = match (num(&map, "fit_t0")?, num(&map, "fit_t1")?) {
            (None, None) => None,
            (a, b) => Some((a.unwrap_or(0.0), b.unwrap_or(c.t_final))),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            bail!("`dim` must be 2 or 3");
        }
        if !(self.dt > 0.0) || !(self.t_final >= 0.0) || self.sample_every == 0 {
            bail!("need dt > 0, T >= 0 and sample_every >= 1");
        }
        if !(self.extent > 0.0) {
            bail!("`L` must be positive");
        }
        if self.dts.iter().any(|&h| !(h > 0.0)) {
            bail!("`dts` entries must be positive");
        }
        self.params().validate()?;
        Ok(())
    }

    pub fn params(&self) -> ModelParams {
        let mut p = ModelParams::new(self.nu, self.alpha, self.potential.clone())
            .with_bc(self.bc)
            .with_forcing(self.forcing.clone());
        p.stabilization = self.stabilization;
        p
    }

    /// Sampling interval `Δ = dt · sample_every`.
    pub fn delta(&self) -> f64 {
        self.dt * self.sample_every as f64
    }
}
