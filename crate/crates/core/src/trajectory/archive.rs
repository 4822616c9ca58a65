//! Trajectory archives: one snapshot file per sample, a plain `key=value`
//! manifest and the per-step energy record as CSV.

use super::Trajectory;
use crate::dynamics::{ForcingSignal, ModelParams};
use crate::energy::StepRecord;
use crate::error::{Error, Result};
use crate::fields::{snapshot, BoundaryProgram, BoundarySpec, State};
use crate::potential::Potential;
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const MANIFEST: &str = "manifest.txt";
pub const RECORD: &str = "record.csv";

fn snapshot_name(k: usize) -> String {
    format!("snapshot_{k:05}.bin")
}

/// Contents of an archive directory.
#[derive(Debug, Clone)]
pub struct Archive {
    pub manifest: BTreeMap<String, String>,
    pub samples: Vec<State>,
    pub records: Vec<StepRecord>,
}

/// `name(args)@offset` into the program text and its offset.
fn split_offset(spec: &str) -> Result<(&str, f64)> {
    match spec.split_once('@') {
        None => Ok((spec, 0.0)),
        Some((s, o)) => o
            .trim()
            .parse()
            .map(|o| (s, o))
            .map_err(|_| Error::Format(format!("bad time offset in `{spec}`"))),
    }
}

impl Archive {
    pub fn get(&self, key: &str) -> Result<&str> {
        self.manifest
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Format(format!("manifest lacks `{key}`")))
    }

    fn number(&self, key: &str) -> Result<f64> {
        self.get(key)?
            .parse()
            .map_err(|_| Error::Format(format!("manifest `{key}` is not a number")))
    }

    /// Model parameters recorded in the manifest. Custom forcings cannot be restored.
    pub fn params(&self) -> Result<ModelParams> {
        let potential = Potential::from_name(self.get("potential")?)?;
        let mut p = ModelParams::new(self.number("nu")?, self.number("alpha")?, potential);
        p.stabilization = self.number("stabilization")?;
        let (h, off) = split_offset(self.get("forcing")?)?;
        p.forcing = ForcingSignal::from_name(h)?.shifted(off);
        p.bc = match self.get("bc")? {
            "neumann" => BoundarySpec::Neumann,
            "dirichlet" => {
                let (g, off) = split_offset(self.get("g")?)?;
                BoundarySpec::Dirichlet(BoundaryProgram::from_name(g)?.shifted(off))
            }
            other => return Err(Error::Format(format!("unknown bc `{other}`"))),
        };
        Ok(p)
    }

    /// Rebuilds the trajectory, using `params` when given and the manifest otherwise.
    pub fn into_trajectory(self, params: Option<ModelParams>) -> Result<Trajectory> {
        let params = match params {
            Some(p) => p,
            None => self.params()?,
        };
        let mut t = Trajectory::from_samples(self.samples.clone(), self.number("delta")?, params)?;
        t.dt = self.number("dt")?;
        t.sample_every = self
            .get("sample_every")?
            .parse()
            .map_err(|_| Error::Format("manifest `sample_every` is not an integer".into()))?;
        t.failure = match self.get("failure")? {
            "none" => None,
            msg => Some(msg.to_string()),
        };
        t.records = self.records;
        Ok(t)
    }
}

pub fn write_archive(dir: &Path, traj: &Trajectory) -> Result<()> {
    fs::create_dir_all(dir)?;
    let p = &traj.params;
    let tag = p.bc.tag();
    for (k, s) in traj.samples.iter().enumerate() {
        snapshot::save(&dir.join(snapshot_name(k)), s, tag)?;
    }
    let mut m = BufWriter::new(fs::File::create(dir.join(MANIFEST))?);
    writeln!(m, "dt={}", traj.dt)?;
    writeln!(m, "delta={}", traj.delta)?;
    writeln!(m, "sample_every={}", traj.sample_every)?;
    writeln!(m, "count={}", traj.samples.len())?;
    writeln!(m, "horizon={}", traj.duration())?;
    writeln!(m, "nu={}", p.nu)?;
    writeln!(m, "alpha={}", p.alpha)?;
    writeln!(m, "potential={}", p.potential.name())?;
    writeln!(m, "stabilization={}", p.stabilization)?;
    match &p.bc {
        BoundarySpec::Neumann => writeln!(m, "bc=neumann")?,
        BoundarySpec::Dirichlet(g) => {
            writeln!(m, "bc=dirichlet")?;
            writeln!(m, "g={g}")?;
        }
    }
    writeln!(m, "forcing={}", p.forcing)?;
    writeln!(m, "forcing_tag={}", p.forcing.tag())?;
    // keep the message on one line
    let failure = traj.failure.as_deref().unwrap_or("none").replace('\n', " ");
    writeln!(m, "failure={failure}")?;
    m.flush()?;
    let mut r = BufWriter::new(fs::File::create(dir.join(RECORD))?);
    writeln!(r, "{}", StepRecord::CSV_HEADER)?;
    for rec in &traj.records {
        writeln!(r, "{}", rec.to_csv())?;
    }
    r.flush()?;
    Ok(())
}

pub fn read_archive(dir: &Path) -> Result<Archive> {
    let text = fs::read_to_string(dir.join(MANIFEST))?;
    let mut manifest = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("manifest line `{line}`")))?;
        manifest.insert(k.trim().to_string(), v.trim().to_string());
    }
    let count: usize = manifest
        .get("count")
        .and_then(|c| c.parse().ok())
        .ok_or_else(|| Error::Format("manifest lacks a valid `count`".into()))?;
    let samples = (0..count)
        .map(|k| snapshot::load(&dir.join(snapshot_name(k))).map(|(s, _)| s))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let rec_path = dir.join(RECORD);
    if rec_path.exists() {
        for line in fs::read_to_string(rec_path)?.lines().skip(1) {
            if !line.trim().is_empty() {
                records.push(StepRecord::from_csv(line)?);
            }
        }
    }
    Ok(Archive {
        manifest,
        samples,
        records,
    })
}
