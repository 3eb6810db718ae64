//! JSON instance and net files, CSV sweep tables.

use crate::builder::{Family, NetReport};
use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::geometry::{PointSet, Side};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// How an instance was produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorInfo {
    pub name: String,
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
    #[serde(rename = "box")]
    pub box_size: i64,
    /// Generation attempts rejected for general position.
    #[serde(default)]
    pub rejected: usize,
}

/// A point set on disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub dim: usize,
    pub points: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorInfo>,
}

impl Instance {
    pub fn from_point_set(ps: &PointSet, generator: Option<GeneratorInfo>) -> Self {
        Instance { dim: ps.dim(), points: ps.rows(), generator }
    }

    pub fn to_point_set(&self) -> Result<PointSet> {
        PointSet::from_rows(self.dim, &self.points)
    }

    pub fn from_reader(r: impl Read) -> Result<Self> {
        Ok(serde_json::from_reader(r)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Instance::from_reader(BufReader::new(File::open(path)?))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub trace: Vec<usize>,
    pub contacts: Vec<usize>,
    pub subnet: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub scale: Frac,
    pub side: Side,
    pub members: Vec<MemberRecord>,
}

impl From<&Family> for FamilyRecord {
    fn from(f: &Family) -> Self {
        FamilyRecord {
            scale: f.scale,
            side: f.side,
            members: f
                .members
                .iter()
                .zip(&f.subnets)
                .map(|(m, s)| MemberRecord { trace: m.indices(), contacts: m.contacts.clone(), subnet: s.clone() })
                .collect(),
        }
    }
}

/// A constructed net on disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetFile {
    pub epsilon: Frac,
    pub beta: Frac,
    pub net: Vec<usize>,
    #[serde(default)]
    pub families: Vec<FamilyRecord>,
    pub valid: bool,
}

impl From<&NetReport> for NetFile {
    fn from(r: &NetReport) -> Self {
        NetFile {
            epsilon: r.config.eps,
            beta: r.config.beta,
            net: r.net.clone(),
            families: r.families.iter().map(FamilyRecord::from).collect(),
            valid: r.verdict.valid,
        }
    }
}

impl NetFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// One row of a scaling sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub generator: String,
    pub n: usize,
    pub dim: usize,
    pub epsilon: Frac,
    pub beta: Frac,
    pub seed: u64,
    pub family_size: usize,
    pub net_size: usize,
    pub baseline_size: usize,
    pub valid: bool,
    pub millis: u128,
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<SweepRow>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
