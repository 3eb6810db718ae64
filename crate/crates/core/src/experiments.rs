//! Instance generators, the grid-and-lines lower bound example, and scaling
//! sweeps.

use crate::builder::{baseline_hw_net, build_net, BuildConfig};
use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::geometry::{validate_general_position, Point, PointSet};
use crate::io::{GeneratorInfo, Instance, SweepRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

/// Default coordinate range `[0, DEFAULT_BOX]`.
pub const DEFAULT_BOX: i64 = 1_000_000;
/// Rejected draws allowed before a generator gives up.
pub const GENERATOR_RETRIES: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    CubeUniform,
    SphereRounded,
    Paraboloid,
    Clustered,
}

impl Generator {
    pub const ALL: [Generator; 4] =
        [Generator::CubeUniform, Generator::SphereRounded, Generator::Paraboloid, Generator::Clustered];

    pub fn name(self) -> &'static str {
        match self {
            Generator::CubeUniform => "cube_uniform",
            Generator::SphereRounded => "sphere_rounded",
            Generator::Paraboloid => "paraboloid",
            Generator::Clustered => "clustered",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown generator '{s}'")))
    }
}

fn draw<R: Rng>(kind: Generator, n: usize, dim: usize, b: i64, rng: &mut R) -> Vec<Vec<i64>> {
    let half = b as f64 / 2.0;
    match kind {
        Generator::CubeUniform => (0..n).map(|_| (0..dim).map(|_| rng.gen_range(0..=b)).collect()).collect(),
        Generator::SphereRounded => (0..n)
            .map(|_| {
                let dir = loop {
                    let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if len > 1e-3 && len <= 1.0 {
                        break v.into_iter().map(|x| x / len).collect::<Vec<_>>();
                    }
                };
                dir.iter().map(|x| (half + half * x).round() as i64).collect()
            })
            .collect(),
        Generator::Paraboloid => {
            let top = (dim - 1) as f64 * half * half;
            (0..n)
                .map(|_| {
                    let mut p: Vec<i64> = (0..dim - 1).map(|_| rng.gen_range(0..=b)).collect();
                    let s: f64 = p.iter().map(|&x| (x as f64 - half).powi(2)).sum();
                    p.push((s / top * b as f64).round() as i64);
                    p
                })
                .collect()
        }
        Generator::Clustered => {
            let centers: Vec<Vec<i64>> = (0..5).map(|_| (0..dim).map(|_| rng.gen_range(0..=b)).collect()).collect();
            let spread = (b / 20).max(1);
            (0..n)
                .map(|_| {
                    let c = &centers[rng.gen_range(0..centers.len())];
                    c.iter().map(|&x| (x + rng.gen_range(-spread..=spread)).clamp(0, b)).collect()
                })
                .collect()
        }
    }
}

/// A seeded point set in general position with coordinates in
/// `[0, DEFAULT_BOX]^dim`.
pub fn generate(kind: Generator, n: usize, dim: usize, seed: u64) -> Result<Instance> {
    generate_in_box(kind, n, dim, seed, DEFAULT_BOX)
}

pub fn generate_in_box(kind: Generator, n: usize, dim: usize, seed: u64, box_size: i64) -> Result<Instance> {
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    if n < dim + 1 {
        return Err(Error::InvalidParameter(format!("need at least {} points in dimension {dim}, got {n}", dim + 1)));
    }
    if box_size < 1 || box_size > crate::geometry::COORD_LIMIT {
        return Err(Error::InvalidParameter(format!("box size {box_size} out of range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for rejected in 0..=GENERATOR_RETRIES {
        let rows = draw(kind, n, dim, box_size, &mut rng);
        let ps = PointSet::from_rows(dim, &rows)?;
        if validate_general_position(&ps).is_ok() {
            let info = GeneratorInfo { name: kind.name().into(), n, dim, seed, box_size, rejected };
            return Ok(Instance::from_point_set(&ps, Some(info)));
        }
    }
    Err(Error::RetryCapExceeded { cap: GENERATOR_RETRIES, what: format!("{kind} draws in general position") })
}

/// The grid `[1:k] x [1:2k^2]` with the `k^3` lines `y = a x + b`,
/// `a in [1:k]`, `b in [1:k^2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFamilyReport {
    pub k: usize,
    pub n: usize,
    pub eps: Frac,
    /// Grid width and height.
    pub grid: (i64, i64),
    /// `(a, b)` per line.
    pub lines: Vec<(i64, i64)>,
    pub counts: Vec<usize>,
    pub max_pairwise: usize,
    pub family_size: usize,
    /// `eps^(-3/2) / |F|`.
    pub ratio: f64,
}

pub fn elekes_demo(k: usize) -> Result<LineFamilyReport> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {k}")));
    }
    let ki = k as i64;
    let (w, h) = (ki, 2 * ki * ki);
    let n = (w * h) as usize;
    let eps = Frac::new(1, 2 * ki * ki);
    let lines: Vec<(i64, i64)> = (1..=ki).flat_map(|a| (1..=ki * ki).map(move |b| (a, b))).collect();
    let grid_index = |x: i64, y: i64| ((x - 1) * h + (y - 1)) as usize;
    let members: Vec<HashSet<usize>> = lines
        .par_iter()
        .map(|&(a, b)| {
            (1..=w)
                .filter_map(|x| {
                    let y = a * x + b;
                    (1..=h).contains(&y).then(|| grid_index(x, y))
                })
                .collect()
        })
        .collect();
    let counts: Vec<usize> = members.iter().map(HashSet::len).collect();
    let max_pairwise = (0..members.len())
        .into_par_iter()
        .map(|i| {
            members[i + 1..]
                .iter()
                .map(|m| members[i].intersection(m).count())
                .max()
                .unwrap_or(0)
        })
        .max()
        .unwrap_or(0);
    let eps_n = eps.floor_mul(n);
    if n != 2 * k * k * k || eps_n != k {
        return Err(Error::VerificationFailed(format!("grid has {n} points, eps n = {eps_n}")));
    }
    if let Some(c) = counts.iter().find(|&&c| c != k) {
        return Err(Error::VerificationFailed(format!("a line holds {c} grid points, expected {k}")));
    }
    if max_pairwise > 1 {
        return Err(Error::VerificationFailed(format!("two lines share {max_pairwise} grid points")));
    }
    let family_size = lines.len();
    // (eps^-1)^3 = 8 k^6 = 8 |F|^2, so eps^(-3/2) / |F| = 2^(3/2)
    let inv = 2 * (k as u128).pow(2);
    if inv.pow(3) != 8 * (family_size as u128).pow(2) || family_size != k * k * k {
        return Err(Error::VerificationFailed("family size does not match k^3".into()));
    }
    let ratio = (inv as f64).powf(1.5) / family_size as f64;
    Ok(LineFamilyReport { k, n, eps, grid: (w, h), lines, counts, max_pairwise, family_size, ratio })
}

/// Parameters of a scaling sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub generator: Generator,
    pub n: usize,
    pub dim: usize,
    pub eps: Vec<Frac>,
    pub beta: Frac,
    pub seeds: Vec<u64>,
    /// Also draw the random-sample baseline net.
    pub baseline: bool,
}

/// One row per `(eps, seed)`; the instance depends on the seed only. Any
/// verification failure aborts the sweep.
pub fn scaling_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let instances = config
        .seeds
        .iter()
        .map(|&s| generate(config.generator, config.n, config.dim, s).and_then(|i| i.to_point_set()))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, Frac)> = (0..config.seeds.len())
        .flat_map(|i| config.eps.iter().map(move |&e| (i, e)))
        .collect();
    cells
        .par_iter()
        .map(|&(i, eps)| {
            let seed = config.seeds[i];
            let ps = &instances[i];
            let report = build_net(ps, &BuildConfig::new(eps).with_beta(config.beta).with_seed(seed))?;
            let baseline_size = if config.baseline { baseline_hw_net(ps, eps, seed)?.net.len() } else { 0 };
            Ok(SweepRow {
                generator: config.generator.name().into(),
                n: config.n,
                dim: config.dim,
                epsilon: eps,
                beta: config.beta,
                seed,
                family_size: report.first_family_size(),
                net_size: report.net.len(),
                baseline_size,
                valid: report.verdict.valid,
                millis: report.stats.millis,
            })
        })
        .collect()
}

/// Point set for quick experiments: `generate(...)` followed by conversion.
pub fn generate_points(kind: Generator, n: usize, dim: usize, seed: u64) -> Result<PointSet> {
    generate(kind, n, dim, seed)?.to_point_set()
}

/// Convenience for tests and benches: `n` points uniform in `[0, b]^dim`
/// without the general position check.
pub fn raw_cube(n: usize, dim: usize, b: i64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    draw(Generator::CubeUniform, n, dim, b, &mut rng)
        .iter()
        .map(|r| Point::from_slice(r).expect("dimension 2 or 3"))
        .collect()
}
