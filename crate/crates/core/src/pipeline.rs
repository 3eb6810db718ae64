//! Net construction through the dual arrangement.
//!
//! Points become dual planes `H`. A random sample `X` of `H`, checked to be an
//! `eps/4`-approximation on a batch of random segments, is used to list the
//! shallow vertices `S` of its arrangement. A greedy subset of `S` with
//! pairwise crossing distance above `eps |X| / 4` is kept; for each kept
//! vertex `p` the points whose dual planes pass below `p` get a small net of
//! their own. The union over both vertical sides is checked with the exact
//! verifier, and the whole run is redrawn a bounded number of times if it
//! fails.

use crate::builder::{build_subnet, SubnetMethod};
use crate::dual::{arrangement_vertices, eval, vertex_hom, vertex_sign_vector, DualVertex, SignVector};
use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::geometry::{Point, PointSet, Side};
use crate::mask::PointMask;
use crate::oracle::{self, RangeTrace, Verdict};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Redraws of the sample before giving up.
pub const SAMPLE_REDRAWS: usize = 20;
/// Full reruns of the pipeline before giving up.
pub const PIPELINE_RETRIES: usize = 5;
/// Segments used to spot-check the approximation property.
pub const SPOT_CHECK_SEGMENTS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub eps: Frac,
    /// `a` in the sample size `ceil(a (1/eps^2) ln(1/eps))`.
    pub approx_multiplier: f64,
    pub beta: Frac,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(eps: Frac) -> Self {
        PipelineConfig { eps, approx_multiplier: 4.0, beta: Frac::new(1, 16), seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_beta(mut self, beta: Frac) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_multiplier(mut self, a: f64) -> Self {
        self.approx_multiplier = a;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.eps.is_positive() || self.eps > Frac::new(1, 1) {
            return Err(Error::InvalidParameter(format!("epsilon {} must lie in (0, 1]", self.eps)));
        }
        if !self.beta.is_positive() || self.beta >= Frac::new(1, 8) {
            return Err(Error::InvalidParameter(format!("beta {} must lie in (0, 1/8)", self.beta)));
        }
        if !(self.approx_multiplier > 0.0) {
            return Err(Error::InvalidParameter("sample multiplier must be positive".into()));
        }
        Ok(())
    }

    /// Sample size for `n` planes, clamped to `[min(n, 6), n]`.
    pub fn sample_size(&self, n: usize) -> usize {
        let e = self.eps.to_f64();
        let raw = (self.approx_multiplier / (e * e) * (1.0 / e).ln()).ceil();
        let raw = if raw.is_finite() && raw > 0.0 { raw as usize } else { 0 };
        raw.clamp(n.min(6), n)
    }
}

/// A random sample of the dual planes with its spot-check record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxSample {
    pub indices: Vec<usize>,
    /// Draws rejected by the spot check.
    pub redraws: usize,
    /// Largest observed `| |X_e|/|X| - |H_e|/|H| |`.
    pub max_discrepancy: f64,
}

/// Homogeneous point `(X, Y, Z, W)`, `W > 0`.
type Hom = [i128; 4];

fn random_vertex<R: Rng>(pts: &[Point], rng: &mut R) -> Option<Hom> {
    let idx = index::sample(rng, pts.len(), 3);
    vertex_hom(&pts[idx.index(0)], &pts[idx.index(1)], &pts[idx.index(2)])
}

/// Sign of each plane at a homogeneous point: `1` when the point is above.
fn signs(pts: &[Point], h: &Hom) -> Vec<i8> {
    pts.iter().map(|p| eval(p, h).signum() as i8).collect()
}

/// Planes meeting a segment: chords between two points, or the downward ray
/// from one point (planes on or below it).
enum Segment {
    Chord(Vec<i8>, Vec<i8>),
    Ray(Vec<i8>),
}

impl Segment {
    fn crosses(&self, j: usize) -> bool {
        match self {
            Segment::Chord(a, b) => a[j] * b[j] <= 0,
            Segment::Ray(a) => a[j] >= 0,
        }
    }
}

fn spot_segments<R: Rng>(pts: &[Point], count: usize, rng: &mut R) -> Vec<Segment> {
    if pts.len() < 3 {
        return Vec::new();
    }
    (0..count)
        .filter_map(|i| {
            let a = random_vertex(pts, rng)?;
            if i % 2 == 0 {
                let b = random_vertex(pts, rng)?;
                Some(Segment::Chord(signs(pts, &a), signs(pts, &b)))
            } else {
                Some(Segment::Ray(signs(pts, &a)))
            }
        })
        .collect()
}

/// Largest discrepancy over the segments, and whether all are below
/// `eps / 4` (exact comparison).
fn discrepancy(segments: &[Segment], sample: &[usize], n: usize, eps: Frac) -> (f64, bool) {
    let m = sample.len();
    let mut worst = 0.0f64;
    let mut ok = true;
    for s in segments {
        let h = (0..n).filter(|&j| s.crosses(j)).count() as i128;
        let x = sample.iter().filter(|&&j| s.crosses(j)).count() as i128;
        // | x/m - h/n | < eps/4  <=>  4 den |x n - h m| < num n m
        let diff = (x * n as i128 - h * m as i128).abs();
        ok &= 4 * eps.denom() as i128 * diff < eps.numer() as i128 * n as i128 * m as i128;
        worst = worst.max(diff as f64 / (n * m) as f64);
    }
    (worst, ok)
}

/// Draws `X` uniformly without replacement and redraws until the spot check
/// passes. Each redraw is a quarter larger than the previous one (up to
/// `n`, where the discrepancy vanishes).
pub fn sample_approximation(work: &PointSet, config: &PipelineConfig, seed: u64) -> Result<ApproxSample> {
    config.validate()?;
    let n = work.len();
    let mut size = config.sample_size(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segments = spot_segments(work.points(), SPOT_CHECK_SEGMENTS, &mut rng);
    for redraws in 0..SAMPLE_REDRAWS {
        let mut indices: Vec<usize> = index::sample(&mut rng, n, size).into_vec();
        indices.sort_unstable();
        let (max_discrepancy, ok) = discrepancy(&segments, &indices, n, config.eps);
        if ok {
            return Ok(ApproxSample { indices, redraws, max_discrepancy });
        }
        size = (size + size.div_ceil(4)).min(n);
    }
    Err(Error::RetryCapExceeded { cap: SAMPLE_REDRAWS, what: "approximation sample draws".into() })
}

/// Greedy scan of `candidates` in order, keeping a candidate when its
/// distance to every kept one exceeds `r`.
pub fn select_separated(candidates: &[SignVector], r: Frac) -> Vec<usize> {
    let (num, den) = (r.numer() as i128, r.denom() as i128);
    let mut kept: Vec<usize> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        if kept.iter().all(|&k| (candidates[k].distance(c) as i128) * den > num) {
            kept.push(i);
        }
    }
    kept
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineMember {
    /// Indices (into `P`) of the three sample planes defining the vertex.
    pub planes: [usize; 3],
    pub level_in_sample: usize,
    /// `H_p`: points whose dual planes pass strictly below the vertex.
    pub below: Vec<usize>,
    pub subnet: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideTrace {
    pub side: Side,
    pub sample: ApproxSample,
    /// Size of `S`.
    pub shallow: usize,
    /// Separation radius `eps |X| / 4`.
    pub radius: Frac,
    pub members: Vec<PipelineMember>,
}

impl SideTrace {
    /// Largest level in the full arrangement over the selected vertices.
    pub fn max_member_level(&self) -> usize {
        self.members.iter().map(|m| m.below.len()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineTrace {
    pub config: PipelineConfig,
    pub n: usize,
    pub sides: Vec<SideTrace>,
    pub net: Vec<usize>,
    pub verdict: Verdict,
    /// Full reruns before success.
    pub retries: usize,
}

impl PipelineTrace {
    /// Total number of selected vertices over both sides.
    pub fn family_size(&self) -> usize {
        self.sides.iter().map(|s| s.members.len()).sum()
    }
}

fn run_side(ps: &PointSet, side: Side, config: &PipelineConfig, seed: u64) -> Result<SideTrace> {
    let work = match side {
        Side::Lower => ps.clone(),
        Side::Upper => ps.reflected(),
    };
    let n = work.len();
    let sample = sample_approximation(&work, config, seed)?;
    let xs = PointSet::new(3, sample.indices.iter().map(|&i| work.get(i)).collect())?;
    let m = xs.len();
    let cap = config.eps.mul(Frac::new(3, 2)).floor_mul(m);
    let shallow: Vec<DualVertex> = arrangement_vertices(&xs, cap)?;
    let signs: Vec<SignVector> = shallow.par_iter().map(|v| vertex_sign_vector(&xs, v)).collect();
    let radius = config.eps.mul(Frac::new(1, 4)).mul(Frac::new(m as i64, 1));
    let chosen = select_separated(&signs, radius);
    // A beta-net of H_p: subnets are (beta'/2)-nets, so pass beta' = 2 beta.
    let sub_beta = config.beta.mul(Frac::new(2, 1));
    let members = chosen
        .par_iter()
        .enumerate()
        .map(|(slot, &i)| {
            let v = &shallow[i];
            let full = vertex_sign_vector(&work, &DualVertex { planes: v.planes, hom: v.hom, level: 0 });
            let below: Vec<usize> = full.below.to_vec();
            let subnet = if below.is_empty() {
                Vec::new()
            } else {
                let trace = RangeTrace {
                    members: PointMask::from_indices(n, below.iter().copied()),
                    contacts: Vec::new(),
                    inclusion: 0,
                    side,
                };
                build_subnet(&work, &trace, sub_beta, SubnetMethod::GreedyHittingSet, seed ^ slot as u64)?
            };
            Ok(PipelineMember {
                planes: v.planes.map(|j| sample.indices[j]),
                level_in_sample: v.level,
                below,
                subnet,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SideTrace { side, sample, shallow: shallow.len(), radius, members })
}

/// Runs the dual construction on a 3D point set in general position.
pub fn run_pipeline(ps: &PointSet, config: &PipelineConfig) -> Result<PipelineTrace> {
    config.validate()?;
    if ps.dim() != 3 {
        return Err(Error::UnsupportedDimension(ps.dim()));
    }
    let n = ps.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("pipeline needs at least 3 points, got {n}")));
    }
    let level_bound = config.eps.mul(Frac::new(2, 1));
    let mut last = String::new();
    for retry in 0..PIPELINE_RETRIES {
        let seed = config.seed.wrapping_add((retry as u64) << 40);
        let sides = [Side::Lower, Side::Upper]
            .iter()
            .enumerate()
            .map(|(s, &side)| run_side(ps, side, config, seed ^ ((s as u64) << 56)))
            .collect::<Result<Vec<_>>>()?;
        if let Some(s) = sides.iter().find(|s| !level_bound.count_le_times(s.max_member_level(), n)) {
            last = format!("selected vertex at level {} above 2 eps n", s.max_member_level());
            continue;
        }
        let mut net: Vec<usize> = sides.iter().flat_map(|s| s.members.iter().flat_map(|m| m.subnet.iter().copied())).collect();
        net.sort_unstable();
        net.dedup();
        let verdict = oracle::verify_net(ps, &net, config.eps)?;
        if verdict.valid {
            return Ok(PipelineTrace { config: *config, n, sides, net, verdict, retries: retry });
        }
        let worst = sides.iter().map(|s| s.sample.max_discrepancy).fold(0.0, f64::max);
        last = format!(
            "net of size {} misses heavy range {:?} (largest spot-check discrepancy {worst:.4})",
            net.len(),
            verdict.witness.as_ref().map(RangeTrace::indices)
        );
    }
    Err(Error::VerificationFailed(format!("pipeline failed after {PIPELINE_RETRIES} attempts: {last}")))
}
