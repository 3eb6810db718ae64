//! Upper envelopes of family planes: membership, face degrees, pockets,
//! peeling layers and degrees at birth under random insertion.
//!
//! Planes are handled as integer rows `(A, B, C)` over a common positive
//! denominator, so the plane with row `r` is `z = (A x + B y + C) / D`. The
//! upper envelope is the support function of the rows seen as points, which
//! makes envelope faces the vertices of the upper hull of the rows and
//! envelope edges the hull edges next to an upward facet.

use crate::builder::Family;
use crate::error::{Error, Result};
use crate::geometry::{GraphForm, PointSet, Rational};
use crate::hull::ConvexHull3;
use crate::perturb::{common_rows, dual_general_position, FamilyPlanes};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type Row = [BigInt; 3];

/// Combinatorics of an upper envelope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub on: Vec<bool>,
    /// Pairs `(i, j)`, `i < j`, of planes sharing an envelope edge; sorted.
    pub edges: Vec<(usize, usize)>,
}

impl Envelope {
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.on.len()];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| match (a == i, b == i) {
                (true, _) => Some(b),
                (_, true) => Some(a),
                _ => None,
            })
            .collect()
    }
}

/// Envelope of arbitrary rows. Uses the dual hull when the rows are in
/// general position and falls back to [`upper_envelope_bruteforce`]
/// otherwise.
pub fn upper_envelope(rows: &[Row]) -> Envelope {
    if rows.len() >= 4 && dual_general_position(rows) {
        if let Ok(env) = envelope_from_hull(rows) {
            return env;
        }
    }
    upper_envelope_bruteforce(rows)
}

fn envelope_from_hull(rows: &[Row]) -> Result<Envelope> {
    let hull = ConvexHull3::build(rows)?;
    let up: Vec<bool> = hull
        .facets
        .iter()
        .map(|f| hull.normal(rows, f)[2].is_positive())
        .collect();
    let mut on = vec![false; rows.len()];
    for (f, &u) in hull.facets.iter().zip(&up) {
        if u {
            f.v.iter().for_each(|&v| on[v] = true);
        }
    }
    let mut edges: Vec<(usize, usize)> = hull
        .edges()
        .into_iter()
        .filter(|(_, fs)| fs.iter().any(|&f| up[f]))
        .map(|(e, _)| e)
        .collect();
    edges.sort_unstable();
    Ok(Envelope { on, edges })
}

/// Envelope edges by solving, for every pair, the one-dimensional problem of
/// finding a point on their intersection line strictly above all other
/// planes. Cubic, but makes no general position assumption.
pub fn upper_envelope_bruteforce(rows: &[Row]) -> Envelope {
    let t = rows.len();
    let mut edges = Vec::new();
    for i in 0..t {
        for j in i + 1..t {
            if pair_on_envelope(rows, i, j) {
                edges.push((i, j));
            }
        }
    }
    let mut on = vec![false; t];
    for &(i, j) in &edges {
        on[i] = true;
        on[j] = true;
    }
    if edges.is_empty() && t > 0 {
        // one face: all planes parallel, the highest ones win
        let top = rows.iter().map(|r| &r[2]).max().unwrap();
        let parallel = rows.iter().all(|r| r[..2] == rows[0][..2]);
        for (k, r) in rows.iter().enumerate() {
            on[k] = if parallel { &r[2] == top } else { t == 1 };
        }
    }
    Envelope { on, edges }
}

fn pair_on_envelope(rows: &[Row], i: usize, j: usize) -> bool {
    let da = &rows[i][0] - &rows[j][0];
    let db = &rows[i][1] - &rows[j][1];
    let dc = &rows[i][2] - &rows[j][2];
    if da.is_zero() && db.is_zero() {
        return false;
    }
    // line {f_i = f_j}: p(s) = p0 + s u, scaled by norm = da^2 + db^2
    let norm = &da * &da + &db * &db;
    let (p0x, p0y) = (-&dc * &da, -&dc * &db);
    let (ux, uy) = (-db.clone(), da.clone());
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for (k, r) in rows.iter().enumerate() {
        if k == i || k == j {
            continue;
        }
        let ea = &rows[i][0] - &r[0];
        let eb = &rows[i][1] - &r[1];
        let ec = &rows[i][2] - &r[2];
        // norm * (f_i - f_k)(p(s)) = alpha + beta s
        let alpha = &ea * &p0x + &eb * &p0y + &ec * &norm;
        let beta = (&ea * &ux + &eb * &uy) * &norm;
        if beta.is_zero() {
            if !alpha.is_positive() {
                return false;
            }
            continue;
        }
        let root = Rational::new(-alpha, beta.clone());
        if beta.is_positive() {
            if lo.as_ref().map_or(true, |l| &root > l) {
                lo = Some(root);
            }
        } else if hi.as_ref().map_or(true, |h| &root < h) {
            hi = Some(root);
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) => l < h,
        _ => true,
    }
}

/// Integer directions spread around the circle, used as witnesses at infinity.
fn directions() -> Vec<(i64, i64)> {
    (0..32)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / 32.0;
            ((a.cos() * 1000.0).round() as i64, (a.sin() * 1000.0).round() as i64)
        })
        .collect()
}

/// Envelope membership by witnesses: every vertex where three planes meet and
/// a set of directions at infinity are tested with the max-plane identity.
/// Requires the rows to be in general position unless all planes are
/// parallel.
pub fn membership_by_witnesses(rows: &[Row]) -> Vec<bool> {
    let t = rows.len();
    let mut on = vec![false; t];
    if t == 0 {
        return on;
    }
    if rows.iter().all(|r| r[..2] == rows[0][..2]) {
        let top = rows.iter().map(|r| &r[2]).max().unwrap();
        return rows.iter().map(|r| &r[2] == top).collect();
    }
    let marks: Vec<[usize; 3]> = (0..t)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            for j in i + 1..t {
                for k in j + 1..t {
                    if vertex_on_envelope(rows, [i, j, k]) {
                        out.push([i, j, k]);
                    }
                }
            }
            out
        })
        .collect();
    for m in marks {
        m.iter().for_each(|&v| on[v] = true);
    }
    for (ux, uy) in directions() {
        let score: Vec<BigInt> = rows.iter().map(|r| &r[0] * ux + &r[1] * uy).collect();
        let best = score.iter().max().unwrap();
        let winners: Vec<usize> = (0..t).filter(|&k| &score[k] == best).collect();
        if winners.len() == 1 {
            on[winners[0]] = true;
        }
    }
    on
}

fn vertex_on_envelope(rows: &[Row], [i, j, k]: [usize; 3]) -> bool {
    let a1 = &rows[i][0] - &rows[j][0];
    let b1 = &rows[i][1] - &rows[j][1];
    let c1 = &rows[j][2] - &rows[i][2];
    let a2 = &rows[i][0] - &rows[k][0];
    let b2 = &rows[i][1] - &rows[k][1];
    let c2 = &rows[k][2] - &rows[i][2];
    let mut w = &a1 * &b2 - &b1 * &a2;
    if w.is_zero() {
        return false;
    }
    let mut x = &c1 * &b2 - &b1 * &c2;
    let mut y = &a1 * &c2 - &c1 * &a2;
    if w.is_negative() {
        w = -w;
        x = -x;
        y = -y;
    }
    let value = |r: &Row| &r[0] * &x + &r[1] * &y + &r[2] * &w;
    let top = value(&rows[i]);
    rows.iter()
        .enumerate()
        .all(|(l, r)| l == i || l == j || l == k || value(r) < top)
}

/// Membership of raw 3D graph planes.
pub fn envelope_membership_planes(planes: &[GraphForm]) -> Result<Vec<bool>> {
    if planes.is_empty() {
        return Err(Error::InvalidParameter("no planes".into()));
    }
    Ok(membership_by_witnesses(&common_rows(planes)?))
}

/// Per-member envelope membership of a 3D family's perturbed planes.
pub fn envelope_membership(ps: &PointSet, family: &Family, seed: u64) -> Result<Vec<bool>> {
    let fp = FamilyPlanes::from_family(ps, family, seed)?;
    Ok(membership_by_witnesses(&fp.rows))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeFace {
    pub on_envelope: bool,
    pub degree: usize,
    pub neighbors: Vec<usize>,
    /// Points in this member and in no other member.
    pub pocket: Vec<usize>,
    /// Points in this member and in none of its envelope neighbours.
    pub pocket_via_neighbors: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeStructure {
    pub faces: Vec<EnvelopeFace>,
    pub edges: usize,
}

impl EnvelopeStructure {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn all_on_envelope(&self) -> bool {
        self.faces.iter().all(|f| f.on_envelope)
    }

    pub fn degree_sum(&self) -> usize {
        self.faces.iter().map(|f| f.degree).sum()
    }

    /// Faces of degree at most `d`.
    pub fn faces_with_degree_at_most(&self, d: usize) -> impl Iterator<Item = &EnvelopeFace> {
        self.faces.iter().filter(move |f| f.on_envelope && f.degree <= d)
    }

    pub fn pockets_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.faces.iter().flat_map(|f| &f.pocket).all(|p| seen.insert(*p))
    }

    /// Whether each pocket equals the member minus its envelope neighbours.
    pub fn pockets_match_neighbors(&self) -> bool {
        self.faces.iter().all(|f| f.pocket == f.pocket_via_neighbors)
    }
}

/// Degrees and pockets of prepared family planes.
pub fn structure_of(fp: &FamilyPlanes) -> EnvelopeStructure {
    let env = upper_envelope(&fp.rows);
    let t = fp.len();
    let faces = (0..t)
        .map(|h| {
            let neighbors = env.neighbors(h);
            let pocket_minus = |others: &mut dyn Iterator<Item = usize>| {
                let mut m = fp.traces[h].clone();
                for g in others {
                    m.difference_with(&fp.traces[g]);
                }
                m.to_vec()
            };
            EnvelopeFace {
                on_envelope: env.on[h],
                degree: neighbors.len(),
                pocket: pocket_minus(&mut (0..t).filter(|&g| g != h)),
                pocket_via_neighbors: pocket_minus(&mut neighbors.iter().copied()),
                neighbors,
            }
        })
        .collect();
    EnvelopeStructure { faces, edges: env.edges.len() }
}

pub fn face_degrees_and_pockets(ps: &PointSet, family: &Family, seed: u64) -> Result<EnvelopeStructure> {
    let fp = FamilyPlanes::from_family(ps, family, seed)?;
    Ok(structure_of(&fp))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelingLayer {
    pub members: Vec<usize>,
    /// Degrees of the layer's faces on the envelope of the remaining planes.
    pub degrees: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeelingRecord {
    pub layers: Vec<PeelingLayer>,
}

impl PeelingRecord {
    pub fn degree_sum(&self) -> usize {
        self.layers.iter().flat_map(|l| &l.degrees).sum()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.members.len()).collect()
    }

    /// `(sum of degrees) / t`.
    pub fn average_degree(&self) -> f64 {
        let t: usize = self.sizes().iter().sum();
        if t == 0 {
            0.0
        } else {
            self.degree_sum() as f64 / t as f64
        }
    }
}

/// Repeatedly removes the planes on the upper envelope of what is left.
pub fn peel_rows(rows: &[Row]) -> PeelingRecord {
    let mut remaining: Vec<usize> = (0..rows.len()).collect();
    let mut layers = Vec::new();
    while !remaining.is_empty() {
        let sub: Vec<Row> = remaining.iter().map(|&i| rows[i].clone()).collect();
        let env = upper_envelope(&sub);
        let deg = env.degrees();
        let mut layer = PeelingLayer { members: Vec::new(), degrees: Vec::new() };
        let mut rest = Vec::new();
        for (k, &i) in remaining.iter().enumerate() {
            if env.on[k] {
                layer.members.push(i);
                layer.degrees.push(deg[k]);
            } else {
                rest.push(i);
            }
        }
        debug_assert!(!layer.members.is_empty());
        layers.push(layer);
        remaining = rest;
    }
    PeelingRecord { layers }
}

pub fn peel_planes(planes: &[GraphForm]) -> Result<PeelingRecord> {
    Ok(peel_rows(&common_rows(planes)?))
}

pub fn peel_layers(ps: &PointSet, family: &Family, seed: u64) -> Result<PeelingRecord> {
    let fp = FamilyPlanes::from_family(ps, family, seed)?;
    Ok(peel_rows(&fp.rows))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Birth {
    pub member: usize,
    pub degree: usize,
    pub pocket: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncrementalRecord {
    pub permutation: Vec<usize>,
    pub births: Vec<Birth>,
}

impl IncrementalRecord {
    pub fn degree_sum(&self) -> usize {
        self.births.iter().map(|b| b.degree).sum()
    }

    pub fn pockets_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.births.iter().flat_map(|b| &b.pocket).all(|p| seen.insert(*p))
    }
}

/// Inserts the planes in the given order and records, for each, its pocket
/// against the earlier members and its degree on the prefix envelope.
pub fn incremental_run(fp: &FamilyPlanes, permutation: &[usize]) -> IncrementalRecord {
    let mut union = crate::mask::PointMask::new(fp.work.len());
    let mut births = Vec::with_capacity(permutation.len());
    for (j, &h) in permutation.iter().enumerate() {
        let mut pocket = fp.traces[h].clone();
        pocket.difference_with(&union);
        union.union_with(&fp.traces[h]);
        let prefix: Vec<Row> = permutation[..=j].iter().map(|&i| fp.rows[i].clone()).collect();
        let env = upper_envelope(&prefix);
        births.push(Birth { member: h, degree: env.neighbors(j).len(), pocket: pocket.to_vec() });
    }
    IncrementalRecord { permutation: permutation.to_vec(), births }
}

/// Summary over several seeded insertion orders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncrementalSummary {
    pub runs: Vec<IncrementalRecord>,
    /// Mean over runs of `(sum of degrees at birth) / t`.
    pub mean_degree: f64,
}

pub fn incremental_runs(fp: &FamilyPlanes, runs: usize, seed: u64) -> IncrementalSummary {
    let t = fp.len();
    let records: Vec<IncrementalRecord> = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r));
            let mut perm: Vec<usize> = (0..t).collect();
            perm.shuffle(&mut rng);
            incremental_run(fp, &perm)
        })
        .collect();
    let mean_degree = if t == 0 || records.is_empty() {
        0.0
    } else {
        records.iter().map(|r| r.degree_sum() as f64 / t as f64).sum::<f64>() / records.len() as f64
    };
    IncrementalSummary { runs: records, mean_degree }
}

/// Default number of insertion orders.
pub const INCREMENTAL_RUNS: usize = 20;

pub fn incremental_degrees(ps: &PointSet, family: &Family, seed: u64) -> Result<IncrementalSummary> {
    let fp = FamilyPlanes::from_family(ps, family, seed)?;
    Ok(incremental_runs(&fp, INCREMENTAL_RUNS, seed))
}

/// All static and randomized envelope diagnostics of one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeDiagnostics {
    pub membership: Vec<bool>,
    pub structure: EnvelopeStructure,
    pub peeling: PeelingRecord,
    pub incremental: IncrementalSummary,
}

pub fn diagnose_family(ps: &PointSet, family: &Family, seed: u64) -> Result<EnvelopeDiagnostics> {
    let fp = FamilyPlanes::from_family(ps, family, seed)?;
    Ok(EnvelopeDiagnostics {
        membership: membership_by_witnesses(&fp.rows),
        structure: structure_of(&fp),
        peeling: peel_rows(&fp.rows),
        incremental: incremental_runs(&fp, INCREMENTAL_RUNS, seed),
    })
}
