//! Levels, crossing distances and shallow vertices in the arrangement of the
//! dual planes of a point set.
//!
//! A dual point is compared with every dual plane `p*` at once; the result is
//! a [`SignVector`] recording which planes pass strictly below it and which
//! pass through it. Levels and distances are read off these bitsets.

use crate::builder::Family;
use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::geometry::{det3, DualPoint, Point, PointSet, Rational};
use crate::mask::PointMask;
use crate::perturb::FamilyPlanes;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest point set accepted by [`shallow_vertices`].
pub const MAX_DUAL_PLANES: usize = 120;

/// Position of a dual point relative to every dual plane.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignVector {
    /// Planes strictly below the point.
    pub below: PointMask,
    /// Planes through the point.
    pub on: PointMask,
}

impl SignVector {
    /// Number of planes strictly below.
    pub fn level(&self) -> usize {
        self.below.len()
    }

    pub fn is_generic(&self) -> bool {
        self.on.is_empty()
    }

    /// Number of planes on which the two positions differ. For points off
    /// every plane this is the number of separating planes; a plane through
    /// exactly one of the two points also counts, which keeps this a metric
    /// on vertices.
    pub fn distance(&self, other: &SignVector) -> usize {
        let (b1, o1) = (self.below.words(), self.on.words());
        let (b2, o2) = (other.below.words(), other.on.words());
        (0..b1.len())
            .map(|w| ((b1[w] ^ b2[w]) | (o1[w] ^ o2[w])).count_ones() as usize)
            .sum()
    }
}

/// Sign vector of a rational dual point.
pub fn sign_vector(q: &DualPoint, ps: &PointSet) -> Result<SignVector> {
    let d = ps.dim();
    if q.coords.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: q.coords.len() });
    }
    let lcm = q.coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let scaled: Vec<BigInt> = q.coords.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    let n = ps.len();
    let mut below = PointMask::new(n);
    let mut on = PointMask::new(n);
    for (j, p) in ps.points().iter().enumerate() {
        let c = p.coords();
        // q is above p* iff q_d + sum p_i q_i - p_d > 0
        let mut v = scaled[d - 1].clone() - &lcm * c[d - 1];
        for i in 0..d - 1 {
            v += &scaled[i] * c[i];
        }
        if v.is_zero() {
            on.insert(j);
        } else if v.is_positive() {
            below.insert(j);
        }
    }
    Ok(SignVector { below, on })
}

fn generic_sign_vector(q: &DualPoint, ps: &PointSet) -> Result<SignVector> {
    let s = sign_vector(q, ps)?;
    let first_on = s.on.iter().next();
    match first_on {
        None => Ok(s),
        Some(j) => Err(Error::Degenerate(format!("dual point lies on the dual plane of point {j}"))),
    }
}

/// Number of dual planes strictly below `q`.
pub fn level(q: &DualPoint, ps: &PointSet) -> Result<usize> {
    Ok(generic_sign_vector(q, ps)?.level())
}

/// Number of dual planes separating `u` and `v`.
pub fn crossing_distance(u: &DualPoint, v: &DualPoint, ps: &PointSet) -> Result<usize> {
    Ok(generic_sign_vector(u, ps)?.distance(&generic_sign_vector(v, ps)?))
}

/// Intersection of three dual planes of a 3D point set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualVertex {
    pub planes: [usize; 3],
    /// `(X, Y, Z, W)` with `W > 0`, the point `(X/W, Y/W, Z/W)`.
    pub hom: [i128; 4],
    pub level: usize,
}

impl DualVertex {
    pub fn coords(&self) -> [Rational; 3] {
        let w = BigInt::from(self.hom[3]);
        [0, 1, 2].map(|i| Rational::new(BigInt::from(self.hom[i]), w.clone()))
    }

    pub fn to_dual_point(&self) -> DualPoint {
        DualPoint { coords: self.coords().to_vec() }
    }
}

/// Plane `p*` reads `p_1 x + p_2 y + z = p_3`.
pub(crate) fn vertex_hom(a: &Point, b: &Point, c: &Point) -> Option<[i128; 4]> {
    let r = |p: &Point| {
        let w = p.wide();
        [w[0], w[1], 1, w[2]]
    };
    let rows = [r(a), r(b), r(c)];
    let col = |m: usize, rhs: bool| -> [[i128; 3]; 3] {
        rows.map(|row| {
            let mut out = [row[0], row[1], row[2]];
            if rhs {
                out[m] = row[3];
            }
            out
        })
    };
    let w = det3(col(0, false));
    if w == 0 {
        return None;
    }
    let s = w.signum();
    Some([s * det3(col(0, true)), s * det3(col(1, true)), s * det3(col(2, true)), w.abs()])
}

/// `p_1 X + p_2 Y + Z - p_3 W`: positive when the vertex is above `p*`.
#[inline]
pub(crate) fn eval(p: &Point, h: &[i128; 4]) -> i128 {
    let c = p.wide();
    c[0] * h[0] + c[1] * h[1] + h[2] - c[2] * h[3]
}

/// All vertices of the arrangement with level at most `level_cap`, sorted by
/// level, then plane triple. No size cap.
pub(crate) fn arrangement_vertices(ps: &PointSet, level_cap: usize) -> Result<Vec<DualVertex>> {
    if ps.dim() != 3 {
        return Err(Error::UnsupportedDimension(ps.dim()));
    }
    let pts = ps.points();
    let n = pts.len();
    let chunks: Vec<Result<Vec<DualVertex>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for j in i + 1..n {
                for k in j + 1..n {
                    let h = vertex_hom(&pts[i], &pts[j], &pts[k])
                        .ok_or_else(|| Error::Degenerate(format!("dual planes {i}, {j}, {k} do not meet in a point")))?;
                    let mut level = 0;
                    for (l, p) in pts.iter().enumerate() {
                        let v = eval(p, &h);
                        if v > 0 {
                            level += 1;
                        } else if v == 0 && l != i && l != j && l != k {
                            return Err(Error::Degenerate(format!("dual planes {i}, {j}, {k}, {l} are concurrent")));
                        }
                    }
                    if level <= level_cap {
                        out.push(DualVertex { planes: [i, j, k], hom: h, level });
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for c in chunks {
        all.extend(c?);
    }
    all.sort_by(|a, b| a.level.cmp(&b.level).then(a.planes.cmp(&b.planes)));
    Ok(all)
}

/// Vertices of the dual arrangement of `ps` (3D, at most
/// [`MAX_DUAL_PLANES`] points) with level at most `level_cap`.
pub fn shallow_vertices(ps: &PointSet, level_cap: usize) -> Result<Vec<DualVertex>> {
    if ps.len() > MAX_DUAL_PLANES {
        return Err(Error::InvalidParameter(format!(
            "dual arrangement limited to {MAX_DUAL_PLANES} planes, got {}",
            ps.len()
        )));
    }
    arrangement_vertices(ps, level_cap)
}

pub fn vertex_sign_vector(ps: &PointSet, v: &DualVertex) -> SignVector {
    let n = ps.len();
    let mut below = PointMask::new(n);
    let mut on = PointMask::new(n);
    for (j, p) in ps.points().iter().enumerate() {
        match eval(p, &v.hom).signum() {
            1 => below.insert(j),
            0 => on.insert(j),
            _ => {}
        }
    }
    SignVector { below, on }
}

/// Indices of the vertices at distance less than `r` from each center.
pub fn balls(centers: &[SignVector], vertices: &[SignVector], r: Frac) -> Vec<Vec<usize>> {
    let (num, den) = (r.numer() as i128, r.denom() as i128);
    centers
        .par_iter()
        .map(|c| {
            vertices
                .iter()
                .enumerate()
                .filter(|(_, v)| (c.distance(v) as i128) * den < num)
                .map(|(i, _)| i)
                .collect()
        })
        .collect()
}

/// Dual-side measurements of one 3D family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualArrangementStats {
    pub n: usize,
    pub t: usize,
    pub k: usize,
    pub beta: Frac,
    /// Ball radius `(1 - beta) k`.
    pub r: Frac,
    pub levels: Vec<usize>,
    pub trace_sizes: Vec<usize>,
    pub distances: Vec<Vec<usize>>,
    pub shallow_count: usize,
    pub ball_sizes: Vec<usize>,
    pub balls_disjoint: bool,
    /// Every ball vertex has level in `[k - r, 2k + r]`.
    pub ball_levels_in_range: bool,
    pub triangle_inequality: bool,
}

impl DualArrangementStats {
    pub fn min_distance(&self) -> Option<usize> {
        self.distances
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row[i + 1..].iter().copied())
            .min()
    }

    /// Every pairwise distance is at least `2 (1 - beta) k`.
    pub fn separated(&self) -> bool {
        let bound = self.r.mul(Frac::new(2, 1));
        self.min_distance()
            .map_or(true, |d| (d as i128) * bound.denom() as i128 >= bound.numer() as i128)
    }

    pub fn levels_in_range(&self) -> bool {
        self.levels.iter().all(|&l| l >= self.k && l <= 2 * self.k)
    }

    pub fn levels_match_traces(&self) -> bool {
        self.levels == self.trace_sizes
    }

    /// `sum |B_h| <= #vertices at level <= 3k`.
    pub fn packing_holds(&self) -> bool {
        self.ball_sizes.iter().sum::<usize>() <= self.shallow_count
    }

    /// `shallow_count / (n k^2)`.
    pub fn shallow_constant(&self) -> f64 {
        self.shallow_count as f64 / (self.n as f64 * (self.k * self.k) as f64)
    }

    /// Smallest `|B_h| / r^3`.
    pub fn ball_constant(&self) -> f64 {
        let r3 = self.r.to_f64().powi(3);
        self.ball_sizes.iter().map(|&b| b as f64 / r3).fold(f64::INFINITY, f64::min)
    }
}

/// Levels, separation and ball packing for a 3D family at its scale.
pub fn dual_stats(ps: &PointSet, family: &Family, seed: u64) -> Result<DualArrangementStats> {
    let fp = FamilyPlanes::from_family(ps, family, seed)?;
    stats_for(&fp, family.scale, family.beta)
}

pub fn stats_for(fp: &FamilyPlanes, scale: Frac, beta: Frac) -> Result<DualArrangementStats> {
    let work = &fp.work;
    let n = work.len();
    let k = scale.ceil_mul(n);
    let r = Frac((Ratio::from_integer(1) - beta.0) * Ratio::from_integer(k as i64));
    let centers = fp
        .rows
        .iter()
        .map(|row| {
            let coords = row.iter().map(|c| Rational::new(c.clone(), fp.denom.clone())).collect();
            generic_sign_vector(&DualPoint { coords }, work)
        })
        .collect::<Result<Vec<_>>>()?;
    let levels: Vec<usize> = centers.iter().map(SignVector::level).collect();
    let distances: Vec<Vec<usize>> = centers.iter().map(|a| centers.iter().map(|b| a.distance(b)).collect()).collect();
    let t = centers.len();
    let mut triangle_inequality = true;
    for a in 0..t {
        for b in 0..t {
            for c in 0..t {
                if distances[a][c] > distances[a][b] + distances[b][c] {
                    triangle_inequality = false;
                }
            }
        }
    }
    let shallow = shallow_vertices(work, 3 * k)?;
    let signs: Vec<SignVector> = shallow.par_iter().map(|v| vertex_sign_vector(work, v)).collect();
    let ball_sets = balls(&centers, &signs, r);
    let mut seen = vec![false; shallow.len()];
    let mut balls_disjoint = true;
    let mut ball_levels_in_range = true;
    let (lo, hi) = (
        Ratio::from_integer(k as i64) - r.0,
        Ratio::from_integer(2 * k as i64) + r.0,
    );
    for ball in &ball_sets {
        for &v in ball {
            balls_disjoint &= !std::mem::replace(&mut seen[v], true);
            let l = Ratio::from_integer(shallow[v].level as i64);
            ball_levels_in_range &= l >= lo && l <= hi;
        }
    }
    Ok(DualArrangementStats {
        n,
        t,
        k,
        beta,
        r,
        levels,
        trace_sizes: fp.traces.iter().map(PointMask::len).collect(),
        distances,
        shallow_count: shallow.len(),
        ball_sizes: ball_sets.iter().map(Vec::len).collect(),
        balls_disjoint,
        ball_levels_in_range,
        triangle_inequality,
    })
}
