//! Strict plane realizations of traces and their common-denominator form.
//!
//! A canonical trace is defined by a plane through `d` contact points. Moving
//! that plane by a small exact offset (chosen per contact so that included
//! contacts end up strictly below and excluded ones strictly above) gives a
//! plane avoiding every point of `P` and cutting out the same subset.

use crate::builder::Family;
use crate::error::{Error, Result};
use crate::geometry::{GraphForm, IntPlane, PointSet, Rational, Side};
use crate::mask::PointMask;
use crate::oracle::RangeTrace;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Attempts at finding perturbations whose dual points are in general
/// position.
pub const PERTURB_ATTEMPTS: usize = 20;

fn q(v: i128) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Solves the square system `a x = b` exactly; `None` if singular.
pub(crate) fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
            let v = &f * &b[col];
            b[r] -= v;
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Vertical gap `plane(p) - p_d` for every point.
fn gaps(work: &PointSet, g: &GraphForm) -> Vec<Rational> {
    let d = work.dim();
    work.points()
        .iter()
        .map(|p| {
            let x: Vec<Rational> = p.coords()[..d - 1].iter().map(|&v| q(v as i128)).collect();
            g.height_at(&x) - q(p.height() as i128)
        })
        .collect()
}

/// A non-vertical plane having exactly the trace's members strictly below it
/// and no point of `work` on it. `work` must be oriented so that the trace is
/// a lower trace.
pub fn strict_realization<R: Rng>(work: &PointSet, trace: &RangeTrace, rng: &mut R) -> Result<GraphForm> {
    let d = work.dim();
    if trace.contacts.len() != d {
        return Err(Error::InvalidParameter(format!(
            "trace has {} contacts, expected {d}",
            trace.contacts.len()
        )));
    }
    let contacts: Vec<_> = trace.contacts.iter().map(|&i| work.get(i)).collect();
    let plane = IntPlane::through(d, &contacts)
        .filter(|p| !p.is_vertical(d))
        .ok_or_else(|| Error::Degenerate("trace contacts do not span a non-vertical plane".into()))?;
    let nd = q(plane.normal[d - 1]);
    let base = GraphForm {
        slopes: plane.normal[..d - 1].iter().map(|&v| -q(v) / &nd).collect(),
        intercept: q(plane.offset) / &nd,
    };
    let rows: Vec<Vec<Rational>> = contacts
        .iter()
        .map(|p| {
            let mut r: Vec<Rational> = p.coords()[..d - 1].iter().map(|&v| q(v as i128)).collect();
            r.push(Rational::one());
            r
        })
        .collect();
    let target: Vec<Rational> = (0..d)
        .map(|b| {
            let w = Rational::new(BigInt::from(16 + rng.gen_range(0..=16)), BigInt::from(16));
            if trace.inclusion & (1 << b) != 0 {
                w
            } else {
                -w
            }
        })
        .collect();
    let delta = solve(rows, target).ok_or_else(|| Error::Degenerate("contacts share a vertical line".into()))?;
    let dg = GraphForm { slopes: delta[..d - 1].to_vec(), intercept: delta[d - 1].clone() };

    let base_gaps = gaps(work, &base);
    let mut limit: Option<Rational> = None;
    for (i, p) in work.points().iter().enumerate() {
        if trace.contacts.contains(&i) {
            continue;
        }
        let x: Vec<Rational> = p.coords()[..d - 1].iter().map(|&v| q(v as i128)).collect();
        let change = dg.height_at(&x).abs();
        if change.is_zero() {
            continue;
        }
        let ratio = base_gaps[i].abs() / change;
        if limit.as_ref().map_or(true, |l| &ratio < l) {
            limit = Some(ratio);
        }
    }
    // Largest power of two at most half the limit, then a jitter in [1/2, 1).
    let half = limit.map(|l| l / q(2)).unwrap_or_else(Rational::one);
    let mut lambda = Rational::one();
    while lambda > half {
        lambda /= q(2);
    }
    lambda *= Rational::new(BigInt::from(8 + rng.gen_range(0..8)), BigInt::from(16));

    let g = GraphForm {
        slopes: base.slopes.iter().zip(&dg.slopes).map(|(s, t)| s + &lambda * t).collect(),
        intercept: &base.intercept + &lambda * &dg.intercept,
    };
    for (i, gap) in gaps(work, &g).iter().enumerate() {
        let below = gap.is_positive();
        if gap.is_zero() || below != trace.members.contains(i) {
            return Err(Error::VerificationFailed(format!("perturbed plane misclassifies point {i}")));
        }
    }
    Ok(g)
}

/// Perturbed bounding planes of a set of traces, all lower traces of `work`.
#[derive(Clone, Debug)]
pub struct FamilyPlanes {
    pub work: PointSet,
    pub side: Side,
    pub traces: Vec<PointMask>,
    pub planes: Vec<GraphForm>,
    /// Plane `i` is `z = (A x + B y + C) / D` for `rows[i] = (A, B, C)` and a
    /// positive denominator `D` common to all rows.
    pub rows: Vec<[BigInt; 3]>,
    pub denom: BigInt,
}

impl FamilyPlanes {
    /// Perturbs the members of a 3D family; retries with fresh offsets until
    /// the dual points are in general position.
    pub fn from_family(ps: &PointSet, family: &Family, seed: u64) -> Result<FamilyPlanes> {
        let work = match family.side {
            Side::Lower => ps.clone(),
            Side::Upper => ps.reflected(),
        };
        FamilyPlanes::from_traces(work, family.side, &family.members, seed)
    }

    pub fn from_traces(work: PointSet, side: Side, traces: &[RangeTrace], seed: u64) -> Result<FamilyPlanes> {
        if work.dim() != 3 {
            return Err(Error::UnsupportedDimension(work.dim()));
        }
        if traces.is_empty() {
            return Err(Error::InvalidParameter("family has no members".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..PERTURB_ATTEMPTS {
            let planes = traces
                .iter()
                .map(|t| strict_realization(&work, t, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let rows = common_rows(&planes)?;
            if dual_general_position(&rows) {
                return Ok(FamilyPlanes {
                    work,
                    side,
                    traces: traces.iter().map(|t| t.members.clone()).collect(),
                    denom: common_denominator(&planes),
                    planes,
                    rows,
                });
            }
        }
        Err(Error::RetryCapExceeded { cap: PERTURB_ATTEMPTS, what: "plane perturbations".into() })
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }
}

fn coeff(p: &GraphForm) -> [Rational; 3] {
    [p.slopes[0].clone(), p.slopes[1].clone(), p.intercept.clone()]
}

/// Least common denominator of all coefficients of 3D graph planes.
pub fn common_denominator(planes: &[GraphForm]) -> BigInt {
    planes
        .iter()
        .flat_map(|p| coeff(p).into_iter().map(|c| c.denom().clone()))
        .fold(BigInt::one(), |acc, d| acc.lcm(&d))
}

/// Integer rows `(A, B, C)` of 3D graph planes over a common denominator.
pub fn common_rows(planes: &[GraphForm]) -> Result<Vec<[BigInt; 3]>> {
    if let Some(p) = planes.iter().find(|p| p.dim() != 3) {
        return Err(Error::UnsupportedDimension(p.dim()));
    }
    let lcm = common_denominator(planes);
    Ok(planes
        .iter()
        .map(|p| coeff(p).map(|c| c.numer() * (&lcm / c.denom())))
        .collect())
}

/// Dual points `(A, B, C)` with distinct, pairwise non-collinear projections
/// `(A, B)` and no four coplanar.
pub fn dual_general_position(rows: &[[BigInt; 3]]) -> bool {
    let t = rows.len();
    let d2 = |i: usize, j: usize, k: usize| {
        let (ux, uy) = (&rows[j][0] - &rows[i][0], &rows[j][1] - &rows[i][1]);
        let (vx, vy) = (&rows[k][0] - &rows[i][0], &rows[k][1] - &rows[i][1]);
        ux * vy - uy * vx
    };
    for i in 0..t {
        for j in i + 1..t {
            if rows[i][..2] == rows[j][..2] {
                return false;
            }
            for k in j + 1..t {
                if d2(i, j, k).is_zero() {
                    return false;
                }
                for l in k + 1..t {
                    if crate::hull::orient3(&rows[i], &rows[j], &rows[k], &rows[l]) == crate::geometry::Sign::Zero {
                        return false;
                    }
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::oracle::{enumerate_canonical_traces, SideFilter};

    fn cloud() -> PointSet {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts = (0..14)
            .map(|_| Point::new3(rng.gen_range(0..1000), rng.gen_range(0..1000), rng.gen_range(0..1000)))
            .collect();
        PointSet::new(3, pts).unwrap()
    }

    #[test]
    fn solve_small_system() {
        let a = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        let x = solve(a, vec![q(5), q(10)]).unwrap();
        assert_eq!(x, vec![q(1), q(3)]);
        assert!(solve(vec![vec![q(1), q(2)], vec![q(2), q(4)]], vec![q(1), q(1)]).is_none());
    }

    #[test]
    fn every_trace_has_a_strict_realization() {
        let ps = cloud();
        assert!(crate::geometry::validate_general_position(&ps).is_ok());
        let traces = enumerate_canonical_traces(&ps, SideFilter::Lower, 1, 13).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in traces.iter().take(200) {
            strict_realization(&ps, t, &mut rng).unwrap();
        }
    }

    #[test]
    fn common_rows_share_denominator() {
        let g = |a: (i64, i64), b: (i64, i64), c: (i64, i64)| GraphForm {
            slopes: vec![Rational::new(a.0.into(), a.1.into()), Rational::new(b.0.into(), b.1.into())],
            intercept: Rational::new(c.0.into(), c.1.into()),
        };
        let rows = common_rows(&[g((1, 2), (1, 3), (0, 1)), g((1, 1), (2, 5), (-1, 4))]).unwrap();
        let r = |v: i64| BigInt::from(v);
        assert_eq!(rows[0], [r(30), r(20), r(0)]);
        assert_eq!(rows[1], [r(60), r(24), r(-15)]);
    }

    #[test]
    fn family_planes_keep_traces() {
        let ps = cloud();
        let traces = enumerate_canonical_traces(&ps, SideFilter::Lower, 4, 5).unwrap();
        let pick: Vec<RangeTrace> = traces.into_iter().step_by(7).take(6).collect();
        let fp = FamilyPlanes::from_traces(ps.clone(), Side::Lower, &pick, 3).unwrap();
        assert_eq!(fp.len(), pick.len());
        assert!(dual_general_position(&fp.rows));
    }
}
