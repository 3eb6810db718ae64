//! Exact incremental convex hull of integer points in R³.
//!
//! Intended for the small point sets produced by dualizing a family's planes;
//! each insertion scans every live facet, so the cost is quadratic.

use crate::error::{Error, Result};
use crate::geometry::Sign;
use num_bigint::BigInt;
use std::collections::HashMap;

pub type BigPoint = [BigInt; 3];

fn sub(a: &BigPoint, b: &BigPoint) -> BigPoint {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

pub(crate) fn cross(u: &BigPoint, v: &BigPoint) -> BigPoint {
    [
        &u[1] * &v[2] - &u[2] * &v[1],
        &u[2] * &v[0] - &u[0] * &v[2],
        &u[0] * &v[1] - &u[1] * &v[0],
    ]
}

fn dot(u: &BigPoint, v: &BigPoint) -> BigInt {
    &u[0] * &v[0] + &u[1] * &v[1] + &u[2] * &v[2]
}

/// Sign of `det[b - a, c - a, d - a]`: positive when `d` lies on the side of
/// the plane `(a, b, c)` that its right-handed normal points to.
pub fn orient3(a: &BigPoint, b: &BigPoint, c: &BigPoint, d: &BigPoint) -> Sign {
    let n = cross(&sub(b, a), &sub(c, a));
    Sign::of_big(&dot(&n, &sub(d, a)))
}

/// A triangular facet; vertices are counter-clockwise seen from outside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub v: [usize; 3],
}

#[derive(Clone, Debug)]
pub struct ConvexHull3 {
    pub facets: Vec<Facet>,
}

impl ConvexHull3 {
    /// Hull of points with no four coplanar. Points strictly inside the hull
    /// simply do not appear in any facet.
    pub fn build(points: &[BigPoint]) -> Result<ConvexHull3> {
        let n = points.len();
        if n < 4 {
            return Err(Error::Degenerate(format!("hull needs at least 4 points, got {n}")));
        }
        let [a, b, c, d] = initial_simplex(points)?;
        let mut facets: Vec<Option<[usize; 3]>> = Vec::new();
        let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
        let add = |facets: &mut Vec<Option<[usize; 3]>>, owner: &mut HashMap<(usize, usize), usize>, f: [usize; 3]| {
            let id = facets.len();
            for e in 0..3 {
                owner.insert((f[e], f[(e + 1) % 3]), id);
            }
            facets.push(Some(f));
        };
        for (omit, tri) in [(d, [a, b, c]), (c, [a, b, d]), (b, [a, c, d]), (a, [b, c, d])] {
            let f = match orient3(&points[tri[0]], &points[tri[1]], &points[tri[2]], &points[omit]) {
                Sign::Positive => [tri[0], tri[2], tri[1]],
                _ => tri,
            };
            add(&mut facets, &mut edge_owner, f);
        }
        let seeded = [a, b, c, d];
        for p in 0..n {
            if seeded.contains(&p) {
                continue;
            }
            let visible: Vec<usize> = facets
                .iter()
                .enumerate()
                .filter_map(|(id, f)| {
                    let f = f.as_ref()?;
                    match orient3(&points[f[0]], &points[f[1]], &points[f[2]], &points[p]) {
                        Sign::Positive => Some(id),
                        Sign::Zero => Some(usize::MAX),
                        Sign::Negative => None,
                    }
                })
                .collect();
            if visible.contains(&usize::MAX) {
                return Err(Error::Degenerate(format!("point {p} is coplanar with a hull facet")));
            }
            if visible.is_empty() {
                continue;
            }
            let is_visible = |id: usize| visible.binary_search(&id).is_ok();
            let mut horizon = Vec::new();
            for &id in &visible {
                let f = facets[id].unwrap();
                for e in 0..3 {
                    let (u, v) = (f[e], f[(e + 1) % 3]);
                    let twin = edge_owner[&(v, u)];
                    if !is_visible(twin) {
                        horizon.push((u, v));
                    }
                }
            }
            for &id in &visible {
                let f = facets[id].take().unwrap();
                for e in 0..3 {
                    let key = (f[e], f[(e + 1) % 3]);
                    if edge_owner.get(&key) == Some(&id) {
                        edge_owner.remove(&key);
                    }
                }
            }
            for (u, v) in horizon {
                add(&mut facets, &mut edge_owner, [u, v, p]);
            }
        }
        Ok(ConvexHull3 {
            facets: facets.into_iter().flatten().map(|v| Facet { v }).collect(),
        })
    }

    /// Outward normal of a facet.
    pub fn normal(&self, points: &[BigPoint], f: &Facet) -> BigPoint {
        let [a, b, c] = f.v;
        cross(&sub(&points[b], &points[a]), &sub(&points[c], &points[a]))
    }

    /// Undirected edges with their (one or two) incident facets.
    pub fn edges(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut out: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (id, f) in self.facets.iter().enumerate() {
            for e in 0..3 {
                let (u, v) = (f.v[e], f.v[(e + 1) % 3]);
                out.entry((u.min(v), u.max(v))).or_default().push(id);
            }
        }
        out
    }

    pub fn vertices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.facets.iter().flat_map(|f| f.v).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

fn initial_simplex(points: &[BigPoint]) -> Result<[usize; 4]> {
    let n = points.len();
    let a = 0;
    let b = (1..n).find(|&i| points[i] != points[a]).ok_or_else(|| Error::Degenerate("all hull points coincide".into()))?;
    let ab = sub(&points[b], &points[a]);
    let c = (1..n)
        .find(|&i| cross(&ab, &sub(&points[i], &points[a])).iter().any(|x| x.sign() != num_bigint::Sign::NoSign))
        .ok_or_else(|| Error::Degenerate("hull points are collinear".into()))?;
    let d = (1..n)
        .find(|&i| orient3(&points[a], &points[b], &points[c], &points[i]) != Sign::Zero)
        .ok_or_else(|| Error::Degenerate("hull points are coplanar".into()))?;
    Ok([a, b, c, d])
}
