//! Canonical halfspace traces, depth counting and the exact net verifier.
//!
//! In general position every halfspace can be translated until it touches a
//! point of `P` and then rotated about its contacts until `d` points lie on the
//! boundary, without changing which other points it contains. Enumerating the
//! plane through every `d`-subset, both sides, and all `2^d` inclusion
//! patterns of the contacts therefore yields every trace `h ∩ P`.

use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::geometry::{Halfspace, IntPlane, Point, PointSet, Sign, Side};
use crate::mask::PointMask;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use rayon::prelude::*;
use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

/// A subset of `P` realized by a closed halfspace, with one canonical
/// defining plane: the plane through `contacts`, on `side`, with the contacts
/// whose bit is set in `inclusion` included.
#[derive(Clone, Debug)]
pub struct RangeTrace {
    pub members: PointMask,
    pub contacts: Vec<usize>,
    pub inclusion: u8,
    pub side: Side,
}

impl PartialEq for RangeTrace {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

impl Eq for RangeTrace {}

impl Hash for RangeTrace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.members.hash(state);
    }
}

impl RangeTrace {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.members.to_vec()
    }

    pub fn included_contacts(&self) -> impl Iterator<Item = usize> + '_ {
        self.contacts
            .iter()
            .enumerate()
            .filter(|(b, _)| self.inclusion & (1 << b) != 0)
            .map(|(_, &c)| c)
    }

    /// Tie-break key for equal member sets.
    fn representative_key(&self) -> (&[usize], u8, Side) {
        (&self.contacts, self.inclusion, self.side)
    }
}

/// Which halfspace orientations to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideFilter {
    Lower,
    Upper,
    Both,
}

impl SideFilter {
    fn lower(self) -> bool {
        matches!(self, SideFilter::Lower | SideFilter::Both)
    }

    fn upper(self) -> bool {
        matches!(self, SideFilter::Upper | SideFilter::Both)
    }
}

/// Outcome of [`verify_net`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub valid: bool,
    /// A heavy range missing the net, when invalid.
    pub witness: Option<RangeTrace>,
}

/// Heavy-range threshold `ceil(eps * n)`.
pub fn heavy_threshold(eps: Frac, n: usize) -> usize {
    eps.ceil_mul(n)
}

/// Number of points of `P` in the closed halfspace `h`.
pub fn depth(h: &Halfspace, ps: &PointSet) -> Result<usize> {
    if h.dim() != ps.dim() {
        return Err(Error::DimensionMismatch { expected: ps.dim(), got: h.dim() });
    }
    // Clear denominators once, then evaluate every point with integers.
    let coeffs = h.plane.coeffs();
    let lcm = coeffs
        .iter()
        .chain(std::iter::once(h.plane.offset()))
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let scale = |r: &crate::geometry::Rational| r.numer() * (&lcm / r.denom());
    let mut a: Vec<BigInt> = coeffs.iter().map(scale).collect();
    let mut c = scale(h.plane.offset());
    if a[a.len() - 1].is_negative() {
        a.iter_mut().for_each(|v| *v = -v.clone());
        c = -c;
    }
    let mut count = 0;
    for p in ps.points() {
        let mut v = -c.clone();
        for (ai, &x) in a.iter().zip(p.coords()) {
            v += ai * x;
        }
        let inside = match (h.side, Sign::of_big(&v)) {
            (_, Sign::Zero) => true,
            (Side::Lower, s) => s == Sign::Negative,
            (Side::Upper, s) => s == Sign::Positive,
        };
        count += inside as usize;
    }
    Ok(count)
}

fn degenerate_plane(contacts: &[usize]) -> Error {
    Error::Degenerate(format!("points {contacts:?} do not span a non-vertical hyperplane"))
}

fn degenerate_extra(contacts: &[usize], extra: usize) -> Error {
    Error::Degenerate(format!("point {extra} lies on the hyperplane through {contacts:?}"))
}

/// Calls `f` with every `d`-subset of `subset` (as positions into `subset`,
/// lexicographic) whose first element is `first`, together with the plane
/// through it.
fn for_each_plane_from<F>(ps: &PointSet, subset: &[usize], first: usize, mut f: F) -> Result<()>
where
    F: FnMut(&[usize], &IntPlane) -> Result<()>,
{
    let dim = ps.dim();
    let m = subset.len();
    let pt = |pos: usize| ps.get(subset[pos]);
    let mut plane_for = |contacts: &[usize], pts: &[Point]| -> Result<()> {
        let plane = IntPlane::through(dim, pts)
            .filter(|pl| !pl.is_vertical(dim))
            .ok_or_else(|| degenerate_plane(contacts))?;
        f(contacts, &plane)
    };
    let i = first;
    for j in i + 1..m {
        if dim == 2 {
            plane_for(&[subset[i], subset[j]], &[pt(i), pt(j)])?;
            continue;
        }
        for k in j + 1..m {
            plane_for(&[subset[i], subset[j], subset[k]], &[pt(i), pt(j), pt(k)])?;
        }
    }
    Ok(())
}

/// Every nonempty subset of a set of fewer than `d` points in general
/// position is a trace of both a lower and an upper halfspace.
fn small_set_traces(n: usize, subset: &[usize], sides: SideFilter, lo: usize, hi: usize) -> Vec<RangeTrace> {
    let m = subset.len();
    let side = if sides.lower() { Side::Lower } else { Side::Upper };
    let mut out = Vec::new();
    for bits in 0u32..(1 << m) {
        let size = bits.count_ones() as usize;
        if size < lo || size > hi {
            continue;
        }
        let members = PointMask::from_indices(n, (0..m).filter(|b| bits & (1 << b) != 0).map(|b| subset[b]));
        out.push(RangeTrace { members, contacts: subset.to_vec(), inclusion: bits as u8, side });
    }
    out
}

/// All canonical traces on `P` with size in `[lo, hi]`, deduplicated and
/// sorted by index list.
pub fn enumerate_canonical_traces(ps: &PointSet, sides: SideFilter, lo: usize, hi: usize) -> Result<Vec<RangeTrace>> {
    let all: Vec<usize> = (0..ps.len()).collect();
    enumerate_traces_on(ps, &all, sides, lo, hi)
}

/// Canonical traces of the restriction of `P` to `subset` (sorted, distinct
/// indices). Members are indices into `P`.
pub fn enumerate_traces_on(
    ps: &PointSet,
    subset: &[usize],
    sides: SideFilter,
    lo: usize,
    hi: usize,
) -> Result<Vec<RangeTrace>> {
    let n = ps.len();
    let dim = ps.dim();
    if lo > hi {
        return Ok(Vec::new());
    }
    if subset.len() < dim {
        return Ok(small_set_traces(n, subset, sides, lo, hi));
    }
    let chunks: Vec<Vec<RangeTrace>> = (0..subset.len())
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            for_each_plane_from(ps, subset, first, |contacts, plane| {
                let mut below = PointMask::new(n);
                let mut above = PointMask::new(n);
                let (mut nb, mut na) = (0usize, 0usize);
                for &q in subset {
                    if contacts.contains(&q) {
                        continue;
                    }
                    match plane.eval(&ps.get(q)).cmp(&0) {
                        Ordering::Less => {
                            below.insert(q);
                            nb += 1;
                        }
                        Ordering::Greater => {
                            above.insert(q);
                            na += 1;
                        }
                        Ordering::Equal => return Err(degenerate_extra(contacts, q)),
                    }
                }
                let d = contacts.len();
                for (side, base, count, wanted) in
                    [(Side::Lower, &below, nb, sides.lower()), (Side::Upper, &above, na, sides.upper())]
                {
                    if !wanted || count > hi || count + d < lo {
                        continue;
                    }
                    for inclusion in 0u8..(1 << d) {
                        let size = count + inclusion.count_ones() as usize;
                        if size < lo || size > hi {
                            continue;
                        }
                        let mut members = base.clone();
                        for (b, &c) in contacts.iter().enumerate() {
                            if inclusion & (1 << b) != 0 {
                                members.insert(c);
                            }
                        }
                        out.push(RangeTrace { members, contacts: contacts.to_vec(), inclusion, side });
                    }
                }
                Ok(())
            })?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut traces: Vec<RangeTrace> = chunks.into_iter().flatten().collect();
    traces.par_sort_unstable_by(|a, b| {
        a.members
            .cmp(&b.members)
            .then_with(|| a.representative_key().cmp(&b.representative_key()))
    });
    traces.dedup_by(|later, earlier| later.members == earlier.members);
    traces.par_sort_unstable_by(|a, b| a.members.cmp_indices(&b.members));
    Ok(traces)
}

/// Searches for a canonical trace on `subset` with at least `threshold`
/// points that avoids `hitters`. Returns the lexicographically first such
/// trace (by contacts, side), including as many non-hitting contacts as
/// possible.
pub fn find_unhit_trace(
    ps: &PointSet,
    subset: &[usize],
    hitters: &PointMask,
    threshold: usize,
    sides: SideFilter,
) -> Result<Option<RangeTrace>> {
    let n = ps.len();
    let dim = ps.dim();
    if subset.len() < dim {
        let free: Vec<usize> = subset.iter().copied().filter(|&i| !hitters.contains(i)).collect();
        if free.len() >= threshold.max(1) {
            let side = if sides.lower() { Side::Lower } else { Side::Upper };
            let inclusion = subset
                .iter()
                .enumerate()
                .filter(|(_, &i)| !hitters.contains(i))
                .fold(0u8, |acc, (b, _)| acc | (1 << b));
            return Ok(Some(RangeTrace {
                members: PointMask::from_indices(n, free),
                contacts: subset.to_vec(),
                inclusion,
                side,
            }));
        }
        return Ok(None);
    }
    let found = (0..subset.len())
        .into_par_iter()
        .map(|first| {
            let mut hit: Option<RangeTrace> = None;
            let r = for_each_plane_from(ps, subset, first, |contacts, plane| {
                if hit.is_some() {
                    return Ok(());
                }
                let (mut nb, mut na) = (0usize, 0usize);
                let (mut below_hit, mut above_hit) = (false, false);
                for &q in subset {
                    if contacts.contains(&q) {
                        continue;
                    }
                    let s = plane.eval(&ps.get(q));
                    if s < 0 {
                        nb += 1;
                        below_hit |= hitters.contains(q);
                    } else if s > 0 {
                        na += 1;
                        above_hit |= hitters.contains(q);
                    } else {
                        return Err(degenerate_extra(contacts, q));
                    }
                }
                let mut inclusion = 0u8;
                for (b, &c) in contacts.iter().enumerate() {
                    if !hitters.contains(c) {
                        inclusion |= 1 << b;
                    }
                }
                let free = inclusion.count_ones() as usize;
                for (side, count, blocked, wanted) in [
                    (Side::Lower, nb, below_hit, sides.lower()),
                    (Side::Upper, na, above_hit, sides.upper()),
                ] {
                    if wanted && !blocked && count + free >= threshold.max(1) {
                        let mut members = PointMask::new(n);
                        for &q in subset {
                            if contacts.contains(&q) {
                                continue;
                            }
                            let s = plane.eval(&ps.get(q));
                            if (side == Side::Lower && s < 0) || (side == Side::Upper && s > 0) {
                                members.insert(q);
                            }
                        }
                        for (b, &c) in contacts.iter().enumerate() {
                            if inclusion & (1 << b) != 0 {
                                members.insert(c);
                            }
                        }
                        hit = Some(RangeTrace { members, contacts: contacts.to_vec(), inclusion, side });
                        return Ok(());
                    }
                }
                Ok(())
            });
            r.map(|_| hit)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(found.into_iter().flatten().next())
}

/// Decides whether `net` (indices into `P`) is an `eps`-net for all closed
/// halfspaces: every canonical trace with at least `ceil(eps n)` points must
/// contain a net point.
pub fn verify_net(ps: &PointSet, net: &[usize], eps: Frac) -> Result<Verdict> {
    verify_net_sides(ps, net, eps, SideFilter::Both)
}

/// [`verify_net`] restricted to lower or upper halfspaces.
pub fn verify_net_sides(ps: &PointSet, net: &[usize], eps: Frac, sides: SideFilter) -> Result<Verdict> {
    let n = ps.len();
    if !eps.is_positive() || eps > Frac::new(1, 1) {
        return Err(Error::InvalidParameter(format!("epsilon {eps} must lie in (0, 1]")));
    }
    if let Some(&bad) = net.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidParameter(format!("net index {bad} out of range for {n} points")));
    }
    if n == 0 {
        return Ok(Verdict { valid: true, witness: None });
    }
    let hitters = PointMask::from_indices(n, net.iter().copied());
    let all: Vec<usize> = (0..n).collect();
    let witness = find_unhit_trace(ps, &all, &hitters, heavy_threshold(eps, n), sides)?;
    Ok(Verdict { valid: witness.is_none(), witness })
}

/// Heavy lower-halfspace traces of the restriction of `P` to `subset`: those
/// with at least `ceil((beta / 2) |S|)` points.
pub fn subnet_oracle(ps: &PointSet, subset: &[usize], beta: Frac) -> Result<Vec<RangeTrace>> {
    if subset.is_empty() {
        return Err(Error::InvalidParameter("subnet oracle needs a nonempty subset".into()));
    }
    let m = beta.mul(Frac::new(1, 2)).ceil_mul(subset.len()).max(1);
    enumerate_traces_on(ps, subset, SideFilter::Lower, m, subset.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Hyperplane;

    fn square() -> PointSet {
        PointSet::new(2, vec![Point::new2(0, 0), Point::new2(10, 1), Point::new2(11, 11), Point::new2(1, 10)]).unwrap()
    }

    #[test]
    fn depth_counts_closed_halfspace() {
        let ps = PointSet::new(
            2,
            vec![Point::new2(0, 0), Point::new2(4, 1), Point::new2(1, 5), Point::new2(5, 6), Point::new2(8, 3)],
        )
        .unwrap();
        let h = Halfspace::lower(Hyperplane::from_integers(&[0, 1], 2).unwrap());
        assert_eq!(depth(&h, &ps).unwrap(), 2);
        let all = Halfspace::lower(Hyperplane::from_integers(&[0, 1], 100).unwrap());
        assert_eq!(depth(&all, &ps).unwrap(), 5);
        let boundary = Halfspace::upper(Hyperplane::from_integers(&[0, 1], 5).unwrap());
        assert_eq!(depth(&boundary, &ps).unwrap(), 2);
    }

    #[test]
    fn full_window_yields_single_trace() {
        let ps = square();
        let t = enumerate_canonical_traces(&ps, SideFilter::Both, 4, 4).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].indices(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn convex_quadrilateral_pairs_are_edges() {
        let t = enumerate_canonical_traces(&square(), SideFilter::Both, 2, 2).unwrap();
        let pairs: Vec<Vec<usize>> = t.iter().map(RangeTrace::indices).collect();
        assert_eq!(pairs, vec![vec![0, 1], vec![0, 3], vec![1, 2], vec![2, 3]]);
    }

    #[test]
    fn trace_members_match_definition() {
        let ps = square();
        for t in enumerate_canonical_traces(&ps, SideFilter::Both, 1, 4).unwrap() {
            let pts: Vec<Point> = t.contacts.iter().map(|&c| ps.get(c)).collect();
            let plane = IntPlane::through(2, &pts).unwrap();
            let mut expect = PointMask::new(4);
            for q in 0..4 {
                let s = plane.eval(&ps.get(q));
                let strict = match t.side {
                    Side::Lower => s < 0,
                    Side::Upper => s > 0,
                };
                if strict {
                    expect.insert(q);
                }
            }
            for c in t.included_contacts() {
                expect.insert(c);
            }
            assert_eq!(expect, t.members);
        }
    }

    #[test]
    fn degenerate_input_is_reported() {
        let ps = PointSet::new(2, vec![Point::new2(0, 0), Point::new2(1, 1), Point::new2(2, 2)]).unwrap();
        assert!(matches!(enumerate_canonical_traces(&ps, SideFilter::Both, 1, 3), Err(Error::Degenerate(_))));
        let ps = PointSet::new(2, vec![Point::new2(0, 0), Point::new2(0, 1)]).unwrap();
        assert!(matches!(verify_net(&ps, &[], Frac::new(1, 2)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn verifier_trivial_cases() {
        let ps = square();
        for eps in [Frac::new(1, 4), Frac::new(1, 2), Frac::new(1, 1)] {
            assert!(verify_net(&ps, &[0, 1, 2, 3], eps).unwrap().valid);
            let v = verify_net(&ps, &[], eps).unwrap();
            assert!(!v.valid);
            assert!(v.witness.unwrap().len() >= heavy_threshold(eps, 4));
        }
        let v = verify_net(&ps, &[], Frac::new(1, 1)).unwrap();
        assert_eq!(v.witness.unwrap().indices(), vec![0, 1, 2, 3]);
        assert!(verify_net(&ps, &[9], Frac::new(1, 2)).is_err());
        assert!(verify_net(&ps, &[0], Frac::new(0, 1)).is_err());
    }

    #[test]
    fn verifier_witness_misses_net() {
        let ps = square();
        // the diagonal {0, 2} meets every edge pair, so it is a 1/2-net
        assert!(verify_net(&ps, &[0, 2], Frac::new(1, 2)).unwrap().valid);
        let v = verify_net(&ps, &[0], Frac::new(1, 2)).unwrap();
        let w = v.witness.expect("edge {2, 3} avoids vertex 0");
        assert!(w.len() >= 2);
        assert!(!w.members.contains(0));
    }

    #[test]
    fn subnet_oracle_on_singletons_and_squares() {
        let ps = square();
        let t = subnet_oracle(&ps, &[2], Frac::new(1, 1)).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].indices(), vec![2]);
        let sub = subnet_oracle(&ps, &[0, 1, 2, 3], Frac::new(1, 1)).unwrap();
        let direct = enumerate_canonical_traces(&ps, SideFilter::Lower, 2, 4).unwrap();
        assert_eq!(sub, direct);
        assert!(subnet_oracle(&ps, &[], Frac::new(1, 2)).is_err());
    }

    #[test]
    fn tiny_sets_realize_every_subset() {
        let ps = PointSet::new(3, vec![Point::new3(0, 0, 0), Point::new3(1, 2, 3)]).unwrap();
        let t = enumerate_canonical_traces(&ps, SideFilter::Both, 1, 2).unwrap();
        assert_eq!(t.len(), 3);
        assert!(verify_net(&ps, &[1], Frac::new(1, 1)).unwrap().valid);
        assert!(!verify_net(&ps, &[1], Frac::new(1, 2)).unwrap().valid);
    }
}
