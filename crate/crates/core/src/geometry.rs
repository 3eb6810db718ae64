//! Exact predicates, halfspaces, point/plane duality and general position.
//!
//! Points carry integer coordinates bounded by [`COORD_LIMIT`]; with that bound
//! every determinant, plane and dual vertex used by the library fits in
//! `i128`. Arbitrary rational planes (user supplied halfspaces, perturbed
//! family planes) go through [`Rational`].

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

pub type Rational = BigRational;

/// Largest accepted absolute coordinate value (2^24).
pub const COORD_LIMIT: i64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    #[inline]
    pub fn of_i128(v: i128) -> Sign {
        match v.cmp(&0) {
            Ordering::Less => Sign::Negative,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Positive,
        }
    }

    pub fn of_big(v: &BigInt) -> Sign {
        if v.is_zero() {
            Sign::Zero
        } else if v.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn of_rational(v: &Rational) -> Sign {
        if v.is_zero() {
            Sign::Zero
        } else if v.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Negative => Sign::Positive,
            Sign::Zero => Sign::Zero,
            Sign::Positive => Sign::Negative,
        }
    }
}

/// A point with exact integer coordinates in dimension 2 or 3.
///
/// The last coordinate is the vertical one: "lower" and "upper" always refer
/// to it.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Point {
    dim: u8,
    c: [i64; 3],
}

impl Point {
    pub fn new2(x: i64, y: i64) -> Self {
        Point { dim: 2, c: [x, y, 0] }
    }

    pub fn new3(x: i64, y: i64, z: i64) -> Self {
        Point { dim: 3, c: [x, y, z] }
    }

    pub fn from_slice(coords: &[i64]) -> Result<Self> {
        match *coords {
            [x, y] => Ok(Point::new2(x, y)),
            [x, y, z] => Ok(Point::new3(x, y, z)),
            _ => Err(Error::UnsupportedDimension(coords.len())),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i64] {
        &self.c[..self.dim as usize]
    }

    /// Vertical coordinate.
    #[inline]
    pub fn height(&self) -> i64 {
        self.c[self.dim as usize - 1]
    }

    /// Mirror image through the horizontal hyperplane `x_d = 0`.
    pub fn reflected(&self) -> Self {
        let mut p = *self;
        p.c[self.dim as usize - 1] = -p.c[self.dim as usize - 1];
        p
    }

    #[inline]
    pub(crate) fn wide(&self) -> [i128; 3] {
        [self.c[0] as i128, self.c[1] as i128, self.c[2] as i128]
    }
}

impl std::fmt::Debug for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

/// The ground set: points of uniform dimension with bounded coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Point>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
            }
            for &v in p.coords() {
                if v.abs() > COORD_LIMIT {
                    return Err(Error::CoordinateOutOfRange { value: v, limit: COORD_LIMIT });
                }
            }
        }
        Ok(PointSet { dim, points })
    }

    pub fn from_rows(dim: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let pts = rows
            .iter()
            .map(|r| {
                if r.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
                }
                Point::from_slice(r)
            })
            .collect::<Result<Vec<_>>>()?;
        PointSet::new(dim, pts)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    #[inline]
    pub fn get(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.points.iter().map(|p| p.coords().to_vec()).collect()
    }

    /// Point set mirrored through `x_d = 0`; lower halfspaces of the mirror are
    /// upper halfspaces of the original, index for index.
    pub fn reflected(&self) -> PointSet {
        PointSet {
            dim: self.dim,
            points: self.points.iter().map(Point::reflected).collect(),
        }
    }
}

fn check_dims(points: &[Point], dim: usize) -> Result<()> {
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn det2(a: i128, b: i128, c: i128, d: i128) -> i128 {
    a * d - b * c
}

#[inline]
pub(crate) fn det3(m: [[i128; 3]; 3]) -> i128 {
    m[0][0] * det2(m[1][1], m[1][2], m[2][1], m[2][2])
        - m[0][1] * det2(m[1][0], m[1][2], m[2][0], m[2][2])
        + m[0][2] * det2(m[1][0], m[1][1], m[2][0], m[2][1])
}

#[inline]
fn sub(a: [i128; 3], b: [i128; 3]) -> [i128; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn cross(u: [i128; 3], v: [i128; 3]) -> [i128; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

#[inline]
pub(crate) fn dot(u: [i128; 3], v: [i128; 3]) -> i128 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// Sign of the affine orientation determinant of `d + 1` points.
///
/// Rows are `p_i - p_0` for `i = 1..=d`; the standard simplex is positive.
pub fn orientation(points: &[Point]) -> Result<Sign> {
    let dim = points.first().map(Point::dim).unwrap_or(0);
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    if points.len() != dim + 1 {
        return Err(Error::DimensionMismatch { expected: dim + 1, got: points.len() });
    }
    check_dims(points, dim)?;
    let o = points[0].wide();
    let d = match dim {
        2 => {
            let a = sub(points[1].wide(), o);
            let b = sub(points[2].wide(), o);
            det2(a[0], a[1], b[0], b[1])
        }
        _ => det3([
            sub(points[1].wide(), o),
            sub(points[2].wide(), o),
            sub(points[3].wide(), o),
        ]),
    };
    Ok(Sign::of_i128(d))
}

/// An integer hyperplane `normal . x = offset` through `d` points of a set.
///
/// Non-vertical planes are normalized so that the vertical component of the
/// normal is positive; then `eval < 0` means strictly below.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct IntPlane {
    pub normal: [i128; 3],
    pub offset: i128,
}

impl IntPlane {
    /// Plane through the given points (2 in the plane, 3 in space). Returns
    /// `None` when the points are affinely dependent.
    pub fn through(dim: usize, pts: &[Point]) -> Option<IntPlane> {
        let normal = match dim {
            2 => {
                let a = pts[0].wide();
                let b = pts[1].wide();
                [-(b[1] - a[1]), b[0] - a[0], 0]
            }
            _ => cross(sub(pts[1].wide(), pts[0].wide()), sub(pts[2].wide(), pts[0].wide())),
        };
        if normal == [0, 0, 0] {
            return None;
        }
        let vert = normal[dim - 1];
        let normal = if vert < 0 { [-normal[0], -normal[1], -normal[2]] } else { normal };
        let offset = dot(normal, pts[0].wide());
        Some(IntPlane { normal, offset })
    }

    #[inline]
    pub fn is_vertical(&self, dim: usize) -> bool {
        self.normal[dim - 1] == 0
    }

    #[inline]
    pub fn eval(&self, p: &Point) -> i128 {
        dot(self.normal, p.wide()) - self.offset
    }
}

/// `x_d = slopes . (x_1..x_{d-1}) + intercept`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GraphForm {
    pub slopes: Vec<Rational>,
    pub intercept: Rational,
}

impl GraphForm {
    pub fn dim(&self) -> usize {
        self.slopes.len() + 1
    }

    /// Value of the graph at the horizontal coordinates of `x` (its first
    /// `d - 1` entries).
    pub fn height_at(&self, x: &[Rational]) -> Rational {
        let mut v = self.intercept.clone();
        for (s, xi) in self.slopes.iter().zip(x) {
            v += s * xi;
        }
        v
    }
}

/// Hyperplane `a_1 x_1 + ... + a_d x_d = c` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hyperplane {
    coeffs: Vec<Rational>,
    offset: Rational,
}

impl Hyperplane {
    pub fn new(coeffs: Vec<Rational>, offset: Rational) -> Result<Self> {
        if coeffs.len() != 2 && coeffs.len() != 3 {
            return Err(Error::UnsupportedDimension(coeffs.len()));
        }
        if coeffs.iter().all(Zero::is_zero) {
            return Err(Error::InvalidParameter("hyperplane normal is zero".into()));
        }
        Ok(Hyperplane { coeffs, offset })
    }

    pub fn from_integers(coeffs: &[i64], offset: i64) -> Result<Self> {
        Hyperplane::new(
            coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect(),
            Rational::from_integer(offset.into()),
        )
    }

    pub fn from_graph(g: &GraphForm) -> Hyperplane {
        // x_d - sum s_i x_i = intercept
        let mut coeffs: Vec<Rational> = g.slopes.iter().map(|s| -s.clone()).collect();
        coeffs.push(Rational::from_integer(1.into()));
        Hyperplane { coeffs, offset: g.intercept.clone() }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn is_vertical(&self) -> bool {
        self.coeffs.last().map_or(true, Zero::is_zero)
    }

    pub fn graph_form(&self) -> Option<GraphForm> {
        let d = self.coeffs.len();
        let ad = &self.coeffs[d - 1];
        if ad.is_zero() {
            return None;
        }
        let slopes = self.coeffs[..d - 1].iter().map(|a| -a / ad).collect();
        Some(GraphForm { slopes, intercept: &self.offset / ad })
    }

    /// `a . p - c`, oriented so that a positive vertical coefficient is used
    /// for non-vertical planes.
    fn oriented_value(&self, p: &Point) -> Rational {
        let mut v = -self.offset.clone();
        for (a, &x) in self.coeffs.iter().zip(p.coords()) {
            v += a * Rational::from_integer(x.into());
        }
        if self.coeffs[self.coeffs.len() - 1].is_negative() {
            -v
        } else {
            v
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Lower => Side::Upper,
            Side::Upper => Side::Lower,
        }
    }
}

/// A closed halfspace: the side of `plane` below (or above) it in the
/// vertical direction. For vertical planes, `Lower` is `a . x <= c` with the
/// coefficients as given.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Halfspace {
    pub plane: Hyperplane,
    pub side: Side,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Location {
    InsideStrict,
    OnBoundary,
    Outside,
}

impl Halfspace {
    pub fn new(plane: Hyperplane, side: Side) -> Self {
        Halfspace { plane, side }
    }

    pub fn lower(plane: Hyperplane) -> Self {
        Halfspace { plane, side: Side::Lower }
    }

    pub fn upper(plane: Hyperplane) -> Self {
        Halfspace { plane, side: Side::Upper }
    }

    pub fn dim(&self) -> usize {
        self.plane.dim()
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        Ok(side_of(self, p)? != Location::Outside)
    }
}

/// Exact classification of `p` against the closed halfspace `h`.
pub fn side_of(h: &Halfspace, p: &Point) -> Result<Location> {
    if h.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: p.dim() });
    }
    let v = Sign::of_rational(&h.plane.oriented_value(p));
    let v = match h.side {
        Side::Lower => v,
        Side::Upper => v.flip(),
    };
    Ok(match v {
        Sign::Negative => Location::InsideStrict,
        Sign::Zero => Location::OnBoundary,
        Sign::Positive => Location::Outside,
    })
}

/// Dual image of a primal point: the graph `x_d = -p_1 x_1 - ... + p_d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DualPlane {
    pub graph: GraphForm,
}

/// Dual image of a non-vertical halfspace: the coefficients of its bounding
/// plane's graph form, `(s_1, .., s_{d-1}, intercept)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DualPoint {
    pub coords: Vec<Rational>,
}

/// Point `p` lies in the lower halfspace `h` iff `h*` lies on or above `p*`,
/// and in the upper halfspace iff `h*` lies on or below `p*`.
pub fn dualize_point(p: &Point) -> DualPlane {
    let c = p.coords();
    let d = c.len();
    DualPlane {
        graph: GraphForm {
            slopes: c[..d - 1].iter().map(|&x| Rational::from_integer((-x).into())).collect(),
            intercept: Rational::from_integer(c[d - 1].into()),
        },
    }
}

pub fn dualize_halfspace(h: &Halfspace) -> Result<DualPoint> {
    let g = h.plane.graph_form().ok_or(Error::VerticalPlane)?;
    Ok(DualPoint::from_graph(&g))
}

impl DualPoint {
    pub fn from_graph(g: &GraphForm) -> DualPoint {
        let mut coords = g.slopes.clone();
        coords.push(g.intercept.clone());
        DualPoint { coords }
    }

    /// Inverse of [`DualPoint::from_graph`].
    pub fn to_graph(&self) -> GraphForm {
        let d = self.coords.len();
        GraphForm { slopes: self.coords[..d - 1].to_vec(), intercept: self.coords[d - 1].clone() }
    }

    /// Position relative to a dual plane: positive means strictly above.
    pub fn side_of_plane(&self, plane: &DualPlane) -> Sign {
        let d = self.coords.len();
        Sign::of_rational(&(&self.coords[d - 1] - plane.graph.height_at(&self.coords[..d - 1])))
    }
}

impl DualPlane {
    /// Inverse of [`dualize_point`]: recovers the primal coordinates.
    pub fn primal_coords(&self) -> Vec<Rational> {
        let mut c: Vec<Rational> = self.graph.slopes.iter().map(|s| -s.clone()).collect();
        c.push(self.graph.intercept.clone());
        c
    }
}

/// A witness that a point set is not in general position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "points", rename_all = "snake_case")]
pub enum Violation {
    /// Two points share their horizontal coordinates (one above the other).
    SharedVertical([usize; 2]),
    Collinear([usize; 3]),
    /// Three non-collinear 3D points spanning a vertical plane.
    VerticalPlane([usize; 3]),
    Coplanar([usize; 4]),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralPositionReport {
    pub violations: Vec<Violation>,
}

impl GeneralPositionReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::Degenerate(format!(
                "{} general position violation(s), first: {:?}",
                self.violations.len(),
                v
            ))),
        }
    }
}

/// Checks the general position contract.
///
/// In the plane: no three collinear points and no two with equal `x`. In
/// space: no two points on a vertical line, no three collinear, no three on a
/// vertical plane, no four coplanar. The vertical-plane condition makes every
/// plane through three input points non-vertical, and every three dual planes
/// meet in a single point.
pub fn validate_general_position(ps: &PointSet) -> GeneralPositionReport {
    let pts = ps.points();
    let n = pts.len();
    let mut violations = Vec::new();
    let dim = ps.dim();
    for i in 0..n {
        for j in i + 1..n {
            if pts[i].coords()[..dim - 1] == pts[j].coords()[..dim - 1] {
                violations.push(Violation::SharedVertical([i, j]));
            }
        }
    }
    let triples: Vec<Violation> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = Vec::new();
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (pts[i].wide(), pts[j].wide(), pts[k].wide());
                    let u = sub(b, a);
                    let v = sub(c, a);
                    if dim == 2 {
                        if det2(u[0], u[1], v[0], v[1]) == 0 {
                            out.push(Violation::Collinear([i, j, k]));
                        }
                        continue;
                    }
                    if cross(u, v) == [0, 0, 0] {
                        out.push(Violation::Collinear([i, j, k]));
                    } else if det2(u[0], u[1], v[0], v[1]) == 0 {
                        out.push(Violation::VerticalPlane([i, j, k]));
                    }
                }
            }
            out
        })
        .collect();
    violations.extend(triples);
    if dim == 3 {
        let quads: Vec<Violation> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut out = Vec::new();
                for j in i + 1..n {
                    for k in j + 1..n {
                        let Some(plane) = IntPlane::through(3, &[pts[i], pts[j], pts[k]]) else {
                            continue;
                        };
                        for (l, p) in pts.iter().enumerate().skip(k + 1) {
                            if plane.eval(p) == 0 {
                                out.push(Violation::Coplanar([i, j, k, l]));
                            }
                        }
                    }
                }
                out
            })
            .collect();
        violations.extend(quads);
    }
    GeneralPositionReport { violations }
}
