//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use epsnet::experiments::{generate_points, Generator};
use epsnet::geometry::{Halfspace, Hyperplane, PointSet, Side};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

pub fn cube(n: usize, dim: usize, seed: u64) -> PointSet {
    generate_points(Generator::CubeUniform, n, dim, seed).unwrap()
}

/// Small-coordinate instance for the LP oracle.
pub fn small_cube(n: usize, dim: usize, seed: u64) -> PointSet {
    let inst = epsnet::experiments::generate_in_box(Generator::CubeUniform, n, dim, seed, 1000).unwrap();
    inst.to_point_set().unwrap()
}

/// Every halfplane trace of a planar set (sizes 1..=n), found by sorting the
/// points along the directions just before and after each critical direction
/// (perpendicular to a pair) and taking prefixes.
pub fn angular_sweep_traces(ps: &PointSet) -> HashSet<Vec<usize>> {
    assert_eq!(ps.dim(), 2);
    let pts: Vec<[i128; 2]> = ps.points().iter().map(|p| [p.coords()[0] as i128, p.coords()[1] as i128]).collect();
    let n = pts.len();
    let mut out = HashSet::new();
    let mut record = |order: &[usize]| {
        for len in 1..=n {
            let mut prefix = order[..len].to_vec();
            prefix.sort_unstable();
            out.insert(prefix);
        }
    };
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = [pts[j][0] - pts[i][0], pts[j][1] - pts[i][1]];
            let w = [-d[1], d[0]];
            for sigma in [-1i128, 1] {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by_key(|&k| {
                    let p = pts[k];
                    (w[0] * p[0] + w[1] * p[1], sigma * (d[0] * p[0] + d[1] * p[1]))
                });
                record(&order);
            }
        }
    }
    out
}

/// A linear constraint `coeffs . v + constant >= 0` (or `> 0` when strict).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Constraint {
    coeffs: Vec<BigInt>,
    constant: BigInt,
    strict: bool,
}

impl Constraint {
    fn normalized(mut self) -> Constraint {
        let g = self
            .coeffs
            .iter()
            .chain(std::iter::once(&self.constant))
            .fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if !g.is_zero() && g != BigInt::from(1) {
            self.coeffs.iter_mut().for_each(|c| *c = &*c / &g);
            self.constant = &self.constant / &g;
        }
        self
    }
}

/// Fourier-Motzkin feasibility of a strict/non-strict system over the reals.
fn feasible(mut cons: Vec<Constraint>, vars: usize) -> bool {
    for v in 0..vars {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for c in cons {
            if c.coeffs[v].is_positive() {
                pos.push(c);
            } else if c.coeffs[v].is_negative() {
                neg.push(c);
            } else {
                rest.push(c);
            }
        }
        let mut seen: HashSet<Constraint> = rest.iter().cloned().collect();
        for p in &pos {
            for q in &neg {
                let a = -q.coeffs[v].clone();
                let b = p.coeffs[v].clone();
                let c = Constraint {
                    coeffs: p.coeffs.iter().zip(&q.coeffs).map(|(x, y)| x * &a + y * &b).collect(),
                    constant: &p.constant * &a + &q.constant * &b,
                    strict: p.strict || q.strict,
                }
                .normalized();
                if seen.insert(c.clone()) {
                    rest.push(c);
                }
            }
        }
        cons = rest;
    }
    cons.iter().all(|c| if c.strict { c.constant.is_positive() } else { !c.constant.is_negative() })
}

/// Whether `members` (a subset of `universe`) is cut out of `universe` by a
/// closed halfspace on the given side, decided by exact linear programming.
pub fn lp_realizable(ps: &PointSet, universe: &[usize], members: &[usize], side: Side) -> bool {
    let d = ps.dim();
    let sign = BigInt::from(if side == Side::Lower { 1 } else { -1 });
    // unknowns: slopes s_1..s_{d-1}, intercept c; plane x_d = s . x + c
    let cons: Vec<Constraint> = universe
        .iter()
        .map(|&i| {
            let p = ps.get(i).coords().to_vec();
            // g(p) = s . x + c - p_d ; lower: inside iff g >= 0, outside iff g < 0
            let mut coeffs: Vec<BigInt> = p[..d - 1].iter().map(|&x| BigInt::from(x)).collect();
            coeffs.push(BigInt::from(1));
            let mut constant = BigInt::from(-p[d - 1]);
            coeffs.iter_mut().for_each(|c| *c = &*c * &sign);
            constant *= &sign;
            if members.contains(&i) {
                Constraint { coeffs, constant, strict: false }
            } else {
                Constraint { coeffs: coeffs.into_iter().map(|c| -c).collect(), constant: -constant, strict: true }
            }
            .normalized()
        })
        .collect();
    // eliminate the intercept first: it appears in every constraint
    let mut reordered = cons;
    for c in &mut reordered {
        c.coeffs.rotate_right(1);
    }
    feasible(reordered, d)
}

/// All nonempty subsets of `universe` realizable on `side`, by brute force.
pub fn lp_traces(ps: &PointSet, universe: &[usize], side: Side) -> HashSet<Vec<usize>> {
    let m = universe.len();
    (1u32..(1 << m))
        .filter_map(|bits| {
            let members: Vec<usize> = (0..m).filter(|b| bits & (1 << b) != 0).map(|b| universe[b]).collect();
            lp_realizable(ps, universe, &members, side).then_some(members)
        })
        .collect()
}

/// A random non-vertical closed halfspace meeting the bounding box of
/// `[0, 10^6]^3`.
pub fn random_halfspace<R: Rng>(rng: &mut R) -> Halfspace {
    let a = rng.gen_range(-1000..=1000);
    let b = rng.gen_range(-1000..=1000);
    let c = rng.gen_range(1..=1000) * if rng.gen_bool(0.5) { 1 } else { -1 };
    let center = a * 500_000 + b * 500_000 + c * 500_000;
    let spread = (a.abs() + b.abs() + c.abs()) * 500_000;
    let offset = center + rng.gen_range(-spread..=spread);
    let plane = Hyperplane::from_integers(&[a, b, c], offset).unwrap();
    let side = if rng.gen_bool(0.5) { Side::Lower } else { Side::Upper };
    Halfspace::new(plane, side)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
