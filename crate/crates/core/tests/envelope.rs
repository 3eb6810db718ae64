mod common;

use common::cube;
use epsnet::builder::build_family;
use epsnet::envelope::{
    diagnose_family, envelope_membership_planes, peel_planes, upper_envelope, upper_envelope_bruteforce,
};
use epsnet::geometry::{GraphForm, Rational, Side};
use epsnet::perturb::{common_rows, dual_general_position};
use epsnet::{Frac, SubnetMethod};
use num_bigint::BigInt;
use proptest::prelude::*;

fn plane(a: i64, b: i64, c: i64) -> GraphForm {
    let r = |v: i64| Rational::from_integer(BigInt::from(v));
    GraphForm { slopes: vec![r(a), r(b)], intercept: r(c) }
}

/// Tangent plane of `z = x^2 + y^2` at `(a, b)`: every such plane supports
/// the paraboloid, so all of them appear on the upper envelope.
fn tangent(a: i64, b: i64) -> GraphForm {
    plane(2 * a, 2 * b, -(a * a + b * b))
}

#[test]
fn two_crossing_planes_are_both_on_top() {
    assert_eq!(envelope_membership_planes(&[plane(0, 0, 0), plane(1, 0, 0)]).unwrap(), vec![true, true]);
}

#[test]
fn four_tangent_planes_have_at_most_twelve_degree() {
    let planes = [tangent(0, 0), tangent(5, 1), tangent(-2, 6), tangent(3, -7)];
    let env = upper_envelope(&common_rows(&planes).unwrap());
    assert!(env.on.iter().all(|&b| b));
    assert!(env.degrees().iter().sum::<usize>() <= 12);
}

#[test]
fn stacked_parallel_planes_peel_one_at_a_time() {
    let planes: Vec<GraphForm> = (1..=5).map(|i| plane(0, 0, -i)).collect();
    let rec = peel_planes(&planes).unwrap();
    assert_eq!(rec.sizes(), vec![1; 5]);
    assert_eq!(rec.layers[0].members, vec![0]);
    assert_eq!(rec.layers[4].members, vec![4]);
}

#[test]
fn family_diagnostics_match_the_counting_argument() {
    let ps = cube(60, 3, 12);
    let eps = Frac::new(1, 5);
    let n = ps.len();
    for side in [Side::Lower, Side::Upper] {
        let fam = build_family(&ps, eps, Frac::new(1, 22), side, SubnetMethod::GreedyHittingSet, 12).unwrap();
        let t = fam.len();
        let diag = diagnose_family(&ps, &fam, 12).unwrap();
        assert!(diag.membership.iter().all(|&b| b));
        assert_eq!(diag.peeling.layers.len(), 1);
        let s = &diag.structure;
        assert!(s.degree_sum() < 6 * t.max(1));
        assert!(2 * s.faces_with_degree_at_most(11).count() >= t);
        let half = eps.mul(Frac::new(1, 2)).ceil_mul(n);
        assert!(s.faces_with_degree_at_most(11).all(|f| f.pocket.len() >= half));
        assert!(s.pockets_disjoint() && s.pockets_match_neighbors());
        assert!(diag.incremental.runs.iter().all(|r| r.pockets_disjoint()));
    }
}

#[test]
fn wider_overlap_budget_still_stays_on_the_envelope() {
    let ps = cube(50, 3, 31);
    for beta in [Frac::new(1, 4), Frac::new(3, 10)] {
        let fam = build_family(&ps, Frac::new(1, 5), beta, Side::Lower, SubnetMethod::GreedyHittingSet, 31).unwrap();
        assert!(fam.len() > 1);
        let diag = diagnose_family(&ps, &fam, 31).unwrap();
        assert!(diag.membership.iter().all(|&b| b), "beta {beta}");
        assert_eq!(diag.peeling.sizes(), vec![fam.len()]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tangent_planes_obey_the_edge_bound(pts in prop::collection::hash_set((-40i64..40, -40i64..40), 3..14)) {
        let planes: Vec<GraphForm> = pts.iter().map(|&(a, b)| tangent(a, b)).collect();
        let rows = common_rows(&planes).unwrap();
        let env = upper_envelope(&rows);
        let brute = upper_envelope_bruteforce(&rows);
        prop_assert_eq!(&env.on, &brute.on);
        prop_assert!(env.on.iter().all(|&b| b));
        let t = planes.len();
        prop_assert!(brute.edges.len() <= 3 * t - 6);
    }

    #[test]
    fn membership_agrees_with_bruteforce(planes in prop::collection::vec((-20i64..20, -20i64..20, -200i64..200), 1..10)) {
        let planes: Vec<GraphForm> = planes.into_iter().map(|(a, b, c)| plane(a, b, c)).collect();
        let rows = common_rows(&planes).unwrap();
        prop_assume!(dual_general_position(&rows));
        prop_assert_eq!(envelope_membership_planes(&planes).unwrap(), upper_envelope_bruteforce(&rows).on);
    }
}
