mod common;

use common::{angular_sweep_traces, cube, random_halfspace, rng};
use epsnet::builder::{baseline_hw_net, build_family, build_net, build_subnet, coverage_witnesses, greedy_hitting_set};
use epsnet::geometry::{Point, PointSet, Side};
use epsnet::oracle::{enumerate_canonical_traces, heavy_threshold, subnet_oracle, verify_net, SideFilter};
use epsnet::{BuildConfig, Frac, Mode, PointMask, SubnetMethod};
use proptest::prelude::*;

fn convex_quad() -> PointSet {
    PointSet::new(2, vec![Point::new2(0, 0), Point::new2(10, 1), Point::new2(11, 11), Point::new2(1, 10)]).unwrap()
}

/// Every halfplane trace with at least `ceil(eps n)` points meets the net.
fn sweep_confirms(ps: &PointSet, net: &[usize], eps: Frac) -> bool {
    let k = heavy_threshold(eps, ps.len());
    angular_sweep_traces(ps)
        .into_iter()
        .filter(|t| t.len() >= k)
        .all(|t| t.iter().any(|i| net.contains(i)))
}

#[test]
fn convex_quadrilateral_family_is_disjoint_and_small() {
    let ps = convex_quad();
    let fam = build_family(&ps, Frac::new(1, 2), Frac::new(1, 22), Side::Lower, SubnetMethod::GreedyHittingSet, 0).unwrap();
    assert!(fam.len() <= 2);
    for (i, a) in fam.members.iter().enumerate() {
        for b in &fam.members[i + 1..] {
            assert!(a.members.is_disjoint(&b.members));
        }
    }
}

#[test]
fn scale_above_one_gives_empty_family() {
    let ps = cube(10, 3, 1);
    let fam = build_family(&ps, Frac::new(3, 2), Frac::new(1, 22), Side::Lower, SubnetMethod::GreedyHittingSet, 0).unwrap();
    assert!(fam.is_empty());
}

#[test]
fn three_points_at_eps_one() {
    let ps = PointSet::new(2, vec![Point::new2(0, 0), Point::new2(7, 1), Point::new2(2, 9)]).unwrap();
    let report = build_net(&ps, &BuildConfig::new(Frac::new(1, 1))).unwrap();
    assert!(!report.net.is_empty());
    assert!(report.verdict.valid);
}

#[test]
fn first_family_respects_four_over_eps() {
    let ps = cube(60, 3, 7);
    let report = build_net(&ps, &BuildConfig::new(Frac::new(1, 5)).with_seed(7)).unwrap();
    for side in [Side::Lower, Side::Upper] {
        let fam = report.families_for(side).next().unwrap();
        assert!(fam.len() <= 20, "{side:?}: {}", fam.len());
    }
}

#[test]
fn doubling_contains_single_scale() {
    let ps = cube(80, 3, 2);
    let eps = Frac::new(3, 20);
    let single = build_net(&ps, &BuildConfig::new(eps).with_seed(2)).unwrap();
    let doubling = build_net(&ps, &BuildConfig::new(eps).with_seed(2).with_mode(Mode::Doubling)).unwrap();
    assert!(single.verdict.valid && doubling.verdict.valid);
    assert!(single.net.len() <= doubling.net.len());
    assert!(single.net.iter().all(|i| doubling.net.contains(i)));
    assert_eq!(doubling.families.len(), 2 * 3);
}

#[test]
fn twenty_points_quarter_eps() {
    let ps = cube(20, 3, 20);
    let report = build_net(&ps, &BuildConfig::new(Frac::new(1, 4)).with_seed(20)).unwrap();
    assert!(verify_net(&ps, &report.net, Frac::new(1, 4)).unwrap().valid);
}

#[test]
fn every_shrunk_heavy_range_is_explained() {
    let ps = cube(40, 3, 9);
    let report = build_net(&ps, &BuildConfig::new(Frac::new(1, 5)).with_seed(9)).unwrap();
    let cov = coverage_witnesses(&ps, &report).unwrap();
    assert_eq!(cov.unexplained, 0);
    assert!(cov.member + cov.overlap > 0);
}

#[test]
fn greedy_subnet_on_four_points() {
    let ps = convex_quad();
    let all: Vec<usize> = (0..4).collect();
    // beta = 1: traces of size >= 2
    let targets = enumerate_canonical_traces(&ps, SideFilter::Lower, 2, 4).unwrap();
    let net = greedy_hitting_set(&all, targets.iter().map(|t| &t.members));
    assert!(net.len() <= 2);
    let hit = PointMask::from_indices(4, net.iter().copied());
    assert!(targets.iter().all(|t| !t.members.is_disjoint(&hit)));
}

#[test]
fn subnets_hit_every_heavy_subtrace() {
    let ps = cube(90, 3, 4);
    let beta = Frac::new(1, 22);
    let traces = enumerate_canonical_traces(&ps, SideFilter::Lower, 30, 30).unwrap();
    let t = &traces[traces.len() / 2];
    for method in [SubnetMethod::GreedyHittingSet, SubnetMethod::SampleAndVerify] {
        let net = build_subnet(&ps, t, beta, method, 3).unwrap();
        assert!(net.iter().all(|&i| t.members.contains(i)));
        let hit = PointMask::from_indices(ps.len(), net.iter().copied());
        for heavy in subnet_oracle(&ps, &t.indices(), beta).unwrap() {
            assert!(!heavy.members.is_disjoint(&hit), "{method:?} misses {:?}", heavy.indices());
        }
    }
}

#[test]
fn planar_baseline_is_valid() {
    let ps = cube(100, 2, 100);
    let eps = Frac::new(1, 10);
    let base = baseline_hw_net(&ps, eps, 5).unwrap();
    assert!(sweep_confirms(&ps, &base.net, eps));
    let report = build_net(&ps, &BuildConfig::new(eps).with_seed(5)).unwrap();
    assert!(sweep_confirms(&ps, &report.net, eps));
}

#[test]
fn full_set_is_always_a_net() {
    let ps = cube(25, 3, 6);
    let all: Vec<usize> = (0..25).collect();
    for q in [1, 5, 10, 25] {
        assert!(verify_net(&ps, &all, Frac::new(q, 25)).unwrap().valid);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn planar_nets_pass_the_sweep_oracle(seed in 0u64..10_000, n in 8usize..30, q in 2i64..6) {
        let ps = cube(n, 2, seed);
        let eps = Frac::new(1, q);
        let report = build_net(&ps, &BuildConfig::new(eps).with_seed(seed)).unwrap();
        prop_assert!(sweep_confirms(&ps, &report.net, eps));
        for fam in &report.families {
            prop_assert!(fam.len() <= 4 * q as usize);
        }
    }

    #[test]
    fn spatial_nets_catch_random_heavy_halfspaces(seed in 0u64..10_000, n in 12usize..36, q in 2i64..6) {
        let ps = cube(n, 3, seed);
        let eps = Frac::new(1, q);
        let method = if seed % 2 == 0 { SubnetMethod::GreedyHittingSet } else { SubnetMethod::SampleAndVerify };
        let report = build_net(&ps, &BuildConfig::new(eps).with_seed(seed).with_subnet_method(method)).unwrap();
        let k = heavy_threshold(eps, n);
        let mut r = rng(seed);
        for _ in 0..300 {
            let h = random_halfspace(&mut r);
            let members: Vec<usize> = (0..n).filter(|&i| h.contains(&ps.get(i)).unwrap()).collect();
            if members.len() >= k {
                prop_assert!(members.iter().any(|i| report.net.contains(i)));
            }
        }
    }
}
