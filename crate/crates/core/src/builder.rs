//! The primal construction: a maximal family of lower halfspaces whose
//! traces hold between `eps n` and `2 eps n` points and pairwise share at most
//! `beta eps n`, a small `(beta/2)`-net inside each member, and the union of
//! those subnets (plus the mirrored run for upper halfspaces).

use crate::error::{Error, Result};
use crate::frac::Frac;
use crate::geometry::{PointSet, Side};
use crate::mask::PointMask;
use crate::oracle::{self, RangeTrace, SideFilter, Verdict};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

pub const DEFAULT_BETA: Frac = Frac(num_rational::Ratio::new_raw(1, 22));

/// Draw cap for randomized subnets and the sampling baseline.
pub const MAX_DRAWS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Only the scale `eps` (halfspaces can be shrunk to exactly `eps n` points).
    SingleScale,
    /// Scales `eps, 2 eps, 4 eps, ...` up to 1.
    Doubling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubnetMethod {
    GreedyHittingSet,
    SampleAndVerify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub eps: Frac,
    pub beta: Frac,
    pub mode: Mode,
    pub subnet_method: SubnetMethod,
    pub seed: u64,
}

impl BuildConfig {
    pub fn new(eps: Frac) -> Self {
        BuildConfig {
            eps,
            beta: DEFAULT_BETA,
            mode: Mode::SingleScale,
            subnet_method: SubnetMethod::GreedyHittingSet,
            seed: 0,
        }
    }

    pub fn with_beta(mut self, beta: Frac) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_subnet_method(mut self, m: SubnetMethod) -> Self {
        self.subnet_method = m;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_eps(self.eps)?;
        if !self.beta.is_positive() || self.beta >= Frac::new(1, 3) {
            return Err(Error::InvalidParameter(format!("beta {} must lie in (0, 1/3)", self.beta)));
        }
        Ok(())
    }

    /// Scales `eps_j = 2^(j-1) eps` visited by the construction.
    pub fn scales(&self) -> Vec<Frac> {
        match self.mode {
            Mode::SingleScale => vec![self.eps],
            Mode::Doubling => {
                let mut out = vec![self.eps];
                let one = Frac::new(1, 1);
                loop {
                    let next = out.last().unwrap().mul(Frac::new(2, 1));
                    if next > one {
                        break;
                    }
                    out.push(next);
                }
                out
            }
        }
    }
}

pub(crate) fn validate_eps(eps: Frac) -> Result<()> {
    if !eps.is_positive() || eps > Frac::new(1, 1) {
        return Err(Error::InvalidParameter(format!("epsilon {eps} must lie in (0, 1]")));
    }
    Ok(())
}

/// The selected family at one scale, for one side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub scale: Frac,
    pub side: Side,
    pub beta: Frac,
    pub members: Vec<RangeTrace>,
    /// Subnet `N_h` of each member, same order as `members`.
    pub subnets: Vec<Vec<usize>>,
}

impl Family {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Size window `[ceil(s n), max(ceil(s n), floor(2 s n))]` clipped to `n`.
    pub fn window(scale: Frac, n: usize) -> (usize, usize) {
        let lo = scale.ceil_mul(n);
        let hi = scale.mul(Frac::new(2, 1)).floor_mul(n).max(lo).min(n);
        (lo, hi)
    }

    fn pair_ok(&self, a: &PointMask, b: &PointMask, n: usize) -> bool {
        self.beta.mul(self.scale).count_le_times(a.intersection_len(b), n)
    }

    /// Checks the size window, the pairwise overlap budget, and maximality
    /// against `candidates` (the full candidate set of this scale and side).
    pub fn check_invariants(&self, candidates: &[RangeTrace], n: usize) -> Result<()> {
        let (lo, hi) = Family::window(self.scale, n);
        for m in &self.members {
            if m.len() < lo || m.len() > hi {
                return Err(Error::VerificationFailed(format!(
                    "member of size {} outside window [{lo}, {hi}]",
                    m.len()
                )));
            }
        }
        for (i, a) in self.members.iter().enumerate() {
            for b in &self.members[i + 1..] {
                if !self.pair_ok(&a.members, &b.members, n) {
                    return Err(Error::VerificationFailed(format!(
                        "members share {} points, above beta * scale * n",
                        a.members.intersection_len(&b.members)
                    )));
                }
            }
        }
        for c in candidates {
            if c.len() < lo || c.len() > hi || self.members.contains(c) {
                continue;
            }
            if self.members.iter().all(|m| self.pair_ok(&m.members, &c.members, n)) {
                return Err(Error::VerificationFailed(format!(
                    "family is not maximal: {:?} could be added",
                    c.indices()
                )));
            }
        }
        for (m, s) in self.members.iter().zip(&self.subnets) {
            if s.is_empty() || s.iter().any(|&i| !m.members.contains(i)) {
                return Err(Error::VerificationFailed("subnet is empty or leaves its member".into()));
            }
        }
        Ok(())
    }
}

/// Candidate scan order: larger traces first, then by index list.
fn scan_order(a: &RangeTrace, b: &RangeTrace) -> std::cmp::Ordering {
    b.len().cmp(&a.len()).then_with(|| a.members.cmp_indices(&b.members))
}

/// Greedy maximal selection under the overlap budget `beta * scale * n`.
fn select_members(candidates: &[RangeTrace], scale: Frac, beta: Frac, n: usize) -> Vec<RangeTrace> {
    let (lo, hi) = Family::window(scale, n);
    let mut pool: Vec<&RangeTrace> = candidates.iter().filter(|c| c.len() >= lo && c.len() <= hi).collect();
    pool.sort_by(|a, b| scan_order(a, b));
    let budget = beta.mul(scale);
    let mut accepted: Vec<RangeTrace> = Vec::new();
    for c in pool {
        if accepted
            .iter()
            .all(|m| budget.count_le_times(m.members.intersection_len(&c.members), n))
        {
            accepted.push(c.clone());
        }
    }
    accepted
}

/// Lower-side candidates of `ps` for all scales in one enumeration.
fn candidates_for(ps: &PointSet, scales: &[Frac]) -> Result<Vec<RangeTrace>> {
    let n = ps.len();
    let lo = scales.iter().map(|&s| Family::window(s, n).0).min().unwrap_or(n + 1);
    let hi = scales.iter().map(|&s| Family::window(s, n).1).max().unwrap_or(0);
    oracle::enumerate_canonical_traces(ps, SideFilter::Lower, lo, hi)
}

/// Builds the family at one scale. For `Side::Upper` the returned traces are
/// those of upper halfspaces of `ps` (computed on the mirrored set).
pub fn build_family(
    ps: &PointSet,
    scale: Frac,
    beta: Frac,
    side: Side,
    method: SubnetMethod,
    seed: u64,
) -> Result<Family> {
    let work = oriented(ps, side);
    let candidates = candidates_for(&work, &[scale])?;
    let family = family_from_candidates(&work, &candidates, scale, beta, side, method, seed)?;
    family.check_invariants(&candidates, ps.len())?;
    Ok(family)
}

fn oriented(ps: &PointSet, side: Side) -> PointSet {
    match side {
        Side::Lower => ps.clone(),
        Side::Upper => ps.reflected(),
    }
}

fn family_from_candidates(
    work: &PointSet,
    candidates: &[RangeTrace],
    scale: Frac,
    beta: Frac,
    side: Side,
    method: SubnetMethod,
    seed: u64,
) -> Result<Family> {
    let mut members = select_members(candidates, scale, beta, work.len());
    for m in &mut members {
        m.side = side;
    }
    let subnets = members
        .par_iter()
        .enumerate()
        .map(|(i, m)| {
            let member_seed = seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            build_subnet(work, m, beta, method, member_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Family { scale, side, beta, members, subnets })
}

/// A `(beta/2)`-net of `trace` for lower halfspaces: a subset of the trace
/// meeting every lower-halfspace trace on it with at least
/// `ceil((beta/2) |T|)` points. The result is certified by the exact oracle.
pub fn build_subnet(ps: &PointSet, trace: &RangeTrace, beta: Frac, method: SubnetMethod, seed: u64) -> Result<Vec<usize>> {
    let subset = trace.indices();
    if subset.is_empty() {
        return Err(Error::InvalidParameter("cannot build a subnet of an empty trace".into()));
    }
    if subset.len() == 1 {
        return Ok(subset);
    }
    let m = beta.mul(Frac::new(1, 2)).ceil_mul(subset.len()).max(1);
    let n = ps.len();
    let certify = |net: &[usize]| -> Result<bool> {
        let hit = PointMask::from_indices(n, net.iter().copied());
        Ok(oracle::find_unhit_trace(ps, &subset, &hit, m, SideFilter::Lower)?.is_none())
    };
    match method {
        SubnetMethod::GreedyHittingSet => {
            // Lower halfspaces shrink, so hitting the traces of size exactly m
            // hits every heavier one as well.
            let targets = oracle::enumerate_traces_on(ps, &subset, SideFilter::Lower, m, m)?;
            let net = greedy_hitting_set(&subset, targets.iter().map(|t| &t.members));
            if !certify(&net)? {
                return Err(Error::VerificationFailed("greedy subnet misses a heavy subtrace".into()));
            }
            Ok(net)
        }
        SubnetMethod::SampleAndVerify => {
            let size = sample_size(8.0 / beta.to_f64(), 8.0 / beta.to_f64()).min(subset.len());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..MAX_DRAWS {
                let mut net: Vec<usize> =
                    index::sample(&mut rng, subset.len(), size).into_iter().map(|i| subset[i]).collect();
                net.sort_unstable();
                if certify(&net)? {
                    return Ok(net);
                }
            }
            Err(Error::RetryCapExceeded { cap: MAX_DRAWS, what: "random subnet draws".into() })
        }
    }
}

/// `ceil(factor * ln(arg))`, at least 1.
fn sample_size(factor: f64, arg: f64) -> usize {
    ((factor * arg.ln()).ceil() as usize).max(1)
}

/// Repeatedly takes the element hitting the most remaining sets (smallest
/// index on ties).
pub fn greedy_hitting_set<'a>(universe: &[usize], sets: impl IntoIterator<Item = &'a PointMask>) -> Vec<usize> {
    let mut remaining: Vec<&PointMask> = sets.into_iter().filter(|s| !s.is_empty()).collect();
    let mut chosen = Vec::new();
    while !remaining.is_empty() {
        let best = universe
            .iter()
            .copied()
            .map(|u| (remaining.iter().filter(|s| s.contains(u)).count(), u))
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
            .expect("nonempty universe");
        if best.0 == 0 {
            break;
        }
        chosen.push(best.1);
        remaining.retain(|s| !s.contains(best.1));
    }
    chosen.sort_unstable();
    chosen
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NetStats {
    /// `(scale, side, |F|)` per family.
    pub family_sizes: Vec<(Frac, Side, usize)>,
    /// `4 / eps`, the bound on the size of the first-scale family.
    pub family_bound: f64,
    pub subnet_sizes: Vec<usize>,
    pub net_size: usize,
    #[serde(skip)]
    pub millis: u128,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetReport {
    pub config: BuildConfig,
    pub n: usize,
    pub net: Vec<usize>,
    pub families: Vec<Family>,
    pub verdict: Verdict,
    pub stats: NetStats,
}

impl NetReport {
    /// Largest first-scale family over both sides.
    pub fn first_family_size(&self) -> usize {
        self.families
            .iter()
            .filter(|f| f.scale == self.config.eps)
            .map(Family::len)
            .max()
            .unwrap_or(0)
    }

    pub fn families_for(&self, side: Side) -> impl Iterator<Item = &Family> {
        self.families.iter().filter(move |f| f.side == side)
    }
}

/// Runs the construction on both sides and certifies the union with the
/// exact verifier. A failed verification is returned as an error.
pub fn build_net(ps: &PointSet, config: &BuildConfig) -> Result<NetReport> {
    config.validate()?;
    let start = Instant::now();
    let n = ps.len();
    let scales = config.scales();
    let mut families = Vec::new();
    for side in [Side::Lower, Side::Upper] {
        let work = oriented(ps, side);
        let candidates = if n == 0 { Vec::new() } else { candidates_for(&work, &scales)? };
        for (j, &scale) in scales.iter().enumerate() {
            let seed = config.seed ^ ((j as u64) << 32) ^ (side as u64) << 48;
            let fam = family_from_candidates(&work, &candidates, scale, config.beta, side, config.subnet_method, seed)?;
            fam.check_invariants(&candidates, n)?;
            families.push(fam);
        }
    }
    let mut net: Vec<usize> = families.iter().flat_map(|f| f.subnets.iter().flatten().copied()).collect();
    net.sort_unstable();
    net.dedup();
    let verdict = oracle::verify_net(ps, &net, config.eps)?;
    if !verdict.valid {
        return Err(Error::VerificationFailed(format!(
            "constructed net of size {} misses heavy range {:?}",
            net.len(),
            verdict.witness.as_ref().map(RangeTrace::indices)
        )));
    }
    let stats = NetStats {
        family_sizes: families.iter().map(|f| (f.scale, f.side, f.len())).collect(),
        family_bound: 4.0 / config.eps.to_f64(),
        subnet_sizes: families.iter().flat_map(|f| f.subnets.iter().map(Vec::len)).collect(),
        net_size: net.len(),
        millis: start.elapsed().as_millis(),
    };
    Ok(NetReport { config: *config, n, net, families, verdict, stats })
}

/// How a shrunk heavy range is caught by the construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageStats {
    /// The range's trace is itself a family member.
    pub member: usize,
    /// The range overlaps a member `g` in more than `beta eps n` points and
    /// contains a point of `N_g`.
    pub overlap: usize,
    /// Neither case applies (should never happen).
    pub unexplained: usize,
}

/// For every lower/upper trace of size exactly `ceil(eps n)`, records which
/// case of the correctness argument applies to it, using the first-scale
/// families of `report`.
pub fn coverage_witnesses(ps: &PointSet, report: &NetReport) -> Result<CoverageStats> {
    let n = ps.len();
    let eps = report.config.eps;
    let k = oracle::heavy_threshold(eps, n);
    let mut stats = CoverageStats::default();
    for side in [Side::Lower, Side::Upper] {
        let Some(fam) = report.families.iter().find(|f| f.side == side && f.scale == eps) else {
            continue;
        };
        let work = oriented(ps, side);
        let budget = fam.beta.mul(fam.scale);
        let subnet_masks: Vec<PointMask> =
            fam.subnets.iter().map(|s| PointMask::from_indices(n, s.iter().copied())).collect();
        for t in oracle::enumerate_canonical_traces(&work, SideFilter::Lower, k, k)? {
            if fam.members.contains(&t) {
                stats.member += 1;
                continue;
            }
            let caught = fam.members.iter().zip(&subnet_masks).any(|(g, sub)| {
                !budget.count_le_times(g.members.intersection_len(&t.members), n) && !sub.is_disjoint(&t.members)
            });
            if caught {
                stats.overlap += 1;
            } else {
                stats.unexplained += 1;
            }
        }
    }
    Ok(stats)
}

/// A random-sample net and the number of draws it took.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineNet {
    pub net: Vec<usize>,
    pub draws: usize,
}

/// Random samples of size `ceil((8d / eps) ln(8 / eps))` (capped at `n`)
/// drawn until one verifies.
pub fn baseline_hw_net(ps: &PointSet, eps: Frac, seed: u64) -> Result<BaselineNet> {
    validate_eps(eps)?;
    let n = ps.len();
    let d = ps.dim() as f64;
    let size = sample_size(8.0 * d / eps.to_f64(), 8.0 / eps.to_f64()).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for draw in 1..=MAX_DRAWS {
        let mut net = index::sample(&mut rng, n, size).into_vec();
        net.sort_unstable();
        if oracle::verify_net(ps, &net, eps)?.valid {
            return Ok(BaselineNet { net, draws: draw });
        }
    }
    Err(Error::RetryCapExceeded { cap: MAX_DRAWS, what: "baseline sample draws".into() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    fn square() -> PointSet {
        PointSet::new(2, vec![Point::new2(0, 0), Point::new2(10, 1), Point::new2(11, 11), Point::new2(1, 10)]).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(BuildConfig::new(Frac::new(1, 10)).validate().is_ok());
        assert!(BuildConfig::new(Frac::new(0, 1)).validate().is_err());
        assert!(BuildConfig::new(Frac::new(3, 2)).validate().is_err());
        assert!(BuildConfig::new(Frac::new(1, 2)).with_beta(Frac::new(1, 3)).validate().is_err());
    }

    #[test]
    fn doubling_scales_stop_at_one() {
        let c = BuildConfig::new(Frac::new(3, 20)).with_mode(Mode::Doubling);
        assert_eq!(c.scales(), vec![Frac::new(3, 20), Frac::new(3, 10), Frac::new(3, 5)]);
        let c = BuildConfig::new(Frac::new(1, 4)).with_mode(Mode::Doubling);
        assert_eq!(c.scales(), vec![Frac::new(1, 4), Frac::new(1, 2), Frac::new(1, 1)]);
    }

    #[test]
    fn square_family_at_half_is_disjoint() {
        // window [2, 4]; budget 1/44 * 4 < 1, so members are pairwise disjoint
        let fam = build_family(&square(), Frac::new(1, 2), DEFAULT_BETA, Side::Lower, SubnetMethod::GreedyHittingSet, 0)
            .unwrap();
        assert!(fam.len() <= 2);
        for (i, a) in fam.members.iter().enumerate() {
            for b in &fam.members[i + 1..] {
                assert!(a.members.is_disjoint(&b.members));
            }
        }
    }

    #[test]
    fn family_above_one_is_empty() {
        let fam = build_family(&square(), Frac::new(2, 1), DEFAULT_BETA, Side::Lower, SubnetMethod::GreedyHittingSet, 0)
            .unwrap();
        assert!(fam.is_empty());
    }

    #[test]
    fn singleton_subnet_is_itself() {
        let ps = square();
        let t = &oracle::enumerate_canonical_traces(&ps, SideFilter::Lower, 1, 1).unwrap()[0];
        assert_eq!(build_subnet(&ps, t, DEFAULT_BETA, SubnetMethod::GreedyHittingSet, 0).unwrap(), t.indices());
    }

    #[test]
    fn greedy_hitting_set_prefers_frequent_elements() {
        let sets = [
            PointMask::from_indices(5, [0, 1]),
            PointMask::from_indices(5, [1, 2]),
            PointMask::from_indices(5, [3, 4]),
        ];
        assert_eq!(greedy_hitting_set(&[0, 1, 2, 3, 4], sets.iter()), vec![1, 3]);
    }

    #[test]
    fn triangle_at_full_epsilon() {
        let ps = PointSet::new(2, vec![Point::new2(0, 0), Point::new2(5, 1), Point::new2(2, 7)]).unwrap();
        let r = build_net(&ps, &BuildConfig::new(Frac::new(1, 1))).unwrap();
        assert!(r.verdict.valid);
        assert!(!r.net.is_empty());
    }
}
