//! Fixtures shared by the benchmarks.

use epsnet::experiments::{generate_points, Generator};
use epsnet::PointSet;

/// Seeded uniform instance in general position.
pub fn instance(n: usize, dim: usize, seed: u64) -> PointSet {
    generate_points(Generator::CubeUniform, n, dim, seed).expect("uniform instance")
}
