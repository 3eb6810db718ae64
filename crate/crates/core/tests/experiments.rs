use epsnet::experiments::{elekes_demo, generate, scaling_sweep, Generator, SweepConfig};
use epsnet::geometry::validate_general_position;
use epsnet::io::{read_sweep_csv, write_sweep_csv};
use epsnet::{Error, Frac};

/// Grid points of `[1:k] x [1:2k^2]` on `y = a x + b`, by scanning the grid.
fn on_line(k: i64, a: i64, b: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for x in 1..=k {
        for y in 1..=2 * k * k {
            if y == a * x + b {
                out.push((x, y));
            }
        }
    }
    out
}

#[test]
fn elekes_two() {
    let r = elekes_demo(2).unwrap();
    assert_eq!(r.n, 16);
    assert_eq!(r.eps, Frac::new(1, 8));
    assert_eq!(r.lines.len(), 8);
    assert!(r.counts.iter().all(|&c| c == 2));
    for &(a, b) in &r.lines {
        assert_eq!(on_line(2, a, b).len(), 2);
    }
}

#[test]
fn elekes_three() {
    let r = elekes_demo(3).unwrap();
    assert_eq!(r.family_size, 27);
    let pts: Vec<Vec<(i64, i64)>> = r.lines.iter().map(|&(a, b)| on_line(3, a, b)).collect();
    assert!(pts.iter().all(|p| p.len() == 3));
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            assert!(pts[i].iter().filter(|p| pts[j].contains(p)).count() <= 1);
        }
    }
    assert_eq!(r.max_pairwise, 1);
}

#[test]
fn elekes_ratio_is_constant() {
    for k in 2..=5 {
        let r = elekes_demo(k).unwrap();
        assert!((r.ratio - 2f64.powf(1.5)).abs() < 1e-9);
    }
    assert!(matches!(elekes_demo(1), Err(Error::InvalidParameter(_))));
}

#[test]
fn generator_contract() {
    let inst = generate(Generator::CubeUniform, 4, 3, 1).unwrap();
    assert_eq!(inst.points.len(), 4);
    assert!(validate_general_position(&inst.to_point_set().unwrap()).is_ok());
    assert!(inst.points.iter().flatten().all(|&c| (0..=1_000_000).contains(&c)));
    assert!(generate(Generator::CubeUniform, 3, 3, 1).is_err());
    for kind in Generator::ALL {
        assert_eq!(generate(kind, 20, 3, 9).unwrap(), generate(kind, 20, 3, 9).unwrap());
    }
}

#[test]
fn sweep_rows_hold_the_family_bound() {
    let cfg = SweepConfig {
        generator: Generator::CubeUniform,
        n: 40,
        dim: 3,
        eps: vec![Frac::new(1, 1), Frac::new(1, 4), Frac::new(1, 10)],
        beta: Frac::new(1, 22),
        seeds: vec![1, 2],
        baseline: true,
    };
    let rows = scaling_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(r.valid);
        assert!(r.net_size >= 1);
        assert!(r.baseline_size >= 1);
        assert!(r.family_size as f64 * r.epsilon.to_f64() <= 4.0);
    }
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).unwrap();
    assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), rows);
}
