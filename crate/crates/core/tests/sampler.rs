mod common;

use common::*;
use mmdf::generator::{population_adjacency, sample_network, GeneratorSpec};
use mmdf::*;

const REPLICATES: u64 = 200;

fn p2() -> Matrix {
    let v = [[1.0, 0.2, 0.3], [0.2, 0.9, 0.3], [0.3, 0.3, 0.9]];
    Matrix::from_fn(3, 3, |i, j| v[i][j])
}

fn p1() -> Matrix {
    let v = [[1.0, -0.2, -0.3], [-0.2, 0.9, 0.3], [-0.3, 0.3, 0.9]];
    Matrix::from_fn(3, 3, |i, j| v[i][j])
}

/// Averages `REPLICATES` samples and checks every off-diagonal mean within
/// five standard errors, plus the pooled variance ratio.
fn check_family(family: EdgeDistribution, p: Matrix, rho: f64, var_tol: f64) {
    let pi = random_membership(&mut rng(1), 24, 3, 4);
    let spec = GeneratorSpec::new(pi, &p, rho, family, None, 0).unwrap();
    let omega = population_adjacency(&spec).unwrap().omega;
    let n = spec.n();
    let mut sum = Matrix::zeros(n, n);
    let mut sq = Matrix::zeros(n, n);
    for s in 0..REPLICATES {
        let g = sample_network(&spec.with_seed(s)).unwrap().graph;
        for i in 0..n {
            assert_eq!(g.weight(i, i), 0.0);
            for j in i + 1..n {
                let w = g.weight(i, j);
                assert_eq!(w, g.weight(j, i));
                sum[(i, j)] += w;
                sq[(i, j)] += w * w;
            }
        }
    }
    let r = REPLICATES as f64;
    let (mut ratio_sum, mut pairs) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let mean = sum[(i, j)] / r;
            let var = family.variance(omega[(i, j)]);
            let se = (var / r).sqrt();
            assert!(
                (mean - omega[(i, j)]).abs() <= 5.0 * se + 1e-12,
                "{} ({i},{j}): mean {mean} vs {} (se {se})",
                family.name(),
                omega[(i, j)]
            );
            if var > 0.0 {
                let sample_var = (sq[(i, j)] - r * mean * mean) / (r - 1.0);
                ratio_sum += sample_var / var;
                pairs += 1.0;
            } else {
                assert!(sq[(i, j)] / r - mean * mean <= 1e-9);
            }
        }
    }
    if pairs > 0.0 {
        let ratio = ratio_sum / pairs;
        assert!((ratio - 1.0).abs() < var_tol, "{} variance ratio {ratio}", family.name());
    }
}

#[test]
fn normal_family() {
    check_family(EdgeDistribution::normal(2.0), p1(), 5.0, 0.05);
}

#[test]
fn bernoulli_family() {
    check_family(EdgeDistribution::Bernoulli, p2(), 0.6, 0.05);
}

#[test]
fn poisson_family() {
    check_family(EdgeDistribution::Poisson, p2(), 2.0, 0.05);
}

#[test]
fn uniform_family() {
    check_family(EdgeDistribution::Uniform, p2(), 5.0, 0.05);
}

#[test]
fn signed_family() {
    check_family(EdgeDistribution::Signed, p1(), 0.6, 0.05);
}

#[test]
fn point_mass_family() {
    check_family(EdgeDistribution::PointMass, p1(), 3.0, 0.0);
}

#[test]
fn signed_weights_are_unit() {
    let spec = GeneratorSpec::new(random_membership(&mut rng(2), 30, 3, 5), &p1(), 0.9, EdgeDistribution::Signed, None, 4).unwrap();
    let g = sample_network(&spec).unwrap().graph;
    for i in 0..30 {
        for j in 0..30 {
            if i != j {
                assert_eq!(g.weight(i, j).abs(), 1.0);
            }
        }
    }
}

#[test]
fn poisson_draws_are_counts() {
    let spec = GeneratorSpec::new(random_membership(&mut rng(2), 30, 3, 5), &p2(), 3.0, EdgeDistribution::Poisson, None, 4).unwrap();
    let g = sample_network(&spec).unwrap().graph;
    for i in 0..30 {
        for j in 0..30 {
            let w = g.weight(i, j);
            assert!(w >= 0.0 && w.fract() == 0.0);
        }
    }
}
