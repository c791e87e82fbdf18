//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use itertools::Itertools;
use mmdf::{Matrix, MembershipMatrix, WeightedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cyclic Jacobi eigendecomposition. Columns of the returned matrix are
/// eigenvectors, sorted by decreasing |eigenvalue| with the largest-|entry|
/// of each column made positive.
pub fn jacobi_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = Matrix::identity(n, n);
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].abs().total_cmp(&a[(x, x)].abs()));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let pivot = (0..n).max_by(|&x, &y| v[(x, src)].abs().total_cmp(&v[(y, src)].abs())).unwrap();
        let sign = v[(pivot, src)].signum();
        for i in 0..n {
            vectors[(i, dst)] = sign * v[(i, src)];
        }
    }
    (values, vectors)
}

/// Newman–Girvan modularity of a hard partition of a nonnegative graph,
/// `(1/2m) Σᵢⱼ (Aᵢⱼ − kᵢkⱼ/2m) δ(cᵢ, cⱼ)`.
pub fn newman_girvan(g: &WeightedGraph, labels: &[usize]) -> f64 {
    let n = g.n();
    let k: Vec<f64> = (0..n).map(|i| (0..n).map(|j| g.weight(i, j)).sum()).collect();
    let two_m: f64 = k.iter().sum();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += g.weight(i, j) - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Fuzzy weighted modularity evaluated term by term from the double sums.
pub fn modularity_double_sum(g: &WeightedGraph, m: &MembershipMatrix) -> f64 {
    let n = g.n();
    let inner = |i: usize, j: usize| (0..m.k()).map(|c| m.get(i, c) * m.get(j, c)).sum::<f64>();
    let part = |sign: f64| -> (f64, f64) {
        let w = |i: usize, j: usize| (sign * g.weight(i, j)).max(0.0);
        let d: Vec<f64> = (0..n).map(|i| (0..n).map(|j| w(i, j)).sum()).collect();
        let two_m: f64 = d.iter().sum();
        if two_m == 0.0 {
            return (0.0, 0.0);
        }
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += (w(i, j) - d[i] * d[j] / two_m) * inner(i, j);
            }
        }
        (s / two_m, two_m)
    };
    let (qp, mp) = part(1.0);
    let (qn, mn) = part(-1.0);
    if mp + mn == 0.0 {
        return 0.0;
    }
    (mp * qp - mn * qn) / (mp + mn)
}

/// Hamming and relative errors minimized by enumerating all permutations.
pub fn exhaustive_errors(est: &MembershipMatrix, truth: &MembershipMatrix) -> (f64, f64) {
    let (n, k) = (truth.n(), truth.k());
    let norm = (0..n).flat_map(|i| (0..k).map(move |c| (i, c))).map(|(i, c)| truth.get(i, c).powi(2)).sum::<f64>().sqrt();
    let mut best_h = f64::INFINITY;
    let mut best_r = f64::INFINITY;
    for perm in (0..k).permutations(k) {
        let (mut l1, mut sq) = (0.0, 0.0);
        for i in 0..n {
            for c in 0..k {
                let d = est.get(i, c) - truth.get(i, perm[c]);
                l1 += d.abs();
                sq += d * d;
            }
        }
        best_h = best_h.min(l1 / n as f64);
        best_r = best_r.min(sq.sqrt() / norm);
    }
    (best_h, best_r)
}

/// Random PMF of length `k`.
pub fn random_pmf<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    let mut row: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let tail: f64 = row[..k - 1].iter().sum();
    row[k - 1] = 1.0 - tail;
    row
}

/// `n × k` memberships with `pure` indicator rows per community first.
pub fn random_membership<R: Rng>(rng: &mut R, n: usize, k: usize, pure: usize) -> MembershipMatrix {
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        if i < k * pure {
            let mut r = vec![0.0; k];
            r[i / pure] = 1.0;
            rows.push(r);
        } else {
            rows.push(random_pmf(rng, k));
        }
    }
    MembershipMatrix::from_rows(&rows).unwrap()
}

/// Symmetric `k × k` matrix with max |entry| 1, entries in `[lo, 1]`,
/// resampled until `σ_K ≥ min_sigma`.
pub fn random_connectivity<R: Rng>(rng: &mut R, k: usize, lo: f64, min_sigma: f64) -> Matrix {
    loop {
        let mut p = Matrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = lo + (1.0 - lo) * rng.random::<f64>();
                p[(i, j)] = v;
                p[(j, i)] = v;
            }
            p[(i, i)] = 0.5 + 0.5 * rng.random::<f64>();
        }
        let max = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).fold(0.0f64, |m, (i, j)| m.max(p[(i, j)].abs()));
        let p = Matrix::from_fn(k, k, |i, j| p[(i, j)] / max);
        let sv = mmdf::spectral::singular_values(&p).unwrap();
        if sv[k - 1] >= min_sigma {
            return p;
        }
    }
}

/// Random symmetric graph with zero diagonal; `density` of nonzero pairs
/// and weights uniform on `[lo, hi]`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, density: f64, lo: f64, hi: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                edges.push((i, j, lo + (hi - lo) * rng.random::<f64>()));
            }
        }
    }
    WeightedGraph::from_edges(n, &edges).unwrap()
}

/// Largest row-wise l1 distance after matching columns by `perm`.
pub fn max_row_l1(est: &MembershipMatrix, truth: &MembershipMatrix, perm: &[usize]) -> f64 {
    (0..truth.n())
        .map(|i| (0..truth.k()).map(|c| (est.get(i, c) - truth.get(i, perm[c])).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
