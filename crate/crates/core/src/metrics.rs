//! Evaluation metrics for estimated memberships and community counts.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::dfsp::{HardAssignment, MembershipMatrix};
use crate::error::{Error, Result};

/// Above this many communities permutations are matched by linear
/// assignment instead of enumeration.
pub const EXHAUSTIVE_MAX_K: usize = 8;

/// Row-max thresholds of the mixedness indices.
pub const MIXED_THRESHOLD: f64 = 0.7;
pub const PURE_THRESHOLD: f64 = 0.9;

/// Permutation-minimized membership errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorPair {
    /// `min_𝓟 (1/n) ‖Π̂ − Π𝓟‖₁`, entrywise, in `[0, 2]`.
    pub hamming: f64,
    /// `min_𝓟 ‖Π̂ − Π𝓟‖_F / ‖Π‖_F`.
    pub relative: f64,
    /// Hamming-minimizing matching: estimate column `c` pairs with truth
    /// column `permutation[c]`.
    pub permutation: Vec<usize>,
}

/// How the column matching is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Matching {
    /// Enumeration up to [`EXHAUSTIVE_MAX_K`], assignment above.
    #[default]
    Auto,
    Exhaustive,
    Assignment,
}

pub fn membership_errors(estimate: &MembershipMatrix, truth: &MembershipMatrix) -> Result<ErrorPair> {
    membership_errors_with(estimate, truth, Matching::Auto)
}

pub fn membership_errors_with(
    estimate: &MembershipMatrix,
    truth: &MembershipMatrix,
    matching: Matching,
) -> Result<ErrorPair> {
    let (n, k) = (truth.n(), truth.k());
    if estimate.n() != n || estimate.k() != k {
        return Err(Error::Domain(format!(
            "estimate is {}x{}, truth is {n}x{k}",
            estimate.n(),
            estimate.k()
        )));
    }
    if n == 0 || k == 0 {
        return Err(Error::Domain("empty membership matrices".into()));
    }
    let mut l1 = vec![vec![0.0; k]; k];
    let mut sq = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            for i in 0..n {
                let d = estimate.get(i, a) - truth.get(i, b);
                l1[a][b] += d.abs();
                sq[a][b] += d * d;
            }
        }
    }
    let truth_norm = (0..n)
        .flat_map(|i| (0..k).map(move |c| (i, c)))
        .map(|(i, c)| truth.get(i, c) * truth.get(i, c))
        .sum::<f64>()
        .sqrt();

    let solve = |cost: &[Vec<f64>]| -> (Vec<usize>, f64) {
        let use_enumeration = match matching {
            Matching::Auto => k <= EXHAUSTIVE_MAX_K,
            Matching::Exhaustive => true,
            Matching::Assignment => false,
        };
        let perm = if use_enumeration { best_permutation_exhaustive(cost) } else { min_cost_assignment(cost) };
        let total = matching_cost(cost, &perm);
        (perm, total)
    };
    let (permutation, l1_total) = solve(&l1);
    let (_, sq_total) = solve(&sq);
    Ok(ErrorPair { hamming: l1_total / n as f64, relative: sq_total.sqrt() / truth_norm, permutation })
}

fn matching_cost(cost: &[Vec<f64>], perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(a, &b)| cost[a][b]).sum()
}

/// First permutation in lexicographic order attaining the minimum cost.
pub fn best_permutation_exhaustive(cost: &[Vec<f64>]) -> Vec<usize> {
    let k = cost.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..k).permutations(k) {
        let c = matching_cost(cost, &perm);
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, perm));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(k³)). Returns `perm` with row `a` matched to column
/// `perm[a]`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let k = cost.len();
    // 1-based arrays; index 0 is the virtual start column
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut row_of = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for row in 1..=k {
        row_of[0] = row;
        let mut col0 = 0;
        let mut min_to = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[col0] = true;
            let r = row_of[col0];
            let mut delta = f64::INFINITY;
            let mut next = 0;
            for col in 1..=k {
                if used[col] {
                    continue;
                }
                let reduced = cost[r - 1][col - 1] - u[r] - v[col];
                if reduced < min_to[col] {
                    min_to[col] = reduced;
                    way[col] = col0;
                }
                if min_to[col] < delta {
                    delta = min_to[col];
                    next = col;
                }
            }
            for col in 0..=k {
                if used[col] {
                    u[row_of[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_to[col] -= delta;
                }
            }
            col0 = next;
            if row_of[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            row_of[col0] = row_of[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; k];
    for col in 1..=k {
        perm[row_of[col] - 1] = col - 1;
    }
    perm
}

/// Smallest number of disagreements over relabelings of `estimate`.
pub fn mislabel_count(estimate: &HardAssignment, truth: &[usize]) -> Result<usize> {
    let n = truth.len();
    if estimate.labels.len() != n {
        return Err(Error::Domain(format!("{} estimated labels for {n} true labels", estimate.labels.len())));
    }
    let k = estimate.labels.iter().chain(truth).copied().max().map_or(0, |m| m + 1);
    if k == 0 {
        return Ok(0);
    }
    let mut agree = vec![vec![0.0; k]; k];
    for (&e, &t) in estimate.labels.iter().zip(truth) {
        agree[e][t] += 1.0;
    }
    let cost: Vec<Vec<f64>> = agree.iter().map(|r| r.iter().map(|&x| -x).collect()).collect();
    let perm = if k <= EXHAUSTIVE_MAX_K { best_permutation_exhaustive(&cost) } else { min_cost_assignment(&cost) };
    let matched: f64 = perm.iter().enumerate().map(|(a, &b)| agree[a][b]).sum();
    Ok(n - matched as usize)
}

/// Fraction of estimates equal to `true_k`.
pub fn accuracy_rate(estimates: &[usize], true_k: usize) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Domain("accuracy rate of an empty list".into()));
    }
    Ok(estimates.iter().filter(|&&k| k == true_k).count() as f64 / estimates.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixednessIndices {
    /// Fraction of rows with max entry ≤ 0.7.
    pub eta_mixed: f64,
    /// Fraction of rows with max entry ≥ 0.9.
    pub eta_pure: f64,
}

pub fn mixedness_indices(m: &MembershipMatrix) -> MixednessIndices {
    let n = m.n();
    if n == 0 {
        return MixednessIndices { eta_mixed: 0.0, eta_pure: 0.0 };
    }
    let (mut mixed, mut pure) = (0usize, 0usize);
    for i in 0..n {
        let top = (0..m.k()).map(|c| m.get(i, c)).fold(f64::NEG_INFINITY, f64::max);
        mixed += usize::from(top <= MIXED_THRESHOLD);
        pure += usize::from(top >= PURE_THRESHOLD);
    }
    MixednessIndices { eta_mixed: mixed as f64 / n as f64, eta_pure: pure as f64 / n as f64 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(r: &[&[f64]]) -> MembershipMatrix {
        MembershipMatrix::from_rows(&r.iter().map(|x| x.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identical_and_swapped() {
        let t = rows(&[&[1.0, 0.0], &[0.3, 0.7]]);
        let e = membership_errors(&t, &t).unwrap();
        assert_eq!((e.hamming, e.relative), (0.0, 0.0));
        assert_eq!(e.permutation, vec![0, 1]);

        let e = membership_errors(&rows(&[&[0.0, 1.0]]), &rows(&[&[1.0, 0.0]])).unwrap();
        assert_eq!((e.hamming, e.relative), (0.0, 0.0));
        assert_eq!(e.permutation, vec![1, 0]);
    }

    #[test]
    fn hamming_reaches_two() {
        let t = rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let e = rows(&[&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        let err = membership_errors(&e, &t).unwrap();
        // best matching keeps one row right; two rows differ by 2
        assert!((err.hamming - 4.0 / 3.0).abs() < 1e-15);
        assert!((err.relative - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch() {
        let a = rows(&[&[1.0, 0.0]]);
        let b = rows(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(membership_errors(&a, &b), Err(Error::Domain(_))));
    }

    #[test]
    fn assignment_matches_enumeration_on_fixed_costs() {
        let cost = vec![
            vec![4.0, 1.0, 3.0, 2.5],
            vec![2.0, 0.0, 5.0, 1.0],
            vec![3.0, 2.0, 2.0, 4.0],
            vec![1.5, 3.0, 0.5, 2.0],
        ];
        let a = min_cost_assignment(&cost);
        let b = best_permutation_exhaustive(&cost);
        assert_eq!(matching_cost(&cost, &a), matching_cost(&cost, &b));
    }

    #[test]
    fn mislabels() {
        let e = HardAssignment { labels: vec![0, 0, 1, 1] };
        assert_eq!(mislabel_count(&e, &[0, 0, 1, 1]).unwrap(), 0);
        assert_eq!(mislabel_count(&e, &[1, 1, 0, 0]).unwrap(), 0);
        assert_eq!(mislabel_count(&e, &[1, 1, 0, 1]).unwrap(), 1);
        assert!(mislabel_count(&e, &[0, 1]).is_err());
    }

    #[test]
    fn accuracy() {
        assert_eq!(accuracy_rate(&[3, 3, 3, 3], 3).unwrap(), 1.0);
        assert_eq!(accuracy_rate(&[2, 3, 3, 4], 3).unwrap(), 0.5);
        assert!(accuracy_rate(&[], 3).is_err());
    }

    #[test]
    fn mixedness() {
        let id = MembershipMatrix::from_labels(&[0, 1, 2], 3).unwrap();
        assert_eq!(mixedness_indices(&id), MixednessIndices { eta_mixed: 0.0, eta_pure: 1.0 });
        let uniform = rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert_eq!(mixedness_indices(&uniform), MixednessIndices { eta_mixed: 1.0, eta_pure: 0.0 });
        let edges = rows(&[&[0.7, 0.3], &[0.9, 0.1], &[0.8, 0.2]]);
        let m = mixedness_indices(&edges);
        assert!((m.eta_mixed - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.eta_pure - 1.0 / 3.0).abs() < 1e-15);
    }
}
