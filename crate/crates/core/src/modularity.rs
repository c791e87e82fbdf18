//! Fuzzy weighted modularity and the modularity scan over `k`.
//!
//! For a signed weighted graph split into `A⁺ = max(0, A)` and
//! `A⁻ = max(0, −A)` and a soft partition `Π̂`,
//!
//! ```text
//! Q± = (1/2m±) Σᵢⱼ (A±(i,j) − d±(i) d±(j) / 2m±) ⟨Π̂(i,:), Π̂(j,:)⟩
//! Q  = (2m⁺ Q⁺ − 2m⁻ Q⁻) / (2m⁺ + 2m⁻)
//! ```
//!
//! The double sum is evaluated as `tr(Π̂ᵀ A± Π̂) − ‖Σᵢ d±(i) Π̂(i,:)‖² / 2m±`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dfsp::{dfsp_from_spectrum, DfspReport, MembershipMatrix};
use crate::error::{Error, Result, Stage};
use crate::exec::{map_indexed, Execution};
use crate::graph::WeightedGraph;
use crate::spectral::SymmetricSpectrum;
use crate::Matrix;

/// Default scan ceiling.
pub const DEFAULT_K_MAX: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularityValue {
    pub q: f64,
    pub q_pos: f64,
    pub q_neg: f64,
    /// `2m⁺ / (2m⁺ + 2m⁻)`.
    pub pos_weight: f64,
    /// `2m⁻ / (2m⁺ + 2m⁻)`.
    pub neg_weight: f64,
}

impl ModularityValue {
    fn zero() -> Self {
        Self { q: 0.0, q_pos: 0.0, q_neg: 0.0, pos_weight: 0.0, neg_weight: 0.0 }
    }
}

/// Whether the `i = j` terms of the double sum are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalTerms {
    #[default]
    Include,
    Exclude,
}

/// Fuzzy weighted modularity of `m` on `g`, diagonal terms included.
pub fn fuzzy_weighted_modularity(g: &WeightedGraph, m: &MembershipMatrix) -> Result<ModularityValue> {
    fuzzy_weighted_modularity_with(g, m, DiagonalTerms::Include)
}

pub fn fuzzy_weighted_modularity_with(
    g: &WeightedGraph,
    m: &MembershipMatrix,
    diagonal: DiagonalTerms,
) -> Result<ModularityValue> {
    let n = g.n();
    if m.n() != n {
        return Err(Error::Domain(format!("membership has {} rows, graph has {n} nodes", m.n())));
    }
    let a = g.weights();
    let pos = Matrix::from_fn(n, n, |i, j| a[(i, j)].max(0.0));
    let neg = Matrix::from_fn(n, n, |i, j| (-a[(i, j)]).max(0.0));
    let (q_pos, two_m_pos) = part(&pos, m.matrix(), diagonal);
    let (q_neg, two_m_neg) = part(&neg, m.matrix(), diagonal);
    let total = two_m_pos + two_m_neg;
    if total == 0.0 {
        return Ok(ModularityValue::zero());
    }
    let pos_weight = two_m_pos / total;
    let neg_weight = two_m_neg / total;
    Ok(ModularityValue { q: pos_weight * q_pos - neg_weight * q_neg, q_pos, q_neg, pos_weight, neg_weight })
}

/// Returns `(Q±, 2m±)` for one nonnegative part.
fn part(a: &Matrix, pi: &Matrix, diagonal: DiagonalTerms) -> (f64, f64) {
    let (n, k) = (pi.nrows(), pi.ncols());
    // degrees and A·Π go through the same kernel so that k = 1 cancels exactly
    let degrees = a * Matrix::from_fn(n, 1, |_, _| 1.0);
    let two_m: f64 = (0..n).map(|i| degrees[(i, 0)]).sum();
    if two_m == 0.0 {
        return (0.0, 0.0);
    }
    let a_pi = a * pi;
    let trace: f64 = (0..n).map(|i| (0..k).map(|c| a_pi[(i, c)] * pi[(i, c)]).sum::<f64>()).sum();
    let null: f64 = (0..k)
        .map(|c| {
            let s: f64 = (0..n).map(|i| degrees[(i, 0)] * pi[(i, c)]).sum();
            s * (s / two_m)
        })
        .sum();
    let mut sum = trace - null;
    if diagonal == DiagonalTerms::Exclude {
        for i in 0..n {
            let d = degrees[(i, 0)];
            let norm2: f64 = (0..k).map(|c| pi[(i, c)] * pi[(i, c)]).sum();
            sum -= (a[(i, i)] - d * d / two_m) * norm2;
        }
    }
    (sum / two_m, two_m)
}

/// Settings for [`estimate_k_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    /// Largest `k` tried; `None` means `min(15, n − 1)`.
    pub k_max: Option<usize>,
    /// Stop at the first `k` whose modularity does not exceed the best so
    /// far, instead of scanning to `k_max`.
    pub stop_early: bool,
    pub diagonal: DiagonalTerms,
    pub execution: Execution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { k_max: None, stop_early: false, diagonal: DiagonalTerms::Include, execution: Execution::Parallel }
    }
}

impl ScanOptions {
    pub fn with_k_max(k_max: usize) -> Self {
        Self { k_max: Some(k_max), ..Self::default() }
    }

    pub fn resolve_k_max(&self, n: usize) -> usize {
        self.k_max.unwrap_or_else(|| DEFAULT_K_MAX.min(n.saturating_sub(1)).max(1))
    }
}

/// One point of a modularity scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub k: usize,
    #[serde(flatten)]
    pub outcome: ScanOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOutcome {
    Value(ModularityValue),
    Failure(String),
}

impl ScanPoint {
    pub fn q(&self) -> Option<f64> {
        match &self.outcome {
            ScanOutcome::Value(v) => Some(v.q),
            ScanOutcome::Failure(_) => None,
        }
    }
}

/// Result of scanning `k = 1..=k_max`.
#[derive(Debug, Clone)]
pub struct KScanResult {
    pub best_k: usize,
    pub curve: Vec<ScanPoint>,
    pub k_max: usize,
    /// DFSP output at `best_k`.
    pub best: DfspReport,
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    best_k: usize,
    best_q: f64,
    k_max: usize,
    failures: Vec<usize>,
    curve: &'a [ScanPoint],
}

impl KScanResult {
    pub fn best_value(&self) -> ModularityValue {
        match &self.curve[self.best_k - 1].outcome {
            ScanOutcome::Value(v) => *v,
            ScanOutcome::Failure(_) => unreachable!("best k always succeeded"),
        }
    }

    pub fn failures(&self) -> Vec<usize> {
        self.curve.iter().filter(|p| p.q().is_none()).map(|p| p.k).collect()
    }

    /// Two-column `k,q` CSV; failed `k` have an empty `q`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,q")?;
        for p in &self.curve {
            match p.q() {
                Some(q) => writeln!(out, "{},{q}", p.k)?,
                None => writeln!(out, "{},", p.k)?,
            }
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::to_value(ScanSummary {
            best_k: self.best_k,
            best_q: self.best_value().q,
            k_max: self.k_max,
            failures: self.failures(),
            curve: &self.curve,
        })
        .expect("scan summary is serializable")
    }
}

/// Scans `k = 1..=k_max` with default options.
pub fn estimate_k(g: &WeightedGraph, k_max: usize) -> Result<KScanResult> {
    estimate_k_with(g, &ScanOptions::with_k_max(k_max))
}

/// Runs DFSP for each `k`, scores it, and returns the argmax (smallest `k`
/// on ties). One eigendecomposition is shared by all `k`.
pub fn estimate_k_with(g: &WeightedGraph, opts: &ScanOptions) -> Result<KScanResult> {
    let spectrum = SymmetricSpectrum::new(g.weights())?;
    estimate_k_from_spectrum(g, &spectrum, opts)
}

pub fn estimate_k_from_spectrum(
    g: &WeightedGraph,
    spectrum: &SymmetricSpectrum,
    opts: &ScanOptions,
) -> Result<KScanResult> {
    let n = g.n();
    let k_max = opts.resolve_k_max(n);
    if k_max == 0 || k_max > n {
        return Err(Error::Domain(format!("k_max = {k_max} outside 1..={n}")));
    }
    let evaluate = |k: usize| -> Result<(ModularityValue, DfspReport)> {
        let report = dfsp_from_spectrum(spectrum, k)?;
        let value = fuzzy_weighted_modularity_with(g, &report.memberships, opts.diagonal)?;
        Ok((value, report))
    };

    let results: Vec<Result<(ModularityValue, DfspReport)>> = if opts.stop_early {
        let mut out = Vec::new();
        let mut best = f64::NEG_INFINITY;
        for k in 1..=k_max {
            let r = evaluate(k);
            if let Ok((v, _)) = &r {
                if v.q <= best {
                    out.push(r);
                    break;
                }
                best = v.q;
            }
            out.push(r);
        }
        out
    } else {
        map_indexed(opts.execution, k_max, |idx| evaluate(idx + 1))
    };

    let mut curve = Vec::with_capacity(results.len());
    let mut best: Option<(usize, f64, DfspReport)> = None;
    for (idx, r) in results.into_iter().enumerate() {
        let k = idx + 1;
        match r {
            Ok((value, report)) => {
                if best.as_ref().is_none_or(|(_, q, _)| value.q > *q) {
                    best = Some((k, value.q, report));
                }
                curve.push(ScanPoint { k, outcome: ScanOutcome::Value(value) });
            }
            Err(Error::Estimation { stage, message }) => {
                curve.push(ScanPoint { k, outcome: ScanOutcome::Failure(format!("{stage}: {message}")) });
            }
            Err(e) => return Err(e),
        }
    }
    let scanned = curve.len();
    match best {
        Some((best_k, _, report)) => Ok(KScanResult { best_k, curve, k_max, best: report }),
        None => Err(Error::estimation(Stage::ModelSelection, format!("dfsp failed for every k in 1..={scanned}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> WeightedGraph {
        WeightedGraph::from_edges(n, edges).unwrap()
    }

    fn hard(labels: &[usize], k: usize) -> MembershipMatrix {
        MembershipMatrix::from_labels(labels, k).unwrap()
    }

    #[test]
    fn single_community_is_zero() {
        let g = graph(4, &[(0, 1, 1.0), (1, 2, -2.5), (2, 3, 0.7), (0, 3, 3.0)]);
        let v = fuzzy_weighted_modularity(&g, &hard(&[0, 0, 0, 0], 1)).unwrap();
        assert_eq!((v.q, v.q_pos, v.q_neg), (0.0, 0.0, 0.0));
        assert_eq!(v.pos_weight + v.neg_weight, 1.0);
    }

    #[test]
    fn empty_graph_is_zero() {
        let v = fuzzy_weighted_modularity(&WeightedGraph::empty(3), &hard(&[0, 1, 1], 2)).unwrap();
        assert_eq!(v, ModularityValue::zero());
    }

    #[test]
    fn two_disjoint_edges() {
        // each edge its own community: Q = 2 · (1/2)(1 − 1/2) = 1/2
        let g = graph(4, &[(0, 1, 1.0), (2, 3, 1.0)]);
        let v = fuzzy_weighted_modularity(&g, &hard(&[0, 0, 1, 1], 2)).unwrap();
        assert!((v.q - 0.5).abs() < 1e-15);
        assert_eq!(v.neg_weight, 0.0);
    }

    #[test]
    fn purely_negative_graph() {
        let g = graph(4, &[(0, 1, -1.0), (2, 3, -1.0)]);
        let v = fuzzy_weighted_modularity(&g, &hard(&[0, 0, 1, 1], 2)).unwrap();
        assert_eq!(v.pos_weight, 0.0);
        assert!((v.q + 0.5).abs() < 1e-15);
    }

    #[test]
    fn excluded_diagonal_differs_by_null_terms() {
        let g = graph(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let m = hard(&[0, 0, 1], 2);
        let inc = fuzzy_weighted_modularity_with(&g, &m, DiagonalTerms::Include).unwrap();
        let exc = fuzzy_weighted_modularity_with(&g, &m, DiagonalTerms::Exclude).unwrap();
        // degrees (1, 2, 1), 2m = 4: removed terms −Σ d²/2m = −6/4
        assert!((exc.q - (inc.q + 6.0 / 16.0)).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            fuzzy_weighted_modularity(&WeightedGraph::empty(3), &hard(&[0, 1], 2)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn scan_curve_starts_at_zero_and_records_failures() {
        let mut edges = Vec::new();
        for base in [0, 5] {
            for i in 0..5 {
                for j in i + 1..5 {
                    edges.push((base + i, base + j, 1.0));
                }
            }
        }
        let g = graph(10, &edges);
        let scan = estimate_k(&g, 9).unwrap();
        assert_eq!(scan.best_k, 2);
        assert_eq!(scan.curve[0].q(), Some(0.0));
        assert_eq!(scan.curve.len(), 9);
        let best = scan.best_value().q;
        assert!(scan.curve.iter().filter_map(ScanPoint::q).all(|q| q <= best));
        let mut csv = Vec::new();
        scan.write_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("k,q\n1,0\n"));

        let early = estimate_k_with(&g, &ScanOptions { stop_early: true, ..ScanOptions::with_k_max(9) }).unwrap();
        assert_eq!(early.best_k, 2);
        assert!(early.curve.len() < 9);
    }

    #[test]
    fn scan_of_empty_graph_fails() {
        let err = estimate_k(&WeightedGraph::empty(4), 3).unwrap_err();
        assert!(matches!(err, Error::Estimation { stage: Stage::ModelSelection, .. }));
    }

    #[test]
    fn default_k_max() {
        assert_eq!(ScanOptions::default().resolve_k_max(10), 9);
        assert_eq!(ScanOptions::default().resolve_k_max(100), 15);
        assert_eq!(ScanOptions::default().resolve_k_max(1), 1);
    }
}
