//! The DFSP membership estimator.
//!
//! Given a symmetric (possibly signed) adjacency matrix and a community
//! count `k`:
//!
//! 1. take the top-`k` eigenvectors `Û` by eigenvalue magnitude;
//! 2. run successive projection on the rows of `Û` to find one corner row
//!    per community;
//! 3. express every row of `Û` in the basis of the corner rows and clip
//!    negative coordinates to zero;
//! 4. normalize each row to unit l1 norm.
//!
//! On a population matrix `ρ Π P Πᵀ` this recovers `Π` exactly up to a
//! column permutation, because the eigenvector rows are convex combinations
//! of the pure-node rows.

use faer::linalg::solvers::Solve;

use crate::error::{Error, Result, Stage};
use crate::spectral::{successive_projection, SymmetricSpectrum, TopKEigen, VertexSet};
use crate::Matrix;

/// Corner matrices with a larger 2-norm condition number are rejected.
pub const MAX_CORNER_CONDITION: f64 = 1e12;

/// The k-th eigenvalue must exceed this fraction of the leading one in
/// magnitude; otherwise the eigenvectors span an arbitrary null direction.
pub const MIN_EIGEN_RATIO: f64 = 1e-12;

/// Row sums of a membership matrix must be within this of one.
pub const ROW_SUM_TOL: f64 = 1e-10;

/// n×K nonnegative matrix whose rows sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix(Matrix);

impl MembershipMatrix {
    /// Validates row-stochasticity.
    pub fn new(m: Matrix) -> Result<Self> {
        for i in 0..m.nrows() {
            let mut sum = 0.0;
            for k in 0..m.ncols() {
                let v = m[(i, k)];
                if v < 0.0 || !v.is_finite() {
                    return Err(Error::Value(format!(
                        "membership entry ({}, {}) = {v} is not a nonnegative number",
                        i + 1,
                        k + 1
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Value(format!("membership row {} sums to {sum}", i + 1)));
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Domain("membership rows have different lengths".into()));
        }
        Self::new(Matrix::from_fn(rows.len(), k, |i, j| rows[i][j]))
    }

    /// One-hot memberships from 0-based labels.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::Domain(format!("label {bad} outside 0..{k}")));
        }
        Ok(Self(Matrix::from_fn(labels.len(), k, |i, j| if labels[i] == j { 1.0 } else { 0.0 })))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn k(&self) -> usize {
        self.0.ncols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.0[(i, k)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.k()).map(|k| self.0[(i, k)]).collect()
    }

    /// Indices of indicator rows.
    pub fn pure_rows(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| (0..self.k()).any(|k| self.0[(i, k)] == 1.0)).collect()
    }

    /// Reorders columns: column `perm[c]` of the result is column `c` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        crate::graph::check_permutation(perm, self.k())?;
        let mut out = Matrix::zeros(self.n(), self.k());
        for i in 0..self.n() {
            for c in 0..self.k() {
                out[(i, perm[c])] = self.0[(i, c)];
            }
        }
        Ok(Self(out))
    }

    /// Reorders rows: row `perm[i]` of the result is row `i` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        crate::graph::check_permutation(perm, self.n())?;
        let mut out = Matrix::zeros(self.n(), self.k());
        for i in 0..self.n() {
            for c in 0..self.k() {
                out[(perm[i], c)] = self.0[(i, c)];
            }
        }
        Ok(Self(out))
    }

    /// Writes one CSV row per node, full precision.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.k()).map(|k| format!("community_{k}")).collect();
        writeln!(out, "node,{}", header.join(","))?;
        for i in 0..self.n() {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{},{}", i + 1, row.join(","))?;
        }
        Ok(())
    }
}

/// Output of a DFSP run with diagnostics.
#[derive(Debug, Clone)]
pub struct DfspReport {
    pub memberships: MembershipMatrix,
    pub vertex_indices: VertexSet,
    pub eigen: TopKEigen,
    /// Rows where clipping at zero removed negative mass.
    pub clipped_rows: usize,
    /// Rows with no positive coordinate; these are set to uniform.
    pub degenerate_rows: usize,
    /// 2-norm condition number of the corner matrix `Û(Î,:)`.
    pub corner_condition: f64,
}

/// Home-base community per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardAssignment {
    /// 0-based community index per node.
    pub labels: Vec<usize>,
}

/// Runs DFSP on a symmetric matrix.
pub fn dfsp(a: &Matrix, k: usize) -> Result<DfspReport> {
    let n = a.nrows();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("k = {k} outside 1..={n}")));
    }
    let spectrum = SymmetricSpectrum::new(a)?;
    dfsp_from_spectrum(&spectrum, k)
}

/// Runs DFSP steps 2–4 on a precomputed spectrum.
pub fn dfsp_from_spectrum(spectrum: &SymmetricSpectrum, k: usize) -> Result<DfspReport> {
    let eigen = spectrum.top_k(k)?;
    dfsp_from_eigen(eigen)
}

pub fn dfsp_from_eigen(eigen: TopKEigen) -> Result<DfspReport> {
    let u = &eigen.vectors;
    let (n, k) = (u.nrows(), u.ncols());

    let leading = eigen.values[0].abs();
    let trailing = eigen.values[k - 1].abs();
    if leading == 0.0 || trailing <= MIN_EIGEN_RATIO * leading {
        return Err(Error::estimation(
            Stage::Eigendecomposition,
            format!("matrix has rank below {k} (|λ_{k}| = {trailing:e}, |λ_1| = {leading:e})"),
        ));
    }

    let vertices = successive_projection(u.as_ref(), k);
    if !vertices.is_complete(k) {
        return Err(Error::estimation(
            Stage::VertexHunting,
            format!("residual vanished after {} of {k} corners", vertices.len()),
        ));
    }

    let corner = Matrix::from_fn(k, k, |r, c| u[(vertices.indices[r], c)]);
    let sv = crate::spectral::singular_values(&corner)?;
    let condition = sv[0] / sv[k - 1];
    if !condition.is_finite() || condition > MAX_CORNER_CONDITION {
        return Err(Error::estimation(
            Stage::SimplexInversion,
            format!(
                "corner matrix at rows {:?} is singular (condition number {condition:e})",
                vertices.indices.iter().map(|i| i + 1).collect::<Vec<_>>()
            ),
        ));
    }

    // Z = U · C⁻¹  ⇔  Cᵀ Zᵀ = Uᵀ
    let lu = corner.transpose().partial_piv_lu();
    let z_t = lu.solve(u.transpose().to_owned());

    let mut memberships = Matrix::zeros(n, k);
    let mut clipped_rows = 0;
    let mut degenerate_rows = 0;
    for i in 0..n {
        let mut clipped = false;
        let mut total = 0.0;
        for c in 0..k {
            let v = z_t[(c, i)];
            if v < 0.0 {
                clipped = true;
            } else {
                memberships[(i, c)] = v;
                total += v;
            }
        }
        clipped_rows += usize::from(clipped);
        if total > 0.0 {
            for c in 0..k {
                memberships[(i, c)] /= total;
            }
        } else {
            degenerate_rows += 1;
            for c in 0..k {
                memberships[(i, c)] = 1.0 / k as f64;
            }
        }
    }

    Ok(DfspReport {
        memberships: MembershipMatrix(memberships),
        vertex_indices: vertices,
        eigen,
        clipped_rows,
        degenerate_rows,
        corner_condition: condition,
    })
}

/// Per-row argmax, smallest community index on ties.
pub fn harden(m: &MembershipMatrix) -> HardAssignment {
    let labels = (0..m.n())
        .map(|i| {
            let mut best = 0;
            for c in 1..m.k() {
                if m.get(i, c) > m.get(i, best) {
                    best = c;
                }
            }
            best
        })
        .collect();
    HardAssignment { labels }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harden_ties_and_pure_rows() {
        let m = MembershipMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(harden(&m).labels, vec![0, 2]);
        let tie = MembershipMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        assert_eq!(harden(&tie).labels, vec![0]);
    }

    #[test]
    fn membership_validation() {
        assert!(MembershipMatrix::from_rows(&[vec![0.5, 0.6]]).is_err());
        assert!(MembershipMatrix::from_rows(&[vec![-0.1, 1.1]]).is_err());
        assert!(MembershipMatrix::from_rows(&[vec![f64::NAN, 1.0]]).is_err());
        assert!(MembershipMatrix::from_labels(&[0, 3], 2).is_err());
    }

    #[test]
    fn all_pure_population_recovers_identity() {
        // ρ P with ρ = 0.5 and the Bernoulli design matrix
        let p = [[1.0, 0.2, 0.3], [0.2, 0.9, 0.3], [0.3, 0.3, 0.9]];
        let omega = Matrix::from_fn(3, 3, |i, j| 0.5 * p[i][j]);
        let report = dfsp(&omega, 3).unwrap();
        let m = report.memberships.matrix();
        for i in 0..3 {
            let hot = (0..3).filter(|&c| (m[(i, c)] - 1.0).abs() < 1e-8).count();
            assert_eq!(hot, 1, "row {i} not pure");
        }
        let mut cols: Vec<usize> = harden(&report.memberships).labels;
        cols.sort();
        assert_eq!(cols, vec![0, 1, 2]);
    }

    #[test]
    fn single_community_is_all_ones() {
        let omega = Matrix::from_fn(4, 4, |_, _| 0.3);
        let report = dfsp(&omega, 1).unwrap();
        for i in 0..4 {
            assert!((report.memberships.get(i, 0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_graph_fails_at_eigendecomposition() {
        let err = dfsp(&Matrix::zeros(5, 5), 2).unwrap_err();
        assert!(matches!(err, Error::Estimation { stage: Stage::Eigendecomposition, .. }), "{err}");
        // rank one, k = 2
        let err = dfsp(&Matrix::from_fn(4, 4, |_, _| 1.0), 2).unwrap_err();
        assert!(matches!(err, Error::Estimation { .. }), "{err}");
    }

    #[test]
    fn rejects_bad_k() {
        assert!(matches!(dfsp(&Matrix::identity(3, 3), 0), Err(Error::Domain(_))));
        assert!(matches!(dfsp(&Matrix::identity(3, 3), 4), Err(Error::Domain(_))));
    }
}
