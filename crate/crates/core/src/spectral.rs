//! Magnitude-ordered symmetric eigendecomposition and successive projection.

use faer::{MatRef, Side};

use crate::error::{Error, Result, Stage};
use crate::Matrix;

/// Symmetry tolerance for inputs to the eigensolver.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// Successive projection stops once the residual falls below this fraction
/// of the input norm.
pub const SP_RELATIVE_TOL: f64 = 1e-12;

/// Leading eigenpairs, ordered by decreasing `|value|`.
#[derive(Debug, Clone)]
pub struct TopKEigen {
    /// n×k matrix with orthonormal columns.
    pub vectors: Matrix,
    pub values: Vec<f64>,
}

impl TopKEigen {
    pub fn k(&self) -> usize {
        self.values.len()
    }
}

/// Full eigendecomposition sorted by decreasing eigenvalue magnitude.
///
/// Computing this once and truncating with [`SymmetricSpectrum::top_k`] is
/// how scans over several `k` share a single decomposition. Each column is
/// sign-normalized so that its largest-magnitude entry is positive (first
/// such entry on ties).
#[derive(Debug, Clone)]
pub struct SymmetricSpectrum {
    vectors: Matrix,
    values: Vec<f64>,
}

impl SymmetricSpectrum {
    pub fn new(m: &Matrix) -> Result<Self> {
        check_symmetric(m)?;
        let n = m.nrows();
        if n == 0 {
            return Ok(Self { vectors: Matrix::zeros(0, 0), values: Vec::new() });
        }
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| {
            Error::estimation(Stage::Eigendecomposition, format!("eigensolver did not converge: {e:?}"))
        })?;
        let raw_values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
        let raw_vectors = evd.U();

        let mut order: Vec<usize> = (0..n).collect();
        // stable: equal magnitudes keep the solver's ascending order
        order.sort_by(|&a, &b| raw_values[b].abs().total_cmp(&raw_values[a].abs()));

        let mut vectors = Matrix::zeros(n, n);
        let mut values = Vec::with_capacity(n);
        for (dst, &src) in order.iter().enumerate() {
            values.push(raw_values[src]);
            let col = raw_vectors.col(src);
            let mut pivot = 0;
            for i in 1..n {
                if col[i].abs() > col[pivot].abs() {
                    pivot = i;
                }
            }
            let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
            for i in 0..n {
                vectors[(i, dst)] = sign * col[i];
            }
        }
        Ok(Self { vectors, values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// All eigenvalues, largest magnitude first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn top_k(&self, k: usize) -> Result<TopKEigen> {
        let n = self.n();
        if k == 0 || k > n {
            return Err(Error::Domain(format!("k = {k} outside 1..={n}")));
        }
        Ok(TopKEigen {
            vectors: self.vectors.subcols(0, k).to_owned(),
            values: self.values[..k].to_vec(),
        })
    }
}

/// Top-`k` eigenpairs of a symmetric matrix by eigenvalue magnitude.
pub fn top_k_eig(m: &Matrix, k: usize) -> Result<TopKEigen> {
    let n = m.nrows();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("k = {k} outside 1..={n}")));
    }
    SymmetricSpectrum::new(m)?.top_k(k)
}

fn check_symmetric(m: &Matrix) -> Result<()> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Contract(format!("matrix must be square, got {}x{}", n, m.ncols())));
    }
    let mut scale = 1.0f64;
    for j in 0..n {
        for i in 0..n {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(Error::Value(format!("non-finite entry at ({}, {})", i + 1, j + 1)));
            }
            scale = scale.max(v.abs());
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::Contract(format!(
                    "matrix not symmetric at ({}, {}): {} vs {}",
                    i + 1,
                    j + 1,
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

/// Singular values in nonincreasing order.
///
/// One-sided Jacobi: column pairs are rotated until mutually orthogonal and
/// the singular values are the final column norms.
pub fn singular_values(m: &Matrix) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    if (0..m.nrows()).any(|i| (0..m.ncols()).any(|j| !m[(i, j)].is_finite())) {
        return Err(Error::Domain("singular values of a non-finite matrix".into()));
    }
    let mut a = if m.nrows() >= m.ncols() { m.clone() } else { m.transpose().to_owned() };
    let (rows, cols) = (a.nrows(), a.ncols());
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..rows {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (x, y) = (a[(i, p)], a[(i, q)]);
                    a[(i, p)] = c * x - s * y;
                    a[(i, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..cols).map(|c| (0..rows).map(|i| a[(i, c)] * a[(i, c)]).sum::<f64>().sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    Ok(sv)
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// Row indices chosen by successive projection, in selection order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSet {
    pub indices: Vec<usize>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// False when projection ran out of residual before `k` picks.
    pub fn is_complete(&self, k: usize) -> bool {
        self.indices.len() == k
    }
}

/// Successive projection over the rows of `y`.
///
/// Repeatedly picks the row of the residual with the largest Euclidean norm
/// (smallest index on ties) and projects every row onto the orthogonal
/// complement of the picked row. Stops after `k` picks or once the residual
/// Frobenius norm drops to `SP_RELATIVE_TOL` times the input's, in which
/// case fewer than `k` indices are returned.
pub fn successive_projection(y: MatRef<'_, f64>, k: usize) -> VertexSet {
    let (m, r) = (y.nrows(), y.ncols());
    let mut residual = y.to_owned();
    let mut indices = Vec::with_capacity(k);
    let initial = frobenius(residual.as_ref());
    if initial == 0.0 {
        return VertexSet { indices };
    }
    let mut norms = vec![0.0; m];
    let mut proj = vec![0.0; m];
    while indices.len() < k.min(m) {
        if frobenius(residual.as_ref()) <= SP_RELATIVE_TOL * initial {
            break;
        }
        for (i, norm) in norms.iter_mut().enumerate() {
            *norm = (0..r).map(|c| residual[(i, c)] * residual[(i, c)]).sum();
        }
        let mut best = 0;
        for i in 1..m {
            if norms[i] > norms[best] {
                best = i;
            }
        }
        let u: Vec<f64> = (0..r).map(|c| residual[(best, c)]).collect();
        let uu = norms[best];
        for (i, p) in proj.iter_mut().enumerate() {
            *p = (0..r).map(|c| residual[(i, c)] * u[c]).sum::<f64>() / uu;
        }
        for c in 0..r {
            for i in 0..m {
                residual[(i, c)] -= proj[i] * u[c];
            }
        }
        indices.push(best);
    }
    VertexSet { indices }
}

pub(crate) fn frobenius(m: MatRef<'_, f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)] * m[(i, j)];
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[f64]]) -> Matrix {
        Matrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn singular_values_known() {
        let sv = singular_values(&from_rows(&[&[3.0, 0.0], &[4.0, 5.0]])).unwrap();
        assert!((sv[0] - 45f64.sqrt()).abs() < 1e-13);
        assert!((sv[1] - 5f64.sqrt()).abs() < 1e-13);
        let wide = singular_values(&from_rows(&[&[1.0, 0.0, 0.0], &[0.0, -2.0, 0.0]])).unwrap();
        assert_eq!(wide, vec![2.0, 1.0]);
    }

    #[test]
    fn singular_values_of_repeated_rows() {
        let p = from_rows(&[&[1.0, -0.2, -0.3], &[-0.2, 0.9, 0.3], &[-0.3, 0.3, 0.9]]);
        let m = Matrix::from_fn(60, 60, |i, j| p[(i % 3, j % 3)]);
        let mut expected: Vec<f64> = SymmetricSpectrum::new(&m).unwrap().values().iter().map(|v| v.abs()).collect();
        expected.truncate(3);
        let sv = singular_values(&m).unwrap();
        for c in 0..3 {
            assert!((sv[c] - expected[c]).abs() < 1e-10 * expected[0]);
        }
        assert!(sv[3] < 1e-10 * sv[0]);
    }

    #[test]
    fn diagonal_matrix_orders_by_magnitude() {
        let m = from_rows(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, -2.0]]);
        let e = top_k_eig(&m, 2).unwrap();
        assert_eq!(e.values.len(), 2);
        assert!((e.values[0] - 3.0).abs() < 1e-12);
        assert!((e.values[1] + 2.0).abs() < 1e-12);
        for (col, unit) in [(0, 0), (1, 2)] {
            for i in 0..3 {
                let want = if i == unit { 1.0 } else { 0.0 };
                assert!((e.vectors[(i, col)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_spectrum_gives_positive_unit_vector() {
        let m = Matrix::identity(2, 2);
        let e = top_k_eig(&m, 1).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        let (a, b) = (e.vectors[(0, 0)], e.vectors[(1, 0)]);
        assert!((a * a + b * b - 1.0).abs() < 1e-12);
        let pivot = if a.abs() >= b.abs() { a } else { b };
        assert!(pivot > 0.0);
    }

    #[test]
    fn contract_errors() {
        let mut m = Matrix::zeros(2, 2);
        m[(0, 1)] = 1.0;
        assert!(matches!(top_k_eig(&m, 1), Err(Error::Contract(_))));
        assert!(matches!(top_k_eig(&Matrix::identity(2, 2), 3), Err(Error::Domain(_))));
        assert!(matches!(top_k_eig(&Matrix::identity(2, 2), 0), Err(Error::Domain(_))));
    }

    #[test]
    fn sp_identity_picks_in_index_order() {
        let y = Matrix::identity(3, 3);
        assert_eq!(successive_projection(y.as_ref(), 3).indices, vec![0, 1, 2]);
    }

    #[test]
    fn sp_hand_example() {
        let y = from_rows(&[&[2.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(successive_projection(y.as_ref(), 2).indices, vec![0, 1]);
    }

    #[test]
    fn sp_terminates_early_on_rank_deficiency() {
        let y = from_rows(&[&[1.0, 1.0], &[2.0, 2.0], &[-1.0, -1.0]]);
        let v = successive_projection(y.as_ref(), 2);
        assert_eq!(v.indices, vec![1]);
        assert!(!v.is_complete(2));
        assert!(successive_projection(Matrix::zeros(3, 2).as_ref(), 2).is_empty());
    }
}
