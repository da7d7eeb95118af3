//! Compressed-row sparse matrices and direct solvers.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Mat};

use crate::error::{HdgError, Result};

/// `(row, col, value)` contribution collected during assembly.
pub type Entry = (usize, usize, f64);

/// Compressed sparse row matrix with sorted, duplicate-free columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CsrMatrix { n_rows, n_cols, row_ptr: vec![0; n_rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    /// Duplicates are summed in input order, so the result depends only on
    /// the order of `entries`.
    pub fn from_entries(n_rows: usize, n_cols: usize, mut entries: Vec<Entry>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n_rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < n_rows && c < n_cols, "entry ({r}, {c}) outside {n_rows}x{n_cols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix { n_rows, n_cols, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix::from_entries(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn entries(&self) -> impl Iterator<Item = Entry> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(p) => self.values[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn matvec_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n_rows);
        let mut out = vec![0.0; self.n_cols];
        for (i, j, v) in self.entries() {
            out[j] += v * y[i];
        }
        out
    }

    /// `y^T A x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        assert_eq!(y.len(), self.n_rows);
        (0..self.n_rows).map(|i| y[i] * self.row(i).map(|(j, v)| v * x[j]).sum::<f64>()).sum()
    }

    pub fn transpose(&self) -> CsrMatrix {
        CsrMatrix::from_entries(self.n_cols, self.n_rows, self.entries().map(|(i, j, v)| (j, i, v)).collect())
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &CsrMatrix, scale: f64) -> CsrMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let entries = self.entries().chain(other.entries().map(|(i, j, v)| (i, j, scale * v))).collect();
        CsrMatrix::from_entries(self.n_rows, self.n_cols, entries)
    }

    pub fn scaled(&self, scale: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= scale);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - A^T| / max |A|`.
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.transpose();
        let d = self.add_scaled(&t, -1.0);
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            d.max_abs() / scale
        }
    }

    /// Kronecker product with a small dense matrix: entry `(s, s')` of
    /// `self` and `(l, m)` of `t` go to `(s * nt + l, s' * nt + m)`.
    pub fn kron(&self, t: &[Vec<f64>]) -> CsrMatrix {
        let nt = t.len();
        let mut entries = Vec::with_capacity(self.nnz() * nt * nt);
        for (i, j, v) in self.entries() {
            for (l, row) in t.iter().enumerate() {
                for (m, &tv) in row.iter().enumerate() {
                    if tv != 0.0 {
                        entries.push((i * nt + l, j * nt + m, v * tv));
                    }
                }
            }
        }
        CsrMatrix::from_entries(self.n_rows * nt, self.n_cols * nt, entries)
    }

    /// Rows and columns `idx` (in that order).
    pub fn submatrix(&self, idx: &[usize]) -> CsrMatrix {
        let mut pos = vec![usize::MAX; self.n_cols.max(self.n_rows())];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut entries = Vec::new();
        for (k, &i) in idx.iter().enumerate() {
            entries.extend(self.row(i).filter(|&(j, _)| pos[j] != usize::MAX).map(|(j, v)| (k, pos[j], v)));
        }
        CsrMatrix::from_entries(idx.len(), idx.len(), entries)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, j, v) in self.entries() {
            d[i][j] += v;
        }
        d
    }
}

/// Sparse LU factorisation that can be reused for several right-hand sides.
pub struct SparseLu {
    matrix: CsrMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl SparseLu {
    /// Structural or numerical singularity is reported as [`HdgError::Singular`].
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n || n == 0 {
            return Err(HdgError::InvalidArgument(format!("cannot factor a {}x{} matrix", a.n_rows(), a.n_cols())));
        }
        let triplets: Vec<Triplet<usize, usize, f64>> = a.entries().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| HdgError::Internal(format!("sparse matrix construction failed: {e:?}")))?;
        let lu = mat.sp_lu().map_err(|e| HdgError::Singular(format!("sparse LU failed: {e:?}")))?;
        Ok(SparseLu { matrix: a.clone(), lu })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.matrix.n_rows();
        if b.len() != n {
            return Err(HdgError::InvalidArgument(format!("right-hand side has length {}, expected {n}", b.len())));
        }
        let rhs = Col::<f64>::from_fn(n, |i| b[i]);
        let x = self.lu.solve(&rhs);
        let x: Vec<f64> = (0..n).map(|i| x[i]).collect();
        check_solution(&self.matrix, &x, b)?;
        Ok(x)
    }
}

/// Solves `A x = b` with a sparse LU factorisation. Structural or numerical
/// singularity is reported as [`HdgError::Singular`].
pub fn solve_sparse(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n_rows();
    if a.n_cols() != n || b.len() != n {
        return Err(HdgError::InvalidArgument(format!(
            "system is {}x{} with right-hand side of length {}",
            a.n_rows(),
            a.n_cols(),
            b.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    SparseLu::new(a)?.solve(b)
}

/// Rejects non-finite solutions and residuals above `1e-6` relative to
/// `|A| |x| + |b|`.
fn check_solution(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(HdgError::Singular("linear solve produced non-finite values".into()));
    }
    let r = a.matvec(x);
    let res = r.iter().zip(b).map(|(r, b)| (r - b).abs()).fold(0.0, f64::max);
    let scale = a.max_abs() * x.iter().fold(0.0f64, |m, v| m.max(v.abs())) + b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if res > 1e-6 * scale.max(f64::MIN_POSITIVE) {
        return Err(HdgError::Singular(format!("linear solve residual {res:e} relative to scale {scale:e}")));
    }
    Ok(())
}

/// Dense LU factorisation with partial pivoting.
pub struct DenseLu {
    n: usize,
    lu: faer::linalg::solvers::PartialPivLu<f64>,
    matrix: Mat<f64>,
}

impl DenseLu {
    /// `a` is row-major, `n x n`.
    pub fn new(n: usize, a: &[f64]) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let matrix = Mat::<f64>::from_fn(n, n, |i, j| a[i * n + j]);
        let lu = matrix.partial_piv_lu();
        Ok(DenseLu { n, lu, matrix })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let rhs = Col::<f64>::from_fn(self.n, |i| b[i]);
        let x = self.lu.solve(&rhs);
        let out: Vec<f64> = (0..self.n).map(|i| x[i]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(HdgError::Singular("dense LU solve produced non-finite values".into()));
        }
        Ok(out)
    }

    /// Solves for several right-hand sides given as columns of the row-major
    /// `n x m` matrix `b`; the result has the same layout.
    pub fn solve_many(&self, m: usize, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.n * m);
        let rhs = Mat::<f64>::from_fn(self.n, m, |i, j| b[i * m + j]);
        let x = self.lu.solve(&rhs);
        let mut out = vec![0.0; self.n * m];
        for i in 0..self.n {
            for j in 0..m {
                out[i * m + j] = x[(i, j)];
            }
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(HdgError::Singular("dense LU solve produced non-finite values".into()));
        }
        Ok(out)
    }

    /// Largest absolute entry of the factored matrix.
    pub fn scale(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.n {
            for i in 0..self.n {
                m = m.max(self.matrix[(i, j)].abs());
            }
        }
        m
    }
}

/// Solves a small dense system given row-major.
pub fn solve_dense(n: usize, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    DenseLu::new(n, a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_entries(2, 2, vec![(0, 1, 1.0), (1, 0, 2.0), (0, 1, 0.5), (0, 0, 3.0)]);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.get(0, 1), 1.5);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.matvec(&[1.0, 2.0]), vec![6.0, 2.0]);
        assert_eq!(a.transpose().get(1, 0), 1.5);
    }

    #[test]
    fn kron_layout() {
        let a = CsrMatrix::from_entries(2, 2, vec![(0, 1, 2.0)]);
        let k = a.kron(&[vec![1.0, 3.0], vec![0.0, 5.0]]);
        assert_eq!(k.n_rows(), 4);
        assert_eq!(k.get(0, 2), 2.0);
        assert_eq!(k.get(0, 3), 6.0);
        assert_eq!(k.get(1, 3), 10.0);
        assert_eq!(k.get(1, 2), 0.0);
    }

    #[test]
    fn sparse_solve_matches() {
        let a = CsrMatrix::from_entries(3, 3, vec![(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 2.0), (2, 0, -1.0)]);
        let x = vec![1.0, -2.0, 0.5];
        let b = a.matvec(&x);
        let y = solve_sparse(&a, &b).unwrap();
        for i in 0..3 {
            assert!((x[i] - y[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_reported() {
        let a = CsrMatrix::from_entries(2, 2, vec![(0, 0, 1.0)]);
        assert!(matches!(solve_sparse(&a, &[1.0, 1.0]), Err(HdgError::Singular(_))));
    }

    #[test]
    fn dense_multiple_rhs() {
        let lu = DenseLu::new(2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        let x = lu.solve_many(2, &[3.0, 1.0, 4.0, 0.0]).unwrap();
        // columns: b1 = (3, 4) -> (1, 1); b2 = (1, 0) -> (0.6, -0.2)
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[2] - 1.0).abs() < 1e-14);
        assert!((x[1] - 0.6).abs() < 1e-14 && (x[3] + 0.2).abs() < 1e-14);
    }
}
