//! Sparse matrices backed by `faer`, assembled from triplets.

use crate::error::{Error, Result};
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Side};

/// Collects `(row, col, value)` contributions; duplicates are summed in
/// insertion order when the matrix is built.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, capacity: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(capacity),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push(Triplet::new(row, col, value));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn build(self) -> SparseMatrix {
        let inner = SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &self.entries)
            .expect("triplet indices are within bounds by construction");
        SparseMatrix { inner }
    }
}

/// Compressed sparse column matrix.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    inner: SparseColMat<usize, f64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).build()
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn nnz(&self) -> usize {
        self.inner.compute_nnz()
    }

    pub fn faer(&self) -> &SparseColMat<usize, f64> {
        &self.inner
    }

    /// Visits stored entries column by column.
    pub fn for_each(&self, mut f: impl FnMut(usize, usize, f64)) {
        for j in 0..self.ncols() {
            let rows = self.inner.row_idx_of_col_raw(j);
            let vals = self.inner.val_of_col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                f(i, j, v);
            }
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols());
        let mut y = vec![0.0; self.nrows()];
        self.for_each(|i, j, v| y[i] += v * x[j]);
        y
    }

    /// `y = Aᵀ x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows());
        let mut y = vec![0.0; self.ncols()];
        for (j, yj) in y.iter_mut().enumerate() {
            let rows = self.inner.row_idx_of_col_raw(j);
            let vals = self.inner.val_of_col(j);
            *yj = rows.iter().zip(vals).map(|(&i, &v)| v * x[i]).sum();
        }
        y
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.tr_mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows().min(self.ncols())];
        self.for_each(|i, j, v| {
            if i == j {
                d[i] += v;
            }
        });
        d
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut rows = vec![0.0; self.nrows()];
        self.for_each(|i, _, v| rows[i] += v.abs());
        rows.into_iter().fold(0.0, f64::max)
    }

    /// `max |A_ij - A_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let dense = self.to_dense();
        let mut d: f64 = 0.0;
        for i in 0..dense.nrows() {
            for j in 0..i {
                d = d.max((dense[(i, j)] - dense[(j, i)]).abs());
            }
        }
        d
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows(), self.ncols());
        self.for_each(|i, j, v| m[(i, j)] += v);
        m
    }

    /// `Σ c_k A_k` over matrices of equal shape.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> SparseMatrix {
        let (nrows, ncols) = terms.first().map(|(_, m)| (m.nrows(), m.ncols())).unwrap_or((0, 0));
        let cap = terms.iter().map(|(_, m)| m.nnz()).sum();
        let mut b = TripletBuilder::with_capacity(nrows, ncols, cap);
        for (c, m) in terms {
            assert_eq!((m.nrows(), m.ncols()), (nrows, ncols));
            if *c != 0.0 {
                m.for_each(|i, j, v| b.push(i, j, c * v));
            }
        }
        b.build()
    }
}

/// Direct factorization of a square sparse matrix: Cholesky when the matrix
/// is symmetric positive definite, LU otherwise.
pub enum Factorization {
    Cholesky(Llt<usize, f64>),
    Lu(Box<Lu<usize, f64>>),
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Factorization::Cholesky(_) => f.write_str("Factorization::Cholesky"),
            Factorization::Lu(_) => f.write_str("Factorization::Lu"),
        }
    }
}

impl Factorization {
    pub fn new(matrix: &SparseMatrix) -> Result<Self> {
        match Self::cholesky(matrix) {
            Ok(f) => Ok(f),
            Err(_) => matrix
                .faer()
                .sp_lu()
                .map(|lu| Factorization::Lu(Box::new(lu)))
                .map_err(|e| Error::Factorization(format!("{e:?}"))),
        }
    }

    /// Fails unless the matrix is numerically symmetric positive definite.
    pub fn cholesky(matrix: &SparseMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Factorization("matrix is not square".into()));
        }
        matrix
            .faer()
            .sp_cholesky(Side::Lower)
            .map(Factorization::Cholesky)
            .map_err(|e| Error::Factorization(format!("not positive definite: {e:?}")))
    }

    pub fn is_cholesky(&self) -> bool {
        matches!(self, Factorization::Cholesky(_))
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Col::<f64>::from_fn(rhs.len(), |i| rhs[i]);
        let x = match self {
            Factorization::Cholesky(f) => f.solve(&b),
            Factorization::Lu(f) => f.solve(&b),
        };
        x.iter().copied().collect()
    }
}
