//! Compressed sparse row storage sharing one sorted-column pattern.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::{LinearMap, Linearity};
use crate::C64;

/// Row offsets and sorted column indices, shared by every matrix on a grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    diag: Vec<usize>,
}

impl SparsityPattern {
    /// Builds the pattern from per-row column lists (duplicates allowed).
    /// Every diagonal entry is included.
    pub fn from_rows(mut rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut diag = Vec::with_capacity(n);
        row_ptr.push(0);
        for (i, row) in rows.iter_mut().enumerate() {
            row.push(i);
            row.sort_unstable();
            row.dedup();
            assert!(row.iter().all(|&c| c < n), "column index out of range");
            let start = col_idx.len();
            diag.push(start + row.binary_search(&i).unwrap());
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, diag }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    /// Position of the diagonal entry of each row.
    pub fn diag(&self) -> &[usize] {
        &self.diag
    }

    pub fn row(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row(i);
        self.col_idx[r.clone()].binary_search(&j).ok().map(|k| r.start + k)
    }

    pub fn is_structurally_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|k| self.find(self.col_idx[k], i).is_some()))
    }
}

/// Scalar types storable in a [`CsrMatrix`].
pub trait Entry: Copy + Default + PartialEq + std::fmt::Debug + Send + Sync + 'static {
    fn to_c64(self) -> C64;
    fn conj_entry(self) -> Self;
    fn magnitude(self) -> f64;
}

impl Entry for f64 {
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    fn conj_entry(self) -> Self {
        self
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Entry for C64 {
    fn to_c64(self) -> C64 {
        self
    }
    fn conj_entry(self) -> Self {
        self.conj()
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Sparse matrix with values laid out along a shared [`SparsityPattern`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    pattern: Arc<SparsityPattern>,
    values: Vec<T>,
}

/// Complex matrix expected to satisfy `A = Aᴴ`.
pub type SparseHermitian = CsrMatrix<C64>;

impl<T: Entry> CsrMatrix<T> {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![T::default(); pattern.nnz()];
        Self { pattern, values }
    }

    pub fn from_values(pattern: Arc<SparsityPattern>, values: Vec<T>) -> Self {
        assert_eq!(values.len(), pattern.nnz());
        Self { pattern, values }
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.pattern.find(i, j).map_or(T::default(), |k| self.values[k])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.magnitude()).fold(0.0, f64::max)
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        let p = &*self.pattern;
        assert_eq!(x.len(), p.n);
        assert_eq!(y.len(), p.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                acc += self.values[k].to_c64() * x[p.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// `y = A x̄`.
    pub fn matvec_conj(&self, x: &[C64], y: &mut [C64]) {
        let p = &*self.pattern;
        assert_eq!(x.len(), p.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                acc += self.values[k].to_c64() * x[p.col_idx[k]].conj();
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.n()];
        self.matvec(x, &mut y);
        y
    }

    /// `max |A_ij − conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let p = &*self.pattern;
        let mut d = 0.0_f64;
        for i in 0..p.n {
            for k in p.row(i) {
                let j = p.col_idx[k];
                let t = p.find(j, i).map_or(T::default(), |kt| self.values[kt]);
                d = d.max((self.values[k].to_c64() - t.conj_entry().to_c64()).norm());
            }
        }
        d
    }

    /// `max |A_ij + A_ji|`.
    pub fn skew_defect(&self) -> f64 {
        let p = &*self.pattern;
        let mut d = 0.0_f64;
        for i in 0..p.n {
            for k in p.row(i) {
                let j = p.col_idx[k];
                let t = p.find(j, i).map_or(T::default(), |kt| self.values[kt]);
                d = d.max((self.values[k].to_c64() + t.to_c64()).norm());
            }
        }
        d
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let p = &*self.pattern;
        let mut d = DMatrix::zeros(p.n, p.n);
        for i in 0..p.n {
            for k in p.row(i) {
                d[(i, p.col_idx[k])] = self.values[k].to_c64();
            }
        }
        d
    }
}

impl CsrMatrix<f64> {
    pub fn to_dense_real(&self) -> DMatrix<f64> {
        self.to_dense().map(|z| z.re)
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix<f64>) -> CsrMatrix<f64> {
        assert!(Arc::ptr_eq(&self.pattern, &other.pattern) || self.pattern == other.pattern);
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + alpha * b).collect();
        CsrMatrix::from_values(self.pattern.clone(), values)
    }
}

impl CsrMatrix<C64> {
    /// Complex matrix `Σ c_k B_k` from real matrices on the same pattern.
    pub fn combine(pattern: Arc<SparsityPattern>, terms: &[(C64, &CsrMatrix<f64>)]) -> Self {
        let mut values = vec![C64::new(0.0, 0.0); pattern.nnz()];
        for (c, m) in terms {
            assert_eq!(m.pattern.nnz(), pattern.nnz());
            for (v, &b) in values.iter_mut().zip(&m.values) {
                *v += c * b;
            }
        }
        Self { pattern, values }
    }

    /// `self += alpha * other` for a real matrix on the same pattern.
    pub fn add_real_scaled(&mut self, alpha: C64, other: &CsrMatrix<f64>) {
        assert_eq!(self.values.len(), other.values.len());
        for (v, &b) in self.values.iter_mut().zip(&other.values) {
            *v += alpha * b;
        }
    }

    /// `self += alpha * other` for a complex matrix on the same pattern.
    pub fn add_complex_scaled(&mut self, alpha: C64, other: &CsrMatrix<C64>) {
        assert_eq!(self.values.len(), other.values.len());
        for (v, &b) in self.values.iter_mut().zip(&other.values) {
            *v += alpha * b;
        }
    }
}

impl LinearMap for CsrMatrix<C64> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn linearity(&self) -> Linearity {
        Linearity::Complex
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matvec(x, y)
    }
}

impl LinearMap for CsrMatrix<f64> {
    fn dim(&self) -> usize {
        self.n()
    }

    fn linearity(&self) -> Linearity {
        Linearity::Complex
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matvec(x, y)
    }
}
