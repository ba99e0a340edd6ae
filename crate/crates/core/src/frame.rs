//! Dense `n × p` complex coefficient arrays (p-frames).

use std::ops::{Index, IndexMut};

use crate::C64;

/// Coefficients of a discrete p-frame, stored column-major: column `j`
/// holds the free-dof coefficients of component `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PFrame {
    n: usize,
    p: usize,
    data: Vec<C64>,
}

impl PFrame {
    pub fn zeros(n: usize, p: usize) -> Self {
        Self { n, p, data: vec![C64::new(0.0, 0.0); n * p] }
    }

    pub fn from_columns(columns: Vec<Vec<C64>>) -> Self {
        let p = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|c| c.len() == n), "ragged columns");
        Self { n, p, data: columns.into_iter().flatten().collect() }
    }

    pub fn from_vec(n: usize, p: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), n * p);
        Self { n, p, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[C64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [C64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[C64]> {
        self.data.chunks(self.n.max(1)).take(self.p)
    }

    pub fn same_shape(&self, other: &PFrame) -> bool {
        self.n == other.n && self.p == other.p
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &PFrame) -> PFrame {
        assert!(self.same_shape(other));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b * alpha).collect();
        PFrame { data, ..*self }
    }

    pub fn sub(&self, other: &PFrame) -> PFrame {
        self.add_scaled(-1.0, other)
    }

    pub fn scale(&self, alpha: f64) -> PFrame {
        PFrame { data: self.data.iter().map(|a| a * alpha).collect(), ..*self }
    }

    /// Multiply column `j` by `d[j]` (right multiplication by a diagonal matrix).
    pub fn scale_columns(&self, d: &[C64]) -> PFrame {
        assert_eq!(d.len(), self.p);
        let mut out = self.clone();
        for (j, &s) in d.iter().enumerate() {
            out.col_mut(j).iter_mut().for_each(|v| *v *= s);
        }
        out
    }

    pub fn scale_columns_real(&self, d: &[f64]) -> PFrame {
        let d: Vec<C64> = d.iter().map(|&s| C64::new(s, 0.0)).collect();
        self.scale_columns(&d)
    }

    /// Multiply every entry by the imaginary unit.
    pub fn times_i(&self) -> PFrame {
        PFrame { data: self.data.iter().map(|a| C64::new(-a.im, a.re)).collect(), ..*self }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

impl Index<(usize, usize)> for PFrame {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[j * self.n + i]
    }
}

impl IndexMut<(usize, usize)> for PFrame {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[j * self.n + i]
    }
}
