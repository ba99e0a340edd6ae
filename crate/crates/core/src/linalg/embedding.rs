//! Explicit real `2n` embedding of complex vectors and maps.
//!
//! `v = vR + i vI ↦ (vR, vI)`; a complex matrix `A` maps to the real block
//! matrix `[[Re A, −Im A], [Im A, Re A]]`. The solvers never build these; they
//! exist so tests can compare against dense real linear algebra.

use nalgebra::{DMatrix, DVector};

use super::LinearMap;
use crate::C64;

pub fn embed(v: &[C64]) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |k, _| if k < n { v[k].re } else { v[k - n].im })
}

pub fn unembed(v: &DVector<f64>) -> Vec<C64> {
    assert!(v.len() % 2 == 0);
    let n = v.len() / 2;
    (0..n).map(|k| C64::new(v[k], v[k + n])).collect()
}

pub fn block_matrix(a: &DMatrix<C64>) -> DMatrix<f64> {
    let (r, c) = a.shape();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = a[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Dense real matrix of any real-linear map, built column by column from the
/// images of `e_k` and `i e_k`.
pub fn real_linear_to_dense(map: &dyn LinearMap) -> DMatrix<f64> {
    let n = map.dim();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut y = vec![C64::new(0.0, 0.0); n];
    for k in 0..2 * n {
        e.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        e[k % n] = if k < n { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
        map.apply(&e, &mut y);
        out.set_column(k, &embed(&y));
    }
    out
}
