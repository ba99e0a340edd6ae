//! Zero-fill incomplete LU factorization.

use std::sync::Arc;

use super::csr::{CsrMatrix, SparsityPattern};
use super::Preconditioner;
use crate::error::{Error, Result};
use crate::C64;

/// `L U ≈ A` with `L` unit lower triangular and both factors restricted to
/// the pattern of `A`. No pivoting.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    pattern: Arc<SparsityPattern>,
    lu: Vec<C64>,
    shifted_pivots: usize,
}

impl Ilu0 {
    /// Fails on the first exactly zero pivot.
    pub fn new(a: &CsrMatrix<C64>) -> Result<Self> {
        Self::factor(a, None)
    }

    /// Replaces zero pivots by `1e-12 · max|diag(A)|`.
    pub fn with_pivot_shift(a: &CsrMatrix<C64>) -> Self {
        let p = a.pattern();
        let dmax = p.diag().iter().map(|&k| a.values()[k].norm()).fold(0.0, f64::max);
        let shift = if dmax > 0.0 { 1e-12 * dmax } else { 1e-12 };
        Self::factor(a, Some(shift)).expect("shifted factorization cannot fail")
    }

    pub fn from_real(a: &CsrMatrix<f64>) -> Result<Self> {
        let c = CsrMatrix::combine(a.pattern().clone(), &[(C64::new(1.0, 0.0), a)]);
        Self::new(&c)
    }

    /// Number of pivots replaced by the shift.
    pub fn shifted_pivots(&self) -> usize {
        self.shifted_pivots
    }

    fn factor(a: &CsrMatrix<C64>, shift: Option<f64>) -> Result<Self> {
        let pat = a.pattern().clone();
        let n = pat.n();
        let (rp, ci, dg) = (pat.row_ptr(), pat.col_idx(), pat.diag());
        let mut lu = a.values().to_vec();
        let mut shifted = 0;
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in rp[i]..rp[i + 1] {
                pos[ci[k]] = k;
            }
            for kk in rp[i]..dg[i] {
                let k = ci[kk];
                let l = lu[kk] / lu[dg[k]];
                lu[kk] = l;
                for kj in dg[k] + 1..rp[k + 1] {
                    let p = pos[ci[kj]];
                    if p != usize::MAX {
                        let u = lu[kj];
                        lu[p] -= l * u;
                    }
                }
            }
            let piv = lu[dg[i]];
            if piv.norm() == 0.0 || !piv.re.is_finite() || !piv.im.is_finite() {
                match shift {
                    Some(s) => {
                        lu[dg[i]] = C64::new(s, 0.0);
                        shifted += 1;
                    }
                    None => return Err(Error::ZeroPivot { row: i }),
                }
            }
            for k in rp[i]..rp[i + 1] {
                pos[ci[k]] = usize::MAX;
            }
        }
        Ok(Self { pattern: pat, lu, shifted_pivots: shifted })
    }

    /// Solves `L U z = r`.
    pub fn solve(&self, r: &[C64], z: &mut [C64]) {
        let pat = &*self.pattern;
        let (rp, ci, dg) = (pat.row_ptr(), pat.col_idx(), pat.diag());
        let n = pat.n();
        assert_eq!(r.len(), n);
        for i in 0..n {
            let mut s = r[i];
            for k in rp[i]..dg[i] {
                s -= self.lu[k] * z[ci[k]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in dg[i] + 1..rp[i + 1] {
                s -= self.lu[k] * z[ci[k]];
            }
            z[i] = s / self.lu[dg[i]];
        }
    }
}

impl Preconditioner for Ilu0 {
    fn apply(&self, r: &[C64], z: &mut [C64]) {
        self.solve(r, z)
    }
}
