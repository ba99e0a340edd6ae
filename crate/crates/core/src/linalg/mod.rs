//! Sparse storage, incomplete factorization and conjugate gradients.
//!
//! Vectors are always complex. Maps that are only real-linear (they involve
//! complex conjugation of the argument) are handled through the real inner
//! product `Re(xᴴy)`, which is the Euclidean product of the stacked real
//! vectors `(Re x, Im x)`. Conjugate gradients and Lanczos are written against
//! that pairing, so they act on the real `2n` embedding without materializing
//! it; [`embedding`] provides the explicit form for testing.

pub mod csr;
pub mod embedding;
pub mod ilu;
pub mod pcg;

pub use csr::{CsrMatrix, SparseHermitian, SparsityPattern};
pub use ilu::Ilu0;
pub use pcg::{pcg, solve_pcg, Breakdown, PcgOptions, SolveReport, StopCriterion};

use crate::C64;

/// Whether a map commutes with multiplication by `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linearity {
    Complex,
    Real,
}

/// `v ↦ Av` on complex vectors of fixed dimension.
pub trait LinearMap {
    fn dim(&self) -> usize;
    fn linearity(&self) -> Linearity;
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

/// Approximate inverse, applied as `z = P⁻¹ r`. Must be complex-linear.
pub trait Preconditioner {
    fn apply(&self, r: &[C64], z: &mut [C64]);
}

/// No preconditioning.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[C64], z: &mut [C64]) {
        z.copy_from_slice(r);
    }
}

/// Wraps a closure as a [`LinearMap`].
pub struct FnMap<F> {
    dim: usize,
    linearity: Linearity,
    f: F,
}

impl<F: Fn(&[C64], &mut [C64])> FnMap<F> {
    pub fn new(dim: usize, linearity: Linearity, f: F) -> Self {
        Self { dim, linearity, f }
    }
}

impl<F: Fn(&[C64], &mut [C64])> LinearMap for FnMap<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn linearity(&self) -> Linearity {
        self.linearity
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        (self.f)(x, y)
    }
}

/// Real pairing `Re(xᴴy)`.
pub fn dot_re(x: &[C64], y: &[C64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

/// Complex pairing `xᴴy`.
pub fn dot_c(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha * x`.
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y += alpha * x` for real `alpha`.
pub fn axpy_re(alpha: f64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += xi * alpha;
    }
}
