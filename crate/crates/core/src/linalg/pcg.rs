//! Preconditioned conjugate gradients in the real pairing `Re(xᴴy)`.
//!
//! For complex-linear Hermitian maps with a Hermitian preconditioner every
//! CG coefficient is real, so the iteration coincides with complex CG. For
//! real-linear maps it is exactly CG on the real `2n` embedding.

use super::{axpy_re, dot_re, norm2, LinearMap, Preconditioner};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Breakdown {
    None,
    /// Non-positive curvature `pᴴAp ≤ 0` or an indefinite preconditioner.
    Indefinite,
    /// Iteration budget exhausted before reaching the tolerance.
    Stagnation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub rel_residual: f64,
    pub breakdown: Breakdown,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.breakdown == Breakdown::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopCriterion {
    /// `sqrt(rᴴP⁻¹r) / sqrt(bᴴP⁻¹b)`.
    #[default]
    Preconditioned,
    /// `‖b − Ax‖ / ‖b‖`.
    True,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub criterion: StopCriterion,
}

impl PcgOptions {
    pub fn new(rel_tol: f64, max_iter: usize) -> Self {
        Self { rel_tol, max_iter, criterion: StopCriterion::Preconditioned }
    }
}

/// Solves `Ax = b` from a zero initial guess.
pub fn solve_pcg(
    a: &dyn LinearMap,
    b: &[C64],
    pre: Option<&dyn Preconditioner>,
    rel_tol: f64,
    max_iter: usize,
) -> (Vec<C64>, SolveReport) {
    pcg(a, b, pre, None, &PcgOptions::new(rel_tol, max_iter))
}

/// Solves `Ax = b` starting from `x0` (zero if absent).
pub fn pcg(
    a: &dyn LinearMap,
    b: &[C64],
    pre: Option<&dyn Preconditioner>,
    x0: Option<&[C64]>,
    opts: &PcgOptions,
) -> (Vec<C64>, SolveReport) {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let zero = C64::new(0.0, 0.0);
    let precondition = |r: &[C64], z: &mut [C64]| match pre {
        Some(p) => p.apply(r, z),
        None => z.copy_from_slice(r),
    };

    let mut x = match x0 {
        Some(x0) => {
            assert_eq!(x0.len(), n);
            x0.to_vec()
        }
        None => vec![zero; n],
    };
    let report = |iterations, rel_residual, breakdown| SolveReport { iterations, rel_residual, breakdown };

    let mut z = vec![zero; n];
    let b_norm = match opts.criterion {
        StopCriterion::True => norm2(b),
        StopCriterion::Preconditioned => {
            precondition(b, &mut z);
            dot_re(b, &z).max(0.0).sqrt()
        }
    };
    if b_norm == 0.0 {
        return (vec![zero; n], report(0, 0.0, Breakdown::None));
    }

    let mut r = b.to_vec();
    let mut q = vec![zero; n];
    if x0.is_some() {
        a.apply(&x, &mut q);
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= qi;
        }
    }
    precondition(&r, &mut z);
    let mut rz = dot_re(&r, &z);
    let measure = |r: &[C64], rz: f64| match opts.criterion {
        StopCriterion::True => norm2(r) / b_norm,
        StopCriterion::Preconditioned => rz.max(0.0).sqrt() / b_norm,
    };
    if rz < 0.0 {
        return (x, report(0, measure(&r, rz), Breakdown::Indefinite));
    }
    let mut res = measure(&r, rz);
    if res <= opts.rel_tol {
        return (x, report(0, res, Breakdown::None));
    }

    let mut p = z.clone();
    for it in 1..=opts.max_iter {
        a.apply(&p, &mut q);
        let pq = dot_re(&p, &q);
        if !(pq > 0.0) {
            return (x, report(it, res, Breakdown::Indefinite));
        }
        let alpha = rz / pq;
        axpy_re(alpha, &p, &mut x);
        axpy_re(-alpha, &q, &mut r);
        precondition(&r, &mut z);
        let rz_new = dot_re(&r, &z);
        if rz_new < 0.0 || !rz_new.is_finite() {
            return (x, report(it, res, Breakdown::Indefinite));
        }
        res = measure(&r, rz_new);
        if res <= opts.rel_tol {
            return (x, report(it, res, Breakdown::None));
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + *pi * beta;
        }
    }
    (x, report(opts.max_iter, res, Breakdown::Stagnation))
}
