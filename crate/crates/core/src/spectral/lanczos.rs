//! Lanczos with full reorthogonalization for operators that are self-adjoint
//! in a weighted inner product `⟨x, y⟩_B = xᴴ B y`.
//!
//! With [`Pairing::Real`] only `Re⟨x, y⟩_B` is used, which is Lanczos on the
//! real `2n` embedding; real-linear operators require it. With
//! [`Pairing::Complex`] the operator must be complex-linear.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::axpy;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Largest,
    Smallest,
    /// `k` from each end.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub k: usize,
    /// Converged when `|β_m s_{m,i}| ≤ tol · max|θ|`.
    pub tol: f64,
    pub max_steps: usize,
    pub seed: u64,
}

/// Ritz pairs (ascending) with their residual estimates.
#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    pub residual_estimates: Vec<f64>,
    pub steps: usize,
}

/// Runs Lanczos on `apply` starting from `apply(random)`.
///
/// `project` maps onto the space of interest and is applied to every new
/// vector before reorthogonalization; without it rounding drift into an
/// invariant complement can surface as spurious Ritz values.
pub fn lanczos<A, I, P>(
    dim: usize,
    pairing: Pairing,
    mut apply: A,
    inner: I,
    project: P,
    which: Which,
    opts: &LanczosOptions,
) -> Result<LanczosResult>
where
    A: FnMut(&[C64]) -> Result<Vec<C64>>,
    I: Fn(&[C64], &[C64]) -> C64,
    P: Fn(&mut [C64]),
{
    let pair = |x: &[C64], y: &[C64]| -> C64 {
        let v = inner(x, y);
        match pairing {
            Pairing::Real => C64::new(v.re, 0.0),
            Pairing::Complex => v,
        }
    };
    let space_dim = match pairing {
        Pairing::Real => 2 * dim,
        Pairing::Complex => dim,
    };
    let wanted = match which {
        Which::Both => 2 * opts.k,
        _ => opts.k,
    };
    let max_steps = opts.max_steps.min(space_dim);
    if wanted == 0 || wanted > max_steps {
        return Err(Error::NoConvergence(format!(
            "cannot extract {wanted} Ritz values from at most {max_steps} steps"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let seed_vec: Vec<C64> =
        (0..dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let mut v = apply(&seed_vec)?;
    project(&mut v);
    let nrm = pair(&v, &v).re.sqrt();
    if !(nrm > 0.0 && nrm.is_finite()) {
        return Err(Error::NoConvergence("start vector vanished".into()));
    }
    v.iter_mut().for_each(|z| *z /= nrm);

    let mut basis: Vec<Vec<C64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last: Option<(Vec<f64>, DMatrix<f64>, Vec<f64>)> = None;

    for m in 1..=max_steps {
        let vm = &basis[m - 1];
        let mut w = apply(vm)?;
        let a = pair(vm, &w).re;
        alpha.push(a);
        // Classical Gram–Schmidt twice, projection, then a final pass. Projecting
        // before the subtraction instead lets drift compound geometrically.
        for pass in 0..3 {
            if pass == 2 {
                project(&mut w);
            }
            for b in &basis {
                let c = pair(b, &w);
                axpy(-c, b, &mut w);
            }
        }
        let bnext = pair(&w, &w).re.max(0.0).sqrt();

        let check = m >= wanted && (m % 5 == 0 || m == max_steps || bnext <= f64::EPSILON);
        if check {
            let t = tridiagonal(&alpha, &beta);
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
            let scale = eig.eigenvalues.iter().fold(0.0_f64, |s, x| s.max(x.abs()));
            let picks = pick(&order, which, opts.k);
            let est: Vec<f64> = picks.iter().map(|&i| (bnext * eig.eigenvectors[(m - 1, i)]).abs()).collect();
            let done = est.iter().all(|&e| e <= opts.tol * scale.max(f64::MIN_POSITIVE))
                || bnext <= f64::EPSILON * scale;
            let vals: Vec<f64> = picks.iter().map(|&i| eig.eigenvalues[i]).collect();
            let vecs = DMatrix::from_fn(m, picks.len(), |r, c| eig.eigenvectors[(r, picks[c])]);
            last = Some((vals, vecs, est));
            if done || m == max_steps {
                let (vals, coeffs, est) = last.take().unwrap();
                if !done {
                    return Err(Error::NoConvergence(format!(
                        "Lanczos reached {m} steps; worst residual estimate {:.3e}",
                        est.iter().fold(0.0_f64, |a, &b| a.max(b))
                    )));
                }
                return Ok(assemble(&basis[..m], vals, coeffs, est, m));
            }
        }
        if bnext <= f64::EPSILON {
            break;
        }
        beta.push(bnext);
        w.iter_mut().for_each(|z| *z /= bnext);
        basis.push(w);
    }
    match last {
        Some((vals, coeffs, est)) => {
            let m = coeffs.nrows();
            Ok(assemble(&basis[..m], vals, coeffs, est, m))
        }
        None => Err(Error::NoConvergence("Krylov space exhausted early".into())),
    }
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

fn pick(order: &[usize], which: Which, k: usize) -> Vec<usize> {
    let m = order.len();
    let k = k.min(m);
    let mut out: Vec<usize> = match which {
        Which::Smallest => order[..k].to_vec(),
        Which::Largest => order[m - k..].to_vec(),
        Which::Both => {
            let mut v = order[..k].to_vec();
            for &i in &order[m.saturating_sub(k).max(k)..] {
                v.push(i);
            }
            v
        }
    };
    out.dedup();
    out
}

fn assemble(
    basis: &[Vec<C64>],
    values: Vec<f64>,
    coeffs: DMatrix<f64>,
    est: Vec<f64>,
    steps: usize,
) -> LanczosResult {
    let dim = basis[0].len();
    let vectors = (0..values.len())
        .map(|c| {
            let mut x = vec![C64::new(0.0, 0.0); dim];
            for (r, b) in basis.iter().enumerate() {
                axpy(C64::new(coeffs[(r, c)], 0.0), b, &mut x);
            }
            x
        })
        .collect();
    LanczosResult { values, vectors, residual_estimates: est, steps }
}
