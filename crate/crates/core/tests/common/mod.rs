//! Shared fixtures and dense reference computations for integration tests.
#![allow(dead_code)]

pub mod checks;
pub mod oracle;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotbec::optim::{initial_guess, run_problem, Method, RunOptions};
use rotbec::{GpeProblem, ModelSpec, PFrame, Potential, Rect, C64};

/// Two weakly coupled rotating components on a small square.
pub fn toy2(m: usize) -> ModelSpec {
    ModelSpec {
        domain: Rect::square(4.0),
        elements_per_dir: m,
        quad_order: 4,
        masses: vec![1.5, 1.0],
        frequencies: vec![-0.5, -0.3],
        potentials: vec![Potential::harmonic(0.5, 0.7), Potential::harmonic(0.6, 0.45)],
        interaction: vec![vec![12.0, 3.0], vec![3.0, 9.0]],
        assumption_margin: vec![0.05; 2],
    }
}

/// Single rotating component with a lattice term in the trap.
pub fn toy1(m: usize) -> ModelSpec {
    ModelSpec {
        domain: Rect::square(4.0),
        elements_per_dir: m,
        quad_order: 4,
        masses: vec![1.0],
        frequencies: vec![-0.4],
        potentials: vec![Potential { a: 0.5, b: 0.55, c: 0.3, d: 0.2, alpha: 1.0, beta: 1.0 }],
        interaction: vec![vec![10.0]],
        assumption_margin: vec![0.05],
    }
}

pub fn random_frame(n: usize, p: usize, rng: &mut ChaCha8Rng) -> PFrame {
    PFrame::from_vec(
        n,
        p,
        (0..n * p).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect(),
    )
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Converged critical point reached by LagrRGD from the constant guess.
pub fn ground_state(problem: &GpeProblem, stop: f64) -> PFrame {
    let opts = RunOptions {
        method: Method::LagrRgd(0.5),
        stop_residual: stop,
        max_iters: 20_000,
        tol_cg: 1e-6,
        ..RunOptions::default()
    };
    let res = run_problem(problem, initial_guess(problem), &opts, None).expect("run");
    assert!(res.residual < stop, "toy ground state did not converge: {}", res.residual);
    res.phi
}

/// Orthonormal basis of `{x : Cᵀx = 0}`.
pub fn null_space(c: &DMatrix<f64>) -> DMatrix<f64> {
    let n = c.nrows();
    let gram = c.transpose() * c;
    let proj =
        DMatrix::identity(n, n) - c * gram.try_inverse().expect("independent constraints") * c.transpose();
    let eig = SymmetricEigen::new(proj);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&k| eig.eigenvalues[k] > 0.5)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect();
    DMatrix::from_columns(&cols)
}

/// Ascending eigenvalues of the symmetric pencil `(K, B)` restricted to
/// `{Cᵀx = 0}` (no restriction if `c` has no columns).
pub fn restricted_pencil(k: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Vec<f64> {
    let (kr, br) = if c.ncols() == 0 {
        (k.clone(), b.clone())
    } else {
        let q = null_space(c);
        (q.transpose() * k * &q, q.transpose() * b * &q)
    };
    let kr = 0.5 * (&kr + kr.transpose());
    let br = 0.5 * (&br + br.transpose());
    let l = br.cholesky().expect("right-hand side SPD").l();
    let li = l.try_inverse().unwrap();
    let s = &li * kr * li.transpose();
    let s = 0.5 * (&s + s.transpose());
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Golub–Welsch Gauss–Legendre rule: eigenvalues of the Jacobi matrix.
pub fn golub_welsch(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(q, q);
    for k in 1..q {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> =
        (0..q).map(|k| (eig.eigenvalues[k], 2.0 * eig.eigenvectors[(0, k)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
