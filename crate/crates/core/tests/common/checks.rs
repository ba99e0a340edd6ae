//! Property checks shared by the proptest suite and the acceptance run.
//! Each returns `Err` with a description when the property fails.

use rotbec::linalg::dot_re;
use rotbec::manifold::{gram, normalize, project_horizontal, project_tangent, retract};
use rotbec::{GpeProblem, PFrame, C64};

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub fn problem() -> GpeProblem {
    GpeProblem::new(&super::toy2(4)).unwrap()
}

pub fn random_point(problem: &GpeProblem, seed: u64) -> PFrame {
    let mut rng = super::rng(seed);
    normalize(problem, &super::random_frame(problem.n(), problem.p(), &mut rng)).unwrap()
}

pub fn random_vector(problem: &GpeProblem, seed: u64) -> PFrame {
    let mut rng = super::rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    super::random_frame(problem.n(), problem.p(), &mut rng)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn err(e: rotbec::Error) -> String {
    e.to_string()
}

/// Energy, residual and multipliers under per-component phases `angles`.
pub fn phase_invariance(prob: &GpeProblem, seed: u64, angles: &[f64]) -> Result<(), String> {
    let phi = random_point(prob, seed);
    let theta: Vec<C64> = angles.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let rot = phi.scale_columns(&theta);
    let a = prob.linearize(&phi).map_err(err)?;
    let b = prob.linearize(&rot).map_err(err)?;
    ensure!(rel(b.energy, a.energy) <= 1e-12, "energy {} vs {}", b.energy, a.energy);
    let (ra, rb) = (a.residual().0, b.residual().0);
    ensure!(rel(rb, ra) <= 1e-12, "residual {rb} vs {ra}");
    for j in 0..prob.p() {
        ensure!(rel(b.lambda[j], a.lambda[j]) <= 1e-12, "lambda_{j} {} vs {}", b.lambda[j], a.lambda[j]);
    }
    Ok(())
}

/// Tangent and horizontal projections are idempotent and satisfy their constraints.
pub fn projections(prob: &GpeProblem, seed: u64) -> Result<(), String> {
    let phi = random_point(prob, seed);
    let v = random_vector(prob, seed);
    let t = project_tangent(prob, &phi, &v);
    let tt = project_tangent(prob, &phi, &t);
    ensure!(tt.sub(&t).max_abs() <= 1e-12 * t.max_abs(), "tangent projection not idempotent");
    let h = project_horizontal(prob, &phi, &v);
    let hh = project_horizontal(prob, &phi, &h);
    ensure!(hh.sub(&h).max_abs() <= 1e-12 * h.max_abs(), "horizontal projection not idempotent");
    let gt = gram(prob, &t, &phi);
    let gh = gram(prob, &h, &phi);
    for j in 0..prob.p() {
        let n = prob.masses()[j];
        ensure!(gt.0[j].re.abs() <= 1e-12 * n, "tangent constraint {j}: {:.2e}", gt.0[j].re);
        ensure!(gh.0[j].norm() <= 1e-12 * n, "horizontal constraint {j}: {:.2e}", gh.0[j].norm());
    }
    // The horizontal projection of a tangent vector stays tangent.
    let ht = project_horizontal(prob, &phi, &t);
    ensure!(
        project_tangent(prob, &phi, &ht).sub(&ht).max_abs() <= 1e-12 * ht.max_abs(),
        "horizontal part of a tangent vector left the tangent space"
    );
    Ok(())
}

/// `‖R(τz) − (φ+τz)‖_a ≤ ½τ² max(1/N) ‖z‖²_L ‖φ+τz‖_a`.
pub fn retraction_bound(prob: &GpeProblem, seed: u64, tau: f64, scale: f64) -> Result<(), String> {
    let phi = random_point(prob, seed);
    let z = project_tangent(prob, &phi, &random_vector(prob, seed)).scale(scale);
    let st = prob.linearize(&phi).map_err(err)?;
    let moved = phi.add_scaled(tau, &z);
    let r = retract(prob, &phi, &z.scale(tau)).map_err(err)?;
    let lhs = st.a_inner(&r.sub(&moved), &r.sub(&moved)).sqrt();
    let inv_n = prob.masses().iter().fold(0.0f64, |a, &n| a.max(1.0 / n));
    let z_l2: f64 = z.columns().map(|c| prob.disc().mass_norm_sqr(c)).sum();
    let rhs = 0.5 * tau * tau * inv_n * z_l2 * st.a_inner(&moved, &moved).sqrt();
    ensure!(lhs <= rhs * (1.0 + 1e-12) + 1e-14, "{lhs} > {rhs}");
    Ok(())
}

/// Renormalizing `φ + z` with tangent `z` never raises the energy.
pub fn normalization_monotone(prob: &GpeProblem, seed: u64, scale: f64) -> Result<(), String> {
    let phi = random_point(prob, seed);
    let z = project_tangent(prob, &phi, &random_vector(prob, seed)).scale(scale);
    let before = prob.energy(&phi.add_scaled(1.0, &z)).map_err(err)?;
    let after = prob.energy(&retract(prob, &phi, &z).map_err(err)?).map_err(err)?;
    ensure!(before - after >= -1e-12 * before.abs(), "{after} > {before}");
    Ok(())
}

/// `E(φ) − E(ψ) = ½(a_φ(φ,φ) − a_φ(ψ,ψ)) − ¼ Σ κ_ij ∫(|φ_i|²−|ψ_i|²)(|φ_j|²−|ψ_j|²)`.
pub fn energy_difference(prob: &GpeProblem, seed: u64, s: f64) -> Result<(), String> {
    let p = prob.p();
    let mut rng = super::rng(seed);
    let phi = super::random_frame(prob.n(), p, &mut rng);
    let psi = super::random_frame(prob.n(), p, &mut rng).scale(s);
    let st = prob.linearize(&phi).map_err(err)?;
    let e_psi = prob.energy(&psi).map_err(err)?;
    let lhs = st.energy - e_psi;
    let disc = prob.disc();
    let diff: Vec<Vec<f64>> = phi
        .columns()
        .zip(psi.columns())
        .map(|(a, b)| disc.density(a).iter().zip(disc.density(b)).map(|(x, y)| x - y).collect())
        .collect();
    let q = disc.quartic_from_densities(&diff);
    let spec = prob.spec();
    let mut quartic = 0.0;
    for i in 0..p {
        for j in 0..p {
            quartic += spec.kappa(i, j) * q[(i, j)];
        }
    }
    let rhs = 0.5 * (st.a_inner(&phi, &phi) - st.a_inner(&psi, &psi)) - 0.25 * quartic;
    let scale = st.energy.abs() + e_psi.abs();
    ensure!((lhs - rhs).abs() <= 1e-10 * scale, "{lhs} vs {rhs}");
    Ok(())
}

/// Least-squares slope of `log err` against `log eps`.
pub fn fitted_order(eps: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub const FD_EPS: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];

/// Random point and direction for the finite-difference checks.
pub fn fd_setup(seed: u64) -> (GpeProblem, PFrame, PFrame) {
    let problem = problem();
    let mut rng = super::rng(seed);
    let phi = normalize(&problem, &super::random_frame(problem.n(), problem.p(), &mut rng)).unwrap();
    let v = super::random_frame(problem.n(), problem.p(), &mut rng);
    (problem, phi, v)
}

/// Fitted order of the central-difference error against `dE[v]`.
pub fn gradient_fd_order(seed: u64) -> Result<f64, String> {
    let (prob, phi, v) = fd_setup(seed);
    let st = prob.linearize(&phi).map_err(err)?;
    let exact: f64 = (0..prob.p()).map(|j| dot_re(v.col(j), st.a_phi.col(j))).sum();
    let mut errs = Vec::new();
    for &e in &FD_EPS {
        let ep = prob.energy(&phi.add_scaled(e, &v)).map_err(err)?;
        let em = prob.energy(&phi.add_scaled(-e, &v)).map_err(err)?;
        errs.push(((ep - em) / (2.0 * e) - exact).abs());
    }
    Ok(fitted_order(&FD_EPS, &errs))
}

/// Fitted order of the second-difference error against `d²E[v,v]`.
pub fn hessian_fd_order(seed: u64) -> Result<f64, String> {
    let (prob, phi, v) = fd_setup(seed);
    let st = prob.linearize(&phi).map_err(err)?;
    let hv = st.apply_hess_energy(&v);
    let exact: f64 = (0..prob.p()).map(|j| dot_re(v.col(j), hv.col(j))).sum();
    let mut errs = Vec::new();
    for &e in &FD_EPS {
        let ep = prob.energy(&phi.add_scaled(e, &v)).map_err(err)?;
        let em = prob.energy(&phi.add_scaled(-e, &v)).map_err(err)?;
        errs.push(((ep - 2.0 * st.energy + em) / (e * e) - exact).abs());
    }
    Ok(fitted_order(&FD_EPS, &errs))
}
