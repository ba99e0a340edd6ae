use crate::error::{Error, Result};
use crate::frame::PFrame;
use crate::gpe::{GpeProblem, LinearizedState};
use crate::linalg::dot_re;
use crate::manifold::{normalize, retract, riemannian_grad, WarmStart};
use crate::C64;

use super::{Method, StepRule};

/// Interior dofs set to one, each column scaled to mass `N_j`.
pub fn initial_guess(problem: &GpeProblem) -> PFrame {
    let ones = vec![vec![C64::new(1.0, 0.0); problem.n()]; problem.p()];
    normalize(problem, &PFrame::from_columns(ones)).expect("interior is nonempty")
}

/// Inputs to a step-size rule.
pub struct StepContext<'s, 'a> {
    pub state: &'s LinearizedState<'a>,
    pub grad: &'s PFrame,
    /// Previous iterate and gradient, if any.
    pub previous: Option<(&'s PFrame, &'s PFrame)>,
    pub previous_tau: Option<f64>,
}

pub fn choose_step(rule: &StepRule, ctx: &StepContext<'_, '_>) -> Result<f64> {
    match *rule {
        StepRule::Fixed(tau) => Ok(tau),
        StepRule::Adaptive { tau0 } => {
            let fallback = ctx.previous_tau.unwrap_or(tau0);
            let Some((phi_prev, grad_prev)) = ctx.previous else {
                return Ok(tau0);
            };
            let disc = ctx.state.problem.disc();
            let dphi = ctx.state.phi.sub(phi_prev);
            let dgrad = ctx.grad.sub(grad_prev);
            let num: f64 = dphi.columns().map(|c| disc.mass_norm_sqr(c)).sum::<f64>().sqrt();
            let den: f64 = dgrad.columns().map(|c| disc.mass_norm_sqr(c)).sum::<f64>().sqrt();
            if den > 0.0 && den.is_finite() && num.is_finite() {
                Ok(num / den)
            } else {
                Ok(fallback)
            }
        }
        StepRule::ExactLineSearch { tau_min, tau_max, grid, rel_tol } => {
            if !(tau_min > 0.0 && tau_min < tau_max) || grid < 2 {
                return Err(Error::Config(format!(
                    "line search needs 0 < tau_min < tau_max and a grid of at least 2 points, got [{tau_min}, {tau_max}] with {grid}"
                )));
            }
            let curve = LineSearchCurve::new(ctx.state, ctx.grad)?;
            Ok(curve.minimize(tau_min, tau_max, grid, rel_tol))
        }
    }
}

/// `τ ↦ E(R_Φ(−τ g))` with all dependence on `τ` reduced to polynomial
/// coefficients, so each evaluation costs `O(p²)`.
#[derive(Debug, Clone)]
pub struct LineSearchCurve {
    /// `‖φ_j − τ g_j‖²_M` as coefficients of `1, τ, τ²`.
    mass: Vec<[f64; 3]>,
    /// `½ Re((φ_j − τg_j)ᴴ A0_j (φ_j − τg_j))`.
    quadratic: Vec<[f64; 3]>,
    /// `∫ |φ_i − τg_i|² |φ_j − τg_j|²` as coefficients of `1, …, τ⁴`.
    quartic: Vec<Vec<[f64; 5]>>,
    kappa: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

impl LineSearchCurve {
    pub fn new(state: &LinearizedState<'_>, direction: &PFrame) -> Result<Self> {
        let problem = state.problem;
        problem.check_frame(direction)?;
        let disc = problem.disc();
        let p = state.p();
        let phi = &state.phi;
        let mut mass = Vec::with_capacity(p);
        let mut quadratic = Vec::with_capacity(p);
        let mut d = Vec::with_capacity(p);
        for j in 0..p {
            let (f, g) = (phi.col(j), direction.col(j));
            let mf = disc.mass.mul_vec(f);
            let mg = disc.mass.mul_vec(g);
            mass.push([dot_re(f, &mf), -2.0 * dot_re(g, &mf), dot_re(g, &mg)]);
            let a0 = problem.linear_part(j);
            let af = a0.mul_vec(f);
            let ag = a0.mul_vec(g);
            quadratic.push([0.5 * dot_re(f, &af), -dot_re(g, &af), 0.5 * dot_re(g, &ag)]);
            let gq = disc.eval_values(g);
            let fq = &state.values[j];
            let d0: Vec<f64> = state.dens[j].clone();
            let d1: Vec<f64> = fq.iter().zip(&gq).map(|(a, b)| (a * b.conj()).re).collect();
            let d2: Vec<f64> = gq.iter().map(|b| b.norm_sqr()).collect();
            d.push([d0, d1, d2]);
        }
        let integrate = |x: &[f64], y: &[f64]| -> f64 {
            x.iter().zip(y).enumerate().map(|(q, (a, b))| disc.quad_weight(q) * a * b).sum()
        };
        let mut quartic = vec![vec![[0.0; 5]; p]; p];
        for i in 0..p {
            for j in i..p {
                let [a0, a1, a2] = &d[i];
                let [b0, b1, b2] = &d[j];
                let c = [
                    integrate(a0, b0),
                    -2.0 * (integrate(a0, b1) + integrate(a1, b0)),
                    integrate(a0, b2) + integrate(a2, b0) + 4.0 * integrate(a1, b1),
                    -2.0 * (integrate(a1, b2) + integrate(a2, b1)),
                    integrate(a2, b2),
                ];
                quartic[i][j] = c;
                quartic[j][i] = c;
            }
        }
        let spec = problem.spec();
        Ok(Self { mass, quadratic, quartic, kappa: spec.interaction.clone(), masses: spec.masses.clone() })
    }

    pub fn energy(&self, tau: f64) -> f64 {
        let poly2 = |c: &[f64; 3]| c[0] + tau * (c[1] + tau * c[2]);
        let p = self.masses.len();
        let scale: Vec<f64> = (0..p).map(|j| self.masses[j] / poly2(&self.mass[j])).collect();
        let mut e = 0.0;
        for j in 0..p {
            e += scale[j] * poly2(&self.quadratic[j]);
        }
        for i in 0..p {
            for j in 0..p {
                let c = &self.quartic[i][j];
                let q = c[0] + tau * (c[1] + tau * (c[2] + tau * (c[3] + tau * c[4])));
                e += 0.25 * self.kappa[i][j] * scale[i] * scale[j] * q;
            }
        }
        e
    }

    /// Scan on a log-uniform grid, then golden-section refinement around the best node.
    pub fn minimize(&self, tau_min: f64, tau_max: f64, grid: usize, rel_tol: f64) -> f64 {
        let ratio = (tau_max / tau_min).ln();
        let nodes: Vec<f64> =
            (0..grid).map(|k| tau_min * (ratio * k as f64 / (grid - 1) as f64).exp()).collect();
        let mut best = 0;
        let mut best_e = f64::INFINITY;
        for (k, &t) in nodes.iter().enumerate() {
            let e = self.energy(t);
            if e < best_e {
                best_e = e;
                best = k;
            }
        }
        let mut lo = nodes[best.saturating_sub(1)];
        let mut hi = nodes[(best + 1).min(grid - 1)];
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (self.energy(x1), self.energy(x2));
        while hi - lo > rel_tol * 0.5 * (hi + lo) {
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.energy(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.energy(x2);
            }
        }
        let mid = 0.5 * (lo + hi);
        let candidates = [(nodes[best], best_e), (mid, self.energy(mid))];
        let t = if candidates[1].1 <= candidates[0].1 { candidates[1].0 } else { candidates[0].0 };
        t.clamp(tau_min, tau_max)
    }
}

/// Result of one descent step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub phi: PFrame,
    pub grad: PFrame,
    pub warm: WarmStart,
    pub cg_iterations: usize,
}

/// One fixed-size step `Φ⁺ = R_Φ(−τ grad)` under the method's metric.
pub fn step(
    state: &LinearizedState<'_>,
    method: Method,
    tau: f64,
    rel_tol: f64,
    warm: Option<&WarmStart>,
) -> Result<StepOutcome> {
    let g = riemannian_grad(state, method.metric(), rel_tol, warm)?;
    let phi = retract(state.problem, &state.phi, &g.grad.scale(-tau))?;
    Ok(StepOutcome { phi, warm: WarmStart::from(&g), cg_iterations: g.cg_iterations, grad: g.grad })
}
