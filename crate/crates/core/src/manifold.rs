//! Geometry of the generalized oblique manifold
//! `{Φ : Re(φ_jᴴ M φ_j) = N_j for all j}`.
//!
//! Complex Gram entries use the convention `⟨v, w⟩_C = wᴴ M v`
//! (linear in the first argument).

use crate::error::{Error, Result};
use crate::frame::PFrame;
use crate::gpe::{GpeProblem, LinearizedState, MetricSelector, MultiplierDiag};
use crate::linalg::{dot_c, dot_re};
use crate::C64;

/// Diagonal of the complex Gram matrix `g_j = ⟨v_j, w_j⟩_C`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramDiag(pub Vec<C64>);

impl GramDiag {
    pub fn real(&self) -> Vec<f64> {
        self.0.iter().map(|g| g.re).collect()
    }
}

/// Unimodular per-component phases.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiag(pub Vec<C64>);

/// Norms available for distances between frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceNorm {
    /// `M`.
    L,
    /// `M + S`.
    H,
    /// `S + V_j + iΩ_j R`, the covariant-gradient norm.
    R,
}

pub fn gram(problem: &GpeProblem, v: &PFrame, w: &PFrame) -> GramDiag {
    let mv = problem.apply_mass(v);
    GramDiag((0..v.p()).map(|j| dot_c(w.col(j), mv.col(j))).collect())
}

/// Columnwise normalization of `Φ + Z` to mass `N_j`.
pub fn retract(problem: &GpeProblem, phi: &PFrame, z: &PFrame) -> Result<PFrame> {
    normalize(problem, &phi.add_scaled(1.0, z))
}

/// Scales every column to mass `N_j`.
pub fn normalize(problem: &GpeProblem, v: &PFrame) -> Result<PFrame> {
    let mut out = v.clone();
    for j in 0..v.p() {
        let norm2 = problem.disc().mass_norm_sqr(v.col(j));
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::ZeroColumn { component: j });
        }
        let s = (problem.masses()[j] / norm2).sqrt();
        out.col_mut(j).iter_mut().for_each(|c| *c *= s);
    }
    Ok(out)
}

/// `v_j − φ_j Re(φ_jᴴ M v_j)/N_j`.
pub fn project_tangent(problem: &GpeProblem, phi: &PFrame, v: &PFrame) -> PFrame {
    let mv = problem.apply_mass(v);
    let mut out = v.clone();
    for j in 0..v.p() {
        let c = dot_re(phi.col(j), mv.col(j)) / problem.masses()[j];
        for (o, f) in out.col_mut(j).iter_mut().zip(phi.col(j)) {
            *o -= f * c;
        }
    }
    out
}

/// `v_j − φ_j (φ_jᴴ M v_j)/N_j`; also removes the vertical directions `iφ_j`.
pub fn project_horizontal(problem: &GpeProblem, phi: &PFrame, v: &PFrame) -> PFrame {
    let mv = problem.apply_mass(v);
    let mut out = v.clone();
    for j in 0..v.p() {
        let c = dot_c(phi.col(j), mv.col(j)) / problem.masses()[j];
        for (o, f) in out.col_mut(j).iter_mut().zip(phi.col(j)) {
            *o -= f * c;
        }
    }
    out
}

/// Riemannian gradient with its ingredients.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub grad: PFrame,
    /// `Σ_j = Re(φ_jᴴ M y_j) / Re(φ_jᴴ M u_j)`.
    pub sigma: MultiplierDiag,
    /// `G⁻¹ A Φ` (equal to `Φ` for the energy-adaptive metric).
    pub y: PFrame,
    /// `G⁻¹ M Φ`.
    pub u: PFrame,
    pub cg_iterations: usize,
}

/// Previous solutions reused as initial guesses.
#[derive(Debug, Clone, Default)]
pub struct WarmStart {
    pub y: Option<PFrame>,
    pub u: Option<PFrame>,
}

impl From<&Gradient> for WarmStart {
    fn from(g: &Gradient) -> Self {
        Self { y: Some(g.y.clone()), u: Some(g.u.clone()) }
    }
}

/// `grad = Y − U Σ` with `Y = G⁻¹AΦ`, `U = G⁻¹MΦ`.
pub fn riemannian_grad(
    state: &LinearizedState<'_>,
    sel: MetricSelector,
    rel_tol: f64,
    warm: Option<&WarmStart>,
) -> Result<Gradient> {
    sel.validate()?;
    let problem = state.problem;
    let phi = &state.phi;
    let mphi = problem.apply_mass(phi);
    let ops = state.metric_operators(sel);
    let warm_u = warm.and_then(|w| w.u.as_ref());
    let warm_y = warm.and_then(|w| w.y.as_ref());
    let (u, mut iters) = crate::gpe::solve_with_operators(problem, &ops, &mphi, rel_tol, warm_u)?;
    let y = match sel {
        MetricSelector::EnergyAdaptive => phi.clone(),
        MetricSelector::Lagrangian(_) => {
            let (y, it) = crate::gpe::solve_with_operators(problem, &ops, &state.a_phi, rel_tol, warm_y)?;
            iters += it;
            y
        }
    };
    let mut sigma = Vec::with_capacity(phi.p());
    let mut grad = y.clone();
    for j in 0..phi.p() {
        let num = dot_re(mphi.col(j), y.col(j));
        let den = dot_re(mphi.col(j), u.col(j));
        if !den.is_finite() || den.abs() <= f64::MIN_POSITIVE || den.abs() <= 1e-14 * num.abs() {
            return Err(Error::DegenerateState { component: j, value: den });
        }
        let s = num / den;
        sigma.push(s);
        for (g, uu) in grad.col_mut(j).iter_mut().zip(u.col(j)) {
            *g -= uu * s;
        }
    }
    Ok(Gradient { grad, sigma: MultiplierDiag(sigma), y, u, cg_iterations: iters })
}

/// Per-component phases `θ_j = conj(g_j)/|g_j|` with `g_j = ⟨v_j, ref_j⟩_C`,
/// so that `⟨v_j θ_j, ref_j⟩_C` is real and positive.
pub fn phase_align(problem: &GpeProblem, v: &PFrame, reference: &PFrame) -> Result<(PFrame, PhaseDiag)> {
    let g = gram(problem, v, reference);
    let mut theta = Vec::with_capacity(v.p());
    for (j, gj) in g.0.iter().enumerate() {
        let scale =
            (problem.disc().mass_norm_sqr(v.col(j)) * problem.disc().mass_norm_sqr(reference.col(j))).sqrt();
        let mag = gj.norm();
        if !(mag > 1e-14 * scale) || !mag.is_finite() || mag == 0.0 {
            return Err(Error::AlignmentUndefined { component: j });
        }
        theta.push(gj.conj() / mag);
    }
    Ok((v.scale_columns(&theta), PhaseDiag(theta)))
}

/// Squared norm of a frame in the requested discrete norm.
pub fn norm_sqr(problem: &GpeProblem, v: &PFrame, norm: DistanceNorm) -> f64 {
    let disc = problem.disc();
    (0..v.p())
        .map(|j| {
            let c = v.col(j);
            match norm {
                DistanceNorm::L => disc.mass_norm_sqr(c),
                DistanceNorm::H => disc.mass_norm_sqr(c) + dot_re(c, &disc.stiffness.mul_vec(c)),
                DistanceNorm::R => dot_re(c, &problem.linear_part(j).mul_vec(c)),
            }
        })
        .sum()
}

/// `‖v‖²_R` evaluated from covariant gradients `∇v + i(Ω/2)(y,−x)v` and the
/// reduced potential `V − Ω²|x|²/4` at quadrature points.
pub fn r_norm_sqr_by_quadrature(problem: &GpeProblem, v: &PFrame) -> Result<f64> {
    let disc = problem.disc();
    let spec = problem.spec();
    let mut total = 0.0;
    for j in 0..v.p() {
        let f = disc.eval_quadrature_with_gradients(v.col(j))?;
        let grads = f.gradients.as_ref().expect("gradients requested");
        let w = spec.frequencies[j];
        let pot = &spec.potentials[j];
        for (g, &[x, y]) in disc.quad_coords().iter().enumerate() {
            let val = f.values[g];
            let half = C64::new(0.0, 0.5 * w);
            let cx = grads[g][0] + half * y * val;
            let cy = grads[g][1] - half * x * val;
            let vr = pot.eval(x, y) - 0.25 * w * w * (x * x + y * y);
            total += disc.quad_weight(g) * (cx.norm_sqr() + cy.norm_sqr() + vr * val.norm_sqr());
        }
    }
    Ok(total)
}

/// `‖Θ(Φ)Φ − Ref‖` after aligning `Φ` to `Ref`.
pub fn aligned_distance(
    problem: &GpeProblem,
    phi: &PFrame,
    reference: &PFrame,
    norm: DistanceNorm,
) -> Result<f64> {
    let (aligned, _) = phase_align(problem, phi, reference)?;
    Ok(norm_sqr(problem, &aligned.sub(reference), norm).max(0.0).sqrt())
}

/// Largest relative deviation `|Re(φ_jᴴMφ_j) − N_j| / N_j`.
pub fn feasibility_defect(problem: &GpeProblem, phi: &PFrame) -> f64 {
    (0..phi.p())
        .map(|j| {
            let n = problem.masses()[j];
            (problem.disc().mass_norm_sqr(phi.col(j)) - n).abs() / n
        })
        .fold(0.0, f64::max)
}
