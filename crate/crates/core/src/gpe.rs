//! Discrete Gross–Pitaevskii energy and its derivatives.
//!
//! With `ρ_j = Σ_i κ_ij |φ_i|²` evaluated at quadrature points, the component
//! Hamiltonians are `A_j = S + V_j + iΩ_j R + W(ρ_j)` and the energy is
//! `E = Σ_j ½ Re(φ_jᴴ(S + V_j + iΩ_j R)φ_j) + ¼ Σ_ij κ_ij ∫|φ_i|²|φ_j|²`.
//! The Euclidean derivative in the real pairing is `AΦ` column by column.

use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fem::Discretization;
use crate::frame::PFrame;
use crate::linalg::{
    axpy_re, dot_re, pcg, Breakdown, CsrMatrix, Ilu0, LinearMap, Linearity, PcgOptions, Preconditioner,
    StopCriterion,
};
use crate::model::ModelSpec;
use crate::C64;

/// Lagrange multipliers `λ_j`, one per component.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierDiag(pub Vec<f64>);

impl Deref for MultiplierDiag {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Riemannian metric used for gradients and preconditioning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricSelector {
    /// `G_j = A_j`.
    EnergyAdaptive,
    /// `G_j = A_j + B_jj(·, φ_j) − ω λ_j M` with `ω ∈ (0, 1)`.
    Lagrangian(f64),
}

impl MetricSelector {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MetricSelector::EnergyAdaptive => Ok(()),
            MetricSelector::Lagrangian(w) if w > 0.0 && w < 1.0 => Ok(()),
            MetricSelector::Lagrangian(w) => {
                Err(Error::Config(format!("regularization parameter must lie in (0,1), got {w}")))
            }
        }
    }
}

/// Which matrix the per-component ILU(0) preconditioner is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PreconditionerSource {
    /// The density-free operator `S + V_j + iΩ_j R`.
    #[default]
    LinearPart,
    /// `A_j` at the initial guess.
    InitialIterate,
}

/// Component operator `v ↦ H v + C v̄` with `H` Hermitian and `C` complex
/// symmetric. Without `C` it is complex-linear.
#[derive(Debug, Clone)]
pub struct ComponentOperator {
    pub h: CsrMatrix<C64>,
    pub c: Option<CsrMatrix<C64>>,
}

impl ComponentOperator {
    pub fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); x.len()];
        self.apply(x, &mut y);
        y
    }
}

impl LinearMap for ComponentOperator {
    fn dim(&self) -> usize {
        self.h.n()
    }

    fn linearity(&self) -> Linearity {
        if self.c.is_some() {
            Linearity::Real
        } else {
            Linearity::Complex
        }
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.h.matvec(x, y);
        if let Some(c) = &self.c {
            let mut t = vec![C64::new(0.0, 0.0); x.len()];
            c.matvec_conj(x, &mut t);
            for (yi, ti) in y.iter_mut().zip(&t) {
                *yi += ti;
            }
        }
    }
}

/// Limits for the inner conjugate-gradient solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolve {
    pub max_iter: usize,
    /// Lower bound applied to every requested relative tolerance.
    pub tol_floor: f64,
    pub criterion: StopCriterion,
}

impl Default for InnerSolve {
    fn default() -> Self {
        Self { max_iter: 20_000, tol_floor: 1e-14, criterion: StopCriterion::Preconditioned }
    }
}

/// Problem data shared by all iterates: spec, grid, linear parts, preconditioners.
#[derive(Debug, Clone)]
pub struct GpeProblem {
    spec: ModelSpec,
    disc: Discretization,
    a0: Vec<CsrMatrix<C64>>,
    ilu: Vec<Ilu0>,
    pub inner: InnerSolve,
}

impl GpeProblem {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let disc = Discretization::build(spec)?;
        Self::from_parts(spec.clone(), disc)
    }

    pub fn from_parts(spec: ModelSpec, disc: Discretization) -> Result<Self> {
        let p = spec.p();
        let pat = disc.pattern().clone();
        let one = C64::new(1.0, 0.0);
        let a0: Vec<_> = (0..p)
            .map(|j| {
                CsrMatrix::combine(
                    pat.clone(),
                    &[
                        (one, &disc.stiffness),
                        (one, &disc.potential_mass[j]),
                        (C64::new(0.0, spec.frequencies[j]), &disc.rotation),
                    ],
                )
            })
            .collect();
        let ilu = a0.iter().map(Ilu0::new).collect::<Result<_>>()?;
        Ok(Self { spec, disc, a0, ilu, inner: InnerSolve::default() })
    }

    /// Rebuilds the preconditioners from the chosen source matrix.
    pub fn set_preconditioner_source(&mut self, src: PreconditionerSource, phi0: &PFrame) -> Result<()> {
        self.ilu = match src {
            PreconditionerSource::LinearPart => self.a0.iter().map(Ilu0::new).collect::<Result<_>>()?,
            PreconditionerSource::InitialIterate => {
                let st = self.linearize(phi0)?;
                st.a.iter().map(Ilu0::new).collect::<Result<_>>()?
            }
        };
        Ok(())
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn disc(&self) -> &Discretization {
        &self.disc
    }

    pub fn p(&self) -> usize {
        self.spec.p()
    }

    pub fn n(&self) -> usize {
        self.disc.n()
    }

    pub fn masses(&self) -> &[f64] {
        &self.spec.masses
    }

    /// `S + V_j + iΩ_j R`.
    pub fn linear_part(&self, j: usize) -> &CsrMatrix<C64> {
        &self.a0[j]
    }

    pub fn preconditioner(&self, j: usize) -> &Ilu0 {
        &self.ilu[j]
    }

    pub fn mass_matrix(&self) -> &CsrMatrix<f64> {
        &self.disc.mass
    }

    pub fn check_frame(&self, phi: &PFrame) -> Result<()> {
        if phi.n() != self.n() {
            return Err(Error::Dimension { expected: self.n(), got: phi.n() });
        }
        if phi.p() != self.p() {
            return Err(Error::Dimension { expected: self.p(), got: phi.p() });
        }
        Ok(())
    }

    /// `M` applied to every column.
    pub fn apply_mass(&self, v: &PFrame) -> PFrame {
        let mut out = PFrame::zeros(v.n(), v.p());
        for j in 0..v.p() {
            self.disc.mass.matvec(v.col(j), out.col_mut(j));
        }
        out
    }

    /// Evaluates densities, Hamiltonians and multipliers at `phi`.
    pub fn linearize(&self, phi: &PFrame) -> Result<LinearizedState<'_>> {
        LinearizedState::new(self, phi)
    }

    /// Energy without assembling the Hamiltonians.
    pub fn energy(&self, phi: &PFrame) -> Result<f64> {
        self.check_frame(phi)?;
        let dens: Vec<Vec<f64>> = phi.columns().map(|c| self.disc.density(c)).collect();
        let q = self.disc.quartic_from_densities(&dens);
        Ok(self.energy_from_parts(phi, &q))
    }

    fn energy_from_parts(&self, phi: &PFrame, q: &DMatrix<f64>) -> f64 {
        let p = self.p();
        let mut e = 0.0;
        for j in 0..p {
            let aphi = self.a0[j].mul_vec(phi.col(j));
            e += 0.5 * dot_re(phi.col(j), &aphi);
        }
        for i in 0..p {
            for j in 0..p {
                e += 0.25 * self.spec.kappa(i, j) * q[(i, j)];
            }
        }
        e
    }

    /// `Σ_j κ_ij |φ_j|²` at quadrature points for every `i`.
    pub fn interaction_densities(&self, dens: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let p = self.p();
        let nq = self.disc.num_quad_points();
        (0..p)
            .map(|i| {
                let mut r = vec![0.0; nq];
                for (j, d) in dens.iter().enumerate() {
                    let k = self.spec.kappa(i, j);
                    if k != 0.0 {
                        r.iter_mut().zip(d).for_each(|(ri, di)| *ri += k * di);
                    }
                }
                r
            })
            .collect()
    }

    pub fn assemble_a(&self, phi: &PFrame) -> Result<Vec<CsrMatrix<C64>>> {
        Ok(self.linearize(phi)?.a)
    }

    pub fn lagrange_multipliers(&self, phi: &PFrame) -> Result<MultiplierDiag> {
        Ok(self.linearize(phi)?.lambda.clone())
    }

    pub fn residual(&self, phi: &PFrame) -> Result<(f64, PFrame)> {
        let st = self.linearize(phi)?;
        Ok(st.residual())
    }

    /// Solves `op x = b` with the component preconditioner; maps breakdowns to errors.
    pub fn solve_component(
        &self,
        j: usize,
        op: &dyn LinearMap,
        b: &[C64],
        rel_tol: f64,
        x0: Option<&[C64]>,
    ) -> Result<(Vec<C64>, usize)> {
        let opts = PcgOptions {
            criterion: self.inner.criterion,
            ..PcgOptions::new(rel_tol.max(self.inner.tol_floor), self.inner.max_iter)
        };
        let (x, rep) = pcg(op, b, Some(&self.ilu[j] as &dyn Preconditioner), x0, &opts);
        match rep.breakdown {
            Breakdown::None => Ok((x, rep.iterations)),
            Breakdown::Indefinite => Err(Error::IndefiniteMetric { component: j }),
            Breakdown::Stagnation => Err(Error::SolveFailed { component: j, residual: rep.rel_residual }),
        }
    }
}

/// Everything that depends on the current iterate: quadrature values,
/// densities, Hamiltonians `A_j`, `A_j φ_j`, multipliers and energy.
#[derive(Debug, Clone)]
pub struct LinearizedState<'a> {
    pub problem: &'a GpeProblem,
    pub phi: PFrame,
    /// `φ_j(x_q)`.
    pub values: Vec<Vec<C64>>,
    /// `|φ_j(x_q)|²`.
    pub dens: Vec<Vec<f64>>,
    /// `ρ_j(x_q)`.
    pub rho: Vec<Vec<f64>>,
    pub a: Vec<CsrMatrix<C64>>,
    /// Column `j` is `A_j φ_j`.
    pub a_phi: PFrame,
    pub quartic: DMatrix<f64>,
    pub energy: f64,
    pub lambda: MultiplierDiag,
}

impl<'a> LinearizedState<'a> {
    fn new(problem: &'a GpeProblem, phi: &PFrame) -> Result<Self> {
        problem.check_frame(phi)?;
        let disc = &problem.disc;
        let p = problem.p();
        let values: Vec<Vec<C64>> = phi.columns().map(|c| disc.eval_values(c)).collect();
        let dens: Vec<Vec<f64>> = values.iter().map(|v| v.iter().map(|z| z.norm_sqr()).collect()).collect();
        let rho = problem.interaction_densities(&dens);
        let mut a = Vec::with_capacity(p);
        let mut a_phi = PFrame::zeros(phi.n(), p);
        let mut lambda = Vec::with_capacity(p);
        for j in 0..p {
            let mut aj = problem.a0[j].clone();
            aj.add_real_scaled(C64::new(1.0, 0.0), &disc.assemble_weighted_mass(&rho[j])?);
            aj.matvec(phi.col(j), a_phi.col_mut(j));
            lambda.push(dot_re(phi.col(j), a_phi.col(j)) / problem.spec.masses[j]);
            a.push(aj);
        }
        let quartic = disc.quartic_from_densities(&dens);
        let energy = problem.energy_from_parts(phi, &quartic);
        Ok(Self {
            problem,
            phi: phi.clone(),
            values,
            dens,
            rho,
            a,
            a_phi,
            quartic,
            energy,
            lambda: MultiplierDiag(lambda),
        })
    }

    pub fn p(&self) -> usize {
        self.phi.p()
    }

    /// `R_j = (A_j − λ_j M)φ_j` and `r = (Σ_j R_jᴴ M R_j)^{1/2}`.
    pub fn residual(&self) -> (f64, PFrame) {
        let mphi = self.problem.apply_mass(&self.phi);
        let mut res = self.a_phi.clone();
        for j in 0..self.p() {
            axpy_re(-self.lambda[j], mphi.col(j), res.col_mut(j));
        }
        let mr = self.problem.apply_mass(&res);
        let r2: f64 = (0..self.p()).map(|j| dot_re(res.col(j), mr.col(j))).sum();
        (r2.max(0.0).sqrt(), res)
    }

    /// `a_Φ(V, W) = Σ_j Re(w_jᴴ A_j v_j)`.
    pub fn a_inner(&self, v: &PFrame, w: &PFrame) -> f64 {
        (0..self.p()).map(|j| dot_re(w.col(j), &self.a[j].mul_vec(v.col(j)))).sum()
    }

    pub fn apply_a(&self, v: &PFrame) -> PFrame {
        let mut out = PFrame::zeros(v.n(), v.p());
        for j in 0..v.p() {
            self.a[j].matvec(v.col(j), out.col_mut(j));
        }
        out
    }

    /// `Σ_j B_ij(v_j, φ_i)` for every `i`, as load vectors.
    pub fn apply_b(&self, v: &PFrame) -> PFrame {
        let disc = self.problem.disc();
        let spec = self.problem.spec();
        let p = self.p();
        let nq = disc.num_quad_points();
        let s: Vec<Vec<f64>> = (0..p)
            .map(|j| {
                let vq = disc.eval_values(v.col(j));
                self.values[j].iter().zip(&vq).map(|(f, g)| (f * g.conj()).re).collect()
            })
            .collect();
        let mut out = PFrame::zeros(v.n(), p);
        for i in 0..p {
            let mut g = vec![C64::new(0.0, 0.0); nq];
            for (j, sj) in s.iter().enumerate() {
                let k = 2.0 * spec.kappa(i, j);
                if k != 0.0 {
                    for q in 0..nq {
                        g[q] += self.values[i][q] * (k * sj[q]);
                    }
                }
            }
            let load = disc.integrate_against_basis(&g).expect("quadrature sizes agree");
            out.col_mut(i).copy_from_slice(&load);
        }
        out
    }

    /// Second derivative of the energy: `A_i v_i + Σ_j B_ij(v_j, φ_i)`.
    pub fn apply_hess_energy(&self, v: &PFrame) -> PFrame {
        let av = self.apply_a(v);
        let bv = self.apply_b(v);
        av.add_scaled(1.0, &bv)
    }

    /// Hessian of the Lagrangian at multipliers `lambda`.
    pub fn apply_hess_lagrangian(&self, lambda: &[f64], v: &PFrame) -> PFrame {
        let mut out = self.apply_hess_energy(v);
        let mv = self.problem.apply_mass(v);
        for j in 0..v.p() {
            axpy_re(-lambda[j], mv.col(j), out.col_mut(j));
        }
        out
    }

    /// `A_j + B_jj(·, φ_j) − shift · M` as an assembled real-linear operator.
    pub fn hessian_block(&self, j: usize, shift: f64) -> ComponentOperator {
        let disc = self.problem.disc();
        let k = self.problem.spec().kappa(j, j);
        let mut h = self.a[j].clone();
        if k != 0.0 {
            let w: Vec<f64> = self.dens[j].iter().map(|d| k * d).collect();
            h.add_real_scaled(C64::new(1.0, 0.0), &disc.assemble_weighted_mass_signed(&w));
        }
        if shift != 0.0 {
            h.add_real_scaled(C64::new(-shift, 0.0), &disc.mass);
        }
        let c = (k != 0.0).then(|| {
            let w: Vec<C64> = self.values[j].iter().map(|f| f * f * k).collect();
            disc.assemble_weighted_mass_complex(&w)
        });
        ComponentOperator { h, c }
    }

    pub fn metric_operator(&self, j: usize, sel: MetricSelector) -> ComponentOperator {
        match sel {
            MetricSelector::EnergyAdaptive => ComponentOperator { h: self.a[j].clone(), c: None },
            MetricSelector::Lagrangian(w) => self.hessian_block(j, w * self.lambda[j]),
        }
    }

    pub fn metric_operators(&self, sel: MetricSelector) -> Vec<ComponentOperator> {
        (0..self.p()).map(|j| self.metric_operator(j, sel)).collect()
    }

    pub fn apply_metric(&self, sel: MetricSelector, v: &PFrame) -> PFrame {
        let mut out = PFrame::zeros(v.n(), v.p());
        for (j, g) in self.metric_operators(sel).iter().enumerate() {
            g.apply(v.col(j), out.col_mut(j));
        }
        out
    }

    /// `G_j⁻¹ rhs_j` for every component. Returns the total CG iteration count.
    pub fn solve_metric(
        &self,
        sel: MetricSelector,
        rhs: &PFrame,
        rel_tol: f64,
        x0: Option<&PFrame>,
    ) -> Result<(PFrame, usize)> {
        sel.validate()?;
        let ops = self.metric_operators(sel);
        solve_with_operators(self.problem, &ops, rhs, rel_tol, x0)
    }
}

/// Componentwise preconditioned CG solves with prebuilt operators.
pub fn solve_with_operators(
    problem: &GpeProblem,
    ops: &[ComponentOperator],
    rhs: &PFrame,
    rel_tol: f64,
    x0: Option<&PFrame>,
) -> Result<(PFrame, usize)> {
    let mut out = PFrame::zeros(rhs.n(), rhs.p());
    let mut iters = 0;
    for (j, g) in ops.iter().enumerate() {
        let (x, it) = problem.solve_component(j, g, rhs.col(j), rel_tol, x0.map(|x| x.col(j)))?;
        out.col_mut(j).copy_from_slice(&x);
        iters += it;
    }
    Ok((out, iters))
}
