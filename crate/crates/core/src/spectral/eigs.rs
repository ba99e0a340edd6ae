use crate::error::{Error, Result};
use crate::frame::PFrame;
use crate::gpe::{ComponentOperator, LinearizedState, MetricSelector};
use crate::linalg::{axpy_re, dot_c, dot_re, pcg, Breakdown, Ilu0, PcgOptions, Preconditioner};
use crate::C64;

use super::lanczos::{lanczos, LanczosOptions, Pairing, Which};

/// Eigenpairs in ascending order. Vectors are orthonormal in the pencil's
/// right-hand inner product (the mass matrix, or the metric for the
/// horizontal pencil). Multi-component vectors are stored column-major.
#[derive(Debug, Clone)]
pub struct EigReport {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<C64>>,
    /// `‖Tv − θv‖ / (|θ| ‖v‖)` in the right-hand norm, `T` the iteration operator.
    pub residuals: Vec<f64>,
    pub lanczos_steps: usize,
}

impl EigReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |a, &b| a.max(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigOptions {
    /// Relative Ritz residual target.
    pub tol: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_steps: 3000, seed: 0x5eed }
    }
}

impl EigOptions {
    fn inner_tol(&self) -> f64 {
        (1e-3 * self.tol).max(1e-14)
    }

    fn lanczos(&self, k: usize) -> LanczosOptions {
        LanczosOptions { k, tol: self.tol, max_steps: self.max_steps, seed: self.seed }
    }
}

fn component_check(state: &LinearizedState<'_>, j: usize, k: usize) -> Result<()> {
    if j >= state.p() {
        return Err(Error::Dimension { expected: state.p(), got: j });
    }
    if k == 0 {
        return Err(Error::Config("at least one eigenpair must be requested".into()));
    }
    Ok(())
}

/// Turns Ritz pairs `θ` of an inverted operator into pairs `1/θ` of the pencil.
fn invert_report(
    values: Vec<f64>,
    vectors: Vec<Vec<C64>>,
    residuals: Vec<f64>,
    steps: usize,
) -> Result<EigReport> {
    let mut pairs: Vec<(f64, Vec<C64>, f64)> =
        values.into_iter().zip(vectors).zip(residuals).map(|((t, v), r)| (1.0 / t, v, r)).collect();
    if pairs.iter().any(|(l, _, _)| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::NoConvergence("inverse iteration produced a nonpositive Ritz value".into()));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(EigReport {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        residuals: pairs.iter().map(|p| p.2).collect(),
        eigenvectors: pairs.into_iter().map(|p| p.1).collect(),
        lanczos_steps: steps,
    })
}

/// `‖Tv − θv‖_B / (|θ| ‖v‖_B)` for each pair; normalizes `v` in `B`.
fn finish<A, I>(values: &[f64], vectors: &mut [Vec<C64>], mut apply: A, inner: I) -> Result<Vec<f64>>
where
    A: FnMut(&[C64]) -> Result<Vec<C64>>,
    I: Fn(&[C64], &[C64]) -> f64,
{
    let mut res = Vec::with_capacity(values.len());
    for (&t, v) in values.iter().zip(vectors.iter_mut()) {
        let nv = inner(v, v).max(0.0).sqrt();
        if nv > 0.0 {
            v.iter_mut().for_each(|z| *z /= nv);
        }
        let mut r = apply(v)?;
        axpy_re(-t, v, &mut r);
        res.push(inner(&r, &r).max(0.0).sqrt() / t.abs().max(f64::MIN_POSITIVE));
    }
    Ok(res)
}

/// The `k` smallest eigenpairs of the Hermitian pencil `(A_j, M)`.
pub fn eigs_component_a(
    state: &LinearizedState<'_>,
    j: usize,
    k: usize,
    opts: &EigOptions,
) -> Result<EigReport> {
    component_check(state, j, k)?;
    let problem = state.problem;
    let mass = &problem.disc().mass;
    let op = ComponentOperator { h: state.a[j].clone(), c: None };
    let tol = opts.inner_tol();
    let apply = |v: &[C64]| -> Result<Vec<C64>> {
        Ok(problem.solve_component(j, &op, &mass.mul_vec(v), tol, None)?.0)
    };
    let inner = |x: &[C64], y: &[C64]| dot_c(x, &mass.mul_vec(y));
    let out = lanczos(problem.n(), Pairing::Complex, apply, inner, |_| {}, Which::Largest, &opts.lanczos(k))?;
    let mut vectors = out.vectors;
    let residuals = finish(&out.values, &mut vectors, apply, |x, y| inner(x, y).re)?;
    invert_report(out.values, vectors, residuals, out.steps)
}

/// The `k` smallest eigenpairs of `F_j = A_j + B_jj(·, φ_j)` on the tangent
/// space `{Re(φ_jᴴ M v) = 0}` against `M`, in the real pairing.
pub fn eigs_projected_hessian(
    state: &LinearizedState<'_>,
    j: usize,
    k: usize,
    opts: &EigOptions,
) -> Result<EigReport> {
    component_check(state, j, k)?;
    let problem = state.problem;
    let mass = &problem.disc().mass;
    let op = state.hessian_block(j, 0.0);
    let tol = opts.inner_tol();
    let c = mass.mul_vec(state.phi.col(j));
    let z = problem.solve_component(j, &op, &c, tol, None)?.0;
    let cz = dot_re(&c, &z);
    if !(cz > 0.0) {
        return Err(Error::IndefiniteMetric { component: j });
    }
    // x = F⁻¹Mv − μ F⁻¹c with μ chosen so that Re(cᴴx) = 0.
    let apply = |v: &[C64]| -> Result<Vec<C64>> {
        let mut x = problem.solve_component(j, &op, &mass.mul_vec(v), tol, None)?.0;
        let mu = dot_re(&c, &x) / cz;
        axpy_re(-mu, &z, &mut x);
        Ok(x)
    };
    let inner = |x: &[C64], y: &[C64]| C64::new(dot_re(x, &mass.mul_vec(y)), 0.0);
    let project = |x: &mut [C64]| {
        let mu = dot_re(&c, x) / cz;
        axpy_re(-mu, &z, x);
    };
    let out = lanczos(problem.n(), Pairing::Real, apply, inner, project, Which::Largest, &opts.lanczos(k))?;
    let mut vectors = out.vectors;
    let residuals = finish(&out.values, &mut vectors, apply, |x, y| inner(x, y).re)?;
    invert_report(out.values, vectors, residuals, out.steps)
}

/// Per-component data for the horizontal constraint `φ_jᴴ M x_j = 0`.
struct HorizontalConstraint {
    c: [Vec<C64>; 2],
    z: [Vec<C64>; 2],
    /// Inverse of `[Re(c_aᴴ z_b)]`.
    gram_inv: [[f64; 2]; 2],
}

impl HorizontalConstraint {
    fn correct(&self, x: &mut [C64]) {
        let r = [dot_re(&self.c[0], x), dot_re(&self.c[1], x)];
        for b in 0..2 {
            let mu = self.gram_inv[b][0] * r[0] + self.gram_inv[b][1] * r[1];
            axpy_re(-mu, &self.z[b], x);
        }
    }
}

/// Extreme eigenvalues `η` of `(D²L(Φ, Λ), G_Φ)` on the horizontal space
/// `{φ_jᴴ M v_j = 0 ∀j}`; `Λ` are the multipliers of the state.
///
/// Lanczos runs on `Π G⁻¹ D²L` with `Π` the `G`-orthogonal projector onto
/// the horizontal space. Vectors are `G`-orthonormal.
pub fn eigs_horizontal_pencil(
    state: &LinearizedState<'_>,
    sel: MetricSelector,
    which: Which,
    k: usize,
    opts: &EigOptions,
) -> Result<EigReport> {
    sel.validate()?;
    if k == 0 {
        return Err(Error::Config("at least one eigenpair must be requested".into()));
    }
    let problem = state.problem;
    let (n, p) = (problem.n(), state.p());
    let mass = &problem.disc().mass;
    let ops = state.metric_operators(sel);
    let tol = opts.inner_tol();
    let mut cons = Vec::with_capacity(p);
    for (j, g) in ops.iter().enumerate() {
        let c0 = mass.mul_vec(state.phi.col(j));
        let c1: Vec<C64> = c0.iter().map(|v| v * C64::i()).collect();
        let z0 = problem.solve_component(j, g, &c0, tol, None)?.0;
        let z1 = problem.solve_component(j, g, &c1, tol, None)?.0;
        let s = [[dot_re(&c0, &z0), dot_re(&c0, &z1)], [dot_re(&c1, &z0), dot_re(&c1, &z1)]];
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        if !(det > 0.0 && s[0][0] > 0.0) {
            return Err(Error::IndefiniteMetric { component: j });
        }
        cons.push(HorizontalConstraint {
            c: [c0, c1],
            z: [z0, z1],
            gram_inv: [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]],
        });
    }
    let lambda = state.lambda.0.clone();
    let apply = |v: &[C64]| -> Result<Vec<C64>> {
        let frame = PFrame::from_vec(n, p, v.to_vec());
        let kv = state.apply_hess_lagrangian(&lambda, &frame);
        let mut out = PFrame::zeros(n, p);
        for (j, g) in ops.iter().enumerate() {
            let mut x = problem.solve_component(j, g, kv.col(j), tol, None)?.0;
            cons[j].correct(&mut x);
            out.col_mut(j).copy_from_slice(&x);
        }
        Ok(out.into_vec())
    };
    let inner = |x: &[C64], y: &[C64]| -> C64 {
        let s: f64 = ops
            .iter()
            .enumerate()
            .map(|(j, g)| dot_re(&x[j * n..(j + 1) * n], &g.apply_vec(&y[j * n..(j + 1) * n])))
            .sum();
        C64::new(s, 0.0)
    };
    let project = |x: &mut [C64]| {
        for (j, con) in cons.iter().enumerate() {
            con.correct(&mut x[j * n..(j + 1) * n]);
        }
    };
    let out = lanczos(n * p, Pairing::Real, apply, inner, project, which, &opts.lanczos(k))?;
    let mut vectors = out.vectors;
    let residuals = finish(&out.values, &mut vectors, apply, |x, y| inner(x, y).re)?;
    Ok(EigReport { eigenvalues: out.values, eigenvectors: vectors, residuals, lanczos_steps: out.steps })
}

/// `κ_M(G_{ω,j})` for one `ω`; `None` marks an indefinite metric block.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionEntry {
    pub omega: f64,
    pub kappa: Vec<Option<f64>>,
    pub lambda_min: Vec<Option<f64>>,
    pub lambda_max: Vec<f64>,
}

/// Condition numbers of the pencils `(H_j − ω λ_j M, M)` in the real
/// embedding; `ω = 0` gives `H_j = A_j + B_jj`.
pub fn condition_sweep(
    state: &LinearizedState<'_>,
    omegas: &[f64],
    opts: &EigOptions,
) -> Result<Vec<ConditionEntry>> {
    let problem = state.problem;
    let mass = &problem.disc().mass;
    let mass_pre = Ilu0::from_real(mass)?;
    let tol = opts.inner_tol();
    let inner = |x: &[C64], y: &[C64]| C64::new(dot_re(x, &mass.mul_vec(y)), 0.0);
    let mut out = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        if !(0.0..1.0).contains(&omega) {
            return Err(Error::Config(format!("omega must lie in [0, 1), got {omega}")));
        }
        let mut entry =
            ConditionEntry { omega, kappa: Vec::new(), lambda_min: Vec::new(), lambda_max: Vec::new() };
        for j in 0..state.p() {
            let g = state.hessian_block(j, omega * state.lambda[j]);
            let top = lanczos(
                problem.n(),
                Pairing::Real,
                |v: &[C64]| -> Result<Vec<C64>> {
                    let gv = g.apply_vec(v);
                    let (x, rep) = pcg(
                        mass,
                        &gv,
                        Some(&mass_pre as &dyn Preconditioner),
                        None,
                        &PcgOptions::new(tol, 10_000),
                    );
                    match rep.breakdown {
                        Breakdown::None => Ok(x),
                        _ => Err(Error::SolveFailed { component: j, residual: rep.rel_residual }),
                    }
                },
                inner,
                |_: &mut [C64]| {},
                Which::Largest,
                &opts.lanczos(1),
            )?;
            let lmax = top.values[0];
            let bottom = lanczos(
                problem.n(),
                Pairing::Real,
                |v: &[C64]| -> Result<Vec<C64>> {
                    Ok(problem.solve_component(j, &g, &mass.mul_vec(v), tol, None)?.0)
                },
                inner,
                |_: &mut [C64]| {},
                Which::Largest,
                &opts.lanczos(1),
            );
            let lmin = match bottom {
                Ok(r) if r.values[0] > 0.0 => Some(1.0 / r.values[0]),
                Ok(_) | Err(Error::IndefiniteMetric { .. }) => None,
                Err(e) => return Err(e),
            };
            entry.lambda_max.push(lmax);
            entry.lambda_min.push(lmin);
            entry.kappa.push(lmin.map(|l| lmax / l));
        }
        out.push(entry);
    }
    Ok(out)
}
