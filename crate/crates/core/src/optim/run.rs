use std::time::Instant;

use crate::error::{Error, Result};
use crate::frame::PFrame;
use crate::gpe::GpeProblem;
use crate::manifold::{retract, riemannian_grad, WarmStart};
use crate::model::ModelSpec;

use super::step::{choose_step, initial_guess, step, StepContext};
use super::{FallbackPolicy, IterationRecord, Method, RunOptions, RunResult, Termination};

/// Called after every main-phase iteration (and once for the starting state).
pub type Observer<'o> = &'o mut dyn FnMut(&IterationRecord, &PFrame);

/// Discretizes `spec`, starts from the constant initial guess and runs.
pub fn run(spec: &ModelSpec, options: &RunOptions, observer: Option<Observer<'_>>) -> Result<RunResult> {
    let problem = GpeProblem::new(spec)?;
    let phi0 = initial_guess(&problem);
    run_problem(&problem, phi0, options, observer)
}

/// Largest relative inner tolerance. Far from a critical point `r · tol_cg`
/// can exceed one, and a zero initial guess would then pass as a solution.
pub const MAX_INNER_TOL: f64 = 0.1;

/// `min(r · tol_cg, MAX_INNER_TOL)`.
pub fn inner_tol(residual: f64, tol_cg: f64) -> f64 {
    (residual * tol_cg).min(MAX_INNER_TOL)
}

fn check_options(o: &RunOptions) -> Result<()> {
    if !(o.stop_residual > 0.0) || !(o.tol_cg > 0.0) {
        return Err(Error::Config("tolerances must be positive".into()));
    }
    if let Some(w) = o.warm_start_residual {
        if !(w > 0.0) {
            return Err(Error::Config("warm-start residual must be positive".into()));
        }
    }
    if o.record_every == 0 {
        return Err(Error::Config("record_every must be at least 1".into()));
    }
    o.method.metric().validate()
}

/// Warm start (if enabled) followed by the requested method, from `phi0`.
pub fn run_problem(
    problem: &GpeProblem,
    phi0: PFrame,
    options: &RunOptions,
    mut observer: Option<Observer<'_>>,
) -> Result<RunResult> {
    check_options(options)?;
    problem.check_frame(&phi0)?;
    let mut phi = phi0;

    let mut warm_iters = 0;
    if let Some(target) = options.warm_start_residual {
        let mut warm = None;
        loop {
            let st = problem.linearize(&phi)?;
            let (r, _) = st.residual();
            if r < target || warm_iters >= options.warm_start_max_iters {
                break;
            }
            let out = step(&st, Method::EaRgd, 1.0, inner_tol(r, options.tol_cg), warm.as_ref())?;
            phi = out.phi;
            warm = Some(out.warm);
            warm_iters += 1;
        }
    }

    let clock = Instant::now();
    let mut method = options.method;
    let mut omega_halved = false;
    let mut fallbacks = 0;
    let mut st = problem.linearize(&phi)?;
    let (mut r, _) = st.residual();
    let mut history = Vec::new();
    let mut emit = |rec: IterationRecord, phi: &PFrame, keep: bool, history: &mut Vec<IterationRecord>| {
        if keep {
            history.push(rec);
        }
        if let Some(obs) = observer.as_mut() {
            obs(&rec, phi);
        }
    };
    let rec0 = IterationRecord { k: 0, energy: st.energy, residual: r, tau: 0.0, cg_iters: 0, wall_ms: 0.0 };
    emit(rec0, &st.phi, true, &mut history);

    let mut previous: Option<(PFrame, PFrame)> = None;
    let mut previous_tau = None;
    let mut warm: Option<WarmStart> = None;
    let mut k = 0;
    let termination = loop {
        if r < options.stop_residual {
            break Termination::Converged;
        }
        if k >= options.max_iters {
            break Termination::MaxIters;
        }
        let rel_tol = inner_tol(r, options.tol_cg);
        let (phi_new, tau, cg, grad) = match riemannian_grad(&st, method.metric(), rel_tol, warm.as_ref()) {
            Ok(g) => {
                let ctx = StepContext {
                    state: &st,
                    grad: &g.grad,
                    previous: previous.as_ref().map(|(a, b)| (a, b)),
                    previous_tau,
                };
                let tau = choose_step(&options.step, &ctx)?;
                let phi_new = retract(problem, &st.phi, &g.grad.scale(-tau))?;
                warm = Some(WarmStart::from(&g));
                (phi_new, tau, g.cg_iterations, Some(g.grad))
            }
            Err(Error::IndefiniteMetric { .. }) => match options.fallback {
                FallbackPolicy::Stop => break Termination::MetricIndefinite,
                FallbackPolicy::HalveOmega => {
                    if omega_halved {
                        break Termination::MetricIndefinite;
                    }
                    if let Method::LagrRgd(w) = method {
                        method = Method::LagrRgd(0.5 * w);
                    }
                    omega_halved = true;
                    fallbacks += 1;
                    warm = None;
                    continue;
                }
                FallbackPolicy::EnergyAdaptiveStep => {
                    fallbacks += 1;
                    warm = None;
                    let out = step(&st, Method::EaRgd, 1.0, rel_tol, None)?;
                    (out.phi, 1.0, out.cg_iterations, None)
                }
            },
            Err(e) => return Err(e),
        };
        k += 1;
        previous = grad.map(|g| (st.phi.clone(), g));
        previous_tau = Some(tau);
        st = problem.linearize(&phi_new)?;
        r = st.residual().0;
        let rec = IterationRecord {
            k,
            energy: st.energy,
            residual: r,
            tau,
            cg_iters: cg,
            wall_ms: clock.elapsed().as_secs_f64() * 1e3,
        };
        let last = r < options.stop_residual || k >= options.max_iters;
        emit(rec, &st.phi, last || k % options.record_every == 0, &mut history);
    };

    Ok(RunResult {
        lambda: st.lambda.clone(),
        energy: st.energy,
        residual: r,
        phi: st.phi.clone(),
        history,
        warm_start_iterations: warm_iters,
        iterations: k,
        fallbacks,
        termination,
    })
}
