mod common;

use rotbec::manifold::{aligned_distance, project_horizontal, retract, riemannian_grad, DistanceNorm};
use rotbec::optim::{
    initial_guess, run_problem, step, FallbackPolicy, Method, RunOptions, StepRule, Termination,
};
use rotbec::spectral::{eigs_horizontal_pencil, predicted_rate, EigOptions, Which};
use rotbec::{GpeProblem, MetricSelector, PFrame};

#[test]
fn fixed_step_energy_adaptive_descent_decays_with_bound() {
    for spec in [common::toy2(4), common::toy1(4)] {
        let prob = GpeProblem::new(&spec).unwrap();
        for tau in [0.25, 0.5] {
            let mut phi = initial_guess(&prob);
            let mut st = prob.linearize(&phi).unwrap();
            for k in 0..60 {
                let g = riemannian_grad(&st, MetricSelector::EnergyAdaptive, 1e-13, None).unwrap();
                let ga = st.a_inner(&g.grad, &g.grad);
                let out = step(&st, Method::EaRgd, tau, 1e-13, None).unwrap();
                phi = out.phi;
                let next = prob.linearize(&phi).unwrap();
                let drop = st.energy - next.energy;
                assert!(drop >= -1e-12, "tau {tau} step {k}: energy rose by {}", -drop);
                assert!(drop >= 0.5 * tau * ga - 1e-10, "tau {tau} step {k}: {drop} < {}", 0.5 * tau * ga);
                st = next;
            }
        }
    }
}

fn opts(method: Method) -> RunOptions {
    RunOptions { method, stop_residual: 1e-10, max_iters: 5000, tol_cg: 1e-8, ..RunOptions::default() }
}

#[test]
fn all_methods_reach_the_same_critical_point() {
    let prob = GpeProblem::new(&common::toy2(4)).unwrap();
    let phi0 = initial_guess(&prob);
    let reference = run_problem(&prob, phi0.clone(), &opts(Method::EaRgd), None).unwrap();
    assert_eq!(reference.termination, Termination::Converged);
    let variants = [
        RunOptions { step: StepRule::line_search(), ..opts(Method::EaRgd) },
        RunOptions { step: StepRule::adaptive(), ..opts(Method::EaRgd) },
        opts(Method::LagrRgd(0.5)),
        RunOptions { step: StepRule::adaptive(), ..opts(Method::LagrRgd(0.9)) },
        RunOptions { warm_start_residual: None, ..opts(Method::LagrRgd(0.95)) },
    ];
    for o in variants {
        let r = run_problem(&prob, phi0.clone(), &o, None).unwrap();
        assert_eq!(r.termination, Termination::Converged, "{:?}", o.method);
        assert!((r.energy - reference.energy).abs() < 1e-10 * reference.energy);
        let d = aligned_distance(&prob, &r.phi, &reference.phi, DistanceNorm::H).unwrap();
        assert!(d < 1e-6, "{:?} {:?}: distance {d}", o.method, o.step);
    }
    let lagr = run_problem(&prob, phi0.clone(), &opts(Method::LagrRgd(0.95)), None).unwrap();
    assert!(lagr.iterations < reference.iterations);
    // History: a row per iteration plus the initial row.
    assert_eq!(reference.history.len(), reference.iterations + 1);
    assert!(reference.history.windows(2).all(|w| w[1].k == w[0].k + 1));
}

#[test]
fn indefinite_metric_policies() {
    // Far from the ground state ω close to one makes the metric indefinite.
    let prob = GpeProblem::new(&common::toy2(4)).unwrap();
    let phi0 = initial_guess(&prob);
    let base = RunOptions { warm_start_residual: None, ..opts(Method::LagrRgd(0.999)) };
    let stop = run_problem(
        &prob,
        phi0.clone(),
        &RunOptions { fallback: FallbackPolicy::Stop, ..base.clone() },
        None,
    )
    .unwrap();
    if stop.termination == Termination::MetricIndefinite {
        let fb = run_problem(&prob, phi0.clone(), &base, None).unwrap();
        assert!(fb.fallbacks > 0);
        assert_eq!(fb.termination, Termination::Converged);
        let halve =
            run_problem(&prob, phi0, &RunOptions { fallback: FallbackPolicy::HalveOmega, ..base }, None)
                .unwrap();
        assert!(halve.fallbacks >= 1);
    } else {
        assert_eq!(stop.termination, Termination::Converged);
    }
}

fn tail_ratio(dist: &[f64], lo: f64, hi: f64) -> f64 {
    let idx: Vec<usize> = (0..dist.len()).filter(|&k| dist[k] < hi && dist[k] > lo).collect();
    let (a, b) = (idx[0], *idx.last().unwrap());
    assert!(b > a + 3, "tail window too short");
    (dist[b] / dist[a]).powf(1.0 / (b - a) as f64)
}

#[test]
fn measured_contraction_matches_prediction() {
    let prob = GpeProblem::new(&common::toy2(4)).unwrap();
    let reference = run_problem(
        &prob,
        initial_guess(&prob),
        &RunOptions { stop_residual: 1e-13, tol_cg: 1e-10, ..opts(Method::LagrRgd(0.9)) },
        None,
    )
    .unwrap()
    .phi;
    let st = prob.linearize(&reference).unwrap();
    for method in [Method::EaRgd, Method::LagrRgd(0.5)] {
        let sel = method.metric();
        let eo = EigOptions { tol: 1e-10, ..EigOptions::default() };
        let lo = eigs_horizontal_pencil(&st, sel, Which::Smallest, 1, &eo).unwrap();
        let hi = eigs_horizontal_pencil(&st, sel, Which::Largest, 1, &eo).unwrap();
        let pred = predicted_rate(1.0, lo.eigenvalues[0], hi.eigenvalues[0]).unwrap();
        let mut dist = Vec::new();
        let mut obs = |_: &rotbec::optim::IterationRecord, phi: &PFrame| {
            dist.push(aligned_distance(&prob, phi, &reference, DistanceNorm::H).unwrap());
        };
        // A symmetric start never excites the odd modes, so perturb randomly.
        let mut rng = common::rng(7);
        let kick = common::random_frame(prob.n(), 2, &mut rng).scale(1e-3);
        let start = retract(&prob, &reference, &project_horizontal(&prob, &reference, &kick)).unwrap();
        run_problem(
            &prob,
            start,
            &RunOptions { stop_residual: 1e-12, tol_cg: 1e-10, warm_start_residual: None, ..opts(method) },
            Some(&mut obs),
        )
        .unwrap();
        let measured = tail_ratio(&dist, 1e-9, 1e-4);
        assert!(
            (measured - pred.rho).abs() <= 0.05 * pred.rho,
            "{method:?}: measured {measured}, predicted {}",
            pred.rho
        );
    }
}

/// With `r · tol_cg ≥ 1` a zero initial guess would satisfy the inner
/// tolerance; the driver must still produce real solves.
#[test]
fn loose_inner_tolerance_still_descends() {
    let prob = GpeProblem::new(&common::toy1(4)).unwrap();
    let phi0 = initial_guess(&prob);
    let st0 = prob.linearize(&phi0).unwrap();
    let opts = RunOptions { tol_cg: 1e3, max_iters: 50, warm_start_residual: None, ..opts(Method::EaRgd) };
    let res = run_problem(&prob, phi0, &opts, None).unwrap();
    assert!(res.energy < st0.energy);
    assert!(res.residual < 0.1 * st0.residual().0, "{} vs {}", res.residual, st0.residual().0);
}

#[test]
fn true_residual_stopping_reaches_the_same_state() {
    let base = GpeProblem::new(&common::toy2(3)).unwrap();
    let mut alt = base.clone();
    alt.inner.criterion = rotbec::linalg::StopCriterion::True;
    let o = opts(Method::LagrRgd(0.5));
    let a = run_problem(&base, initial_guess(&base), &o, None).unwrap();
    let b = run_problem(&alt, initial_guess(&alt), &o, None).unwrap();
    assert_eq!(b.termination, Termination::Converged);
    assert!((a.energy - b.energy).abs() <= 1e-12 * a.energy);
}
