mod common;

use common::checks::{self, fd_setup as setup};
use rotbec::linalg::dot_re;
use rotbec::manifold::{project_tangent, retract, riemannian_grad};
use rotbec::MetricSelector;

#[test]
fn central_difference_gradient_is_second_order() {
    for seed in 0..5 {
        let order = checks::gradient_fd_order(seed).unwrap();
        assert!((order - 2.0).abs() <= 0.2, "seed {seed}: order {order}");
    }
}

#[test]
fn second_difference_hessian_is_second_order() {
    for seed in 0..5 {
        let order = checks::hessian_fd_order(seed).unwrap();
        assert!((order - 2.0).abs() <= 0.3, "seed {seed}: order {order}");
    }
}

/// `d/dt E(R(tξ))|₀ = ⟨grad, ξ⟩_G` for tangent `ξ`, with either metric.
#[test]
fn riemannian_gradient_represents_the_derivative() {
    for seed in 0..3 {
        let (prob, phi, v) = setup(seed);
        let st = prob.linearize(&phi).unwrap();
        let xi = project_tangent(&prob, &phi, &v);
        let t = 1e-4;
        let fd = (prob.energy(&retract(&prob, &phi, &xi.scale(t)).unwrap()).unwrap()
            - prob.energy(&retract(&prob, &phi, &xi.scale(-t)).unwrap()).unwrap())
            / (2.0 * t);
        for sel in [MetricSelector::EnergyAdaptive, MetricSelector::Lagrangian(0.2)] {
            let g = match riemannian_grad(&st, sel, 1e-14, None) {
                Ok(g) => g.grad,
                Err(rotbec::Error::IndefiniteMetric { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let gx = st.apply_metric(sel, &xi);
            let pairing: f64 = (0..2).map(|j| dot_re(g.col(j), gx.col(j))).sum();
            assert!((pairing - fd).abs() <= 1e-6 * fd.abs().max(1.0), "{sel:?}: {pairing} vs {fd}");
            // The gradient itself is tangent.
            let tg = project_tangent(&prob, &phi, &g);
            assert!(tg.sub(&g).max_abs() <= 1e-10 * g.max_abs());
        }
    }
}

#[test]
fn energy_adaptive_gradient_is_bounded_by_the_iterate() {
    for seed in 0..10 {
        let (prob, phi, _) = setup(seed);
        let st = prob.linearize(&phi).unwrap();
        let g = riemannian_grad(&st, MetricSelector::EnergyAdaptive, 1e-14, None).unwrap().grad;
        assert!(st.a_inner(&g, &g) <= st.a_inner(&phi, &phi) * (1.0 + 1e-12));
    }
}
