use crate::error::{Error, Result};

/// Local linear rate of the fixed-point iteration with step `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePrediction {
    pub tau: f64,
    pub eta_inf: f64,
    pub eta_sup: f64,
    /// `max(1 − τ η_inf, τ η_sup − 1)`.
    pub rho: f64,
    /// Contraction holds for `τ ∈ (0, tau_max)`.
    pub tau_max: f64,
}

impl RatePrediction {
    pub fn admissible(&self) -> bool {
        self.tau > 0.0 && self.tau < self.tau_max
    }

    /// `τ = 2 / (η_inf + η_sup)` minimizes `ρ`.
    pub fn optimal_tau(&self) -> f64 {
        2.0 / (self.eta_inf + self.eta_sup)
    }
}

pub fn predicted_rate(tau: f64, eta_inf: f64, eta_sup: f64) -> Result<RatePrediction> {
    if !(eta_inf > 0.0 && eta_inf <= eta_sup && eta_sup.is_finite()) {
        return Err(Error::Domain(format!("need 0 < eta_inf <= eta_sup, got {eta_inf} and {eta_sup}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("step size must be positive, got {tau}")));
    }
    Ok(RatePrediction {
        tau,
        eta_inf,
        eta_sup,
        rho: (1.0 - tau * eta_inf).max(tau * eta_sup - 1.0),
        tau_max: 2.0 / eta_sup,
    })
}

/// Single-component LagrRGD rate at `τ = 1` from the two smallest
/// eigenvalues of the projected Hessian.
pub fn single_component_rate(lambda1: f64, lambda2: f64, omega: f64) -> Result<f64> {
    if !(lambda1 > 0.0 && lambda2 >= lambda1) || !(0.0..1.0).contains(&omega) {
        return Err(Error::Domain(format!(
            "need 0 < lambda1 <= lambda2 and omega in [0, 1), got {lambda1}, {lambda2}, {omega}"
        )));
    }
    Ok((1.0 - omega) / (lambda2 / lambda1 - omega))
}
