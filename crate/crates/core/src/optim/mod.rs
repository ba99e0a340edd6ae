//! Riemannian gradient descent: eaRGD and LagrRGD with fixed, exact
//! line-search and adaptive step sizes.

mod run;
mod step;

pub use run::{inner_tol, run, run_problem, Observer, MAX_INNER_TOL};
pub use step::{choose_step, initial_guess, step, LineSearchCurve, StepContext, StepOutcome};

use crate::frame::PFrame;
use crate::gpe::{MetricSelector, MultiplierDiag};

/// Which metric defines the descent direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Energy-adaptive metric.
    EaRgd,
    /// Lagrangian-based metric with regularization `ω ∈ (0,1)`.
    LagrRgd(f64),
}

impl Method {
    pub fn metric(&self) -> MetricSelector {
        match *self {
            Method::EaRgd => MetricSelector::EnergyAdaptive,
            Method::LagrRgd(w) => MetricSelector::Lagrangian(w),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    /// Log-uniform scan followed by golden-section refinement.
    ExactLineSearch {
        tau_min: f64,
        tau_max: f64,
        grid: usize,
        rel_tol: f64,
    },
    /// `‖Φ_k − Φ_{k−1}‖_M / ‖grad_k − grad_{k−1}‖_M`; `tau0` on the first step.
    Adaptive {
        tau0: f64,
    },
}

impl StepRule {
    pub fn line_search() -> Self {
        StepRule::ExactLineSearch { tau_min: 0.1, tau_max: 10.0, grid: 64, rel_tol: 1e-6 }
    }

    pub fn adaptive() -> Self {
        StepRule::Adaptive { tau0: 1.0 }
    }
}

/// Reaction to a metric that loses positive definiteness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FallbackPolicy {
    /// Take one eaRGD step with `τ = 1`, then retry.
    #[default]
    EnergyAdaptiveStep,
    /// Halve `ω` once, then retry; a second failure terminates.
    HalveOmega,
    /// Terminate immediately.
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub method: Method,
    pub step: StepRule,
    pub stop_residual: f64,
    pub max_iters: usize,
    /// Inner solves use relative tolerance `min(r_k · tol_cg, MAX_INNER_TOL)`.
    pub tol_cg: f64,
    /// Warm start with eaRGD (`τ = 1`) until the residual drops below this.
    pub warm_start_residual: Option<f64>,
    pub warm_start_max_iters: usize,
    pub fallback: FallbackPolicy,
    /// Keep every `record_every`-th iteration (the first and last are always kept).
    pub record_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            method: Method::EaRgd,
            step: StepRule::Fixed(1.0),
            stop_residual: 1e-14,
            max_iters: 100_000,
            tol_cg: 1e-8,
            warm_start_residual: Some(1e-2),
            warm_start_max_iters: 100_000,
            fallback: FallbackPolicy::default(),
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub energy: f64,
    pub residual: f64,
    pub tau: f64,
    pub cg_iters: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
    MetricIndefinite,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIters => "max_iters",
            Termination::MetricIndefinite => "metric_indefinite",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub phi: PFrame,
    pub lambda: MultiplierDiag,
    pub energy: f64,
    pub residual: f64,
    /// Main-phase history; entry 0 is the state after the warm start.
    pub history: Vec<IterationRecord>,
    pub warm_start_iterations: usize,
    pub iterations: usize,
    pub fallbacks: usize,
    pub termination: Termination,
}
