//! Ground states of rotating multicomponent Bose–Einstein condensates.
//!
//! The crate discretizes the coupled Gross–Pitaevskii energy with bi-quadratic
//! (Q2) finite elements on a rectangle and minimizes it on the generalized
//! oblique manifold (a product of complex spheres, one per component) with
//! Riemannian gradient descent. Two metrics are available: the
//! energy-adaptive metric induced by the Hamiltonian and a Lagrangian-based
//! metric that adds second-order information.
//!
//! Module map:
//!
//! * [`model`], [`quadrature`], [`fem`]: problem description and the Q2 discretization.
//! * [`linalg`]: CSR storage, ILU(0), preconditioned conjugate gradients.
//! * [`gpe`]: energy, Hamiltonian, Hessian, multipliers, residual, metric operators.
//! * [`manifold`]: retraction, projections, Riemannian gradients, phase alignment.
//! * [`optim`]: eaRGD / LagrRGD iterations, step-size rules, the run driver.
//! * [`spectral`]: eigenvalue diagnostics and convergence-rate prediction.

pub mod error;
pub mod fem;
pub mod frame;
pub mod gpe;
pub mod linalg;
pub mod manifold;
pub mod model;
pub mod optim;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
pub use fem::{Discretization, QuadField};
pub use frame::PFrame;
pub use gpe::{GpeProblem, LinearizedState, MetricSelector, MultiplierDiag};

pub use model::{ModelSpec, Potential, Rect};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
