//! Eigenvalue diagnostics: spectra of the component operators and the
//! projected Hessian blocks, extreme eigenvalues of the horizontal pencil
//! that set the local rate, and condition numbers of the Lagrangian metric.
//!
//! Everything is built on shift-invert (or plain) Lanczos with full
//! reorthogonalization. Real-linear operators use the real pairing, so no
//! explicit `2n` embedding is formed. Constraints are enforced inside the
//! operator: each application is followed by a correction along `G⁻¹c` that
//! restores `Re(cᴴx) = 0`.

mod eigs;
pub mod lanczos;
mod rate;

pub use eigs::{
    condition_sweep, eigs_component_a, eigs_horizontal_pencil, eigs_projected_hessian, ConditionEntry,
    EigOptions, EigReport,
};
pub use lanczos::Which;
pub use rate::{predicted_rate, single_component_rate, RatePrediction};
