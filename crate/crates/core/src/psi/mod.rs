//! Psi-functions of the Lax pair and the limiting Psi-kernel.
//!
//! Psi is started from its formal expansion at infinity slightly below the
//! negative axis, carried along an arc onto the axis (lower side) and then
//! integrated inward to the requested points `zeta = -u`.

mod lax;
mod reference;
mod sweep;

pub use lax::{lax_matrices, Cmat, FormalSeries, LaxData, LaxMatrices};
pub use reference::psi_small_s_reference;
pub use sweep::{
    c1_fit, kernel_from_values, lax_compatibility_check, psi_eval, psi_kernel, psi_kernel_grid,
    sweep, PsiConfig, PsiValue, Sweep, KERNEL_IMAG_LIMIT, WRONSKIAN_LIMIT,
};
