//! Special functions and quadrature rules.

mod airy;
mod bessel;
mod besselk;
pub(crate) mod dd;
mod gamma;
mod quad;

pub(crate) use airy::{airy_asym_neg, airy_asym_pos, airy_series};
pub(crate) use bessel::{j_asym, j_series};
pub use airy::{airy_ai, AiryPair, AIRY_SWITCH};
pub use bessel::{bessel_j, BesselJPair, BESSEL_SWITCH};
pub use besselk::{bessel_k, ln_bessel_k};
pub use gamma::{gamma_fn, ln_gamma};
pub use quad::{gauss_legendre, tanh_sinh, QuadratureRule};
