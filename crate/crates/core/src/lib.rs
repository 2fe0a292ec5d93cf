//! Correlation kernels of the Laguerre unitary ensemble with the singular
//! perturbation `w(x;t) = x^a exp(-x - t/x)`.
//!
//! The crate covers the reference kernels (sine, Airy, Bessel), the
//! Painleve III transcendent that drives the double scaling limit, the
//! Psi-kernel built from the Lax pair, and the finite-n Christoffel-Darboux
//! kernel. `harness` ties them together into convergence experiments.

pub mod error;
pub mod harness;
pub mod kernels;
pub mod ode;
pub mod orthopoly;
pub mod painleve;
pub mod psi;
pub mod specfun;

pub use error::{Error, Result};
