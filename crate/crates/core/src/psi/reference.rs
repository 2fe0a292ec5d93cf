use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::Result;
use crate::specfun::bessel_j;

/// Small-s limit of (psi1, psi2)(-u):
/// `(-i sqrt(pi) J_a(sqrt u), sqrt(pi) ((4a^2 + 3)/8 J_a(sqrt u) + sqrt(u) J_a'(sqrt u)))`.
pub fn psi_small_s_reference(alpha: f64, u: f64) -> Result<(Complex64, Complex64)> {
    let x = u.sqrt();
    let b = bessel_j(alpha, x)?;
    let sp = PI.sqrt();
    let m = (4.0 * alpha * alpha + 3.0) / 8.0;
    Ok((Complex64::new(0.0, -sp * b.j), Complex64::new(sp * (m * b.j + x * b.j_prime), 0.0)))
}
