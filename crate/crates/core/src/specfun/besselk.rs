use crate::error::{Error, Result};

// ln cosh(y) without overflow
fn ln_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// ln K_nu(x) from K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.
///
/// The integrand already decays double exponentially, so the plain
/// trapezoidal rule on the real line is the double-exponential rule; the
/// step is tied to the width of the peak so that large orders with small
/// arguments (the moment oracle) stay resolved.
pub fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_k argument {x}")));
    }
    let nu = nu.abs();
    let phi = |t: f64| -x * t.cosh() + ln_cosh(nu * t);
    // locate the peak: x sinh t = nu tanh(nu t)
    let mut t = if nu > 0.0 { (nu / x).asinh() } else { 0.0 };
    for _ in 0..50 {
        let g = -x * t.sinh() + nu * (nu * t).tanh();
        let dg = -x * t.cosh() + nu * nu / (nu * t).cosh().powi(2);
        if dg >= 0.0 {
            break;
        }
        let step = g / dg;
        t = (t - step).max(0.0);
        if step.abs() < 1e-14 * (1.0 + t) {
            break;
        }
    }
    if phi(0.0) > phi(t) {
        t = 0.0;
    }
    let peak = phi(t);
    let curv = x * t.cosh();
    let h = (0.5 / curv.sqrt()).min(0.1);
    let mut sum = 0.5 * (phi(0.0) - peak).exp();
    let mut k = 1usize;
    loop {
        let tk = k as f64 * h;
        let term = (phi(tk) - peak).exp();
        sum += term;
        if tk > t && term < 1e-20 * sum {
            break;
        }
        k += 1;
        if k > 1_000_000 {
            return Err(Error::NoConvergence(format!("bessel_k nu={nu} x={x}")));
        }
    }
    Ok(peak + (h * sum).ln())
}

pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    if nu.abs() > 200.0 {
        return Err(Error::Domain(format!("bessel_k order {nu} beyond 200")));
    }
    if x > 200.0 {
        return Err(Error::Domain(format!("bessel_k argument {x} beyond 200")));
    }
    Ok(ln_bessel_k(nu, x)?.exp())
}
