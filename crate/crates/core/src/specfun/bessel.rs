use super::dd::Dd;
use super::gamma::gamma_fn;
use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselJPair {
    pub j: f64,
    pub j_prime: f64,
}

/// Series/asymptotic switch for J.
pub const BESSEL_SWITCH: f64 = 30.0;
const SERIES_CAP: usize = 600;

pub fn bessel_j(alpha: f64, x: f64) -> Result<BesselJPair> {
    if !(alpha > 0.0 && alpha <= 10.0) {
        return Err(Error::Domain(format!("bessel_j order {alpha} outside (0, 10]")));
    }
    if !(x > 0.0 && x <= 100.0) {
        return Err(Error::Domain(format!("bessel_j argument {x} outside (0, 100]")));
    }
    let j = j_any(alpha, x)?;
    let jm = j_any(alpha - 1.0, x)?;
    Ok(BesselJPair { j, j_prime: jm - alpha / x * j })
}

/// J_nu(x) for nu > -1, x > 0.
pub(crate) fn j_any(nu: f64, x: f64) -> Result<f64> {
    if x <= BESSEL_SWITCH {
        j_series(nu, x)
    } else {
        Ok(j_asym(nu, x))
    }
}

pub(crate) fn j_series(nu: f64, x: f64) -> Result<f64> {
    let z = Dd::prod(x, x).div_f64(4.0);
    let mut term = Dd::from(1.0);
    let mut sum = Dd::from(1.0);
    let mut k = 0usize;
    loop {
        let k1 = (k + 1) as f64;
        let den = Dd::sum(k1, nu).mul_f64(k1);
        term = term.mul(z).div(den).neg();
        sum = sum.add(term);
        k += 1;
        // once the ratio z/((k+1)(k+1+nu)) is below 1/2 the tail is bounded by |term|
        let ratio = z.hi / ((k as f64 + 1.0) * (k as f64 + 1.0 + nu));
        if ratio < 0.5 && term.abs() < 1e-17 * sum.abs() {
            break;
        }
        if k > SERIES_CAP {
            return Err(Error::Overflow(format!("J series at nu={nu}, x={x}")));
        }
    }
    let pre = (nu * (0.5 * x).ln()).exp() / gamma_fn(nu + 1.0)?;
    Ok(pre * sum.to_f64())
}

/// Hankel expansion for large x.
pub(crate) fn j_asym(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if a.abs() > last || a == 0.0 {
            break;
        }
        last = a.abs();
        // signs: P has (-1)^m a_{2m}, Q has (-1)^m a_{2m+1}
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn j_half(x: f64) -> f64 {
        (2.0 / (PI * x)).sqrt() * x.sin()
    }

    fn j_three_halves(x: f64) -> f64 {
        (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos())
    }

    #[test]
    fn half_integer_closed_forms() {
        assert!(rel(bessel_j(0.5, PI / 2.0).unwrap().j, 2.0 / PI) < 1e-15);
        let p = bessel_j(0.5, 1.0).unwrap();
        assert!(rel(p.j, 0.671_396_707_141_803_09) < 1e-15);
        assert!(rel(p.j_prime, 0.095_400_514_447_474_534) < 1e-13);
        for i in 1..=100 {
            let x = i as f64;
            if (j_three_halves(x)).abs() > 1e-3 {
                let tol = if x <= BESSEL_SWITCH { 1e-12 } else { 1e-11 };
                let j = bessel_j(1.5, x).unwrap().j;
                assert!((j - j_three_halves(x)).abs() < tol * (2.0 / (PI * x)).sqrt(), "x={x}");
            }
            let j = bessel_j(0.5, x).unwrap().j;
            assert!((j - j_half(x)).abs() < 1e-13 * (2.0 / (PI * x)).sqrt(), "x={x}");
        }
    }

    #[test]
    fn reference_near_switch() {
        // 40-digit references for J_{5/2}
        let r = [(29.0, 0.109_441_200_507_596_00), (30.0, 0.141_202_858_799_282_12), (31.0, 0.045_033_789_296_924_047)];
        for (x, v) in r {
            assert!(rel(bessel_j(2.5, x).unwrap().j, v) < 1e-12, "x={x}");
        }
    }

    #[test]
    fn branches_agree_on_overlap() {
        for &nu in &[0.3, 0.5, 1.5, 2.5, 3.7] {
            for i in 0..=40 {
                let x = 28.0 + 4.0 * i as f64 / 40.0;
                let a = j_series(nu, x).unwrap();
                let b = j_asym(nu, x);
                assert!((a - b).abs() < 1e-11 * (2.0 / (PI * x)).sqrt(), "nu={nu} x={x}");
            }
        }
    }

    #[test]
    fn three_term_recurrence() {
        for &a in &[0.5, 1.5, 2.5] {
            for i in 0..=395 {
                let x = 0.5 + 0.1 * i as f64;
                let jm = j_any(a - 1.0, x).unwrap();
                let j = j_any(a, x).unwrap();
                let jp = j_any(a + 1.0, x).unwrap();
                assert!((jm + jp - 2.0 * a / x * j).abs() < 1e-10, "a={a} x={x}");
            }
        }
    }

    #[test]
    fn small_argument_vanishes() {
        let j = bessel_j(0.7, 1e-8).unwrap().j;
        assert!(j.abs() < 1e-5 && j > 0.0);
    }

    #[test]
    fn domain() {
        assert!(bessel_j(0.5, 0.0).is_err());
        assert!(bessel_j(0.0, 1.0).is_err());
        assert!(bessel_j(0.5, 101.0).is_err());
    }
}
