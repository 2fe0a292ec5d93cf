use super::dd::Dd;
use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AiryPair {
    pub ai: f64,
    pub ai_prime: f64,
}

// Ai(0) and -Ai'(0) as unevaluated sums hi + lo.
const AI0: (f64, f64) = (0.355_028_053_887_817_2, 2.052_336_324_362_12e-17);
const MAIP0: (f64, f64) = (0.258_819_403_792_806_8, -2.522_243_111_610_832e-17);

/// Switch between the Maclaurin series and the asymptotic expansions.
pub const AIRY_SWITCH: f64 = 8.0;

pub fn airy_ai(x: f64) -> Result<AiryPair> {
    if !(-40.0..=40.0).contains(&x) {
        return Err(Error::Domain(format!("airy_ai needs |x| <= 40, got {x}")));
    }
    if x.abs() <= AIRY_SWITCH {
        Ok(airy_series(x))
    } else if x > 0.0 {
        Ok(airy_asym_pos(x))
    } else {
        Ok(airy_asym_neg(-x))
    }
}

/// Maclaurin branch; accumulated in double-double because for x near 8 the
/// terms reach 1e6 while Ai is 1e-8.
pub(crate) fn airy_series(x: f64) -> AiryPair {
    let x3 = Dd::prod(x, x).mul_f64(x);
    // f = sum a_k x^{3k}, g = sum b_k x^{3k+1}, and their derivatives
    let mut f = Dd::from(1.0);
    let mut g = Dd::from(x);
    let mut dg = Dd::from(1.0);
    let mut tf = Dd::from(1.0);
    let mut tg = Dd::from(x);
    let mut tdf = Dd::prod(x, x).div_f64(2.0);
    let mut tdg = Dd::from(1.0);
    let mut df = tdf;
    for k in 0..200 {
        let k3 = 3.0 * k as f64;
        tf = tf.mul(x3).div_f64((k3 + 2.0) * (k3 + 3.0));
        tg = tg.mul(x3).div_f64((k3 + 3.0) * (k3 + 4.0));
        tdg = tdg.mul(x3).div_f64((k3 + 1.0) * (k3 + 3.0));
        if k >= 1 {
            tdf = tdf.mul(x3).div_f64(k3 * (k3 + 2.0));
            df = df.add(tdf);
        }
        f = f.add(tf);
        g = g.add(tg);
        dg = dg.add(tdg);
        let small = |t: Dd, s: Dd| t.abs() <= 1e-34 * s.abs().max(1e-300);
        if k > 2 && small(tf, f) && small(tg, g) && small(tdf, df) && small(tdg, dg) {
            break;
        }
    }
    let c1 = Dd::new(AI0.0, AI0.1);
    let c2 = Dd::new(MAIP0.0, MAIP0.1);
    AiryPair {
        ai: c1.mul(f).sub(c2.mul(g)).to_f64(),
        ai_prime: c1.mul(df).sub(c2.mul(dg)).to_f64(),
    }
}

// u_k and v_k of the standard Airy asymptotic expansions
fn uv_coeffs(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

// Alternating sums sum (-1)^k c_k z^{-k} truncated at the smallest term.
fn asym_sum(c: &[f64], zeta: f64, stride: usize, offset: usize) -> f64 {
    let mut s = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = offset;
    while k < c.len() {
        let term = c[k] / zeta.powi(k as i32);
        if term.abs() > last {
            break;
        }
        s += sign * term;
        last = term.abs();
        if term.abs() < 1e-18 * s.abs() {
            break;
        }
        sign = -sign;
        k += stride;
    }
    s
}

pub(crate) fn airy_asym_pos(x: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = uv_coeffs(60);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let x4 = x.powf(0.25);
    AiryPair {
        ai: e / x4 * asym_sum(&u, zeta, 1, 0),
        ai_prime: -e * x4 * asym_sum(&v, zeta, 1, 0),
    }
}

/// Oscillatory branch for Ai(-x), x > 0.
pub(crate) fn airy_asym_neg(x: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = uv_coeffs(60);
    let ph = zeta + PI / 4.0;
    let (s, c) = ph.sin_cos();
    let x4 = x.powf(0.25);
    let ue = asym_sum(&u, zeta, 2, 0);
    let uo = asym_sum(&u, zeta, 2, 1);
    let ve = asym_sum(&v, zeta, 2, 0);
    let vo = asym_sum(&v, zeta, 2, 1);
    AiryPair {
        ai: (s * ue - c * uo) / (PI.sqrt() * x4),
        ai_prime: -x4 / PI.sqrt() * (c * ve + s * vo),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn origin_values() {
        let p = airy_ai(0.0).unwrap();
        assert!(rel(p.ai, 0.355_028_053_887_817_2) < 1e-15);
        assert!(rel(p.ai_prime, -0.258_819_403_792_806_8) < 1e-15);
    }

    #[test]
    fn reference_values() {
        // 40-digit references
        let p = airy_ai(5.0).unwrap();
        assert!(rel(p.ai, 1.083_444_281_360_744_2e-4) < 1e-12);
        assert!(rel(p.ai_prime, -2.474_138_908_684_624_8e-4) < 1e-12);
        assert!(rel(airy_ai(-2.0).unwrap().ai, 0.227_407_428_201_685_58) < 1e-13);
        assert!(rel(airy_ai(1.0).unwrap().ai, 0.135_292_416_312_881_42) < 1e-13);
    }

    #[test]
    fn branches_agree_on_overlap() {
        for i in 0..=40 {
            let x = 7.0 + 2.0 * i as f64 / 40.0;
            let a = airy_series(x);
            let b = airy_asym_pos(x);
            assert!(rel(a.ai, b.ai) < 1e-11, "x = {x}");
            assert!(rel(a.ai_prime, b.ai_prime) < 1e-11, "x = {x}");
            let a = airy_series(-x);
            let b = airy_asym_neg(x);
            let scale = (a.ai.powi(2) + a.ai_prime.powi(2) / x).sqrt();
            assert!((a.ai - b.ai).abs() < 1e-11 * scale, "x = -{x}");
            assert!((a.ai_prime - b.ai_prime).abs() < 1e-11 * scale * x.sqrt(), "x = -{x}");
        }
    }

    #[test]
    fn second_derivative_matches_equation() {
        let h = 1e-4;
        for i in -10..=10 {
            let x = i as f64;
            let a0 = airy_ai(x).unwrap().ai;
            let d2 = (airy_ai(x + h).unwrap().ai - 2.0 * a0 + airy_ai(x - h).unwrap().ai) / (h * h);
            assert!((d2 - x * a0).abs() <= 1e-5 * (1.0 + a0.abs()), "x = {x}");
            let dp = (airy_ai(x + h).unwrap().ai_prime - airy_ai(x - h).unwrap().ai_prime) / (2.0 * h);
            assert!((dp - x * a0).abs() <= 1e-7 * (1.0 + a0.abs()), "x = {x}");
        }
    }

    #[test]
    fn positive_and_decreasing_on_positive_axis() {
        let mut prev = f64::INFINITY;
        for i in 0..=400 {
            let a = airy_ai(0.1 * i as f64).unwrap();
            assert!(a.ai > 0.0 && a.ai < prev);
            prev = a.ai;
        }
    }

    #[test]
    fn domain() {
        assert!(airy_ai(40.5).is_err());
        assert!(airy_ai(-40.0).is_ok());
    }
}
