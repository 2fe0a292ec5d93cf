//! Reference kernels: sine, Airy and Bessel, with their diagonal limits.

use crate::error::Result;
use crate::specfun::{airy_ai, bessel_j};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct KernelGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// values[i][j] = K(xs[i], ys[j])
    pub values: Vec<Vec<f64>>,
}

impl KernelGrid {
    pub fn evaluate<F>(xs: &[f64], ys: &[f64], mut k: F) -> Result<KernelGrid>
    where
        F: FnMut(f64, f64) -> Result<f64>,
    {
        let mut values = Vec::with_capacity(xs.len());
        for &x in xs {
            let row = ys.iter().map(|&y| k(x, y)).collect::<Result<Vec<_>>>()?;
            values.push(row);
        }
        Ok(KernelGrid { xs: xs.to_vec(), ys: ys.to_vec(), values })
    }
}

pub(crate) fn near_diagonal(x: f64, y: f64) -> bool {
    (x - y).abs() < 1e-6 * (1.0 + x.abs())
}

pub fn sine_kernel(x: f64, y: f64) -> f64 {
    let d = x - y;
    if near_diagonal(x, y) {
        PI - PI.powi(3) * d * d / 6.0
    } else {
        (PI * d).sin() / d
    }
}

pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    if near_diagonal(x, y) {
        // the kernel is symmetric, so the midpoint diagonal is second order accurate
        let m = 0.5 * (x + y);
        let a = airy_ai(m)?;
        return Ok(a.ai_prime * a.ai_prime - m * a.ai * a.ai);
    }
    let a = airy_ai(x)?;
    let b = airy_ai(y)?;
    Ok((a.ai * b.ai_prime - b.ai * a.ai_prime) / (x - y))
}

pub fn bessel_kernel(alpha: f64, x: f64, y: f64) -> Result<f64> {
    if near_diagonal(x, y) {
        let m = 0.5 * (x + y);
        let z = m.sqrt();
        let p = bessel_j(alpha, z)?;
        return Ok(0.25 * (p.j_prime * p.j_prime + (1.0 - alpha * alpha / m) * p.j * p.j));
    }
    let (sx, sy) = (x.sqrt(), y.sqrt());
    let a = bessel_j(alpha, sx)?;
    let b = bessel_j(alpha, sy)?;
    Ok((a.j * sy * b.j_prime - b.j * sx * a.j_prime) / (2.0 * (x - y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j_half(x: f64) -> (f64, f64) {
        let c = (2.0 / PI).sqrt();
        let j = c * x.sin() / x.sqrt();
        let jp = c * (x.cos() / x.sqrt() - 0.5 * x.sin() / x.powf(1.5));
        (j, jp)
    }

    #[test]
    fn sine_values() {
        assert_eq!(sine_kernel(1.0, 1.0), PI);
        assert!((sine_kernel(0.0, 0.5) - 2.0).abs() < 1e-15);
        assert_eq!(sine_kernel(0.3, 0.7), sine_kernel(0.7, 0.3));
    }

    #[test]
    fn airy_values() {
        let k = airy_kernel(0.0, 0.0).unwrap();
        assert!((k - 0.066_987_483_779_663_974).abs() < 1e-15);
        let k = airy_kernel(-2.0, 1.0).unwrap();
        let h = 1e-5;
        let dq = 0.5 * (airy_kernel(-2.0 + h, 1.0).unwrap() + airy_kernel(-2.0 - h, 1.0).unwrap());
        assert!((k - dq).abs() < 1e-7);
        assert_eq!(airy_kernel(-2.0, 1.0).unwrap(), airy_kernel(1.0, -2.0).unwrap());
    }

    #[test]
    fn bessel_half_integer_oracle() {
        // closed form J_{1/2} inserted in the kernel formula
        let (x, y) = (1.0f64, 4.0f64);
        let (ja, jpa) = j_half(x.sqrt());
        let (jb, jpb) = j_half(y.sqrt());
        let oracle = (ja * y.sqrt() * jpb - jb * x.sqrt() * jpa) / (2.0 * (x - y));
        let k = bessel_kernel(0.5, 1.0, 4.0).unwrap();
        assert!((k - oracle).abs() < 1e-14);
        assert!((k - 0.089_404_896_908_062_161).abs() < 1e-14);
        assert_eq!(k, bessel_kernel(0.5, 4.0, 1.0).unwrap());
    }

    fn diag_vs_quotient<F: Fn(f64, f64) -> f64>(k: F, x: f64) {
        let h = 1e-5;
        let q = 0.5 * (k(x + h, x - h) + k(x + 2.0 * h, x - 2.0 * h));
        // both off-diagonal points sit symmetric about x, error O(h^2)
        assert!((k(x, x) - q).abs() < 1e-7, "x={x} diag={} quot={q}", k(x, x));
    }

    #[test]
    fn diagonal_consistency() {
        for i in 0..10 {
            let x = -4.5 + i as f64;
            diag_vs_quotient(sine_kernel, x);
            diag_vs_quotient(|a, b| airy_kernel(a, b).unwrap(), x);
            let xb = 0.3 + 2.0 * i as f64;
            diag_vs_quotient(|a, b| bessel_kernel(1.5, a, b).unwrap(), xb);
        }
        diag_vs_quotient(|a, b| bessel_kernel(0.5, a, b).unwrap(), 1.0);
    }

    #[test]
    fn airy_diagonal_nonnegative() {
        for i in 0..=150 {
            let x = -10.0 + 0.1 * i as f64;
            assert!(airy_kernel(x, x).unwrap() >= 0.0);
        }
    }

    #[test]
    fn numerator_antisymmetry() {
        let pts = [0.2, 1.3, 2.9, 7.1];
        for &x in &pts {
            for &y in &pts {
                if x == y {
                    continue;
                }
                let s = sine_kernel(x, y) * (x - y) + sine_kernel(y, x) * (y - x);
                let a = airy_kernel(x, y).unwrap() * (x - y) + airy_kernel(y, x).unwrap() * (y - x);
                let b = bessel_kernel(0.5, x, y).unwrap() * (x - y)
                    + bessel_kernel(0.5, y, x).unwrap() * (y - x);
                assert_eq!(s, 0.0);
                assert_eq!(a, 0.0);
                assert_eq!(b, 0.0);
            }
        }
    }

    #[test]
    fn grid_is_symmetric() {
        let xs: Vec<f64> = (0..6).map(|i| 0.5 + 1.7 * i as f64).collect();
        let g = KernelGrid::evaluate(&xs, &xs, |x, y| bessel_kernel(2.5, x, y)).unwrap();
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                let (a, b) = (g.values[i][j], g.values[j][i]);
                assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
                assert!(a.is_finite());
            }
        }
    }
}
