use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Integrate f over [a, b] with the rule mapped affinely.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }
}

/// Gauss-Legendre rule on [-1, 1] by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> QuadratureRule {
    assert!((1..=512).contains(&n), "gauss_legendre needs 1 <= n <= 512");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

// P_n(x) and P_n'(x)
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tanh-sinh rule on [a, b]; tolerates integrable endpoint singularities.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let mut prev = f64::NAN;
    let mut h = 0.5;
    let tmax = 4.5;
    let node = |t: f64| {
        let s = 0.5 * PI * t.sinh();
        let cs = s.cosh();
        // distance to the nearer endpoint, in units of hw, kept exact
        let dist = 1.0 / (s.exp() * cs);
        let w = 0.5 * PI * t.cosh() / (cs * cs);
        (dist, w)
    };
    let eval = |t: f64, f: &mut F| {
        let (dist, w) = node(t);
        if dist == 0.0 || w == 0.0 {
            return 0.0;
        }
        w * (f(b - hw * dist) + f(a + hw * dist))
    };
    let mut sum = 0.5 * PI * f(c);
    let mut k = 1;
    while k as f64 * h <= tmax {
        sum += eval(k as f64 * h, &mut f);
        k += 1;
    }
    let mut est = sum * h * hw;
    for _ in 0..8 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            sum += eval(k as f64 * h, &mut f);
            k += 2;
        }
        est = sum * h * hw;
        if (est - prev).abs() <= 1e-15 * est.abs().max(1e-300) {
            break;
        }
        prev = est;
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_rules() {
        let r = gauss_legendre(1);
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);
        let r = gauss_legendre(2);
        assert!((r.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
        let r = gauss_legendre(3);
        let i = r.integrate(-1.0, 1.0, |x| x.powi(4));
        assert!((i - 0.4).abs() < 1e-14);
    }

    #[test]
    fn rule_invariants() {
        for &n in &[1, 2, 5, 16, 33, 100, 257, 512] {
            let r = gauss_legendre(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            for i in 0..n {
                assert!((r.nodes[i] + r.nodes[n - 1 - i]).abs() < 1e-13);
                assert!(r.weights[i] > 0.0);
                if i > 0 {
                    assert!(r.nodes[i] > r.nodes[i - 1]);
                }
            }
        }
    }

    #[test]
    fn polynomial_exactness() {
        for &n in &[3, 8, 20, 64] {
            let r = gauss_legendre(n);
            for d in 0..2 * n {
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                let got = r.integrate(-1.0, 1.0, |x| x.powi(d as i32));
                assert!((got - exact).abs() <= 1e-13 * (exact.abs() + 1.0), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn tanh_sinh_endpoint_singularity() {
        let i = tanh_sinh(0.0, 1.0, |x| x.powf(-0.5));
        assert!((i - 2.0).abs() < 1e-12);
        let i = tanh_sinh(0.0, 1e-4, |x| x.powf(0.75));
        let exact = 1e-4f64.powf(1.75) / 1.75;
        assert!((i - exact).abs() < 1e-13 * exact);
        let i = tanh_sinh(1.0, 3.0, |x| x.ln());
        assert!((i - (3.0 * 3f64.ln() - 2.0)).abs() < 1e-14);
    }
}
