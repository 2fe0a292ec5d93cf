//! Orthonormal polynomials for `w(x; t) = x^a exp(-x - t/x)` on (0, inf) and
//! their Christoffel-Darboux kernel.
//!
//! Recurrence coefficients come from a discretized Stieltjes procedure on a
//! quadrature rule in `y = ln x`. The rule is only accepted after it
//! reproduces the closed-form moments `2 t^{nu/2} K_nu(2 sqrt t)`.

use crate::error::{Error, Result};
use crate::specfun::{gauss_legendre, ln_bessel_k};

pub const MAX_DEGREE: usize = 64;
const PANEL_ORDER: usize = 16;
/// Relative accuracy required of every discretized moment.
pub const MOMENT_GATE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Weight {
    pub alpha: f64,
    pub t: f64,
}

impl Weight {
    pub fn new(alpha: f64, t: f64) -> Result<Weight> {
        if !(alpha > 0.0 && alpha.is_finite()) || !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("weight needs alpha > 0 and t > 0, got {alpha}, {t}")));
        }
        Ok(Weight { alpha, t })
    }

    pub fn ln_w(&self, x: f64) -> f64 {
        self.alpha * x.ln() - x - self.t / x
    }
}

/// ln of the m-th moment, `ln 2 + (nu/2) ln t + ln K_nu(2 sqrt t)` with `nu = m + a + 1`.
pub fn ln_moment(weight: &Weight, m: usize) -> Result<f64> {
    if m > 160 {
        return Err(Error::Domain(format!("moment index {m} beyond 160")));
    }
    let nu = m as f64 + weight.alpha + 1.0;
    Ok(std::f64::consts::LN_2 + 0.5 * nu * weight.t.ln() + ln_bessel_k(nu, 2.0 * weight.t.sqrt())?)
}

pub fn moments_closed_form(weight: &Weight, m: usize) -> Result<f64> {
    let l = ln_moment(weight, m)?;
    if l > 709.0 {
        return Err(Error::Overflow(format!("moment {m} exceeds the double range")));
    }
    Ok(l.exp())
}

/// Positive quadrature rule for integrals against w on (0, inf).
#[derive(Clone, Debug, PartialEq)]
pub struct Discretization {
    pub weight: Weight,
    pub n_max: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Worst relative moment error found by the gate.
    pub moment_error: f64,
}

/// Composite Gauss-Legendre panels in `y = ln x` over
/// `[ln(t/50) - 20, ln(40 (n_max + 20))]`, halved near `x = sqrt t` and over
/// the bulk `x in [1, 4 (n_max + 20)]`, checked against the moment oracle.
pub fn build_discretization(weight: &Weight, n_max: usize, n_nodes: usize) -> Result<Discretization> {
    if !(200..=20000).contains(&n_nodes) {
        return Err(Error::Domain(format!("n_nodes = {n_nodes} outside [200, 20000]")));
    }
    if n_max > MAX_DEGREE {
        return Err(Error::Domain(format!("n_max = {n_max} beyond {MAX_DEGREE}")));
    }
    let (ya, yb) = ((weight.t / 50.0).ln() - 20.0, (40.0 * (n_max as f64 + 20.0)).ln());
    let peak = 0.5 * weight.t.ln();
    let bulk = (0.0, (4.0 * (n_max as f64 + 20.0)).ln());
    let refined = |a: f64, b: f64| {
        let near_peak = b > peak - 2.0 && a < peak + 2.0;
        let in_bulk = b > bulk.0 && a < bulk.1;
        near_peak || in_bulk
    };
    // choose the base panel count so that the total lands near n_nodes
    let count = |p: usize| -> usize {
        let h = (yb - ya) / p as f64;
        (0..p)
            .map(|k| {
                let a = ya + k as f64 * h;
                if refined(a, a + h) { 2 } else { 1 }
            })
            .sum::<usize>()
            * PANEL_ORDER
    };
    let mut p = (n_nodes / PANEL_ORDER).max(1);
    while p > 1 && count(p) > n_nodes {
        p -= 1;
    }
    let rule = gauss_legendre(PANEL_ORDER);
    let h = (yb - ya) / p as f64;
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut ln_weights = Vec::with_capacity(n_nodes);
    for k in 0..p {
        let a = ya + k as f64 * h;
        let pieces = if refined(a, a + h) { 2 } else { 1 };
        let hh = h / pieces as f64;
        for j in 0..pieces {
            let lo = a + j as f64 * hh;
            for (z, g) in rule.nodes.iter().zip(&rule.weights) {
                let y = lo + 0.5 * hh * (z + 1.0);
                let x = y.exp();
                // dx = x dy
                let lw = (0.5 * hh * g).ln() + y + weight.ln_w(x);
                if lw > -700.0 {
                    nodes.push(x);
                    ln_weights.push(lw);
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for m in 0..=(2 * n_max + 1) {
        let lm = ln_moment(weight, m)?;
        let ratio: f64 = nodes
            .iter()
            .zip(&ln_weights)
            .map(|(x, lw)| (lw + m as f64 * x.ln() - lm).exp())
            .sum();
        worst = worst.max((ratio - 1.0).abs());
    }
    if !(worst <= MOMENT_GATE) {
        return Err(Error::Accuracy(format!(
            "discretization with {} nodes reproduces moments only to {worst:e}",
            nodes.len()
        )));
    }
    let weights = ln_weights.iter().map(|l| l.exp()).collect();
    Ok(Discretization { weight: *weight, n_max, nodes, weights, moment_error: worst })
}

impl Discretization {
    /// Quadrature of `f(x) w(x)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Recurrence `x p_k = sqrt(b_{k+1}) p_{k+1} + a_k p_k + sqrt(b_k) p_{k-1}`
/// for the orthonormal polynomials; `b[0]` is unused.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceTable {
    pub weight: Weight,
    pub n_max: usize,
    pub mu0: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Leading coefficients of the orthonormal p_k.
    pub gamma: Vec<f64>,
}

pub fn stieltjes(weight: &Weight, n_max: usize, disc: &Discretization) -> Result<RecurrenceTable> {
    if n_max > MAX_DEGREE || n_max > disc.n_max {
        return Err(Error::Domain(format!(
            "n_max = {n_max} beyond the discretization's {} (cap {MAX_DEGREE})",
            disc.n_max
        )));
    }
    if disc.weight != *weight {
        return Err(Error::Domain("discretization was built for another weight".into()));
    }
    let w = &disc.weights;
    let x = &disc.nodes;
    let mu0: f64 = w.iter().sum();
    let mut prev = vec![0.0; x.len()];
    let mut cur = vec![1.0 / mu0.sqrt(); x.len()];
    let mut a = Vec::with_capacity(n_max + 1);
    let mut b: Vec<f64> = vec![0.0];
    let mut gamma = vec![1.0 / mu0.sqrt()];
    let mut next = vec![0.0; x.len()];
    for k in 0..=n_max {
        let ak: f64 = (0..x.len()).map(|i| w[i] * x[i] * cur[i] * cur[i]).sum();
        a.push(ak);
        if k == n_max {
            break;
        }
        let sb = b[k].sqrt();
        for i in 0..x.len() {
            next[i] = (x[i] - ak) * cur[i] - sb * prev[i];
        }
        let norm2: f64 = (0..x.len()).map(|i| w[i] * next[i] * next[i]).sum();
        // on a rule with too few nodes the new polynomial vanishes up to rounding
        let size: f64 = (0..x.len()).map(|i| w[i] * ((x[i] - ak) * cur[i]).powi(2)).sum();
        if !(norm2 > 1e-24 * size && norm2.is_finite()) {
            return Err(Error::Breakdown(k + 1));
        }
        b.push(norm2);
        gamma.push(gamma[k] / norm2.sqrt());
        let s = norm2.sqrt();
        for i in 0..x.len() {
            next[i] /= s;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(RecurrenceTable { weight: *weight, n_max, mu0, a, b, gamma })
}

/// p_0(x) .. p_n(x).
pub fn eval_orthonormal(table: &RecurrenceTable, n: usize, x: f64) -> Result<Vec<f64>> {
    if n > table.n_max {
        return Err(Error::Domain(format!("degree {n} beyond table n_max {}", table.n_max)));
    }
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0 / table.mu0.sqrt());
    for k in 0..n {
        let prev: f64 = if k == 0 { 0.0 } else { p[k - 1] };
        let v = ((x - table.a[k]) * p[k] - table.b[k].sqrt() * prev) / table.b[k + 1].sqrt();
        p.push(v);
    }
    Ok(p)
}

// p_0..p_n and their derivatives
fn eval_with_derivative(table: &RecurrenceTable, n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![1.0 / table.mu0.sqrt()];
    let mut d = vec![0.0];
    for k in 0..n {
        let (pp, dp): (f64, f64) = if k == 0 { (0.0, 0.0) } else { (p[k - 1], d[k - 1]) };
        let (sb, sn) = (table.b[k].sqrt(), table.b[k + 1].sqrt());
        p.push(((x - table.a[k]) * p[k] - sb * pp) / sn);
        d.push((p[k] + (x - table.a[k]) * d[k] - sb * dp) / sn);
    }
    (p, d)
}

/// `K_n(x, y) = sqrt(w(x) w(y)) sum_{k<n} p_k(x) p_k(y)`, evaluated by the
/// Christoffel-Darboux formula away from the diagonal, the plain sum close to
/// it and the confluent form on it.
pub fn cd_kernel(table: &RecurrenceTable, n: usize, x: f64, y: f64) -> Result<f64> {
    if n == 0 || n > table.n_max {
        return Err(Error::Domain(format!("kernel degree {n} outside [1, {}]", table.n_max)));
    }
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!("kernel needs x, y > 0, got {x}, {y}")));
    }
    let sw = (0.5 * (table.weight.ln_w(x) + table.weight.ln_w(y))).exp();
    let sb = table.b[n].sqrt();
    if x == y {
        let (p, d) = eval_with_derivative(table, n, x);
        return Ok(sw * sb * (d[n] * p[n - 1] - d[n - 1] * p[n]));
    }
    let px = eval_orthonormal(table, n, x)?;
    let py = eval_orthonormal(table, n, y)?;
    if (x - y).abs() < 1e-4 * x.max(y) {
        return Ok(sw * cd_sum(&px, &py, n));
    }
    Ok(sw * sb * (px[n] * py[n - 1] - px[n - 1] * py[n]) / (x - y))
}

fn cd_sum(px: &[f64], py: &[f64], n: usize) -> f64 {
    (0..n).map(|k| px[k] * py[k]).sum()
}

/// Sum form of the kernel, for cross-checks.
pub fn sum_kernel(table: &RecurrenceTable, n: usize, x: f64, y: f64) -> Result<f64> {
    let sw = (0.5 * (table.weight.ln_w(x) + table.weight.ln_w(y))).exp();
    let px = eval_orthonormal(table, n, x)?;
    let py = eval_orthonormal(table, n, y)?;
    Ok(sw * cd_sum(&px, &py, n))
}

/// `int K_n(x, x) dx`, which is n by orthonormality.
pub fn kernel_trace(table: &RecurrenceTable, disc: &Discretization, n: usize) -> Result<f64> {
    let mut acc = 0.0;
    for (&x, &w) in disc.nodes.iter().zip(&disc.weights) {
        let p = eval_orthonormal(table, n, x)?;
        acc += w * p[..n].iter().map(|v| v * v).sum::<f64>();
    }
    Ok(acc)
}

/// `(1/(4n)) K_n(u/(4n), v/(4n))`.
pub fn hard_edge_rescale(table: &RecurrenceTable, n: usize, u: f64, v: f64) -> Result<f64> {
    for z in [u, v] {
        if !(0.1..=50.0).contains(&z) {
            return Err(Error::Domain(format!("hard-edge argument {z} outside [0.1, 50]")));
        }
    }
    let m = 4.0 * n as f64;
    Ok(cd_kernel(table, n, u / m, v / m)? / m)
}

/// Recurrence table for `(alpha, t)` up to degree n_max, with the node count
/// doubled until the moment gate passes.
pub fn recurrence_for(alpha: f64, t: f64, n_max: usize) -> Result<(RecurrenceTable, Discretization)> {
    let weight = Weight::new(alpha, t)?;
    let mut nodes = 2000;
    loop {
        match build_discretization(&weight, n_max, nodes) {
            Ok(disc) => return Ok((stieltjes(&weight, n_max, &disc)?, disc)),
            Err(Error::Accuracy(msg)) if nodes * 2 > 20000 => return Err(Error::Accuracy(msg)),
            Err(Error::Accuracy(_)) => nodes *= 2,
            Err(e) => return Err(e),
        }
    }
}
