use std::f64::consts::PI;

use num_complex::Complex64;

use super::lax::{lax_matrices, m_pair, Cmat, FormalSeries, LaxMatrices, I};
use crate::error::{Error, Result};
use crate::ode::{Dopri5, Tolerance};
use crate::painleve::PainleveSolution;

const SERIES_TERMS: usize = 60;
// truncation error accepted for the formal series at the starting radius
const SERIES_TAIL: f64 = 1e-15;
const MAX_RADIUS: f64 = 1e9;
/// det Psi drift beyond which the growing mode near the origin has swamped
/// the recorded values.
pub const WRONSKIAN_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsiConfig {
    /// Angular offset of the starting point below the negative axis.
    pub ray_eps: f64,
    /// Smallest starting radius; grown until the formal series is converged.
    pub r_start: f64,
    pub tol: f64,
    pub u_min: f64,
}

impl PsiConfig {
    pub fn for_s(s: f64) -> PsiConfig {
        PsiConfig {
            ray_eps: 1e-2,
            r_start: 400f64.max(50.0 * s.powf(2.0 / 3.0)),
            tol: 1e-12,
            u_min: 0.05,
        }
    }

    pub fn validate(&self, s: f64) -> Result<()> {
        if !(1e-4..=1e-1).contains(&self.ray_eps) {
            return Err(Error::Config(format!("ray_eps = {} outside [1e-4, 1e-1]", self.ray_eps)));
        }
        let need = 50.0 * s.powf(2.0 / 3.0).max(1.0);
        if !(self.r_start >= need) {
            return Err(Error::Config(format!("r_start = {} below {need} for s = {s}", self.r_start)));
        }
        if !(self.u_min >= 0.05) {
            return Err(Error::Config(format!("u_min = {} below 0.05", self.u_min)));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-6) {
            return Err(Error::Config(format!("tol = {} outside (0, 1e-6]", self.tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PsiValue {
    pub psi1: Complex64,
    pub psi2: Complex64,
    /// zeta derivatives at zeta = -u
    pub dpsi1: Complex64,
    pub dpsi2: Complex64,
    pub at_u: f64,
    pub s: f64,
}

/// Fundamental solution recorded at points `zeta = -u` of one inward sweep.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub s: f64,
    pub alpha: f64,
    /// Radius actually used for the asymptotic start.
    pub r_start: f64,
    pub lax: LaxMatrices,
    pub us: Vec<f64>,
    pub psi: Vec<Cmat>,
    /// Largest relative change of det Psi along the sweep.
    pub wronskian_drift: f64,
}

fn pack(m: &Cmat, y: &mut [f64]) {
    for (k, v) in m.iter().enumerate() {
        y[2 * k] = v.re;
        y[2 * k + 1] = v.im;
    }
}

fn unpack(y: &[f64]) -> Cmat {
    let mut m = Cmat::zeros();
    for (k, v) in m.iter_mut().enumerate() {
        *v = Complex64::new(y[2 * k], y[2 * k + 1]);
    }
    m
}

fn det(m: &Cmat) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Smallest radius at least `r_min` where the formal series meets its tolerance.
fn starting_radius(series: &FormalSeries, r_min: f64) -> Result<f64> {
    let mut r = r_min;
    while series.tail(r) > SERIES_TAIL {
        r *= 1.5;
        if r > MAX_RADIUS {
            return Err(Error::Config(format!(
                "formal series at infinity not converged below radius {MAX_RADIUS:e}"
            )));
        }
    }
    Ok(r)
}

// Start at radius `r0` on the ray arg = -pi + eps, follow the arc down to
// arg = -pi, then run inward along the lower side of the negative axis.
fn propagate(
    lax: &LaxMatrices,
    series: &FormalSeries,
    r0: f64,
    eps: f64,
    targets: &[f64],
    tol: f64,
) -> Result<(Vec<Cmat>, f64)> {
    let start = series.psi(r0, -PI + eps);
    let det0 = det(&start);
    let scale = start.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut tl = Tolerance::new(tol, 1e-3 * tol * scale);
    tl.max_steps = 5_000_000;
    let mut y = vec![0.0; 8];
    pack(&start, &mut y);
    let mut drift: f64 = 0.0;
    let mut track = |y: &[f64]| {
        let d = det(&unpack(y));
        drift = drift.max(((d - det0) / det0).norm());
    };
    if eps > 0.0 {
        let arc = |th: f64, y: &[f64], d: &mut [f64]| {
            let z = Complex64::from_polar(r0, th);
            let dm = lax.coefficient(z) * (I * z) * unpack(y);
            pack(&dm, d);
            Ok(())
        };
        let mut ode = Dopri5::new(arc, -PI + eps, &y, 0.0);
        ode.advance(-PI, &tl, |_, y| {
            track(y);
            Ok(())
        })?;
        y = ode.y;
    }
    let radial = |rho: f64, y: &[f64], d: &mut [f64]| {
        let dm = -(lax.coefficient(Complex64::new(-rho, 0.0)) * unpack(y));
        pack(&dm, d);
        Ok(())
    };
    let mut ode = Dopri5::new(radial, r0, &y, 0.0);
    let mut out = Vec::with_capacity(targets.len());
    for &u in targets {
        ode.advance(u, &tl, |_, y| {
            track(y);
            Ok(())
        })?;
        out.push(unpack(&ode.y));
    }
    Ok((out, drift))
}

/// One inward sweep recording the fundamental solution at `zeta = -u` for
/// every u in `us` (any order).
pub fn sweep(sol: &PainleveSolution, s: f64, us: &[f64], cfg: &PsiConfig) -> Result<Sweep> {
    cfg.validate(s)?;
    for &u in us {
        if !(u >= cfg.u_min && u <= cfg.r_start / 10.0) {
            return Err(Error::Domain(format!(
                "u = {u} outside [{}, {}]",
                cfg.u_min,
                cfg.r_start / 10.0
            )));
        }
    }
    let lax = lax_matrices(sol, s)?;
    let series = FormalSeries::new(&lax, SERIES_TERMS);
    let r0 = starting_radius(&series, cfg.r_start)?;
    let mut order: Vec<usize> = (0..us.len()).collect();
    order.sort_by(|&a, &b| us[b].total_cmp(&us[a]));
    let targets: Vec<f64> = order.iter().map(|&k| us[k]).collect();
    let (vals, drift) = propagate(&lax, &series, r0, cfg.ray_eps, &targets, cfg.tol)?;
    if drift > WRONSKIAN_LIMIT {
        return Err(Error::Accuracy(format!(
            "det Psi drifted by {drift:e} before u = {}; u is too small for s = {s}",
            targets.last().copied().unwrap_or(f64::NAN)
        )));
    }
    let mut psi = vec![Cmat::zeros(); us.len()];
    for (j, &k) in order.iter().enumerate() {
        psi[k] = vals[j];
    }
    Ok(Sweep {
        s,
        alpha: sol.params.alpha,
        r_start: r0,
        lax,
        us: us.to_vec(),
        psi,
        wronskian_drift: drift,
    })
}

impl Sweep {
    /// (psi1, psi2) at the k-th recorded point: Psi applied to
    /// `(e^{i phi}, e^{-i phi})` with `phi = pi (alpha - 1)/2`.
    pub fn value(&self, k: usize) -> PsiValue {
        let phi = 0.5 * PI * (self.alpha - 1.0);
        let e = Complex64::from_polar(1.0, phi);
        let p = &self.psi[k];
        let psi1 = p[(0, 0)] * e + p[(0, 1)] * e.conj();
        let psi2 = p[(1, 0)] * e + p[(1, 1)] * e.conj();
        let u = self.us[k];
        let a = self.lax.coefficient(Complex64::new(-u, 0.0));
        PsiValue {
            psi1,
            psi2,
            dpsi1: a[(0, 0)] * psi1 + a[(0, 1)] * psi2,
            dpsi2: a[(1, 0)] * psi1 + a[(1, 1)] * psi2,
            at_u: u,
            s: self.s,
        }
    }

    pub fn values(&self) -> Vec<PsiValue> {
        (0..self.us.len()).map(|k| self.value(k)).collect()
    }
}

pub fn psi_eval(sol: &PainleveSolution, s: f64, us: &[f64], cfg: &PsiConfig) -> Result<Vec<PsiValue>> {
    Ok(sweep(sol, s, us, cfg)?.values())
}

/// Psi-kernel from two psi values, as a complex number together with the
/// size of the numerator terms (the scale for the realness check).
pub fn kernel_from_values(a: &PsiValue, b: &PsiValue) -> (Complex64, f64) {
    let (u, v) = (a.at_u, b.at_u);
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    if (u - v).abs() < 1e-6 * (1.0 + u) {
        // f(u) = psi1(-u), g(u) = psi2(-u), so f' = -dpsi1 and g' = -dpsi2
        let (f, g, fp, gp) = (a.psi1, a.psi2, -a.dpsi1, -a.dpsi2);
        let k = (f * gp - fp * g) / two_pi_i;
        let scale = ((f * gp).norm() + (fp * g).norm()) / (2.0 * PI);
        return (k, scale);
    }
    let t1 = b.psi1 * a.psi2;
    let t2 = a.psi1 * b.psi2;
    let den = two_pi_i * (u - v);
    ((t1 - t2) / den, (t1.norm() + t2.norm()) / den.norm())
}

/// Largest imaginary part tolerated before the kernel is declared inconsistent.
pub const KERNEL_IMAG_LIMIT: f64 = 1e-6;

fn real_kernel(a: &PsiValue, b: &PsiValue) -> Result<f64> {
    let (k, scale) = kernel_from_values(a, b);
    if k.im.abs() > KERNEL_IMAG_LIMIT * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Consistency(format!(
            "Psi-kernel imaginary part {:e} at u = {}, v = {} (scale {scale:e})",
            k.im, a.at_u, b.at_u
        )));
    }
    Ok(k.re)
}

pub fn psi_kernel(sol: &PainleveSolution, s: f64, u: f64, v: f64, cfg: &PsiConfig) -> Result<f64> {
    let sw = sweep(sol, s, &[u, v], cfg)?;
    real_kernel(&sw.value(0), &sw.value(1))
}

/// Kernel matrix on `us x vs` from a single sweep.
pub fn psi_kernel_grid(
    sol: &PainleveSolution,
    s: f64,
    us: &[f64],
    vs: &[f64],
    cfg: &PsiConfig,
) -> Result<crate::kernels::KernelGrid> {
    let mut pts: Vec<f64> = us.iter().chain(vs).copied().collect();
    pts.sort_by(|a, b| b.total_cmp(a));
    pts.dedup();
    let sw = sweep(sol, s, &pts, cfg)?;
    let vals = sw.values();
    let find = |x: f64| vals.iter().find(|p| p.at_u == x).copied().expect("recorded point");
    let mut values = Vec::with_capacity(us.len());
    for &u in us {
        let a = find(u);
        let row: Result<Vec<f64>> = vs.iter().map(|&v| real_kernel(&a, &find(v))).collect();
        values.push(row?);
    }
    Ok(crate::kernels::KernelGrid { xs: us.to_vec(), ys: vs.to_vec(), values })
}

/// Estimate C1 from a numerically propagated fundamental solution: start at
/// radius 4R, record at 3R and 2R on the negative axis and extrapolate
/// `z (Psi e^{-w sigma3} M^-1 z^{sigma3/4} - I) = C1 + C2/z + ..` to 1/z = 0.
pub fn c1_fit(sol: &PainleveSolution, s: f64, cfg: &PsiConfig) -> Result<Cmat> {
    cfg.validate(s)?;
    let lax = lax_matrices(sol, s)?;
    let series = FormalSeries::new(&lax, SERIES_TERMS);
    let big_r = starting_radius(&series, cfg.r_start)?;
    let radii = [3.0 * big_r, 2.0 * big_r];
    let (vals, _) = propagate(&lax, &series, 4.0 * big_r, cfg.ray_eps, &radii, cfg.tol)?;
    let (_, mi) = m_pair();
    let est: Vec<Cmat> = radii
        .iter()
        .zip(&vals)
        .map(|(&rho, p)| {
            let w = Complex64::from_polar(rho.sqrt(), -0.5 * PI);
            let q = Complex64::from_polar(rho.powf(0.25), -0.25 * PI);
            let z = Complex64::new(-rho, 0.0);
            let e = Cmat::new((-w).exp(), 0.0.into(), 0.0.into(), w.exp());
            let zq = Cmat::new(q, 0.0.into(), 0.0.into(), q.inv());
            (p * e * mi * zq - Cmat::identity()) * z
        })
        .collect();
    let diff = (est[0] - est[1]).norm();
    let size = 0.5 * (est[0].norm() + est[1].norm());
    if diff > 0.1 * size + 1e-8 {
        return Err(Error::Extrapolation(format!(
            "C1 estimates at two radii differ by {diff:e} (size {size:e})"
        )));
    }
    // linear in 1/z: C1 = (z1 E1 - z2 E2)/(z1 - z2)
    let (z1, z2) = (-radii[0], -radii[1]);
    Ok((est[0] * Complex64::from(z1) - est[1] * Complex64::from(z2)) / Complex64::from(z1 - z2))
}

/// Relative residual of `d Psi/ds = (b1/z) Psi` at `zeta`, with d/ds from a
/// centred difference over three independent sweeps.
pub fn lax_compatibility_check(
    sol: &PainleveSolution,
    s: f64,
    zeta: Complex64,
    ds: f64,
    cfg: &PsiConfig,
) -> Result<f64> {
    let rho = zeta.norm();
    if !(rho >= 1.0 && rho <= cfg.r_start / 10.0) {
        return Err(Error::Domain(format!("|zeta| = {rho} outside [1, {}]", cfg.r_start / 10.0)));
    }
    if (zeta.arg().abs() - PI).abs() > cfg.ray_eps {
        return Err(Error::Domain(format!("zeta = {zeta} is not on the integration path")));
    }
    if !(ds > 0.0 && ds <= 0.1 * s.max(1.0)) || s - ds <= 0.0 {
        return Err(Error::Domain(format!("ds = {ds} outside (0, 0.1 max(1, s)]")));
    }
    let at = |x: f64| -> Result<Sweep> { sweep(sol, x, &[rho], cfg) };
    let (m, c0, p) = (at(s - ds)?, at(s)?, at(s + ds)?);
    let d = (p.psi[0] - m.psi[0]) / Complex64::from(2.0 * ds);
    let z = Complex64::new(-rho, 0.0);
    let rhs = c0.lax.b1 * c0.psi[0] / z;
    Ok((d - rhs).norm() / c0.psi[0].norm())
}
