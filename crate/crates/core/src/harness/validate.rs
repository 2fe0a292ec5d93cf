use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::orthopoly::{cd_kernel, kernel_trace, recurrence_for, sum_kernel};
use crate::painleve::{integrate_piii, integrate_r, PainleveParams, PainleveSolution};
use crate::psi::{c1_fit, lax_compatibility_check, psi_eval, sweep, PsiConfig};
use crate::specfun::{airy_asym_neg, airy_asym_pos, airy_series, j_asym, j_series};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub module: String,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
    /// error text when the check could not be evaluated
    pub detail: String,
}

impl Check {
    fn at_most(module: &str, name: impl Into<String>, value: Result<f64>, limit: f64) -> Check {
        let (value, detail) = match value {
            Ok(v) => (v, String::new()),
            Err(e) => (f64::INFINITY, e.to_string()),
        };
        Check { module: module.into(), name: name.into(), value, limit, pass: value <= limit, detail }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidateSummary {
    pub schema_version: String,
    pub tol: f64,
    pub checks: Vec<Check>,
}

impl ValidateSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let mark = if c.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{mark}  {:<12} {:<52} {:>10.3e} <= {:.0e}", c.module, c.name, c.value, c.limit));
            if !c.detail.is_empty() {
                out.push_str(&format!("  ({})", c.detail));
            }
            out.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        out.push_str(&format!("{} checks, {failed} failed\n", self.checks.len()));
        out
    }
}

fn max_of<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    it.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?.abs())))
}

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

fn specfun_checks() -> Vec<Check> {
    let xs: Vec<f64> = (0..=40).map(|i| 7.0 + 2.0 * i as f64 / 40.0).collect();
    let airy = xs.iter().fold(0.0f64, |m, &x| {
        let (a, b) = (airy_series(x), airy_asym_pos(x));
        let (c, d) = (airy_series(-x), airy_asym_neg(x));
        let scale = (c.ai.powi(2) + c.ai_prime.powi(2) / x).sqrt();
        m.max(((a.ai - b.ai) / a.ai).abs())
            .max(((a.ai_prime - b.ai_prime) / a.ai_prime).abs())
            .max((c.ai - d.ai).abs() / scale)
            .max((c.ai_prime - d.ai_prime).abs() / (scale * x.sqrt()))
    });
    let bessel = max_of([0.3, 0.5, 1.5, 2.5, 3.7].iter().flat_map(|&nu| {
        (0..=40).map(move |i| {
            let x = 28.0 + 4.0 * i as f64 / 40.0;
            Ok((j_series(nu, x)? - j_asym(nu, x)).abs() / (2.0 / (PI * x)).sqrt())
        })
    }));
    vec![
        Check::at_most("specfun", "Airy series vs asymptotic on |x| in [7, 9]", Ok(airy), 1e-11),
        Check::at_most("specfun", "Bessel J series vs Hankel on [28, 32]", bessel, 1e-11),
    ]
}

fn painleve_checks(alpha: f64, sol: &Result<PainleveSolution>, tol: f64) -> Vec<Check> {
    let m = "painleve";
    // the difference stencil of the B1 check needs room below s_max
    let ss = log_points(1e-3, 0.99e4, 57);
    let with = |f: &dyn Fn(&PainleveSolution) -> Result<f64>| match sol {
        Ok(s) => f(s),
        Err(e) => Err(e.clone()),
    };
    let piii = |s: &PainleveSolution| {
        let p = integrate_piii(&PainleveParams::new(alpha)?, 60.0, tol)?;
        max_of(log_points(0.1, 50.0, 40).into_iter().map(|x| Ok(p.v(x)?[0] - x * s.rp(x)?)))
    };
    vec![
        Check::at_most(m, format!("a = {alpha}: r-equation residual"), with(&|s| max_of(ss.iter().map(|&x| s.residual_r_equation(x)))), 1e-8),
        Check::at_most(m, format!("a = {alpha}: q'^2 + r't' - 1, q' by differences"), with(&|s| max_of(ss.iter().map(|&x| s.b1_det_residual_fd(x)))), 1e-8),
        Check::at_most(m, format!("a = {alpha}: alternative third-order residual"), with(&|s| max_of(ss.iter().map(|&x| s.residual_alt_third_order(x)))), 1e-7),
        Check::at_most(m, format!("a = {alpha}: PIII |v - s r'| on [0.1, 50]"), with(&piii), 100.0 * tol),
    ]
}

/// Largest relative deviation of the fitted C1 entries (q, r, t) from the
/// integrated transcendents at s in {0.1, 0.5, 1, 2}.
pub fn c1_check(sol: &PainleveSolution) -> Check {
    let i = Complex64::new(0.0, 1.0);
    let dev = max_of([0.1, 0.5, 1.0, 2.0].iter().map(|&s| {
        let c = c1_fit(sol, s, &PsiConfig::for_s(s))?;
        let fit = [c[(0, 0)].re, (i * c[(0, 1)]).re, (-i * c[(1, 0)]).re];
        let want = [sol.q_of_s(s)?, sol.r(s)?, sol.t_of_s(s)?];
        max_of((0..3).map(|k| Ok((fit[k] - want[k]) / want[k])))
    }));
    Check::at_most("psi_system", format!("a = {}: c1_fit vs (q, r, t)", sol.params.alpha), dev, 1e-3)
}

fn psi_checks(sol: &Result<PainleveSolution>, tol: f64) -> Vec<Check> {
    let m = "psi_system";
    let sol = match sol {
        Ok(s) => s,
        Err(e) => return vec![Check::at_most(m, "Painleve solution", Err(e.clone()), 0.0)],
    };
    let alpha = sol.params.alpha;
    let us: Vec<f64> = (0..=20).map(|k| 0.5 * 20f64.powf(k as f64 / 20.0)).collect();
    let cfg = PsiConfig { tol, ..PsiConfig::for_s(1.0) };
    let wronskian = sweep(sol, 1.0, &us, &cfg).map(|sw| sw.wronskian_drift);
    let ray = (|| {
        let a = psi_eval(sol, 1.0, &us, &cfg)?;
        let b = psi_eval(sol, 1.0, &us, &PsiConfig { ray_eps: 1e-3, ..cfg })?;
        Ok(a.iter().zip(&b).fold(0.0f64, |m, (x, y)| {
            let d = (x.psi1 - y.psi1).norm() + (x.psi2 - y.psi2).norm();
            m.max(d / (x.psi1.norm() + x.psi2.norm()))
        }))
    })();
    let compat = max_of([1.0, 2.0].iter().flat_map(|&s| {
        let cfg = PsiConfig { tol, ..PsiConfig::for_s(s) };
        [-5.0, -10.0].map(move |z| lax_compatibility_check(sol, s, Complex64::new(z, 0.0), 1e-4, &cfg))
    }));
    vec![
        Check::at_most(m, format!("a = {alpha}: det Psi drift, s = 1"), wronskian, 1e-8),
        Check::at_most(m, format!("a = {alpha}: ray offset 1e-2 vs 1e-3"), ray, 1e-6),
        c1_check(sol),
        Check::at_most(m, format!("a = {alpha}: Lax compatibility at ds = 1e-4"), compat, 1e-4),
    ]
}

fn orthopoly_checks() -> Vec<Check> {
    let m = "orthopoly";
    let built = recurrence_for(0.5, 1.0 / 32.0, 16);
    let with = |f: &dyn Fn(&crate::orthopoly::RecurrenceTable, &crate::orthopoly::Discretization) -> Result<f64>| match &built {
        Ok((t, d)) => f(t, d),
        Err(e) => Err(e.clone()),
    };
    let grid = [0.5, 1.0, 2.0, 5.0, 10.0];
    let laguerre = recurrence_for(0.5, 1e-10, 16).map(|(t, _)| {
        (0..=10).fold(0.0f64, |m, k| {
            let kf = k as f64;
            let db = if k >= 1 { (t.b[k] - kf * (kf + 0.5)).abs() } else { 0.0 };
            m.max((t.a[k] - (2.0 * kf + 1.5)).abs()).max(db)
        })
    });
    vec![
        Check::at_most(m, "a = 0.5, t = 1/32: moment gate", with(&|_, d| Ok(d.moment_error)), 1e-12),
        Check::at_most(
            m,
            "kernel trace - n for n in {4, 8, 16}",
            with(&|t, d| max_of([4usize, 8, 16].iter().map(|&n| Ok(kernel_trace(t, d, n)? - n as f64)))),
            1e-6,
        ),
        Check::at_most(
            m,
            "Christoffel-Darboux vs direct sum",
            with(&|t, _| {
                max_of(grid.iter().flat_map(|&u| {
                    grid.iter().map(move |&v| {
                        let (x, y) = (u / 32.0, v / 32.0);
                        let s = sum_kernel(t, 8, x, y)?;
                        Ok((cd_kernel(t, 8, x, y)? - s) / s)
                    })
                }))
            }),
            1e-8,
        ),
        Check::at_most(m, "t = 1e-10 recurrence vs Laguerre", laguerre, 1e-6),
    ]
}

/// Every module's invariant suite at tolerance `tol` (Painleve and Psi
/// integration).
pub fn run_validate(tol: f64) -> Result<ValidateSummary> {
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(crate::error::Error::Config(format!("tol = {tol} outside [1e-12, 1e-6]")));
    }
    let sols: Vec<(f64, Result<PainleveSolution>)> = [0.5, 1.5]
        .par_iter()
        .map(|&a| (a, PainleveParams::new(a).and_then(|p| integrate_r(&p, 1e4, tol))))
        .collect();
    let mut checks = specfun_checks();
    let per_alpha: Vec<Vec<Check>> = sols
        .par_iter()
        .map(|(a, sol)| {
            let mut v = painleve_checks(*a, sol, tol);
            v.extend(psi_checks(sol, tol));
            v
        })
        .collect();
    checks.extend(per_alpha.into_iter().flatten());
    checks.extend(orthopoly_checks());
    Ok(ValidateSummary { schema_version: super::SCHEMA_VERSION.into(), tol, checks })
}
