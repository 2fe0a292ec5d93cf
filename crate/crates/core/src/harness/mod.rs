//! Convergence experiments for the Bessel, Airy and hard-edge limits, and
//! flat-file output for them.

mod output;
mod validate;

use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{airy_kernel, bessel_kernel};
use crate::orthopoly::{hard_edge_rescale, recurrence_for};
use crate::painleve::{integrate_r, PainleveParams, PainleveSolution};
use crate::psi::{psi_kernel_grid, PsiConfig};

pub use output::{format_number, Table};
pub use validate::{c1_check, run_validate, Check, ValidateSummary};

pub const SCHEMA_VERSION: &str = "1";
/// (3/2)^{2/3}, the constant of the Airy scaling.
pub const AIRY_C: f64 = 1.310_370_697_104_448_1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Bessel,
    Airy,
    HardEdge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Grid along one axis: `MIN:MAX:COUNT` (uniform) or an explicit list `a,b,c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum GridSpec {
    Uniform { min: f64, max: f64, count: usize },
    Points(Vec<f64>),
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        match self {
            GridSpec::Uniform { min, max, count } => match count {
                0 => Vec::new(),
                1 => vec![*min],
                n => (0..*n).map(|k| min + (max - min) * k as f64 / (n - 1) as f64).collect(),
            },
            GridSpec::Points(p) => p.clone(),
        }
    }

    fn check_within(&self, lo: f64, hi: f64, what: &str) -> Result<()> {
        let pts = self.points();
        if pts.is_empty() {
            return Err(Error::Config(format!("{what}: empty grid")));
        }
        match pts.iter().find(|p| !(lo..=hi).contains(*p)) {
            Some(p) => Err(Error::Config(format!("{what}: grid point {p} outside [{lo}, {hi}]"))),
            None => Ok(()),
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<GridSpec> {
        let bad = || Error::Config(format!("grid `{text}` is neither MIN:MAX:COUNT nor a comma list"));
        if text.contains(':') {
            let parts: Vec<&str> = text.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
            let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
            let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
            if count == 0 || !(min <= max) || !min.is_finite() || !max.is_finite() {
                return Err(bad());
            }
            return Ok(GridSpec::Uniform { min, max, count });
        }
        let pts = text.split(',').map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>();
        match pts {
            Ok(p) if !p.is_empty() && p.iter().all(|x| x.is_finite()) => Ok(GridSpec::Points(p)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub regime: Regime,
    pub alpha: f64,
    /// fixed parameter of the hard-edge run
    pub s: f64,
    pub s_schedule: Vec<f64>,
    pub n_schedule: Vec<usize>,
    pub grid: GridSpec,
    pub tol: f64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    /// The schedules and grids of the acceptance runs.
    pub fn standard(regime: Regime, alpha: f64) -> RunConfig {
        let (s_schedule, n_schedule, grid) = match regime {
            Regime::Bessel => (
                vec![1e-2, 5e-3, 2.5e-3],
                Vec::new(),
                GridSpec::Uniform { min: 0.5, max: 10.0, count: 6 },
            ),
            Regime::Airy => (vec![1e3, 1e4], Vec::new(), GridSpec::Uniform { min: -2.0, max: 2.0, count: 5 }),
            Regime::HardEdge => (Vec::new(), vec![16, 32], GridSpec::Points(vec![1.0, 2.0, 5.0])),
        };
        RunConfig {
            regime,
            alpha,
            s: 1.0,
            s_schedule,
            n_schedule,
            grid,
            tol: 1e-12,
            output: None,
            format: OutputFormat::Csv,
        }
    }

    fn check_tol(&self) -> Result<()> {
        if !(1e-12..=1e-6).contains(&self.tol) {
            return Err(Error::Config(format!("tol = {} outside [1e-12, 1e-6]", self.tol)));
        }
        Ok(())
    }

    fn psi_config(&self, s: f64) -> PsiConfig {
        PsiConfig { tol: self.tol, ..PsiConfig::for_s(s) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    /// s or n of the level this row belongs to
    pub param: f64,
    pub u: f64,
    pub v: f64,
    pub kernel: f64,
    pub reference: f64,
    pub abs_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    pub param: f64,
    pub sup_error: f64,
    /// soft-edge position s^{2/3}/(4n), hard-edge runs only
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

/// Least-squares line through (ln param, ln E).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// root mean square of the fit residuals in ln E
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Criterion {
    pub name: String,
    pub value: f64,
    pub band: [Option<f64>; 2],
    pub pass: bool,
    /// where the band comes from
    pub basis: String,
}

impl Criterion {
    fn banded(name: impl Into<String>, value: f64, lo: Option<f64>, hi: Option<f64>, basis: &str) -> Criterion {
        let pass = value.is_finite() && lo.is_none_or(|l| value >= l) && hi.is_none_or(|h| value <= h);
        Criterion { name: name.into(), value, band: [lo, hi], pass, basis: basis.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionReport {
    pub schema_version: String,
    pub regime: Regime,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub schedule: Vec<f64>,
    pub grid: Vec<f64>,
    pub rows: Vec<ReportRow>,
    pub levels: Vec<Level>,
    /// absent when the schedule has a single level
    pub rate: Option<RateFit>,
    pub criteria: Vec<Criterion>,
}

impl TransitionReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn table(&self) -> Table {
        let rows = self.rows.iter().map(|r| vec![r.param, r.u, r.v, r.kernel, r.reference, r.abs_error]).collect();
        Table::new(["param", "u", "v", "kernel", "reference", "abs_error"], rows)
    }

    pub fn to_csv(&self) -> String {
        self.table().to_csv()
    }

    pub fn to_json(&self) -> Result<String> {
        output::to_json(self)
    }

    /// Writes to `cfg.output` in `cfg.format`; does nothing without a path.
    pub fn write(&self, cfg: &RunConfig) -> Result<()> {
        let Some(path) = &cfg.output else { return Ok(()) };
        let text = match cfg.format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json()?,
        };
        output::write_file(path, &text)
    }
}

pub fn run_transition(cfg: &RunConfig) -> Result<TransitionReport> {
    match cfg.regime {
        Regime::Bessel => run_bessel_transition(cfg),
        Regime::Airy => run_airy_transition(cfg),
        Regime::HardEdge => run_hard_edge(cfg),
    }
}

fn solve(alpha: f64, s_max: f64, tol: f64) -> Result<PainleveSolution> {
    integrate_r(&PainleveParams::new(alpha)?, s_max.max(1.0), tol)
}

fn check_schedule(sched: &[f64], lo: f64, hi: f64, what: &str) -> Result<()> {
    if sched.is_empty() {
        return Err(Error::Config(format!("{what}: empty schedule")));
    }
    match sched.iter().find(|s| !(**s > lo && **s <= hi)) {
        Some(s) => Err(Error::Config(format!("{what}: s = {s} outside ({lo}, {hi}]"))),
        None => Ok(()),
    }
}

/// Rows for one level, in grid order, with the sup error.
fn level_rows(param: f64, grid: &[f64], kernel: &[Vec<f64>], reference: &[Vec<f64>]) -> Result<(Vec<ReportRow>, f64)> {
    let mut rows = Vec::with_capacity(grid.len() * grid.len());
    let mut sup = 0.0f64;
    for (i, &u) in grid.iter().enumerate() {
        for (j, &v) in grid.iter().enumerate() {
            let (k, r) = (kernel[i][j], reference[i][j]);
            let abs_error = (k - r).abs();
            if !abs_error.is_finite() {
                return Err(Error::Consistency(format!("non-finite error at level {param}, ({u}, {v})")));
            }
            sup = sup.max(abs_error);
            rows.push(ReportRow { param, u, v, kernel: k, reference: r, abs_error });
        }
    }
    Ok((rows, sup))
}

/// Matrix of `f(grid[i], grid[j])`, evaluated in parallel.
fn par_matrix<F>(grid: &[f64], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let m = grid.len();
    let flat: Vec<f64> = (0..m * m).into_par_iter().map(|k| f(grid[k / m], grid[k % m])).collect::<Result<_>>()?;
    Ok(flat.chunks(m).map(|c| c.to_vec()).collect())
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Config("rate fit needs at least two levels".into()));
    }
    if ys.iter().any(|y| !(*y > 0.0)) {
        return Err(Error::Consistency("rate fit on a zero error".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("rate fit needs distinct levels".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(RateFit { slope, intercept, residual: (ss / n).sqrt() })
}

fn level_fit(params: &[f64], errs: &[f64]) -> Result<Option<RateFit>> {
    if errs.len() < 2 {
        return Ok(None);
    }
    loglog_fit(params, errs).map(Some)
}

/// `K_Psi(u, v, s)` against `J_a(u, v)` for small s.
pub fn run_bessel_transition(cfg: &RunConfig) -> Result<TransitionReport> {
    cfg.check_tol()?;
    check_schedule(&cfg.s_schedule, 0.0, 0.1, "bessel transition")?;
    cfg.grid.check_within(0.5, 10.0, "bessel transition")?;
    let grid = cfg.grid.points();
    let sol = solve(cfg.alpha, 1.0, cfg.tol)?;
    let reference = par_matrix(&grid, |u, v| bessel_kernel(cfg.alpha, u, v))?;
    let kernels: Vec<Vec<Vec<f64>>> = cfg
        .s_schedule
        .par_iter()
        .map(|&s| Ok(psi_kernel_grid(&sol, s, &grid, &grid, &cfg.psi_config(s))?.values))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for (&s, k) in cfg.s_schedule.iter().zip(&kernels) {
        let (r, sup) = level_rows(s, &grid, k, &reference)?;
        rows.extend(r);
        levels.push(Level { param: s, sup_error: sup, alpha_n: None, t: None });
    }
    let errs: Vec<f64> = levels.iter().map(|l| l.sup_error).collect();
    let rate = level_fit(&cfg.s_schedule, &errs)?;
    let criteria = rate
        .iter()
        .map(|f| {
            Criterion::banded("slope of ln E against ln s", f.slope, Some(0.7), Some(1.3), "O(s) order; band from pilot runs")
        })
        .collect();
    Ok(TransitionReport {
        schema_version: SCHEMA_VERSION.into(),
        regime: Regime::Bessel,
        alpha: cfg.alpha,
        s: None,
        schedule: cfg.s_schedule.clone(),
        grid,
        rows,
        levels,
        rate,
        criteria,
    })
}

/// Psi argument `s^{2/3}(1 - x/(c s^{2/9}))` for Airy coordinate x.
pub fn airy_argument(s: f64, x: f64) -> f64 {
    s.powf(2.0 / 3.0) * (1.0 - x / (AIRY_C * s.powf(2.0 / 9.0)))
}

/// `(s^{4/9}/c) K_Psi(rho(x), rho(y), s)` against `A(x, y)` for large s.
pub fn run_airy_transition(cfg: &RunConfig) -> Result<TransitionReport> {
    cfg.check_tol()?;
    check_schedule(&cfg.s_schedule, 500.0 - 1e-9, 2e4, "airy transition")?;
    cfg.grid.check_within(-2.0, 2.0, "airy transition")?;
    let grid = cfg.grid.points();
    for &s in &cfg.s_schedule {
        let pc = cfg.psi_config(s);
        for &x in &grid {
            let rho = airy_argument(s, x);
            if !(rho >= pc.u_min && rho <= pc.r_start / 10.0) {
                return Err(Error::Config(format!(
                    "airy coordinate {x} maps to {rho} at s = {s}, outside [{}, {}]",
                    pc.u_min,
                    pc.r_start / 10.0
                )));
            }
        }
    }
    let s_max = cfg.s_schedule.iter().fold(0.0f64, |m, &s| m.max(s));
    let sol = solve(cfg.alpha, s_max, cfg.tol)?;
    let reference = par_matrix(&grid, airy_kernel)?;
    let kernels: Vec<Vec<Vec<f64>>> = cfg
        .s_schedule
        .par_iter()
        .map(|&s| {
            let rho: Vec<f64> = grid.iter().map(|&x| airy_argument(s, x)).collect();
            let scale = s.powf(4.0 / 9.0) / AIRY_C;
            let g = psi_kernel_grid(&sol, s, &rho, &rho, &cfg.psi_config(s))?;
            Ok(g.values.iter().map(|row| row.iter().map(|k| scale * k).collect()).collect())
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for (&s, k) in cfg.s_schedule.iter().zip(&kernels) {
        let (r, sup) = level_rows(s, &grid, k, &reference)?;
        rows.extend(r);
        levels.push(Level { param: s, sup_error: sup, alpha_n: None, t: None });
    }
    let errs: Vec<f64> = levels.iter().map(|l| l.sup_error).collect();
    let rate = level_fit(&cfg.s_schedule, &errs)?;
    let mut criteria = Vec::new();
    for (a, b) in levels.iter().zip(levels.iter().skip(1)) {
        let decades = (b.param / a.param).log10();
        let decreasing = if b.sup_error < a.sup_error { 1.0 } else { 0.0 };
        criteria.push(Criterion::banded(
            format!("E decreases from s = {} to {}", a.param, b.param),
            decreasing,
            Some(1.0),
            None,
            "monotone convergence",
        ));
        criteria.push(Criterion::banded(
            format!("per-decade ratio E({})/E({})", b.param, a.param),
            (b.sup_error / a.sup_error).powf(1.0 / decades),
            None,
            Some(0.8),
            "O(s^{-2/9}) order, 10^{-2/9} = 0.60; band from pilot runs",
        ));
    }
    Ok(TransitionReport {
        schema_version: SCHEMA_VERSION.into(),
        regime: Regime::Airy,
        alpha: cfg.alpha,
        s: None,
        schedule: cfg.s_schedule.clone(),
        grid,
        rows,
        levels,
        rate,
        criteria,
    })
}

/// Finite-n kernel `(1/4n) K_n(u/4n, v/4n)` with `t = s/(2n)` against `K_Psi(u, v, s)`.
pub fn run_hard_edge(cfg: &RunConfig) -> Result<TransitionReport> {
    cfg.check_tol()?;
    let ns = &cfg.n_schedule;
    if ns.is_empty() || ns.iter().any(|n| ![8, 16, 32, 64].contains(n)) {
        return Err(Error::Config(format!("hard edge: n-schedule {ns:?} must be a nonempty subset of {{8, 16, 32, 64}}")));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("hard edge: n-schedule {ns:?} must be increasing")));
    }
    if !(cfg.s > 0.0 && cfg.s <= 10.0) {
        return Err(Error::Config(format!("hard edge: s = {} outside (0, 10]", cfg.s)));
    }
    cfg.grid.check_within(0.1, 50.0, "hard edge")?;
    let grid = cfg.grid.points();
    let s = cfg.s;
    let sol = solve(cfg.alpha, s, cfg.tol)?;
    let reference = psi_kernel_grid(&sol, s, &grid, &grid, &cfg.psi_config(s))?.values;
    let finite: Vec<Vec<Vec<f64>>> = ns
        .par_iter()
        .map(|&n| {
            let (tab, _) = recurrence_for(cfg.alpha, s / (2.0 * n as f64), n)?;
            par_matrix(&grid, |u, v| hard_edge_rescale(&tab, n, u, v))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    for (&n, k) in ns.iter().zip(&finite) {
        let nf = n as f64;
        let (r, sup) = level_rows(nf, &grid, k, &reference)?;
        rows.extend(r);
        levels.push(Level {
            param: nf,
            sup_error: sup,
            alpha_n: Some(s.powf(2.0 / 3.0) / (4.0 * nf)),
            t: Some(s / (2.0 * nf)),
        });
    }
    let params: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let errs: Vec<f64> = levels.iter().map(|l| l.sup_error).collect();
    let rate = level_fit(&params, &errs)?;
    let mut criteria = Vec::new();
    for (a, b) in levels.iter().zip(levels.iter().skip(1)) {
        let doublings = (b.param / a.param).log2();
        criteria.push(Criterion::banded(
            format!("per-doubling ratio E({})/E({})", a.param, b.param),
            (a.sup_error / b.sup_error).powf(1.0 / doublings),
            Some(2.5),
            Some(6.0),
            "O(n^-2) order, ratio 4; band from pilot runs",
        ));
    }
    Ok(TransitionReport {
        schema_version: SCHEMA_VERSION.into(),
        regime: Regime::HardEdge,
        alpha: cfg.alpha,
        s: Some(s),
        schedule: params,
        grid,
        rows,
        levels,
        rate,
        criteria,
    })
}
