use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hardedge::harness::{run_transition, run_validate, GridSpec, OutputFormat, Regime, RunConfig, Table};
use hardedge::kernels::{airy_kernel, bessel_kernel, sine_kernel, KernelGrid};
use hardedge::orthopoly::{cd_kernel, recurrence_for};
use hardedge::painleve::{integrate_r, PainleveParams};
use hardedge::psi::{psi_kernel_grid, PsiConfig};
use hardedge::{Error, Result};

#[derive(Parser)]
#[command(name = "hardedge", version, about = "Hard-edge kernels of the singularly perturbed Laguerre ensemble")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a kernel on a square grid.
    Kernel(KernelArgs),
    /// Tabulate the r-equation solution and the derived transcendents.
    Painleve(PainleveArgs),
    /// Run one of the limit experiments.
    Transition(TransitionArgs),
    /// Run every module's invariant checks.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelKind {
    Sine,
    Airy,
    Bessel,
    Psi,
    Cd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> OutputFormat {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Bessel,
    Airy,
    HardEdge,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, value_enum)]
    kind: KernelKind,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// parameter of the Psi-kernel
    #[arg(long)]
    s: Option<f64>,
    /// degree of the Christoffel-Darboux kernel
    #[arg(long)]
    n: Option<usize>,
    /// weight parameter of the Christoffel-Darboux kernel
    #[arg(long)]
    t: Option<f64>,
    /// MIN:MAX:COUNT or a comma list
    #[arg(long)]
    grid: GridSpec,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct PainleveArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 100.0)]
    smax: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// number of log-spaced sample points from 1e-3 to smax
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct TransitionArgs {
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// comma list of s values (bessel, airy)
    #[arg(long, value_delimiter = ',')]
    s_schedule: Option<Vec<f64>>,
    /// comma list of degrees (hard_edge)
    #[arg(long, value_delimiter = ',')]
    n_schedule: Option<Vec<usize>>,
    /// fixed s of the hard-edge run
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    grid: Option<GridSpec>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    /// also write the summary as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write(path: &PathBuf, table: &Table, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json()?,
    };
    std::fs::write(path, text).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))
}

fn kernel(a: KernelArgs) -> Result<()> {
    let xs = a.grid.points();
    let need = |v: Option<f64>, what: &str| v.ok_or_else(|| Error::Config(format!("--{what} is required for this kernel")));
    let mut meta: Vec<(&str, String)> = vec![("alpha", a.alpha.to_string())];
    let grid = match a.kind {
        KernelKind::Sine => KernelGrid::evaluate(&xs, &xs, |x, y| Ok(sine_kernel(x, y)))?,
        KernelKind::Airy => KernelGrid::evaluate(&xs, &xs, airy_kernel)?,
        KernelKind::Bessel => KernelGrid::evaluate(&xs, &xs, |x, y| bessel_kernel(a.alpha, x, y))?,
        KernelKind::Psi => {
            let s = need(a.s, "s")?;
            meta.push(("s", s.to_string()));
            let sol = integrate_r(&PainleveParams::new(a.alpha)?, s.max(1.0), 1e-12)?;
            psi_kernel_grid(&sol, s, &xs, &xs, &PsiConfig::for_s(s))?
        }
        KernelKind::Cd => {
            let n = a.n.ok_or_else(|| Error::Config("--n is required for this kernel".into()))?;
            let t = need(a.t, "t")?;
            meta.push(("n", n.to_string()));
            meta.push(("t", t.to_string()));
            let (tab, _) = recurrence_for(a.alpha, t, n)?;
            KernelGrid::evaluate(&xs, &xs, |x, y| cd_kernel(&tab, n, x, y))?
        }
    };
    let mut rows = Vec::new();
    for (i, &x) in grid.xs.iter().enumerate() {
        for (j, &y) in grid.ys.iter().enumerate() {
            rows.push(vec![x, y, grid.values[i][j]]);
        }
    }
    let kind = a.kind.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let mut table = Table::new(["x", "y", "value"], rows).with_meta("kind", kind);
    for (k, v) in meta {
        table = table.with_meta(k, v);
    }
    write(&a.out, &table, a.format)
}

fn painleve(a: PainleveArgs) -> Result<()> {
    if a.points < 2 {
        return Err(Error::Config("--points must be at least 2".into()));
    }
    let sol = integrate_r(&PainleveParams::new(a.alpha)?, a.smax, a.tol)?;
    // the difference stencils need room on both sides
    let (lo, hi) = (1e-3, a.smax * 0.99);
    let mut rows = Vec::with_capacity(a.points);
    for k in 0..a.points {
        let s = lo * (hi / lo).powf(k as f64 / (a.points - 1) as f64);
        rows.push(vec![
            s,
            sol.r(s)?,
            sol.rp(s)?,
            sol.q_of_s(s)?,
            sol.qprime_of_s(s)?,
            sol.tprime_of_s(s)?,
            sol.t_of_s(s)?,
            sol.residual_r_equation(s)?,
            sol.residual_alt_third_order(s)?,
            sol.b1_det_residual_fd(s)?,
        ]);
    }
    let cols = ["s", "r", "r'", "q", "q'", "t'", "t", "res_r_equation", "res_alt_third_order", "res_b1_det"];
    let table = Table::new(cols, rows)
        .with_meta("alpha", a.alpha)
        .with_meta("tol", a.tol)
        .with_meta("c", sol.c);
    write(&a.out, &table, a.format)
}

fn transition(a: TransitionArgs) -> Result<bool> {
    let regime = match a.regime {
        RegimeArg::Bessel => Regime::Bessel,
        RegimeArg::Airy => Regime::Airy,
        RegimeArg::HardEdge => Regime::HardEdge,
    };
    let mut cfg = RunConfig::standard(regime, a.alpha);
    if let Some(v) = a.s_schedule {
        cfg.s_schedule = v;
    }
    if let Some(v) = a.n_schedule {
        cfg.n_schedule = v;
    }
    if let Some(s) = a.s {
        cfg.s = s;
    }
    if let Some(g) = a.grid {
        cfg.grid = g;
    }
    if let Some(t) = a.tol {
        cfg.tol = t;
    }
    cfg.output = a.out;
    cfg.format = a.format.into();
    let report = run_transition(&cfg)?;
    report.write(&cfg)?;
    for l in &report.levels {
        print!("level {:>10}  sup error {:.6e}", l.param, l.sup_error);
        if let Some(an) = l.alpha_n {
            print!("  alpha_n {an:.6e}");
        }
        println!();
    }
    if let Some(r) = &report.rate {
        println!("fit slope {:.4} (residual {:.2e})", r.slope, r.residual);
    }
    for c in &report.criteria {
        let band = format!(
            "[{}, {}]",
            c.band[0].map_or("-inf".to_string(), |v| v.to_string()),
            c.band[1].map_or("inf".to_string(), |v| v.to_string())
        );
        println!("{}  {}: {:.4} in {band}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    Ok(report.passed())
}

fn validate(a: ValidateArgs) -> Result<bool> {
    let summary = run_validate(a.tol)?;
    print!("{}", summary.render());
    if let Some(path) = a.out {
        let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(summary.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Kernel(a) => kernel(a).map(|_| true),
        Command::Painleve(a) => painleve(a).map(|_| true),
        Command::Transition(a) => transition(a),
        Command::Validate(a) => validate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("hardedge: {e}");
            ExitCode::FAILURE
        }
    }
}
