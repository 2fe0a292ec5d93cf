use super::bvp::{Shooting, System};
use super::series::{r_from_first_integral, LargeSeries, LocalSeries};
use crate::error::{Error, Result};
use crate::ode::{rk_step, Dopri5, Tolerance};
use crate::specfun::{gauss_legendre, tanh_sinh, QuadratureRule};

/// Default left end of the numerical trajectory; below it the local series is used.
pub const S0: f64 = 1e-4;

// Left end at which the free series term, which enters the state like
// s^kappa, is still visible at the 1e-4 level; the series order grows with it.
fn left_point(kappa: f64) -> (f64, f64) {
    let s = if kappa > 0.0 { 10f64.powf(-4.0 / kappa).clamp(S0, 1e-2) } else { S0 };
    let max_exp = if s <= S0 { 5.0 } else { 8.0 };
    (s, max_exp)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PainleveParams {
    pub alpha: f64,
    pub l: f64,
}

impl PainleveParams {
    pub fn new(alpha: f64) -> Result<PainleveParams> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        if (alpha - alpha.round()).abs() < 1e-8 {
            return Err(Error::CoefficientSingularity(format!(
                "integer alpha = {alpha}: the local series has a resonance with the analytic terms"
            )));
        }
        Ok(PainleveParams { alpha, l: 0.0 })
    }

    pub fn r0(&self) -> f64 {
        LocalSeries::r0(self.alpha)
    }

    pub fn r1(&self) -> f64 {
        1.0 / self.alpha
    }

    pub fn q0(&self) -> f64 {
        let a2 = 4.0 * self.alpha * self.alpha;
        (a2 - 1.0) * (a2 - 9.0) / 128.0
    }

    pub fn t0(&self) -> f64 {
        let a2 = 4.0 * self.alpha * self.alpha;
        (a2 - 1.0) * (a2 - 9.0) * (a2 - 13.0) / 1536.0
    }
}

/// (r, r', r'') at s0 from the analytic part of the local series only.
pub fn taylor_start(params: &PainleveParams, s0: f64) -> Result<[f64; 3]> {
    if !(s0 > 0.0 && s0 <= 1e-3) {
        return Err(Error::Domain(format!("taylor_start needs 0 < s0 <= 1e-3, got {s0}")));
    }
    let series = LocalSeries::new(params.alpha, 0.0, 3.0)?;
    let mut out = [0.0; 3];
    for &(e, a) in &series.terms {
        if e != e.round() {
            continue;
        }
        out[0] += a * s0.powf(e);
        if e >= 1.0 {
            out[1] += a * e * s0.powf(e - 1.0);
        }
        if e >= 2.0 {
            out[2] += a * e * (e - 1.0) * s0.powf(e - 2.0);
        }
    }
    Ok(out)
}

/// Right side of the first order system for (r, r', r'').
pub(crate) fn r_rhs(s: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let (r, p, w) = (y[0], y[1], y[2]);
    if !(p.abs() > 1e-12) {
        return Err(Error::Division(format!("r' = {p} at s = {s}")));
    }
    let n = s * s * w * w - 2.0 * s * p * w + 4.0 * s * p * p * p - (2.0 * r - 0.25) * p * p - 1.0;
    dy[0] = p;
    dy[1] = w;
    dy[2] = n / (2.0 * s * s * p);
    Ok(())
}

fn piii_rhs(alpha: f64, s: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
    let (v, u) = (y[0], y[1]);
    if v.abs() < 1e-10 {
        return Err(Error::Pole(format!("v = {v} at s = {s}")));
    }
    dy[0] = u;
    dy[1] = u * u / v - u / s + v * v / (s * s) + alpha / s - 1.0 / v;
    Ok(())
}

struct RSystem {
    alpha: f64,
    large: LargeSeries,
    s_end: f64,
    s0: f64,
    max_exp: f64,
}

impl System for RSystem {
    fn dim(&self) -> usize {
        3
    }
    fn rhs(&self, s: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        r_rhs(s, y, dy)
    }
    fn jac(&self, s: f64, y: &[f64], j: &mut [f64]) {
        let (r, p, w) = (y[0], y[1], y[2]);
        let n = s * s * w * w - 2.0 * s * p * w + 4.0 * s * p * p * p - (2.0 * r - 0.25) * p * p - 1.0;
        let d = 2.0 * s * s * p;
        j.fill(0.0);
        j[1] = 1.0;
        j[5] = 1.0;
        j[6] = -2.0 * p * p / d;
        j[7] = (-2.0 * s * w + 12.0 * s * p * p - 2.0 * (2.0 * r - 0.25) * p) / d - n / (d * p);
        j[8] = (2.0 * s * s * w - 2.0 * s * p) / d;
    }
    fn s0(&self) -> f64 {
        self.s0
    }
    fn left(&self, c: f64) -> Result<Vec<f64>> {
        Ok(LocalSeries::new(self.alpha, c, self.max_exp)?.state(self.s0).to_vec())
    }
    fn right(&self, y: &[f64]) -> (f64, Vec<f64>) {
        (y[1] - self.large.eval(self.s_end)[0], vec![0.0, 1.0, 0.0])
    }
    fn scale(&self, s: f64) -> Vec<f64> {
        let p = 1.0 / (self.alpha + s.cbrt());
        vec![1.0 + s.powf(2.0 / 3.0), p, p / (1.0 + s)]
    }
}

struct PiiiSystem {
    alpha: f64,
    large: LargeSeries,
    s_end: f64,
    s0: f64,
    max_exp: f64,
}

impl System for PiiiSystem {
    fn dim(&self) -> usize {
        2
    }
    fn rhs(&self, s: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        piii_rhs(self.alpha, s, y, dy)
    }
    fn jac(&self, s: f64, y: &[f64], j: &mut [f64]) {
        let (v, u) = (y[0], y[1]);
        j[0] = 0.0;
        j[1] = 1.0;
        j[2] = -u * u / (v * v) + 2.0 * v / (s * s) + 1.0 / (v * v);
        j[3] = 2.0 * u / v - 1.0 / s;
    }
    fn s0(&self) -> f64 {
        self.s0
    }
    fn left(&self, c: f64) -> Result<Vec<f64>> {
        let series = LocalSeries::new(self.alpha, c, self.max_exp)?;
        Ok(piii_state(&series, self.s0).to_vec())
    }
    fn right(&self, y: &[f64]) -> (f64, Vec<f64>) {
        (y[0] - self.s_end * self.large.eval(self.s_end)[0], vec![1.0, 0.0])
    }
    fn scale(&self, s: f64) -> Vec<f64> {
        let v = s / (self.alpha + s.cbrt());
        vec![v, v / s.max(1e-300)]
    }
}

// v = s r' and v' = r' + s r'' from the local series
fn piii_state(series: &LocalSeries, s: f64) -> [f64; 2] {
    let v = series.eval(s);
    [s * v.rp, v.rp + v.s_rpp]
}

/// Right end of the boundary value problem for a requested s_max: far enough
/// that the decaying mode has died out before s_max.
pub fn boundary_point(s_max: f64) -> f64 {
    (s_max.cbrt() + 8.0).powi(3)
}

fn shooting_nodes(s0: f64, s_end: f64) -> Vec<f64> {
    let mut nodes = vec![s0];
    nodes.extend([1e-3, 1e-2, 0.05, 0.2, 0.5, 1.0].iter().filter(|&&x| x > 1.5 * s0));
    let mut x = 1.0f64;
    loop {
        x += 0.5;
        let s = x.powi(3);
        if s >= s_end * 0.999 {
            break;
        }
        nodes.push(s);
    }
    nodes.push(s_end);
    nodes
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Departure {
    Above,
    Below,
}

/// Integrate from the left manifold until the trajectory leaves the pole-free
/// corridor; reports which side it left on and the states at `record`.
fn shoot<S: System>(
    sys: &S,
    c: f64,
    s_stop: f64,
    p_ref: &dyn Fn(f64, &[f64]) -> f64,
    p_final: f64,
    record: &[f64],
) -> (Departure, Vec<(f64, Vec<f64>)>) {
    let y0 = match sys.left(c) {
        Ok(y) => y,
        Err(_) => return (Departure::Below, vec![]),
    };
    let f = |s: f64, y: &[f64], d: &mut [f64]| sys.rhs(s, y, d);
    let s0 = sys.s0();
    let mut ode = Dopri5::new(f, s0, &y0, 0.0);
    let tol = Tolerance::new(1e-12, 1e-14);
    let mut out = Vec::new();
    let mut verdict = None;
    let mut last = y0.clone();
    for &target in record.iter().chain(std::iter::once(&s_stop)) {
        if target <= s0 || target > s_stop {
            continue;
        }
        let res = ode.advance(target, &tol, |s, y| {
            let p = p_ref(s, y);
            if !(p > 0.0) || p < 1e-9 {
                verdict = Some(Departure::Below);
                return Err(Error::Pole(String::new()));
            }
            if p > 1e6 {
                verdict = Some(Departure::Above);
                return Err(Error::Pole(String::new()));
            }
            Ok(())
        });
        if res.is_err() {
            if verdict.is_none() {
                let p = p_ref(ode.x, &ode.y);
                let grow = p_ref(ode.x, &ode.y) > p_ref(ode.x, &last);
                verdict = Some(if p > 1.0 || grow { Departure::Above } else { Departure::Below });
            }
            return (verdict.unwrap(), out);
        }
        last = ode.y.clone();
        out.push((target, ode.y.clone()));
    }
    let p = p_ref(ode.x, &ode.y);
    (if p > p_final { Departure::Above } else { Departure::Below }, out)
}

/// Bisection on the free series parameter for the separatrix.
fn find_c<S: System>(
    sys: &S,
    s_stop: f64,
    p_ref: &dyn Fn(f64, &[f64]) -> f64,
    p_final: f64,
) -> Result<f64> {
    let mut grid = vec![0.0];
    for k in -3..13 {
        let m = 2f64.powi(k);
        grid.push(m);
        grid.push(-m);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let classes: Vec<Departure> = grid.iter().map(|&c| shoot(sys, c, s_stop, p_ref, p_final, &[]).0).collect();
    let idx = (0..grid.len() - 1)
        .find(|&i| classes[i] != classes[i + 1])
        .ok_or_else(|| Error::NoConvergence("no sign change while bracketing the separatrix".into()))?;
    let (mut a, mut b) = (grid[idx], grid[idx + 1]);
    let ca = classes[idx];
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if shoot(sys, m, s_stop, p_ref, p_final, &[]).0 == ca {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Clone, Debug)]
struct Segment {
    s: Vec<f64>,
    y: Vec<Vec<f64>>,
    // running integral of t' from S0 at each stored step
    tcum: Vec<f64>,
}

#[derive(Clone, Debug)]
struct Trajectory {
    segments: Vec<Segment>,
}

impl Trajectory {
    fn build<S: System>(sys: &S, nodes: &[f64], states: &[Vec<f64>], tol: &Tolerance) -> Result<Trajectory> {
        let mut segments = Vec::new();
        for i in 0..nodes.len() - 1 {
            let f = |s: f64, y: &[f64], d: &mut [f64]| sys.rhs(s, y, d);
            let mut ode = Dopri5::new(f, nodes[i], &states[i], 0.0);
            let mut seg = Segment { s: vec![nodes[i]], y: vec![states[i].clone()], tcum: vec![] };
            ode.advance(nodes[i + 1], tol, |s, y| {
                seg.s.push(s);
                seg.y.push(y.to_vec());
                Ok(())
            })?;
            segments.push(seg);
        }
        Ok(Trajectory { segments })
    }

    fn locate(&self, s: f64) -> (usize, usize) {
        let si = self.segments.partition_point(|g| g.s[0] <= s).max(1) - 1;
        let g = &self.segments[si];
        let k = g.s.partition_point(|&x| x <= s).max(1) - 1;
        (si, k.min(g.s.len() - 1))
    }

    fn state<F>(&self, rhs: F, s: f64) -> Result<Vec<f64>>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let (si, k) = self.locate(s);
        let g = &self.segments[si];
        rk_step(rhs, g.s[k], &g.y[k], s - g.s[k])
    }

    fn nodes(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::new();
        for g in &self.segments {
            for &s in &g.s {
                if v.last().is_none_or(|&l| s > l) {
                    v.push(s);
                }
            }
        }
        v
    }
}

/// Dense solution of the r-equation on [0, s_max].
#[derive(Clone, Debug)]
pub struct PainleveSolution {
    pub params: PainleveParams,
    pub s0: f64,
    pub s_max: f64,
    /// right end of the boundary value problem (beyond s_max)
    pub s_end: f64,
    pub tol: f64,
    /// coefficient of s^{1+alpha} in the local series
    pub c: f64,
    pub t_at_0: f64,
    pub newton_iterations: usize,
    series: LocalSeries,
    traj: Trajectory,
    t_s0: f64,
    gl: QuadratureRule,
}

/// (r, r', r'', r''') at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RState {
    pub r: f64,
    pub rp: f64,
    pub rpp: f64,
    pub rppp: f64,
    // s r'' and s^2 r''' stay finite at s = 0
    pub s_rpp: f64,
    pub s2_rppp: f64,
}

pub fn integrate_r(params: &PainleveParams, s_max: f64, tol: f64) -> Result<PainleveSolution> {
    if !(1.0..=1e5).contains(&s_max) {
        return Err(Error::Domain(format!("s_max = {s_max} outside [1, 1e5]")));
    }
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::Domain(format!("tol = {tol} outside [1e-12, 1e-6]")));
    }
    let alpha = params.alpha;
    let s_end = boundary_point(s_max);
    let large = LargeSeries::new(alpha, 40);
    if large.error_estimate(s_end) > 1e-12 {
        return Err(Error::Config(format!("large-s series inaccurate at s = {s_end}")));
    }
    let (s0, max_exp) = left_point(alpha - 1.0);
    let sys = RSystem { alpha, large: large.clone(), s_end, s0, max_exp };
    let nodes = shooting_nodes(s0, s_end);
    let p_ref = |_s: f64, y: &[f64]| y[1];
    let s_stop = s_end.min(400.0);
    let c0 = find_c(&sys, s_stop, &p_ref, large.eval(s_stop)[0])?;
    let guess = initial_guess(&sys, c0, &nodes, &p_ref, &large, |s, p, pp| {
        vec![r_from_first_integral(alpha, s, p, pp), p, pp]
    });
    let bvp_tol = Tolerance::new(tol, tol * 1e-4);
    let shooting = Shooting { sys: &sys, nodes: nodes.clone(), tol: bvp_tol };
    let sol = shooting.solve(c0, guess)?;
    let traj = Trajectory::build(&sys, &nodes, &sol.states, &bvp_tol)?;
    let series = LocalSeries::new(alpha, sol.c, max_exp)?;
    let mut out = PainleveSolution {
        params: *params,
        s0,
        s_max,
        s_end,
        tol,
        c: sol.c,
        t_at_0: params.t0(),
        newton_iterations: sol.iterations,
        series,
        traj,
        t_s0: 0.0,
        gl: gauss_legendre(8),
    };
    out.accumulate_t()?;
    out.guard()?;
    Ok(out)
}

fn initial_guess<S: System>(
    sys: &S,
    c: f64,
    nodes: &[f64],
    p_ref: &dyn Fn(f64, &[f64]) -> f64,
    large: &LargeSeries,
    from_asym: impl Fn(f64, f64, f64) -> Vec<f64>,
) -> Vec<Vec<f64>> {
    let interior: Vec<f64> = nodes[1..nodes.len() - 1].to_vec();
    let (_, shot) = shoot(sys, c, *nodes.last().unwrap(), p_ref, 0.0, &interior);
    let mut guess = vec![vec![0.0; sys.dim()]; nodes.len()];
    let mut departed = false;
    for (i, &s) in nodes.iter().enumerate().skip(1) {
        let asym = large.eval(s);
        let from_shot = shot.iter().find(|(x, _)| *x == s).map(|(_, y)| y.clone());
        if let (false, Some(y)) = (departed, from_shot) {
            if s < 30.0 || (p_ref(s, &y) / asym[0] - 1.0).abs() < 1e-3 {
                guess[i] = y;
                continue;
            }
        }
        departed = true;
        guess[i] = from_asym(s, asym[0], asym[1]);
    }
    guess
}

impl PainleveSolution {
    fn check_range(&self, s: f64) -> Result<()> {
        if !(s >= 0.0 && s <= self.s_max * (1.0 + 1e-12)) {
            return Err(Error::OutOfRange(format!("s = {s} outside [0, {}]", self.s_max)));
        }
        Ok(())
    }

    /// r and its derivatives at s, without the range check (up to s_end).
    pub(crate) fn state_unchecked(&self, s: f64) -> Result<RState> {
        if s < self.s0 {
            let v = self.series.eval(s);
            let (rpp, rppp) = if s > 0.0 { (v.s_rpp / s, v.s2_rppp / (s * s)) } else { (f64::NAN, f64::NAN) };
            return Ok(RState { r: v.r, rp: v.rp, rpp, rppp, s_rpp: v.s_rpp, s2_rppp: v.s2_rppp });
        }
        let y = self.traj.state(r_rhs, s.min(self.s_end))?;
        let mut d = [0.0; 3];
        r_rhs(s, &y, &mut d)?;
        Ok(RState { r: y[0], rp: y[1], rpp: y[2], rppp: d[2], s_rpp: s * y[2], s2_rppp: s * s * d[2] })
    }

    pub fn state(&self, s: f64) -> Result<RState> {
        self.check_range(s)?;
        self.state_unchecked(s)
    }

    pub fn r(&self, s: f64) -> Result<f64> {
        Ok(self.state(s)?.r)
    }

    pub fn rp(&self, s: f64) -> Result<f64> {
        Ok(self.state(s)?.rp)
    }

    pub fn series(&self) -> &LocalSeries {
        &self.series
    }

    /// Accepted step points of the numerical trajectory.
    pub fn stored_nodes(&self) -> Vec<f64> {
        self.traj.nodes().into_iter().filter(|&s| s <= self.s_max).collect()
    }

    fn q_parts(st: &RState, s: f64) -> (f64, f64) {
        let q = -s * st.rp + 0.5 * st.r + 0.5 * st.r * st.r;
        let qp = -st.s_rpp - 0.5 * st.rp + st.r * st.rp;
        (q, qp)
    }

    fn tprime_from(st: &RState, s: f64) -> Result<f64> {
        if st.rp.abs() < 1e-12 {
            return Err(Error::Division(format!("r' = {} at s = {s}", st.rp)));
        }
        let (_, qp) = Self::q_parts(st, s);
        Ok((1.0 - qp * qp) / st.rp)
    }

    pub(crate) fn tprime_unchecked(&self, s: f64) -> Result<f64> {
        Self::tprime_from(&self.state_unchecked(s)?, s)
    }

    fn accumulate_t(&mut self) -> Result<()> {
        let mut err = None;
        let head = tanh_sinh(0.0, self.s0, |x| match self.tprime_unchecked(x) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                0.0
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        self.t_s0 = head;
        let mut acc = 0.0;
        let gl = self.gl.clone();
        let mut all = Vec::new();
        for g in &self.traj.segments {
            let mut cum = vec![acc];
            for k in 0..g.s.len() - 1 {
                let (a, b) = (g.s[k], g.s[k + 1]);
                let mut e = None;
                let piece = gl.integrate(a, b, |x| {
                    let y = match rk_step(r_rhs, a, &g.y[k], x - a) {
                        Ok(y) => y,
                        Err(er) => {
                            e = Some(er);
                            return 0.0;
                        }
                    };
                    let st = RState { r: y[0], rp: y[1], rpp: y[2], rppp: 0.0, s_rpp: x * y[2], s2_rppp: 0.0 };
                    Self::tprime_from(&st, x).unwrap_or(f64::NAN)
                });
                if let Some(e) = e {
                    return Err(e);
                }
                acc += piece;
                cum.push(acc);
            }
            all.push(cum);
        }
        for (g, cum) in self.traj.segments.iter_mut().zip(all) {
            g.tcum = cum;
        }
        Ok(())
    }

    pub fn q_of_s(&self, s: f64) -> Result<f64> {
        Ok(Self::q_parts(&self.state(s)?, s).0)
    }

    pub fn qprime_of_s(&self, s: f64) -> Result<f64> {
        Ok(Self::q_parts(&self.state(s)?, s).1)
    }

    pub fn tprime_of_s(&self, s: f64) -> Result<f64> {
        self.check_range(s)?;
        self.tprime_unchecked(s)
    }

    pub fn t_of_s(&self, s: f64) -> Result<f64> {
        self.check_range(s)?;
        self.t_unchecked(s)
    }

    pub(crate) fn t_unchecked(&self, s: f64) -> Result<f64> {
        if s < self.s0 {
            return Ok(self.t_at_0 + tanh_sinh(0.0, s, |x| self.tprime_unchecked(x).unwrap_or(f64::NAN)));
        }
        let (si, k) = self.traj.locate(s);
        let g = &self.traj.segments[si];
        let a = g.s[k];
        let y0 = &g.y[k];
        let piece = if s > a {
            self.gl.integrate(a, s, |x| {
                let y = rk_step(r_rhs, a, y0, x - a).unwrap_or(vec![f64::NAN; 3]);
                let st = RState { r: y[0], rp: y[1], rpp: y[2], rppp: 0.0, s_rpp: x * y[2], s2_rppp: 0.0 };
                Self::tprime_from(&st, x).unwrap_or(f64::NAN)
            })
        } else {
            0.0
        };
        Ok(self.t_at_0 + self.t_s0 + g.tcum[k] + piece)
    }

    /// The four equations of the coupled (q, r, t) system, with q'' and t''
    /// from centered differences.
    pub fn residual_system(&self, s: f64) -> Result<[f64; 4]> {
        let h = 1e-5 * s.max(1.0);
        if !(s - h >= self.s0 * 0.999) {
            return Err(Error::OutOfRange(format!("residual_system needs s - h >= s0, s = {s}")));
        }
        let st = self.state(s)?;
        let (q, qp) = Self::q_parts(&st, s);
        let tp = Self::tprime_from(&st, s)?;
        let sp = self.state_unchecked(s + h)?;
        let sm = self.state_unchecked(s - h)?;
        let qpp = (Self::q_parts(&sp, s + h).1 - Self::q_parts(&sm, s - h).1) / (2.0 * h);
        let tpp = (Self::tprime_from(&sp, s + h)? - Self::tprime_from(&sm, s - h)?) / (2.0 * h);
        Ok([
            s * qpp - q * st.rp - 0.5 * tp,
            s * st.rpp - (-qp - 0.5 * st.rp + st.r * st.rp),
            s * tpp - (-2.0 * q * qp + 0.5 * tp - st.r * tp),
            qp * qp + st.rp * tp - 1.0,
        ])
    }

    /// Residual of the r-equation with r''' from a five-point difference of r'',
    /// divided by 1 + the largest term.
    pub fn residual_r_equation(&self, s: f64) -> Result<f64> {
        let st = self.state(s)?;
        let rppp = five_point(|x| Ok(self.state_unchecked(x)?.rpp), s, 2e-3 * s)?;
        let (r, p, w) = (st.r, st.rp, st.rpp);
        let terms = [
            2.0 * s * s * p * rppp,
            -s * s * w * w,
            2.0 * s * p * w,
            -4.0 * s * p * p * p,
            (2.0 * r - 0.25) * p * p,
            1.0,
        ];
        let big = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        Ok(terms.iter().sum::<f64>() / (1.0 + big))
    }

    /// Residual of s^2 r' r''' - s^2 r''^2 + s r' r'' - s r'^3 - a r' + 1,
    /// divided by 1 + the largest term.
    pub fn residual_alt_third_order(&self, s: f64) -> Result<f64> {
        let st = self.state(s)?;
        Ok(alt_residual(self.params.alpha, s, &st))
    }

    /// q'^2 + r' t' - 1 with t' from its defining identity (round-off only).
    pub fn b1_det_residual(&self, s: f64) -> Result<f64> {
        let st = self.state(s)?;
        let (_, qp) = Self::q_parts(&st, s);
        Ok(qp * qp + st.rp * Self::tprime_from(&st, s)? - 1.0)
    }

    /// q'^2 + r' t' - 1 with q' from a five-point difference of q, so the
    /// identity is a genuine check of the r-equation.
    pub fn b1_det_residual_fd(&self, s: f64) -> Result<f64> {
        let h = 1e-3 * s;
        if s - 2.0 * h < self.s0 || s + 2.0 * h > self.s_max {
            return Err(Error::OutOfRange(format!("b1_det_residual_fd needs [s - 2h, s + 2h] inside [s0, s_max], s = {s}")));
        }
        let st = self.state(s)?;
        let qp = five_point(|x| Ok(Self::q_parts(&self.state_unchecked(x)?, x).0), s, h)?;
        Ok(qp * qp + st.rp * Self::tprime_from(&st, s)? - 1.0)
    }

    fn guard(&self) -> Result<()> {
        for g in &self.traj.segments {
            let s = g.s[0];
            if s > self.s_max || s < 1e-3 || s - 1e-5 * s.max(1.0) < self.s0 {
                continue;
            }
            let res = self.residual_system(s)?;
            if res[0].abs() > 1e-6 * (1.0 + s) {
                return Err(Error::InvariantViolation(format!(
                    "coupled-system residual {:e} at s = {s}",
                    res[0]
                )));
            }
        }
        Ok(())
    }
}

fn five_point<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h: f64) -> Result<f64> {
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

pub(crate) fn alt_residual(alpha: f64, s: f64, st: &RState) -> f64 {
    let (p, s_w, s2_w3) = (st.rp, st.s_rpp, st.s2_rppp);
    let terms = [p * s2_w3, -s_w * s_w, p * s_w, -s * p * p * p, -alpha * p, 1.0];
    let big = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    terms.iter().sum::<f64>() / (1.0 + big)
}

/// Dense solution of the PIII equation for v = s r'.
#[derive(Clone, Debug)]
pub struct PiiiSolution {
    pub alpha: f64,
    pub s_max: f64,
    pub s0: f64,
    pub c: f64,
    series: LocalSeries,
    traj: Trajectory,
}

pub fn integrate_piii(params: &PainleveParams, s_max: f64, tol: f64) -> Result<PiiiSolution> {
    if !(1.0..=1e5).contains(&s_max) {
        return Err(Error::Domain(format!("s_max = {s_max} outside [1, 1e5]")));
    }
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(Error::Domain(format!("tol = {tol} outside [1e-12, 1e-6]")));
    }
    let alpha = params.alpha;
    let s_end = boundary_point(s_max);
    let large = LargeSeries::new(alpha, 40);
    let (s0, max_exp) = left_point(alpha);
    let sys = PiiiSystem { alpha, large: large.clone(), s_end, s0, max_exp };
    let nodes = shooting_nodes(s0, s_end);
    let p_ref = |s: f64, y: &[f64]| y[0] / s;
    let s_stop = s_end.min(400.0);
    let c0 = find_c(&sys, s_stop, &p_ref, large.eval(s_stop)[0])?;
    let guess = initial_guess(&sys, c0, &nodes, &p_ref, &large, |s, p, pp| vec![s * p, p + s * pp]);
    let bvp_tol = Tolerance::new(tol, tol * 1e-4);
    let shooting = Shooting { sys: &sys, nodes: nodes.clone(), tol: bvp_tol };
    let sol = shooting.solve(c0, guess)?;
    let traj = Trajectory::build(&sys, &nodes, &sol.states, &bvp_tol)?;
    let series = LocalSeries::new(alpha, sol.c, max_exp)?;
    Ok(PiiiSolution { alpha, s_max, s0, c: sol.c, series, traj })
}

impl PiiiSolution {
    /// (v, v') at s.
    pub fn v(&self, s: f64) -> Result<[f64; 2]> {
        if !(s > 0.0 && s <= self.s_max * (1.0 + 1e-12)) {
            return Err(Error::OutOfRange(format!("s = {s} outside (0, {}]", self.s_max)));
        }
        if s < self.s0 {
            return Ok(piii_state(&self.series, s));
        }
        let a = self.alpha;
        let y = self.traj.state(|x: f64, y: &[f64], d: &mut [f64]| piii_rhs(a, x, y, d), s)?;
        Ok([y[0], y[1]])
    }

    /// Residual of the PIII equation with v'' from a five-point difference of v',
    /// divided by 1 + the largest term.
    pub fn residual(&self, s: f64) -> Result<f64> {
        let [v, u] = self.v(s)?;
        let upp = five_point(|x| Ok(self.v(x)?[1]), s, 2e-3 * s)?;
        let terms = [upp, -u * u / v, u / s, -v * v / (s * s), -self.alpha / s, 1.0 / v];
        let big = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        Ok(terms.iter().sum::<f64>() / (1.0 + big))
    }
}
