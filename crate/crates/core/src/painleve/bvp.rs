// Multiple shooting for a one-parameter left manifold and one right condition.

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Tolerance};
use nalgebra::{DMatrix, DVector};

pub(crate) trait System: Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, s: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;
    /// Row-major Jacobian of rhs with respect to y.
    fn jac(&self, s: f64, y: &[f64], j: &mut [f64]);
    fn s0(&self) -> f64;
    /// State on the left manifold at s0 for parameter c.
    fn left(&self, c: f64) -> Result<Vec<f64>>;
    /// Right boundary residual and its gradient.
    fn right(&self, y: &[f64]) -> (f64, Vec<f64>);
    /// Typical magnitude of each component at s, for convergence tests.
    fn scale(&self, s: f64) -> Vec<f64>;
}

pub(crate) struct Shooting<'a, S: System> {
    pub sys: &'a S,
    pub nodes: Vec<f64>,
    pub tol: Tolerance,
}

pub(crate) struct ShootingSolution {
    pub c: f64,
    /// states at nodes[0..n]
    pub states: Vec<Vec<f64>>,
    pub iterations: usize,
}

impl<'a, S: System> Shooting<'a, S> {
    fn flow(&self, i: usize, y: &[f64], with_jac: bool) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.sys.dim();
        let (a, b) = (self.nodes[i], self.nodes[i + 1]);
        let sys = self.sys;
        if !with_jac {
            let mut ode = Dopri5::new(|s: f64, y: &[f64], d: &mut [f64]| sys.rhs(s, y, d), a, y, 0.0);
            ode.advance(b, &self.tol, |_, _| Ok(()))?;
            return Ok((ode.y, vec![]));
        }
        let mut y0 = vec![0.0; n + n * n];
        y0[..n].copy_from_slice(y);
        for k in 0..n {
            y0[n + k * n + k] = 1.0;
        }
        let f = |s: f64, z: &[f64], d: &mut [f64]| {
            sys.rhs(s, &z[..n], &mut d[..n])?;
            let mut j = [0.0; 16];
            sys.jac(s, &z[..n], &mut j[..n * n]);
            for r in 0..n {
                for c in 0..n {
                    let mut acc = 0.0;
                    for k in 0..n {
                        acc += j[r * n + k] * z[n + k * n + c];
                    }
                    d[n + r * n + c] = acc;
                }
            }
            Ok(())
        };
        let mut tol = self.tol;
        tol.error_dims = n;
        let mut ode = Dopri5::new(f, a, &y0, 0.0);
        ode.advance(b, &tol, |_, _| Ok(()))?;
        Ok((ode.y[..n].to_vec(), ode.y[n..].to_vec()))
    }

    fn residual(&self, c: f64, states: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.sys.dim();
        let m = self.nodes.len() - 1;
        let mut res = Vec::with_capacity(n * (m - 1) + 1);
        let y0 = self.sys.left(c)?;
        for i in 0..m {
            let start = if i == 0 { &y0 } else { &states[i] };
            let (end, _) = self.flow(i, start, false)?;
            if i + 1 < m {
                for k in 0..n {
                    res.push(end[k] - states[i + 1][k]);
                }
            } else {
                res.push(self.sys.right(&end).0);
            }
        }
        Ok(res)
    }

    fn scaled_norm(&self, res: &[f64]) -> f64 {
        let n = self.sys.dim();
        let mut worst: f64 = 0.0;
        for (idx, r) in res.iter().enumerate() {
            let node = (idx / n + 1).min(self.nodes.len() - 1);
            let sc = self.sys.scale(self.nodes[node]);
            let sc = if idx / n + 1 < self.nodes.len() - 1 { sc[idx % n] } else { sc[1] };
            worst = worst.max(r.abs() / sc);
        }
        worst
    }

    /// Newton iteration from the guess (c, states[1..]); states[0] is ignored.
    pub fn solve(&self, c0: f64, guess: Vec<Vec<f64>>) -> Result<ShootingSolution> {
        let n = self.sys.dim();
        let m = self.nodes.len() - 1;
        let unknowns = 1 + n * (m - 1);
        let mut c = c0;
        let mut states = guess;
        states[0] = self.sys.left(c)?;
        let mut res = self.residual(c, &states)?;
        let mut norm = self.scaled_norm(&res);
        for it in 0..60 {
            // assemble the bordered block-bidiagonal Jacobian
            let mut jm = DMatrix::<f64>::zeros(unknowns, unknowns);
            let hc = 1e-6 * (1.0 + c.abs());
            let yp = self.sys.left(c + hc)?;
            let ym = self.sys.left(c - hc)?;
            let dy0: Vec<f64> = (0..n).map(|k| (yp[k] - ym[k]) / (2.0 * hc)).collect();
            let y0 = self.sys.left(c)?;
            for i in 0..m {
                let start = if i == 0 { &y0 } else { &states[i] };
                let (_, phi) = self.flow(i, start, true)?;
                let row0 = n * i;
                if i + 1 < m {
                    for r in 0..n {
                        if i == 0 {
                            let mut acc = 0.0;
                            for k in 0..n {
                                acc += phi[r * n + k] * dy0[k];
                            }
                            jm[(row0 + r, 0)] = acc;
                        } else {
                            for k in 0..n {
                                jm[(row0 + r, 1 + n * (i - 1) + k)] = phi[r * n + k];
                            }
                        }
                        jm[(row0 + r, 1 + n * i + r)] = -1.0;
                    }
                } else {
                    let (_, grad) = {
                        let (end, _) = self.flow(i, start, false)?;
                        self.sys.right(&end)
                    };
                    for k in 0..n {
                        let mut acc = 0.0;
                        for r in 0..n {
                            acc += grad[r] * phi[r * n + k];
                        }
                        if i == 0 {
                            jm[(row0, 0)] += acc * dy0[k];
                        } else {
                            jm[(row0, 1 + n * (i - 1) + k)] = acc;
                        }
                    }
                }
            }
            let rhs = DVector::from_vec(res.iter().map(|r| -r).collect());
            let delta = jm
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::NoConvergence("singular shooting Jacobian".into()))?;
            // damped update
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let c_new = c + lambda * delta[0];
                let mut s_new = states.clone();
                for i in 1..m {
                    for k in 0..n {
                        s_new[i][k] += lambda * delta[1 + n * (i - 1) + k];
                    }
                }
                match self.residual(c_new, &s_new) {
                    Ok(r_new) => {
                        let nn = self.scaled_norm(&r_new);
                        if nn < norm * (1.0 - 0.25 * lambda) || nn < 1e-13 {
                            c = c_new;
                            states = s_new;
                            res = r_new;
                            norm = nn;
                            accepted = true;
                            break;
                        }
                    }
                    Err(_) => {}
                }
                lambda *= 0.5;
            }
            let step = {
                let mut w: f64 = (delta[0] / (1.0 + c.abs())).abs();
                for i in 1..m {
                    let sc = self.sys.scale(self.nodes[i]);
                    for k in 0..n {
                        w = w.max((delta[1 + n * (i - 1) + k] / sc[k]).abs());
                    }
                }
                w
            };
            if !accepted {
                if norm < 1e-9 {
                    break;
                }
                return Err(Error::NoConvergence(format!(
                    "multiple shooting stalled at iteration {it}, residual {norm:e}"
                )));
            }
            if norm < 1e-12 || (lambda == 1.0 && step < 1e-12) {
                states[0] = self.sys.left(c)?;
                return Ok(ShootingSolution { c, states, iterations: it + 1 });
            }
        }
        if norm < 1e-9 {
            states[0] = self.sys.left(c)?;
            return Ok(ShootingSolution { c, states, iterations: 60 });
        }
        Err(Error::NoConvergence(format!("multiple shooting residual {norm:e}")))
    }
}
