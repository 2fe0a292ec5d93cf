//! Dormand-Prince 5(4) with step-size control.
//!
//! Accepted steps can be replayed: a partial step of size `x - x_k` from a
//! stored node is a fifth order accurate dense evaluation.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    /// Only the first `error_dims` components enter the error norm (all when 0).
    pub error_dims: usize,
    pub max_steps: usize,
}

impl Tolerance {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Tolerance { rtol, atol, error_dims: 0, max_steps: 2_000_000 }
    }
}

pub struct Dopri5<F> {
    f: F,
    dim: usize,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
    pub x: f64,
    pub y: Vec<f64>,
    pub h: f64,
    fsal: bool,
    pub steps: usize,
}

impl<F> Dopri5<F>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(f: F, x0: f64, y0: &[f64], h0: f64) -> Self {
        let dim = y0.len();
        Dopri5 {
            f,
            dim,
            k: vec![vec![0.0; dim]; 7],
            tmp: vec![0.0; dim],
            x: x0,
            y: y0.to_vec(),
            h: h0,
            fsal: false,
            steps: 0,
        }
    }

    pub fn rhs(&mut self, x: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        (self.f)(x, y, out)
    }

    // Stages for a step of size h from (x, y); result in `out`, error estimate in `err`.
    fn attempt(&mut self, x: f64, h: f64, out: &mut [f64], err: Option<&mut [f64]>) -> Result<()> {
        let n = self.dim;
        if !self.fsal {
            let (k0, y) = (&mut self.k[0], &self.y);
            (self.f)(x, y, k0)?;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * self.k[j][i];
                }
                self.tmp[i] = self.y[i] + h * acc;
            }
            let (ks, tmp) = (&mut self.k[s], &self.tmp);
            (self.f)(x + C[s] * h, tmp, ks)?;
        }
        // row 6 of A is the fifth order solution, already evaluated as stage 7 input
        out.copy_from_slice(&self.tmp);
        if let Some(err) = err {
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..7 {
                    acc += E[j] * self.k[j][i];
                }
                err[i] = h * acc;
            }
        }
        Ok(())
    }

    /// Advance to `x_end`, calling `on_step(x, y)` after every accepted step.
    pub fn advance<G>(&mut self, x_end: f64, tol: &Tolerance, mut on_step: G) -> Result<()>
    where
        G: FnMut(f64, &[f64]) -> Result<()>,
    {
        let n = self.dim;
        let ne = if tol.error_dims == 0 { n } else { tol.error_dims };
        let dir = (x_end - self.x).signum();
        if dir == 0.0 {
            return Ok(());
        }
        if self.h == 0.0 || self.h.signum() != dir {
            self.h = dir * (x_end - self.x).abs().min(1e-3 * (1.0 + self.x.abs()));
        }
        let mut ynew = vec![0.0; n];
        let mut err = vec![0.0; n];
        let mut count = 0usize;
        loop {
            let remaining = x_end - self.x;
            if remaining * dir <= 0.0 {
                return Ok(());
            }
            let mut h = self.h;
            let last = (h * dir) >= remaining * dir * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let hmin = 1e-14 * self.x.abs().max(1e-300);
            if h.abs() < hmin {
                return Err(Error::StepUnderflow { x: self.x });
            }
            let trial = self.attempt(self.x, h, &mut ynew, Some(&mut err));
            let enorm = match trial {
                Ok(()) => {
                    let mut e: f64 = 0.0;
                    for i in 0..ne {
                        let sc = tol.atol + tol.rtol * self.y[i].abs().max(ynew[i].abs());
                        e = e.max((err[i] / sc).abs());
                    }
                    if e.is_finite() { e } else { f64::INFINITY }
                }
                // a failed right-hand side (pole guard) is treated as a rejected step
                Err(_) if h.abs() > 1e3 * hmin => f64::INFINITY,
                Err(e) => return Err(e),
            };
            self.fsal = false;
            if enorm <= 1.0 {
                self.x = if last { x_end } else { self.x + h };
                self.y.copy_from_slice(&ynew);
                self.k.swap(0, 6);
                self.fsal = true;
                self.steps += 1;
                on_step(self.x, &self.y)?;
                let fac = if enorm == 0.0 { 5.0 } else { (0.9 * enorm.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    self.h = h * fac;
                } else {
                    self.h = self.h.abs().max(h.abs() * fac.min(1.0)) * dir;
                }
            } else {
                let fac = if enorm.is_finite() { (0.9 * enorm.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
                self.h = h * fac;
            }
            count += 1;
            if count > tol.max_steps {
                return Err(Error::StepBudget { x: self.x });
            }
        }
    }

    /// One step of size `h` from (x, y) without error control.
    pub fn replay(&mut self, x: f64, y: &[f64], h: f64) -> Result<Vec<f64>> {
        let saved_x = self.x;
        let saved = std::mem::replace(&mut self.y, y.to_vec());
        self.fsal = false;
        let mut out = vec![0.0; self.dim];
        let r = self.attempt(x, h, &mut out, None);
        self.y = saved;
        self.x = saved_x;
        // stage 0 was overwritten, so any FSAL value is stale
        self.fsal = false;
        r.map(|_| out)
    }
}

/// A single fifth order step of size h from (x, y).
pub fn rk_step<F>(f: F, x: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if h == 0.0 {
        return Ok(y.to_vec());
    }
    let mut ode = Dopri5::new(f, x, y, h);
    ode.replay(x, y, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_and_harmonic() {
        let f = |_x: f64, y: &[f64], d: &mut [f64]| {
            d[0] = y[0];
            d[1] = y[2];
            d[2] = -y[1];
            Ok(())
        };
        let mut ode = Dopri5::new(f, 0.0, &[1.0, 0.0, 1.0], 0.0);
        let tol = Tolerance::new(1e-12, 1e-12);
        ode.advance(5.0, &tol, |_, _| Ok(())).unwrap();
        assert!((ode.y[0] - 5f64.exp()).abs() < 1e-9 * 5f64.exp());
        assert!((ode.y[1] - 5f64.sin()).abs() < 1e-9);
        // backwards
        ode.advance(0.0, &tol, |_, _| Ok(())).unwrap();
        assert!((ode.y[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn replay_is_fifth_order() {
        let f = |x: f64, y: &[f64], d: &mut [f64]| {
            d[0] = x.cos() * y[0];
            Ok(())
        };
        let mut ode = Dopri5::new(f, 0.0, &[1.0], 0.0);
        let e = |h: f64, ode: &mut Dopri5<_>| (ode.replay(0.0, &[1.0], h).unwrap()[0] - h.sin().exp()).abs();
        let (e1, e2) = (e(0.2, &mut ode), e(0.1, &mut ode));
        assert!(e1 / e2 > 40.0, "ratio {}", e1 / e2);
    }
}
