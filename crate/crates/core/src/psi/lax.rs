use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::painleve::PainleveSolution;

pub type Cmat = Matrix2<Complex64>;

pub(crate) const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Coefficients of the zeta equation `Psi' = (a0 + a1/z + a2/z^2) Psi` and of
/// the s equation `d Psi/ds = (b1/z) Psi`.
#[derive(Clone, Copy, Debug)]
pub struct LaxMatrices {
    pub s: f64,
    pub a0: Cmat,
    pub a1: Cmat,
    pub a2: Cmat,
    pub b1: Cmat,
}

/// Local data entering the Lax pair at one s.
#[derive(Clone, Copy, Debug)]
pub struct LaxData {
    pub r: f64,
    pub q: f64,
    pub rp: f64,
    pub qp: f64,
    pub tp: f64,
    pub t: f64,
}

impl LaxData {
    pub fn at(sol: &PainleveSolution, s: f64) -> Result<LaxData> {
        if !(s > 0.0 && s <= sol.s_max) {
            return Err(Error::OutOfRange(format!("s = {s} outside (0, {}]", sol.s_max)));
        }
        Ok(LaxData {
            r: sol.r(s)?,
            q: sol.q_of_s(s)?,
            rp: sol.rp(s)?,
            qp: sol.qprime_of_s(s)?,
            tp: sol.tprime_of_s(s)?,
            t: sol.t_of_s(s)?,
        })
    }

    /// The matrix C1 of the expansion at infinity, `[[q, -i r], [i t, -q]]`.
    pub fn c1(&self) -> Cmat {
        Cmat::new(c(self.q), -I * self.r, I * self.t, c(-self.q))
    }
}

impl LaxMatrices {
    pub fn from_data(d: &LaxData, s: f64) -> LaxMatrices {
        let a0 = Cmat::new(c(0.0), c(0.0), 0.5 * I, c(0.0));
        let a1 = Cmat::new(c(-0.25 + 0.5 * d.r), -0.5 * I, -I * d.q, c(0.25 - 0.5 * d.r));
        let b1 = Cmat::new(c(d.qp), -I * d.rp, I * d.tp, c(-d.qp));
        LaxMatrices { s, a0, a1, a2: b1 * c(-s), b1 }
    }

    /// Coefficient matrix of the zeta equation at `z`.
    pub fn coefficient(&self, z: Complex64) -> Cmat {
        let iz = z.inv();
        self.a0 + self.a1 * iz + self.a2 * (iz * iz)
    }

    /// det b1; equals -1 on a solution of the coupled system.
    pub fn det_b1(&self) -> f64 {
        (self.b1[(0, 0)] * self.b1[(1, 1)] - self.b1[(0, 1)] * self.b1[(1, 0)]).re
    }
}

pub fn lax_matrices(sol: &PainleveSolution, s: f64) -> Result<LaxMatrices> {
    let d = LaxData::at(sol, s)?;
    Ok(LaxMatrices::from_data(&d, s))
}

/// `(I + i sigma1)/sqrt(2)` and its inverse.
pub(crate) fn m_pair() -> (Cmat, Cmat) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = Cmat::new(c(h), I * h, I * h, c(h));
    let mi = Cmat::new(c(h), -I * h, -I * h, c(h));
    (m, mi)
}

/// Formal solution at infinity. With `w = sqrt(z)` and
/// `W = z^{sigma3/4} Psi`, the equation becomes `W_w = (F0 + F1/w + .. + F4/w^4) W`
/// with `F0 = sigma2`, and `W = M (sum X_k w^-k) e^{w sigma3}` with `X_0 = I`.
#[derive(Clone, Debug)]
pub struct FormalSeries {
    terms: Vec<Cmat>,
    norms: Vec<f64>,
}

impl FormalSeries {
    pub fn new(lax: &LaxMatrices, nterms: usize) -> FormalSeries {
        let (a1, a2) = (lax.a1, lax.a2);
        let two = c(2.0);
        let z = c(0.0);
        let f1 = Cmat::new(two * a1[(0, 0)] + 0.5, z, z, two * a1[(1, 1)] - 0.5);
        let f2 = Cmat::new(z, two * a2[(0, 1)], two * a1[(1, 0)], z);
        let f3 = Cmat::new(two * a2[(0, 0)], z, z, two * a2[(1, 1)]);
        let f4 = Cmat::new(z, z, two * a2[(1, 0)], z);
        let (m, mi) = m_pair();
        let ft: Vec<Cmat> = [f1, f2, f3, f4].iter().map(|f| mi * f * m).collect();
        let mut x: Vec<Cmat> = vec![Cmat::identity()];
        for k in 1..=nterms + 1 {
            // diagonal of X_{k-1} from the solvability of the diagonal at order k
            if k >= 2 {
                let mut acc = Cmat::zeros();
                for i in 1..=k.min(4) {
                    acc += ft[i - 1] * x[k - i];
                }
                let km1 = c((k - 1) as f64);
                x[k - 1][(0, 0)] = -acc[(0, 0)] / km1;
                x[k - 1][(1, 1)] = -acc[(1, 1)] / km1;
            }
            if k == nterms + 1 {
                break;
            }
            let mut r = x[k - 1] * c(-((k - 1) as f64));
            for i in 1..=k.min(4) {
                r -= ft[i - 1] * x[k - i];
            }
            x.push(Cmat::new(z, r[(0, 1)] * 0.5, -r[(1, 0)] * 0.5, z));
        }
        let norms = x.iter().map(|m| m.norm()).collect();
        FormalSeries { terms: x, norms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, k: usize) -> &Cmat {
        &self.terms[k]
    }

    // index of the smallest term at |w| = sqrt(rho), and its size
    fn cut(&self, rho: f64) -> (usize, f64) {
        let sw = rho.sqrt();
        let mut best = (0, f64::INFINITY);
        let mut pw = 1.0;
        for (k, n) in self.norms.iter().enumerate() {
            let size = n * pw;
            if size < best.1 {
                best = (k, size);
            }
            pw /= sw;
        }
        best
    }

    /// Size of the smallest term at |z| = rho, the truncation error estimate.
    pub fn tail(&self, rho: f64) -> f64 {
        self.cut(rho).1
    }

    /// `sum X_k w^-k`, truncated before the smallest term.
    pub fn eval(&self, w: Complex64) -> Cmat {
        let (kmax, _) = self.cut(w.norm_sqr());
        let iw = w.inv();
        let mut acc = Cmat::zeros();
        let mut pw = c(1.0);
        for k in 0..kmax.max(1) {
            acc += self.terms[k] * pw;
            pw *= iw;
        }
        acc
    }

    /// Psi at the point with modulus `rho` and argument `theta`, principal branches.
    pub fn psi(&self, rho: f64, theta: f64) -> Cmat {
        let w = Complex64::from_polar(rho.sqrt(), 0.5 * theta);
        let q = Complex64::from_polar(rho.powf(0.25), 0.25 * theta);
        let (m, _) = m_pair();
        let left = Cmat::new(q.inv(), c(0.0), c(0.0), q);
        let right = Cmat::new(w.exp(), c(0.0), c(0.0), (-w).exp());
        left * m * self.eval(w) * right
    }

    /// C1 read off the series: `Y = M X M^-1` has `Y_1 = [[., C1_12], [., .]]`,
    /// `Y_2 = [[C1_11, .], [., .]]` and `Y_3 = [[., .], [C1_21, .]]`.
    pub fn c1(&self) -> Cmat {
        let (m, mi) = m_pair();
        let y = |k: usize| m * self.terms[k] * mi;
        let (y1, y2, y3) = (y(1), y(2), y(3));
        Cmat::new(y2[(0, 0)], y1[(0, 1)], y3[(1, 0)], y2[(1, 1)])
    }
}
