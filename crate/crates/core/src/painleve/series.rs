use crate::error::{Error, Result};

const EXP_EQ: f64 = 1e-9;

/// Generalized power series of r(s) at the origin.
///
/// Besides the integer powers, the equation admits the free term `c s^{1+a}`
/// (the indicial root of the linearized recursion), which then generates
/// the exponents `k + j a` with `j >= 1, k >= 1`. The analytic part alone is
/// the Taylor start; it does not lie on the pole-free solution.
#[derive(Clone, Debug)]
pub struct LocalSeries {
    pub alpha: f64,
    pub c: f64,
    /// (exponent, coefficient), sorted by exponent
    pub terms: Vec<(f64, f64)>,
}

/// Values of r and scaled derivatives: (r, r', s r'', s^2 r''').
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue {
    pub r: f64,
    pub rp: f64,
    pub s_rpp: f64,
    pub s2_rppp: f64,
}

fn pair_weight(ei: f64, ej: f64) -> f64 {
    // 2 s^2 r' r''' - s^2 r''^2 + 2 s r' r'' - r'^2/4
    2.0 * ei * ej * (ej - 1.0) * (ej - 2.0) - ei * (ei - 1.0) * ej * (ej - 1.0)
        + 2.0 * ei * ej * (ej - 1.0)
        - 0.25 * ei * ej
}

fn triple_weight(ei: f64, ej: f64, ek: f64) -> f64 {
    // -4 s r'^3 + 2 r r'^2, with i the undifferentiated factor in the second
    -4.0 * ei * ej * ek + 2.0 * ej * ek
}

impl LocalSeries {
    pub fn r0(alpha: f64) -> f64 {
        (1.0 - 4.0 * alpha * alpha) / 8.0
    }

    pub fn new(alpha: f64, c: f64, max_exp: f64) -> Result<LocalSeries> {
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        let mut exps: Vec<f64> = (0..=max_exp.floor() as usize).map(|k| k as f64).collect();
        let mut j = 1;
        while 1.0 + j as f64 * alpha <= max_exp + EXP_EQ {
            let mut k = 1;
            while k as f64 + j as f64 * alpha <= max_exp + EXP_EQ {
                exps.push(k as f64 + j as f64 * alpha);
                k += 1;
            }
            j += 1;
        }
        exps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        exps.dedup_by(|a, b| (*a - *b).abs() < EXP_EQ);
        if exps.len() > 120 {
            return Err(Error::Domain(format!("alpha = {alpha} generates too many series exponents")));
        }
        let r0 = Self::r0(alpha);
        let r1 = 1.0 / alpha;
        let near_integer = (alpha - alpha.round()).abs() < 1e-8;
        let mut terms: Vec<(f64, f64)> = exps.iter().map(|&e| (e, 0.0)).collect();
        for idx in 0..terms.len() {
            let m = terms[idx].0;
            if m == 0.0 {
                terms[idx].1 = r0;
                continue;
            }
            if m == 1.0 {
                terms[idx].1 = r1;
                continue;
            }
            let lin = 2.0 * r1 * m * ((m - 1.0).powi(2) - alpha * alpha);
            let resid = residual_at(&terms, m - 1.0);
            if ((m - 1.0).powi(2) - alpha * alpha).abs() < 1e-8 {
                if near_integer {
                    return Err(Error::CoefficientSingularity(format!(
                        "order {m} coefficient is singular at alpha = {alpha}"
                    )));
                }
                terms[idx].1 = c;
                continue;
            }
            if lin.abs() < 1e-8 {
                return Err(Error::CoefficientSingularity(format!("order {m} at alpha = {alpha}")));
            }
            terms[idx].1 = -resid / lin;
        }
        Ok(LocalSeries { alpha, c, terms })
    }

    pub fn coefficient(&self, exponent: f64) -> Option<f64> {
        self.terms.iter().find(|t| (t.0 - exponent).abs() < EXP_EQ).map(|t| t.1)
    }

    pub fn eval(&self, s: f64) -> SeriesValue {
        let mut v = SeriesValue { r: 0.0, rp: 0.0, s_rpp: 0.0, s2_rppp: 0.0 };
        for &(e, a) in &self.terms {
            let p = if e == 0.0 { 1.0 } else { s.powf(e) };
            v.r += a * p;
            if e == 0.0 {
                continue;
            }
            let pm1 = if e == 1.0 { 1.0 } else { s.powf(e - 1.0) };
            v.rp += a * e * pm1;
            v.s_rpp += a * e * (e - 1.0) * pm1;
            v.s2_rppp += a * e * (e - 1.0) * (e - 2.0) * pm1;
        }
        v
    }

    /// (r, r', r'') at s > 0.
    pub fn state(&self, s: f64) -> [f64; 3] {
        let v = self.eval(s);
        [v.r, v.rp, v.s_rpp / s]
    }

    /// Coefficient of s^e in the left side of the r-equation for the stored terms.
    pub fn residual(&self, e: f64) -> f64 {
        residual_at(&self.terms, e)
    }

    /// Magnitude of the last few terms at s, a proxy for the truncation error.
    pub fn tail(&self, s: f64) -> f64 {
        let n = self.terms.len();
        self.terms[n.saturating_sub(3)..].iter().map(|&(e, a)| (a * s.powf(e)).abs()).sum()
    }
}

fn find(terms: &[(f64, f64)], e: f64) -> Option<usize> {
    let i = terms.partition_point(|t| t.0 < e - EXP_EQ);
    (i < terms.len() && (terms[i].0 - e).abs() < EXP_EQ).then_some(i)
}

fn residual_at(terms: &[(f64, f64)], e: f64) -> f64 {
    let mut sum = if e.abs() < EXP_EQ { 1.0 } else { 0.0 };
    for &(ei, ai) in terms {
        if ai == 0.0 {
            continue;
        }
        if let Some(j) = find(terms, e + 2.0 - ei) {
            let (ej, aj) = terms[j];
            sum += ai * aj * pair_weight(ei, ej);
        }
        for &(ej, aj) in terms {
            if aj == 0.0 || ei + ej > e + 2.0 + EXP_EQ {
                continue;
            }
            if let Some(k) = find(terms, e + 2.0 - ei - ej) {
                let (ek, ak) = terms[k];
                sum += ai * aj * ak * triple_weight(ei, ej, ek);
            }
        }
    }
    sum
}

/// Large-s expansion r' = sum_k b_k s^{-(k+1)/3} of the pole-free solution,
/// from s^2 p p'' - s^2 p'^2 + s p p' - s p^3 - a p + 1 = 0 with p = r'.
#[derive(Clone, Debug)]
pub struct LargeSeries {
    pub alpha: f64,
    // coefficients of x^m, x = s^{-1/3}, for p, p', p''
    p: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl LargeSeries {
    pub fn new(alpha: f64, nterms: usize) -> LargeSeries {
        let top = nterms + 8;
        let mut p = vec![0.0; top];
        p[1] = 1.0;
        let derivs = |p: &[f64]| {
            let mut d1 = vec![0.0; p.len()];
            let mut d2 = vec![0.0; p.len()];
            for m in 0..p.len() {
                if m + 3 < p.len() {
                    d1[m + 3] = -(m as f64) / 3.0 * p[m];
                }
            }
            for m in 0..p.len() {
                if m + 3 < p.len() {
                    d2[m + 3] = -(m as f64) / 3.0 * d1[m];
                }
            }
            (d1, d2)
        };
        for j in 1..nterms {
            let (d1, d2) = derivs(&p);
            let conv2 = |a: &[f64], b: &[f64], n: usize| -> f64 {
                (0..=n).filter(|&i| i < a.len() && n - i < b.len()).map(|i| a[i] * b[n - i]).sum()
            };
            let mut r = -alpha * p[j];
            r += conv2(&p, &d2, j + 6) - conv2(&d1, &d1, j + 6) + conv2(&p, &d1, j + 3);
            let mut cube = 0.0;
            for a in 0..=j + 3 {
                for b in 0..=(j + 3 - a) {
                    let c = j + 3 - a - b;
                    if a < top && b < top && c < top {
                        cube += p[a] * p[b] * p[c];
                    }
                }
            }
            r -= cube;
            p[j + 1] = r / 3.0;
        }
        let (d1, d2) = derivs(&p);
        LargeSeries { alpha, p, d1, d2 }
    }

    /// b_k, the coefficient of s^{-(k+1)/3}.
    pub fn b(&self, k: usize) -> f64 {
        self.p[k + 1]
    }

    /// (p, p', p'') with optimal truncation.
    pub fn eval(&self, s: f64) -> [f64; 3] {
        let x = s.powf(-1.0 / 3.0);
        let mut out = [0.0; 3];
        let mut last = f64::INFINITY;
        let mut xm = 1.0;
        let n = self.p.len() - 8;
        for m in 0..=n {
            let t = (self.p[m] * xm).abs();
            if m > 4 && t > last {
                break;
            }
            out[0] += self.p[m] * xm;
            out[1] += self.d1[m] * xm;
            out[2] += self.d2[m] * xm;
            if m > 0 {
                last = t;
            }
            xm *= x;
        }
        out
    }

    /// Size of the first omitted term of p at s, relative to p.
    pub fn error_estimate(&self, s: f64) -> f64 {
        let x = s.powf(-1.0 / 3.0);
        let n = self.p.len() - 8;
        let mut best = f64::INFINITY;
        for m in 2..=n {
            best = best.min((self.p[m] * x.powi(m as i32)).abs());
        }
        best / x
    }
}

/// r from (r', r'') through the first integral of the r-equation.
pub fn r_from_first_integral(alpha: f64, s: f64, p: f64, pp: f64) -> f64 {
    (0.25 * p * p - s * s * pp * pp + 2.0 * s * p.powi(3) - 2.0 * alpha * p + 1.0) / (2.0 * p * p)
}
