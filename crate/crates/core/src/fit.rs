//! Levenberg-Marquardt least squares with a numerical Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Relative parameter-step tolerance.
    pub xtol: f64,
    /// Relative cost-decrease tolerance.
    pub ftol: f64,
    pub lambda0: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 500, xtol: 1e-13, ftol: 1e-15, lambda0: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// Root-mean-square residual.
    pub rms: f64,
    /// `s²(JᵀJ)⁻¹`; `None` without spare degrees of freedom or for a singular Jacobian.
    pub covariance: Option<DMatrix<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

impl LmFit {
    pub fn std_err(&self, i: usize) -> Option<f64> {
        self.covariance.as_ref().map(|c| c[(i, i)].max(0.0).sqrt())
    }
}

fn jacobian<F>(residuals: &F, p: &[f64], r0: &DVector<f64>) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = r0.len();
    let mut j = DMatrix::zeros(n, p.len());
    let mut q = p.to_vec();
    for k in 0..p.len() {
        let h = 1e-7 * p[k].abs().max(1e-4);
        q[k] = p[k] + h;
        let rp = residuals(&q);
        q[k] = p[k] - h;
        let rm = residuals(&q);
        q[k] = p[k];
        for i in 0..n {
            j[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    j
}

fn cost(r: &DVector<f64>) -> f64 {
    r.norm_squared()
}

/// Minimizes `Σ r_i(p)²` starting from `p0`.
pub fn minimize<F>(residuals: F, p0: &[f64], opts: LmOptions) -> Result<LmFit>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut p = p0.to_vec();
    let mut r = DVector::from_vec(residuals(&p));
    let n = r.len();
    let k = p.len();
    if n < k || k == 0 {
        return Err(Error::invalid(format!("{n} residuals cannot determine {k} parameters")));
    }
    if !r.iter().all(|x| x.is_finite()) {
        return Err(Error::numerical("non-finite residual at the initial point"));
    }
    let mut c = cost(&r);
    let mut lambda = opts.lambda0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        if c == 0.0 {
            converged = true;
            break;
        }
        let j = jacobian(&residuals, &p, &r);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for d in 0..k {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|ch| ch.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = DVector::from_vec(residuals(&trial));
            let ct = cost(&rt);
            if ct.is_finite() && ct <= c {
                let small_step = step
                    .iter()
                    .zip(&p)
                    .all(|(s, x)| s.abs() <= opts.xtol * (x.abs() + opts.xtol));
                let small_decrease = c - ct <= opts.ftol * c;
                p = trial;
                r = rt;
                c = ct;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if small_step || small_decrease {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No downhill step at any damping: a (numerical) stationary point.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    let j = jacobian(&residuals, &p, &r);
    let covariance = if n > k {
        (j.transpose() * &j).try_inverse().map(|inv| inv * (c / (n - k) as f64))
    } else {
        None
    };
    Ok(LmFit { params: p, rms: (c / n as f64).sqrt(), covariance, iterations, converged })
}

/// Fits `model(x, p)` to points `(xs, ys)`.
pub fn curve_fit<M>(model: M, xs: &[f64], ys: &[f64], p0: &[f64], opts: LmOptions) -> Result<LmFit>
where
    M: Fn(f64, &[f64]) -> f64,
{
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(xs.len(), ys.len()));
    }
    minimize(|p| xs.iter().zip(ys).map(|(&x, &y)| model(x, p) - y).collect(), p0, opts)
}
