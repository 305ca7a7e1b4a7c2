//! Coherence model, T₁/T₂ fits and readout inversion.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{curve_fit, minimize, LmOptions};

/// Transition frequencies (GHz), relaxation and Ramsey times (µs) for the 01, 12 and 02 transitions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceParams {
    pub freq: [f64; 3],
    pub t1: [f64; 3],
    pub t2: [f64; 3],
    pub stretch: [f64; 3],
}

impl DeviceParams {
    /// The characterized reference device.
    pub fn reference() -> Self {
        Self {
            freq: [4.993, 4.800, 4.896],
            t1: [60.7, 28.4, 523.1],
            t2: [4.6, 4.4, 4.2],
            stretch: [1.0, 1.0, 1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for t in self.t1.iter().chain(&self.t2) {
            if !(*t > 0.0) {
                return Err(Error::invalid(format!("coherence time {t} must be positive")));
            }
        }
        Ok(())
    }

    /// Decay rates `(k01, k12, k02)` in 1/µs.
    pub fn rates(&self) -> [f64; 3] {
        self.t1.map(|t| 1.0 / t)
    }
}

/// `(e^{−at} − e^{−bt}) / (b − a)`, continuous at `a = b`.
fn exp_difference(a: f64, b: f64, t: f64) -> f64 {
    let (lo, d) = (a.min(b), (b - a).abs());
    if d * t < 1e-8 {
        t * (-lo * t).exp() * (1.0 - d * t / 2.0)
    } else {
        (-lo * t).exp() * (-(-d * t).exp_m1()) / d
    }
}

fn evolve_rates(p0: [f64; 3], k: [f64; 3], t: f64) -> [f64; 3] {
    let [k01, k12, k02] = k;
    let a = k12 + k02;
    let p2 = p0[2] * (-a * t).exp();
    let p1 = p0[1] * (-k01 * t).exp() + k12 * p0[2] * exp_difference(a, k01, t);
    [1.0 - p1 - p2, p1, p2]
}

/// Cascaded relaxation `2 → 1 → 0` plus direct `2 → 0`, evaluated in closed form at `t` µs.
pub fn rate_equation_evolve(p0: [f64; 3], params: &DeviceParams, t: f64) -> Result<[f64; 3]> {
    params.validate()?;
    let sum: f64 = p0.iter().sum();
    if p0.iter().any(|p| *p < -1e-9) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("initial populations {p0:?} are not a distribution")));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("time {t} must be nonnegative")));
    }
    Ok(evolve_rates(p0, params.rates(), t))
}

/// Population traces after preparing `|1⟩` and `|2⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct T1Traces {
    /// Delay times (µs).
    pub times: Vec<f64>,
    pub from1: Vec<[f64; 3]>,
    pub from2: Vec<[f64; 3]>,
}

impl T1Traces {
    pub fn synthesize(params: &DeviceParams, times: &[f64]) -> Result<Self> {
        let from1 = times.iter().map(|&t| rate_equation_evolve([0.0, 1.0, 0.0], params, t)).collect::<Result<_>>()?;
        let from2 = times.iter().map(|&t| rate_equation_evolve([0.0, 0.0, 1.0], params, t)).collect::<Result<_>>()?;
        Ok(Self { times: times.to_vec(), from1, from2 })
    }
}

/// Joint least-squares fit of `(T1_01, T1_12, T1_02)` in µs.
pub fn fit_t1(traces: &T1Traces) -> Result<[f64; 3]> {
    let n = traces.times.len();
    if n < 10 || traces.from1.len() != n || traces.from2.len() != n {
        return Err(Error::invalid("T1 fit needs at least 10 aligned points per trace"));
    }
    let decay = |i: usize, tr: &[[f64; 3]]| {
        let first = tr[0][i];
        let cross = (1..n).find(|&k| tr[k][i] < first / std::f64::consts::E)?;
        (first > 0.5 && traces.times[cross] > 0.0).then(|| 1.0 / traces.times[cross])
    };
    let k01 = decay(1, &traces.from1).ok_or_else(|| Error::Degenerate("no decay from |1>".into()))?;
    let a = decay(2, &traces.from2).ok_or_else(|| Error::Degenerate("no decay from |2>".into()))?;
    let q0 = [(1.0 / k01).ln(), (1.0 / (0.9 * a)).ln(), (1.0 / (0.1 * a)).ln()];
    let residuals = |q: &[f64]| {
        let k = [(-q[0]).exp(), (-q[1]).exp(), (-q[2]).exp()];
        let mut r = Vec::with_capacity(6 * n);
        for (i, &t) in traces.times.iter().enumerate() {
            for (init, tr) in [([0.0, 1.0, 0.0], &traces.from1), ([0.0, 0.0, 1.0], &traces.from2)] {
                let p = evolve_rates(init, k, t);
                r.extend((0..3).map(|j| p[j] - tr[i][j]));
            }
        }
        r
    };
    let fit = minimize(residuals, &q0, LmOptions::default())?;
    let t1 = [fit.params[0].exp(), fit.params[1].exp(), fit.params[2].exp()];
    if !fit.converged || t1.iter().any(|t| !t.is_finite()) {
        return Err(Error::numerical("T1 fit did not converge"));
    }
    Ok(t1)
}

/// Parameters of the Ramsey model
/// `a·cos(δω·t + φ₀)·exp[−(t/T₂)ⁿ] + c + b·exp(−t/T₁)`, times in µs and `δω` in rad/µs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RamseyParams {
    pub amplitude: f64,
    pub detuning: f64,
    pub phase: f64,
    pub t2: f64,
    pub stretch: f64,
    pub offset: f64,
    pub relaxation: f64,
    pub t1: f64,
}

pub fn ramsey_model(t: f64, p: &RamseyParams) -> f64 {
    p.amplitude * (p.detuning * t + p.phase).cos() * (-(t / p.t2).powf(p.stretch)).exp()
        + p.offset
        + p.relaxation * (-t / p.t1).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct T2Fit {
    pub t2: f64,
    pub stretch: f64,
    pub params: RamseyParams,
    pub rms: f64,
}

/// Dominant nonzero frequency (rad per unit time), its DFT phase and the bin index.
fn dominant_frequency(times: &[f64], y: &[f64]) -> (f64, f64, usize) {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let span = times[n - 1] - times[0];
    let mut best = (0.0, 0.0, 0usize);
    for k in 1..n / 2 {
        let w = 2.0 * PI * k as f64 / span;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in times.iter().zip(y) {
            let dv = v - mean;
            re += dv * (w * (t - times[0])).cos();
            im -= dv * (w * (t - times[0])).sin();
        }
        let power = re * re + im * im;
        if power > best.0 {
            best = (power, im.atan2(re), k);
        }
    }
    let w = 2.0 * PI * best.2 as f64 / span;
    (w, best.1 - w * times[0], best.2)
}

/// Fits `T₂` and the stretch exponent with the relaxation time `t1` (µs) held fixed.
pub fn fit_t2(times: &[f64], values: &[f64], t1: f64) -> Result<T2Fit> {
    let n = times.len();
    if n < 20 || values.len() != n {
        return Err(Error::invalid("Ramsey fit needs at least 20 aligned points"));
    }
    if !(t1 > 0.0) {
        return Err(Error::invalid("relaxation time must be positive"));
    }
    let (w0, phi0, bin) = dominant_frequency(times, values);
    if bin < 3 {
        return Err(Error::Degenerate("no oscillation in the Ramsey trace".into()));
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = times[n - 1] - times[0];
    let mean = values.iter().sum::<f64>() / n as f64;
    let p0 = [(hi - lo) / 2.0, w0, phi0, span / 3.0, 1.0, mean, 0.0];
    let model = |t: f64, q: &[f64]| {
        ramsey_model(
            t,
            &RamseyParams {
                amplitude: q[0],
                detuning: q[1],
                phase: q[2],
                t2: q[3].abs(),
                stretch: q[4],
                offset: q[5],
                relaxation: q[6],
                t1,
            },
        )
    };
    let fit = curve_fit(model, times, values, &p0, LmOptions::default())?;
    let q = &fit.params;
    let params = RamseyParams {
        amplitude: q[0],
        detuning: q[1],
        phase: q[2],
        t2: q[3].abs(),
        stretch: q[4],
        offset: q[5],
        relaxation: q[6],
        t1,
    };
    if !fit.converged || !params.t2.is_finite() || params.stretch <= 0.0 {
        return Err(Error::numerical("Ramsey fit did not converge"));
    }
    Ok(T2Fit { t2: params.t2, stretch: params.stretch, params, rms: fit.rms })
}

pub const ILL_CONDITIONED: f64 = 1e6;

/// Reference voltages `v[n][j]` of prepared state `n` at frequency point `j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutCalib {
    pub v: [[f64; 3]; 3],
}

impl ReadoutCalib {
    fn system(&self) -> Matrix3<f64> {
        // Rows index frequency points, columns prepared states.
        Matrix3::from_fn(|j, n| self.v[n][j])
    }

    /// 2-norm condition number.
    pub fn condition(&self) -> f64 {
        let s = self.system().singular_values();
        let (mx, mn) = (s.max(), s.min());
        if mn == 0.0 { f64::INFINITY } else { mx / mn }
    }

    /// Voltages produced by populations `p`.
    pub fn forward(&self, p: [f64; 3]) -> [f64; 3] {
        let v = self.system() * Vector3::from(p);
        [v[0], v[1], v[2]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutResult {
    pub populations: [f64; 3],
    pub condition: f64,
    pub ill_conditioned: bool,
    /// Set when the raw solution left the simplex and was projected.
    pub projected: bool,
}

/// Least squares on `support` subject to `Σp = 1`; `None` when the KKT system is singular.
fn constrained_ls(a: &Matrix3<f64>, v: &Vector3<f64>, support: &[usize]) -> Option<([f64; 3], f64)> {
    let k = support.len();
    let mut kkt = DMatrix::<f64>::zeros(k + 1, k + 1);
    let mut rhs = DVector::<f64>::zeros(k + 1);
    for (r, &i) in support.iter().enumerate() {
        for (c, &j) in support.iter().enumerate() {
            kkt[(r, c)] = 2.0 * a.column(i).dot(&a.column(j));
        }
        kkt[(r, k)] = 1.0;
        kkt[(k, r)] = 1.0;
        rhs[r] = 2.0 * a.column(i).dot(v);
    }
    rhs[k] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    let mut p = [0.0; 3];
    for (r, &i) in support.iter().enumerate() {
        p[i] = sol[r];
    }
    if p.iter().any(|x| *x < -1e-12) {
        return None;
    }
    let p = p.map(|x| x.max(0.0));
    let res = (a * Vector3::from(p) - v).norm_squared();
    Some((p, res))
}

pub fn populations_from_voltages(v: [f64; 3], calib: &ReadoutCalib) -> Result<ReadoutResult> {
    let cond = calib.condition();
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::numerical("singular readout calibration"));
    }
    let a = calib.system();
    let vv = Vector3::from(v);
    let raw = a.lu().solve(&vv).ok_or_else(|| Error::numerical("singular readout calibration"))?;
    let raw = [raw[0], raw[1], raw[2]];
    let inside = raw.iter().all(|p| (-1e-9..=1.0 + 1e-9).contains(p)) && (raw.iter().sum::<f64>() - 1.0).abs() <= 1e-6;
    if inside {
        return Ok(ReadoutResult { populations: raw, condition: cond, ill_conditioned: cond > ILL_CONDITIONED, projected: false });
    }
    const SUPPORTS: [&[usize]; 7] = [&[0], &[1], &[2], &[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]];
    let best = SUPPORTS
        .iter()
        .filter_map(|s| constrained_ls(&a, &vv, s))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .ok_or_else(|| Error::numerical("simplex projection failed"))?;
    Ok(ReadoutResult { populations: best.0, condition: cond, ill_conditioned: cond > ILL_CONDITIONED, projected: true })
}
