//! X-type gates from Lewis-Riesenfeld invariants of the resonant two-tone Hamiltonian.

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hgate::bisect;
use crate::math::{UnitaryMatrix, C64, I, ONE, ZERO};
use crate::quad::adaptive_simpson;
use crate::schedule::{grid_intervals, PulseSchedule};

/// Lower and upper ends of the amplitude search interval.
pub const LAMBDA_BRACKET: (f64, f64) = (20.0, 60.0);
/// Below this distance from either end, `β̇ cot γ` uses its series form.
pub const SERIES_CROSSOVER: f64 = 1e-3;

const QUAD_TOL: f64 = 1e-11;
const BETA_DOT_SCALE: f64 = 1386.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum XKind {
    X,
    XInverse,
    X02,
}

impl XKind {
    pub fn target_phase(self) -> f64 {
        match self {
            XKind::X | XKind::XInverse => -1.5 * PI,
            XKind::X02 => -PI,
        }
    }

    /// Whether the schedule is the time reverse of the invariant-derived drive.
    pub fn reversed(self) -> bool {
        matches!(self, XKind::X)
    }

    pub fn target(self) -> UnitaryMatrix {
        match self {
            XKind::X => crate::gates::x(),
            XKind::XInverse => crate::gates::x_inv(),
            XKind::X02 => crate::gates::x02(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrDesign {
    pub lambda: f64,
    pub duration: f64,
    pub theta_target: f64,
    pub kind: XKind,
}

fn unit_time(t: f64, duration: f64) -> Result<f64> {
    if !(duration > 0.0) {
        return Err(Error::invalid(format!("duration must be positive, got {duration}")));
    }
    let eps = 1e-12 * duration;
    if !(t >= -eps && t <= duration + eps) {
        return Err(Error::invalid(format!("t = {t} outside [0, {duration}]")));
    }
    Ok((t / duration).clamp(0.0, 1.0))
}

fn beta_poly(s: f64) -> f64 {
    let c = [231.0, -990.0, 1732.5, -1540.0, 693.0, -126.0];
    let mut acc = 0.0;
    for &k in c.iter().rev() {
        acc = acc * s + k;
    }
    PI * acc * s.powi(6)
}

/// Auxiliary angles `(γ, β)` at time `t`.
pub fn gamma_beta(t: f64, lambda: f64, duration: f64) -> Result<(f64, f64)> {
    let s = unit_time(t, duration)?;
    let x = s * (1.0 - s);
    Ok((lambda * x.powi(3), beta_poly(s)))
}

/// `dβ/dt` in rad/ns.
pub fn beta_dot(t: f64, duration: f64) -> Result<f64> {
    let s = unit_time(t, duration)?;
    Ok(BETA_DOT_SCALE / duration * (s * (1.0 - s)).powi(5))
}

/// `dγ/dt` in rad/ns.
pub fn gamma_dot(t: f64, lambda: f64, duration: f64) -> Result<f64> {
    let s = unit_time(t, duration)?;
    let x = s * (1.0 - s);
    Ok(lambda * 3.0 * x * x * (1.0 - 2.0 * s) / duration)
}

fn lr_integrand(s: f64, lambda: f64) -> f64 {
    let x = s * (1.0 - s);
    if x <= 0.0 {
        return 0.0;
    }
    BETA_DOT_SCALE * x.powi(5) / (lambda * x.powi(3)).sin()
}

/// Accumulated invariant phase `θ = -∫ β̇ / sin γ dt`; independent of the duration.
pub fn lr_phase(lambda: f64, duration: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(lambda < 64.0 * PI) {
        return Err(Error::invalid(format!("lambda must lie in (0, 64π), got {lambda}")));
    }
    if !(duration > 0.0) {
        return Err(Error::invalid(format!("duration must be positive, got {duration}")));
    }
    let half = adaptive_simpson(|s| lr_integrand(s, lambda), 0.0, 0.5, QUAD_TOL)?;
    Ok(-2.0 * half)
}

/// Amplitude `λ` on the search interval whose phase equals `theta`.
pub fn solve_lambda(theta: f64) -> Result<f64> {
    let (lo, hi) = LAMBDA_BRACKET;
    let (plo, phi) = (lr_phase(lo, 1.0)?, lr_phase(hi, 1.0)?);
    if !(theta >= plo.min(phi) && theta <= plo.max(phi)) {
        return Err(Error::invalid(format!(
            "target phase {theta} outside attainable range [{plo}, {phi}]"
        )));
    }
    let failed = RefCell::new(None);
    let root = bisect(
        |l| match lr_phase(l, 1.0) {
            Ok(v) => v - theta,
            Err(e) => {
                failed.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-13,
    );
    match failed.into_inner() {
        Some(e) => Err(e),
        None => root,
    }
}

/// Invariant-based design for one of the three X-type targets.
pub fn design(kind: XKind, duration: f64) -> Result<LrDesign> {
    if !(duration > 0.0) {
        return Err(Error::invalid(format!("duration must be positive, got {duration}")));
    }
    let theta = kind.target_phase();
    Ok(LrDesign { lambda: solve_lambda(theta)?, duration, theta_target: theta, kind })
}

fn forward_envelopes(s: f64, lambda: f64, duration: f64) -> (f64, f64) {
    let x = s * (1.0 - s);
    if x <= 0.0 {
        return (0.0, 0.0);
    }
    let gamma = lambda * x.powi(3);
    let beta = beta_poly(s);
    let gdot = lambda * 3.0 * x * x * (1.0 - 2.0 * s) / duration;
    let bcot = if s.min(1.0 - s) < SERIES_CROSSOVER {
        BETA_DOT_SCALE / (duration * lambda) * x * x * (1.0 - gamma * gamma / 3.0)
    } else {
        BETA_DOT_SCALE / duration * x.powi(5) / gamma.tan()
    };
    let (sb, cb) = beta.sin_cos();
    (2.0 * (gdot * cb + bcot * sb), 2.0 * (-gdot * sb + bcot * cb))
}

impl LrDesign {
    /// Drive amplitudes `(Ω₁, Ω₂)` in rad/ns at time `t`.
    pub fn envelopes(&self, t: f64) -> Result<(f64, f64)> {
        let s = unit_time(t, self.duration)?;
        let s = if self.kind.reversed() { 1.0 - s } else { s };
        Ok(forward_envelopes(s, self.lambda, self.duration))
    }
}

/// Samples the drive that realizes the invariant dynamics of `design`.
pub fn rabi_from_invariant(design: &LrDesign, dt: f64) -> Result<PulseSchedule> {
    let n = grid_intervals(design.duration, dt)?;
    if n < 200 {
        return Err(Error::invalid(format!(
            "dt = {dt} too coarse; need at most T/200 = {}",
            design.duration / 200.0
        )));
    }
    let mut o1 = Vec::with_capacity(n + 1);
    let mut o2 = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let s = k as f64 / n as f64;
        let s = if design.kind.reversed() { 1.0 - s } else { s };
        let (a, b) = forward_envelopes(s, design.lambda, design.duration);
        o1.push(a);
        o2.push(b);
    }
    PulseSchedule::new(design.duration / n as f64, design.duration, o1, o2, vec![0.0; n + 1])
}

/// Ideal invariant-based propagator as a function of the accumulated phase.
pub fn evolution_from_theta(theta: f64) -> UnitaryMatrix {
    let (s, c) = theta.sin_cos();
    let cs = C64::new(c, 0.0);
    let m = DMatrix::from_row_slice(
        3,
        3,
        &[ZERO, I * s, cs, ZERO, cs, I * s, -ONE, ZERO, ZERO],
    );
    UnitaryMatrix::from_matrix_unchecked(m)
}

/// Diagonal phases `a` with `diag(e^{i a})·U_sim` equal to the target up to global phase.
pub fn residual_phases(kind: XKind) -> [f64; 3] {
    match kind {
        XKind::XInverse => [PI / 2.0, PI / 2.0, 0.0],
        XKind::X => [0.0, PI / 2.0, PI / 2.0],
        XKind::X02 => [0.0, 0.0, 0.0],
    }
}

pub fn residual_phase_correction(kind: XKind) -> UnitaryMatrix {
    UnitaryMatrix::diagonal_phases(&residual_phases(kind))
}
