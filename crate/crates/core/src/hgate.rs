//! Hadamard synthesis from a constant two-tone drive, and its chirped flat-top realization.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{cis, UnitaryMatrix, C64, I, ONE};
use crate::schedule::{grid_intervals, trapezoid, PulseSchedule};

/// Closed-form propagator of the constant Hamiltonian over the full gate, in reduced units.
pub fn propagator_constant(omega1_t: f64, omega2_t: f64, delta_t: f64) -> UnitaryMatrix {
    let o0 = omega1_t.hypot(omega2_t);
    let a = o0.hypot(delta_t);
    let theta = if o0 > 0.0 { omega1_t.atan2(omega2_t) } else { 0.0 };
    let (dr, or) = if a > 0.0 { (delta_t / a, o0 / a) } else { (0.0, 0.0) };
    let delta = delta_t / 2.0;
    let (st, ct) = theta.sin_cos();
    let (sa, ca) = (a / 2.0).sin_cos();
    let e = cis(-delta);
    let plus = e * C64::new(ca, dr * sa);
    let u00 = ct * ct + plus * (st * st);
    let u11 = e * C64::new(ca, -dr * sa);
    let u22 = st * st + plus * (ct * ct);
    let u01 = -I * e * (or * st * sa);
    let u12 = -I * e * (or * ct * sa);
    let u02 = (plus - ONE) * (st * ct);
    let m = DMatrix::from_row_slice(3, 3, &[u00, u01, u02, u01, u11, u12, u02, u12, u22]);
    UnitaryMatrix::from_matrix_unchecked(m)
}

/// Which member of the Hadamard pair a solution produces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HSign {
    /// Positive detuning, yields H.
    Forward,
    /// Negative detuning, yields H⁻¹.
    Inverse,
}

/// Reduced parameters of the equal-modulus constant-drive solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HGateSolution {
    pub area: f64,
    pub half_phase: f64,
    pub mixing_angle: f64,
    pub omega1_t: f64,
    pub omega2_t: f64,
    pub delta_t: f64,
    pub sign: HSign,
}

fn half_phase_of(a: f64) -> f64 {
    let s2 = (a / 2.0).sin().powi(2);
    let v = (a / 2.0).powi(2) * (1.0 - 2.0 / (3.0 * s2));
    v.max(0.0).sqrt()
}

fn condition_b(a: f64) -> f64 {
    let d = half_phase_of(a);
    (a / 2.0).cos() * d.cos() + (2.0 * d / a) * (a / 2.0).sin() * d.sin()
}

/// Upper end of the real branch of the first condition above `A = π`.
pub fn area_upper_bound() -> f64 {
    2.0 * (PI - (2.0f64 / 3.0).sqrt().asin())
}

/// Residuals of both equal-modulus conditions at `(A, δ)`.
pub fn condition_residuals(a: f64, delta: f64) -> (f64, f64) {
    let ra = delta * delta - (a / 2.0).powi(2) * (1.0 - 2.0 / (3.0 * (a / 2.0).sin().powi(2)));
    let rb = (a / 2.0).cos() * delta.cos() + (2.0 * delta / a) * (a / 2.0).sin() * delta.sin();
    (ra, rb)
}

pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if !(flo.is_finite() && fhi.is_finite()) || flo * fhi > 0.0 {
        return Err(Error::numerical(format!("no sign change on [{lo}, {hi}]")));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || hi - lo < tol {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest-area solution of the equal-modulus conditions, positive detuning branch.
pub fn solve_h_conditions() -> Result<HGateSolution> {
    let a = bisect(condition_b, PI, area_upper_bound(), 1e-12)?;
    let d = half_phase_of(a);
    let delta_t = 2.0 * d;
    let o0 = (a * a - delta_t * delta_t).sqrt();
    let o1 = o0 / 2f64.sqrt();
    Ok(HGateSolution {
        area: a,
        half_phase: d,
        mixing_angle: PI / 4.0,
        omega1_t: o1,
        omega2_t: o1,
        delta_t,
        sign: HSign::Forward,
    })
}

impl HGateSolution {
    /// Same drive amplitudes with the detuning reversed.
    pub fn inverse(&self) -> Self {
        let sign = match self.sign {
            HSign::Forward => HSign::Inverse,
            HSign::Inverse => HSign::Forward,
        };
        Self { half_phase: -self.half_phase, delta_t: -self.delta_t, sign, ..*self }
    }

    pub fn propagator(&self) -> UnitaryMatrix {
        propagator_constant(self.omega1_t, self.omega2_t, self.delta_t)
    }

    /// Left and right diagonal phases (as phase vectors) turning the propagator into H or H⁻¹.
    pub fn sandwich_phases(&self) -> ([f64; 3], [f64; 3]) {
        let d = self.half_phase;
        match self.sign {
            HSign::Forward => (
                [0.0, 2.0 * PI / 3.0 + d, -2.0 * PI / 3.0],
                [-PI / 6.0, PI / 2.0 + d, -5.0 * PI / 6.0],
            ),
            HSign::Inverse => (
                [0.0, PI / 3.0 + d, 2.0 * PI / 3.0],
                [PI / 6.0, PI / 2.0 + d, 5.0 * PI / 6.0],
            ),
        }
    }

    /// Constant Rabi frequency (rad/ns) for a gate of duration `t` ns.
    pub fn rabi_frequency(&self, t: f64) -> f64 {
        self.omega1_t / t
    }

    pub fn detuning(&self, t: f64) -> f64 {
        self.delta_t / t
    }
}

/// `D₁·U·D₂` with the diagonal phases belonging to `sol`.
pub fn h_phase_sandwich(u: &UnitaryMatrix, sol: &HGateSolution) -> UnitaryMatrix {
    let (l, r) = sol.sandwich_phases();
    &(&UnitaryMatrix::diagonal_phases(&l) * u) * &UnitaryMatrix::diagonal_phases(&r)
}

/// Shape of the flat-top envelope with truncated Gaussian edges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChirpShape {
    /// Length of each rising and falling edge (ns).
    pub edge: f64,
    /// Gaussian width as a fraction of `edge`.
    pub sigma_fraction: f64,
}

impl Default for ChirpShape {
    fn default() -> Self {
        Self { edge: 5.0, sigma_fraction: 0.5 }
    }
}

impl ChirpShape {
    /// Unit-height envelope at time `t` for a gate of length `duration`.
    pub fn envelope(&self, t: f64, duration: f64) -> f64 {
        let edge = self.edge;
        if edge <= 0.0 {
            return if t > 0.0 && t < duration { 1.0 } else { 0.0 };
        }
        let sigma = self.sigma_fraction * edge;
        let g = |x: f64| (-(x * x) / (2.0 * sigma * sigma)).exp();
        let floor = g(edge);
        let rise = |x: f64| ((g(x - edge) - floor) / (1.0 - floor)).max(0.0);
        if t <= 0.0 || t >= duration {
            0.0
        } else if t < edge {
            rise(t)
        } else if t > duration - edge {
            rise(duration - t)
        } else {
            1.0
        }
    }
}

/// Chirped Hadamard schedule with the default edge shape.
pub fn chirped_h_schedule(duration: f64, dt: f64, edge: f64) -> Result<PulseSchedule> {
    let sol = solve_h_conditions()?;
    chirped_schedule(&sol, duration, dt, ChirpShape { edge, ..ChirpShape::default() })
}

/// Flat-top schedule whose drive and detuning areas equal the reduced parameters of `sol`.
pub fn chirped_schedule(
    sol: &HGateSolution,
    duration: f64,
    dt: f64,
    shape: ChirpShape,
) -> Result<PulseSchedule> {
    if !(duration > 2.0 * shape.edge) {
        return Err(Error::invalid(format!(
            "gate time {duration} ns must exceed twice the edge length {} ns",
            shape.edge
        )));
    }
    if !(shape.sigma_fraction > 0.0) || shape.edge < 0.0 {
        return Err(Error::invalid("edge length and width must be positive"));
    }
    let n = grid_intervals(duration, dt)?;
    let dt = duration / n as f64;
    let f: Vec<f64> = (0..=n).map(|k| shape.envelope(k as f64 * dt, duration)).collect();
    let area = trapezoid(&f, dt);
    let o1 = f.iter().map(|v| v * sol.omega1_t / area).collect();
    let o2 = f.iter().map(|v| v * sol.omega2_t / area).collect();
    let det = f.iter().map(|v| v * sol.delta_t / area).collect();
    PulseSchedule::new(dt, duration, o1, o2, det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use crate::math::average_gate_fidelity;

    #[test]
    fn solution_constants() {
        let s = solve_h_conditions().unwrap();
        assert!((s.area - 4.0410).abs() < 1e-3);
        assert!((s.half_phase - 0.8525).abs() < 1e-3);
        assert!((s.omega1_t - 2.5906).abs() < 1e-3);
        assert!((s.delta_t - 1.7050).abs() < 1e-3);
        let (ra, rb) = condition_residuals(s.area, s.half_phase);
        assert!(ra.abs() < 1e-8 && rb.abs() < 1e-8);
        let a2 = s.omega1_t.powi(2) + s.omega2_t.powi(2) + s.delta_t.powi(2);
        assert!((a2 - s.area * s.area).abs() < 1e-6);
    }

    #[test]
    fn sandwiches_give_h_and_inverse() {
        let s = solve_h_conditions().unwrap();
        let h = h_phase_sandwich(&s.propagator(), &s);
        assert!(average_gate_fidelity(&h, &gates::h()).unwrap() > 1.0 - 1e-12);
        let si = s.inverse();
        let hi = h_phase_sandwich(&si.propagator(), &si);
        assert!(average_gate_fidelity(&hi, &gates::h_inv()).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn envelope_is_continuous_and_zero_at_ends() {
        let shape = ChirpShape::default();
        assert_eq!(shape.envelope(0.0, 35.0), 0.0);
        assert_eq!(shape.envelope(35.0, 35.0), 0.0);
        assert!((shape.envelope(5.0 - 1e-9, 35.0) - 1.0).abs() < 1e-6);
        assert!(shape.envelope(1e-9, 35.0) < 1e-6);
    }

    #[test]
    fn short_gate_rejected() {
        assert!(matches!(chirped_h_schedule(10.0, 0.05, 5.0), Err(Error::InvalidArgument(_))));
    }
}
