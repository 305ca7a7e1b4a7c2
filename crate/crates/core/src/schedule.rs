//! Uniformly sampled two-tone drive schedules in the two-photon rotating frame.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{cis, C64, ZERO};

pub const SCHEDULE_UNITS: &str = "time: ns; omega1, omega2, quadrature1, quadrature2, detuning: rad/ns";
pub const FORMAT_VERSION: &str = concat!("qutrit ", env!("CARGO_PKG_VERSION"));

const ENDPOINT_TOL: f64 = 1e-9;

/// Sampled envelopes on the grid `t_k = k·dt`, `k = 0..=n`, with `n·dt = duration`.
///
/// Tone 1 drives `0↔1` and tone 2 drives `1↔2`. The quadrature tracks are the imaginary
/// parts of the complex envelopes; an empty quadrature track means zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSchedule {
    pub dt: f64,
    pub duration: f64,
    pub omega1: Vec<f64>,
    pub omega2: Vec<f64>,
    pub detuning: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quadrature1: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quadrature2: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleFile {
    units: String,
    version: String,
    #[serde(default)]
    label: Option<String>,
    schedule: PulseSchedule,
}

/// Number of intervals for a grid of step close to `dt` spanning exactly `duration`.
pub fn grid_intervals(duration: f64, dt: f64) -> Result<usize> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::invalid(format!("duration must be positive, got {duration}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    let n = (duration / dt).round();
    if n < 1.0 {
        return Err(Error::invalid(format!("dt = {dt} exceeds duration {duration}")));
    }
    Ok(n as usize)
}

impl PulseSchedule {
    pub fn new(
        dt: f64,
        duration: f64,
        omega1: Vec<f64>,
        omega2: Vec<f64>,
        detuning: Vec<f64>,
    ) -> Result<Self> {
        let s = Self { dt, duration, omega1, omega2, detuning, quadrature1: vec![], quadrature2: vec![] };
        s.validate()?;
        Ok(s)
    }

    /// All-zero schedule.
    pub fn zeros(duration: f64, dt: f64) -> Result<Self> {
        let n = grid_intervals(duration, dt)?;
        let z = vec![0.0; n + 1];
        Self::new(duration / n as f64, duration, z.clone(), z.clone(), z)
    }

    pub fn validate(&self) -> Result<()> {
        let n = grid_intervals(self.duration, self.dt)?;
        if ((n as f64) * self.dt - self.duration).abs() > 1e-9 * self.duration.max(1.0) {
            return Err(Error::invalid(format!(
                "dt = {} does not divide duration {}",
                self.dt, self.duration
            )));
        }
        let len = n + 1;
        for (name, track) in [
            ("omega1", &self.omega1),
            ("omega2", &self.omega2),
            ("detuning", &self.detuning),
        ] {
            if track.len() != len {
                return Err(Error::invalid(format!("{name} has {} samples, expected {len}", track.len())));
            }
        }
        for (name, track) in [("quadrature1", &self.quadrature1), ("quadrature2", &self.quadrature2)] {
            if !track.is_empty() && track.len() != len {
                return Err(Error::invalid(format!("{name} has {} samples, expected {len}", track.len())));
            }
        }
        let all = [&self.omega1, &self.omega2, &self.detuning, &self.quadrature1, &self.quadrature2];
        if all.iter().any(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid("schedule contains non-finite samples"));
        }
        for k in [0, len - 1] {
            let (c1, c2, _) = self.sample(k);
            if c1.norm() > ENDPOINT_TOL || c2.norm() > ENDPOINT_TOL {
                return Err(Error::invalid("drive envelopes must vanish at both ends"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.omega1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega1.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.time(k)).collect()
    }

    /// Complex envelopes and detuning at sample `k`.
    pub fn sample(&self, k: usize) -> (C64, C64, f64) {
        let q1 = self.quadrature1.get(k).copied().unwrap_or(0.0);
        let q2 = self.quadrature2.get(k).copied().unwrap_or(0.0);
        (C64::new(self.omega1[k], q1), C64::new(self.omega2[k], q2), self.detuning[k])
    }

    /// Linear interpolation of the sampled tracks, clamped to `[0, duration]`.
    pub fn at(&self, t: f64) -> (C64, C64, f64) {
        let n = self.intervals();
        let x = (t / self.dt).clamp(0.0, n as f64);
        let k = (x.floor() as usize).min(n - 1);
        let w = x - k as f64;
        let (a1, a2, ad) = self.sample(k);
        let (b1, b2, bd) = self.sample(k + 1);
        (a1 + (b1 - a1) * w, a2 + (b2 - a2) * w, ad + (bd - ad) * w)
    }

    pub fn has_quadrature(&self) -> bool {
        !(self.quadrature1.is_empty() && self.quadrature2.is_empty())
    }

    pub(crate) fn set_complex(&mut self, tone1: &[C64], tone2: &[C64]) {
        self.omega1 = tone1.iter().map(|z| z.re).collect();
        self.quadrature1 = tone1.iter().map(|z| z.im).collect();
        self.omega2 = tone2.iter().map(|z| z.re).collect();
        self.quadrature2 = tone2.iter().map(|z| z.im).collect();
        if self.quadrature1.iter().chain(&self.quadrature2).all(|&v| v == 0.0) {
            self.quadrature1.clear();
            self.quadrature2.clear();
        }
    }

    pub fn tone1(&self) -> Vec<C64> {
        (0..self.len()).map(|k| self.sample(k).0).collect()
    }

    pub fn tone2(&self) -> Vec<C64> {
        (0..self.len()).map(|k| self.sample(k).1).collect()
    }

    /// Schedule played backwards in time.
    pub fn time_reversed(&self) -> Self {
        let rev = |v: &Vec<f64>| v.iter().rev().copied().collect::<Vec<_>>();
        Self {
            dt: self.dt,
            duration: self.duration,
            omega1: rev(&self.omega1),
            omega2: rev(&self.omega2),
            detuning: rev(&self.detuning),
            quadrature1: rev(&self.quadrature1),
            quadrature2: rev(&self.quadrature2),
        }
    }

    /// Shifts the drive phases so the propagator becomes `Z_φ† U Z_φ`.
    pub fn with_frame(&self, phi1: f64, phi2: f64) -> Self {
        if phi1 == 0.0 && phi2 == 0.0 {
            return self.clone();
        }
        let t1: Vec<C64> = self.tone1().into_iter().map(|z| z * cis(phi1)).collect();
        let t2: Vec<C64> = self.tone2().into_iter().map(|z| z * cis(phi2)).collect();
        let mut out = self.clone();
        out.set_complex(&t1, &t2);
        out
    }

    /// Trapezoidal integral of a sampled track.
    pub fn integral(&self, track: &[f64]) -> f64 {
        trapezoid(track, self.dt)
    }

    /// Rotating-frame Hamiltonian at sample `k`.
    pub fn hamiltonian_at(&self, k: usize) -> DMatrix<C64> {
        let (c1, c2, d) = self.sample(k);
        three_level_hamiltonian(c1, c2, d)
    }

    pub fn to_json(&self, label: Option<&str>) -> Result<String> {
        let f = ScheduleFile {
            units: SCHEDULE_UNITS.into(),
            version: FORMAT_VERSION.into(),
            label: label.map(str::to_owned),
            schedule: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ScheduleFile = serde_json::from_str(s)?;
        f.schedule.validate()?;
        Ok(f.schedule)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `Δ|1><1| + ½(c1|0><1| + c2|1><2| + h.c.)`.
pub fn three_level_hamiltonian(c1: C64, c2: C64, delta: f64) -> DMatrix<C64> {
    let mut h = DMatrix::from_element(3, 3, ZERO);
    h[(1, 1)] = C64::new(delta, 0.0);
    h[(0, 1)] = c1 * 0.5;
    h[(1, 0)] = c1.conj() * 0.5;
    h[(1, 2)] = c2 * 0.5;
    h[(2, 1)] = c2.conj() * 0.5;
    h
}

pub fn trapezoid(y: &[f64], dt: f64) -> f64 {
    if y.len() < 2 {
        return 0.0;
    }
    let inner: f64 = y[1..y.len() - 1].iter().sum();
    dt * (inner + 0.5 * (y[0] + y[y.len() - 1]))
}
