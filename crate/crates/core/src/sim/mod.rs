//! Time-dependent propagation of pulse schedules.

pub mod transmon;

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{average_gate_fidelity, cis, expm_herm_raw, UnitaryMatrix, C64, I};
use crate::schedule::{three_level_hamiltonian, PulseSchedule, FORMAT_VERSION};
use crate::xgate::{self, XKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// One Hermitian exponential per step from the two-point Gauss commutator expansion.
    PiecewiseExpm,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    TwoPhotonRotating,
    MultilevelTransmon,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub method: Integrator,
    pub frame: Frame,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 0.02, method: Integrator::PiecewiseExpm, frame: Frame::TwoPhotonRotating }
    }
}

impl SimConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, ..Self::default() }
    }

    pub fn transmon(dt: f64) -> Self {
        Self { dt, frame: Frame::MultilevelTransmon, ..Self::default() }
    }
}

/// Fractional amplitude errors and detuning errors (`δ = 2πζ/T`) on the two tones.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorKnobs {
    pub eta1: f64,
    pub eta2: f64,
    pub zeta1: f64,
    pub zeta2: f64,
}

impl ErrorKnobs {
    pub fn amplitude(eta1: f64, eta2: f64) -> Self {
        Self { eta1, eta2, ..Self::default() }
    }

    pub fn detuning(zeta1: f64, zeta2: f64) -> Self {
        Self { zeta1, zeta2, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("eta1", self.eta1), ("eta2", self.eta2), ("zeta1", self.zeta1), ("zeta2", self.zeta2)] {
            if !(v.abs() <= 0.5) {
                return Err(Error::invalid(format!("{n} = {v} outside [-0.5, 0.5]")));
            }
        }
        Ok(())
    }
}

/// Number of integration steps per schedule interval.
fn substeps(schedule_dt: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("integration step must be positive, got {dt}")));
    }
    if dt > schedule_dt * (1.0 + 1e-9) {
        return Err(Error::invalid(format!(
            "integration step {dt} is coarser than the schedule sampling {schedule_dt}"
        )));
    }
    Ok(((schedule_dt / dt) - 1e-9).ceil().max(1.0) as usize)
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6

fn magnus_step(h1: &DMatrix<C64>, h2: &DMatrix<C64>, h: f64) -> DMatrix<C64> {
    let comm = h2 * h1 - h1 * h2;
    let mut heff = (h1 + h2) * C64::new(0.5, 0.0);
    heff -= comm * (I * (3f64.sqrt() * h / 12.0));
    // Symmetrize away rounding so the eigensolver sees an exactly Hermitian matrix.
    let heff = (&heff + heff.adjoint()) * C64::new(0.5, 0.0);
    expm_herm_raw(&heff, h)
}

fn rk4_step<F: Fn(f64) -> DMatrix<C64>>(ham: &F, t: f64, h: f64, u: &DMatrix<C64>) -> DMatrix<C64> {
    let f = |tt: f64, y: &DMatrix<C64>| (ham(tt) * y) * (-I);
    let k1 = f(t, u);
    let k2 = f(t + h / 2.0, &(u + &k1 * C64::new(h / 2.0, 0.0)));
    let k3 = f(t + h / 2.0, &(u + &k2 * C64::new(h / 2.0, 0.0)));
    let k4 = f(t + h, &(u + &k3 * C64::new(h, 0.0)));
    u + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
}

/// Time-ordered propagator of `ham` over `intervals` schedule intervals of width `schedule_dt`.
///
/// `observe` is called with the sample index and the propagator at every schedule sample.
pub(crate) fn propagate<F, O>(
    dim: usize,
    schedule_dt: f64,
    intervals: usize,
    cfg: &SimConfig,
    ham: F,
    mut observe: O,
) -> Result<DMatrix<C64>>
where
    F: Fn(f64) -> DMatrix<C64>,
    O: FnMut(usize, &DMatrix<C64>),
{
    let m = substeps(schedule_dt, cfg.dt)?;
    let h = schedule_dt / m as f64;
    let mut u = DMatrix::<C64>::identity(dim, dim);
    observe(0, &u);
    for k in 0..intervals {
        let t0 = k as f64 * schedule_dt;
        for j in 0..m {
            let t = t0 + j as f64 * h;
            u = match cfg.method {
                Integrator::PiecewiseExpm => {
                    let h1 = ham(t + (0.5 - GAUSS_OFFSET) * h);
                    let h2 = ham(t + (0.5 + GAUSS_OFFSET) * h);
                    magnus_step(&h1, &h2, h) * u
                }
                Integrator::Rk4 => rk4_step(&ham, t, h, &u),
            };
        }
        observe(k + 1, &u);
    }
    Ok(u)
}

fn require_frame(cfg: &SimConfig, frame: Frame) -> Result<()> {
    if cfg.frame != frame {
        return Err(Error::invalid(format!("simulation frame must be {frame:?}, got {:?}", cfg.frame)));
    }
    Ok(())
}

fn ideal_hamiltonian(
    schedule: &PulseSchedule,
    knobs: ErrorKnobs,
) -> impl Fn(f64) -> DMatrix<C64> + '_ {
    let d1 = 2.0 * PI * knobs.zeta1 / schedule.duration;
    let d2 = 2.0 * PI * knobs.zeta2 / schedule.duration;
    move |t| {
        let (c1, c2, det) = schedule.at(t);
        three_level_hamiltonian(
            c1 * (1.0 + knobs.eta1) * cis(d1 * t),
            c2 * (1.0 + knobs.eta2) * cis(-d2 * t),
            det,
        )
    }
}

/// Propagator of the three-level rotating-frame Hamiltonian driven by `schedule`.
pub fn evolve(schedule: &PulseSchedule, knobs: ErrorKnobs, cfg: &SimConfig) -> Result<UnitaryMatrix> {
    require_frame(cfg, Frame::TwoPhotonRotating)?;
    knobs.validate()?;
    schedule.validate()?;
    let u = propagate(3, schedule.dt, schedule.intervals(), cfg, ideal_hamiltonian(schedule, knobs), |_, _| {})?;
    UnitaryMatrix::with_tolerance(u, 1e-9)
}

/// Level populations sampled on the schedule grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub populations: Vec<[f64; 3]>,
}

impl Trajectory {
    pub fn last(&self) -> [f64; 3] {
        *self.populations.last().expect("trajectory has at least one sample")
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = self.times.iter().zip(&self.populations).map(|(t, p)| vec![*t, p[0], p[1], p[2]]);
        write_csv(w, "time: ns; populations: dimensionless", &["time", "P0", "P1", "P2"], rows)
    }
}

pub fn population_trajectory(
    schedule: &PulseSchedule,
    initial_state: usize,
    cfg: &SimConfig,
) -> Result<Trajectory> {
    require_frame(cfg, Frame::TwoPhotonRotating)?;
    if initial_state > 2 {
        return Err(Error::invalid(format!("initial state {initial_state} is not a qutrit level")));
    }
    schedule.validate()?;
    let mut times = Vec::with_capacity(schedule.len());
    let mut populations = Vec::with_capacity(schedule.len());
    propagate(
        3,
        schedule.dt,
        schedule.intervals(),
        cfg,
        ideal_hamiltonian(schedule, ErrorKnobs::default()),
        |k, u| {
            times.push(schedule.time(k));
            populations.push([0, 1, 2].map(|r| u[(r, initial_state)].norm_sqr()));
        },
    )?;
    Ok(Trajectory { times, populations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RobustGate {
    X,
    X02,
}

impl RobustGate {
    pub fn kind(self) -> XKind {
        match self {
            RobustGate::X => XKind::X,
            RobustGate::X02 => XKind::X02,
        }
    }
}

/// Fidelities on a square grid: `values[i][j]` belongs to `(axis[i], axis[j])`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityGrid {
    pub axis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl FidelityGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::MIN, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W, names: (&str, &str)) -> Result<()> {
        let rows = self.axis.iter().enumerate().flat_map(|(i, a)| {
            self.axis.iter().enumerate().map(move |(j, b)| vec![*a, *b, self.values[i][j]])
        });
        write_csv(w, "errors: dimensionless; fidelity: dimensionless", &[names.0, names.1, "fidelity"], rows)
    }
}

/// Amplitude-error grid at zero detuning error and detuning-error grid at zero amplitude error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessScan {
    pub amplitude: FidelityGrid,
    pub detuning: FidelityGrid,
}

fn grid<F: Fn(f64, f64) -> Result<f64> + Sync>(axis: &[f64], f: F) -> Result<FidelityGrid> {
    let n = axis.len();
    let flat: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| f(axis[idx / n], axis[idx % n]))
        .collect::<Result<_>>()?;
    Ok(FidelityGrid { axis: axis.to_vec(), values: flat.chunks(n).map(<[f64]>::to_vec).collect() })
}

/// Fidelity of a corrected X-type gate under parameter errors.
pub fn x_gate_fidelity(
    schedule: &PulseSchedule,
    kind: XKind,
    knobs: ErrorKnobs,
    cfg: &SimConfig,
) -> Result<f64> {
    let u = evolve(schedule, knobs, cfg)?;
    average_gate_fidelity(&(&xgate::residual_phase_correction(kind) * &u), &kind.target())
}

pub fn robustness_scan(
    gate: RobustGate,
    duration: f64,
    eta_grid: &[f64],
    zeta_grid: &[f64],
    cfg: &SimConfig,
) -> Result<RobustnessScan> {
    let kind = gate.kind();
    let design = xgate::design(kind, duration)?;
    let schedule = xgate::rabi_from_invariant(&design, cfg.dt.min(duration / 200.0))?;
    let amplitude = grid(eta_grid, |a, b| x_gate_fidelity(&schedule, kind, ErrorKnobs::amplitude(a, b), cfg))?;
    let detuning = grid(zeta_grid, |a, b| x_gate_fidelity(&schedule, kind, ErrorKnobs::detuning(a, b), cfg))?;
    Ok(RobustnessScan { amplitude, detuning })
}

/// Writes a CSV file with a leading `#` comment carrying units and version.
pub fn write_csv<W: Write, R: IntoIterator<Item = Vec<f64>>>(
    mut w: W,
    units: &str,
    header: &[&str],
    rows: R,
) -> Result<()> {
    writeln!(w, "# units: {units}; version: {FORMAT_VERSION}")?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.iter().map(|v| format!("{v:.12e}")))?;
    }
    out.flush()?;
    Ok(())
}
