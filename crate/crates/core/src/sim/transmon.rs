//! Multi-level transmon driven by the two qutrit tones.
//!
//! The frame rotates level 1 with tone 1 and level 2 with both tones, so the
//! computational block reduces to the three-level Hamiltonian when `|α| → ∞`.
//! Each tone couples every neighbouring transition with a `√n` matrix element;
//! off-resonant couplings pick up phases set by the anharmonic ladder and the
//! accumulated chirp `Φ(t) = ∫Δ`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{propagate, require_frame, Frame, SimConfig};
use crate::error::{Error, Result};
use crate::hgate::{self, ChirpShape};
use crate::math::{cis, UnitaryMatrix, C64};
use crate::schedule::PulseSchedule;
use crate::xgate::{self, XKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmonModel {
    pub levels: usize,
    /// 0↔1 transition frequency (rad/ns).
    pub omega01: f64,
    /// `ω₁₂ - ω₀₁` (rad/ns), negative for a transmon.
    pub anharmonicity: f64,
    /// Matrix element of the charge operator on transition `n ↔ n+1`.
    pub drive_coupling: Vec<f64>,
}

impl TransmonModel {
    pub fn new(levels: usize, omega01: f64, anharmonicity: f64) -> Result<Self> {
        if levels < 4 {
            return Err(Error::invalid(format!("transmon model needs at least 4 levels, got {levels}")));
        }
        if !(omega01.is_finite() && anharmonicity.is_finite()) {
            return Err(Error::invalid("transmon frequencies must be finite"));
        }
        let drive_coupling = (1..levels).map(|n| (n as f64).sqrt()).collect();
        Ok(Self { levels, omega01, anharmonicity, drive_coupling })
    }

    /// Four-level model with the 0↔1 frequency of the reference device.
    pub fn with_anharmonicity(anharmonicity: f64) -> Result<Self> {
        Self::new(4, 2.0 * PI * 4.993, anharmonicity)
    }

    pub fn level_energy(&self, n: usize) -> f64 {
        let n = n as f64;
        n * self.omega01 + n * (n - 1.0) / 2.0 * self.anharmonicity
    }

    fn validate(&self) -> Result<()> {
        if self.levels < 4 {
            return Err(Error::invalid(format!("transmon model needs at least 4 levels, got {}", self.levels)));
        }
        if self.drive_coupling.len() != self.levels - 1 {
            return Err(Error::invalid("drive_coupling must have levels - 1 entries"));
        }
        Ok(())
    }

    /// Phase of the `|n+1><n|` coupling from `tone` (1 or 2) at time `t`.
    fn coupling_phase(&self, n: usize, tone: u8, t: f64, chirp: f64) -> f64 {
        let a = self.anharmonicity;
        match (n, tone) {
            (0, 1) | (1, 2) => 0.0,
            (0, _) => -a * t - 2.0 * chirp,
            (1, _) => a * t + 2.0 * chirp,
            (m, 1) => m as f64 * a * t + chirp,
            (m, _) => (m as f64 - 1.0) * a * t - chirp,
        }
    }
}

/// DRAG coefficients for the two tones.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DragParams {
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Central difference of sampled values; the end samples get zero slope.
pub fn sample_derivative(v: &[C64], dt: f64) -> Vec<C64> {
    let n = v.len();
    (0..n)
        .map(|k| {
            if k == 0 || k + 1 == n {
                C64::new(0.0, 0.0)
            } else {
                (v[k + 1] - v[k - 1]) / (2.0 * dt)
            }
        })
        .collect()
}

/// Adds the quadrature `i(λ/α)·dΩ/dt` to each tone.
pub fn apply_drag(schedule: &PulseSchedule, drag: DragParams, anharmonicity: f64) -> Result<PulseSchedule> {
    if drag.lambda1 == 0.0 && drag.lambda2 == 0.0 {
        return Ok(schedule.clone());
    }
    if anharmonicity == 0.0 {
        return Err(Error::invalid("DRAG correction requires nonzero anharmonicity"));
    }
    let shape = |tone: Vec<C64>, lambda: f64| -> Vec<C64> {
        let d = sample_derivative(&tone, schedule.dt);
        tone.iter().zip(d).map(|(c, dc)| c + C64::new(0.0, lambda / anharmonicity) * dc).collect()
    };
    let mut out = schedule.clone();
    out.set_complex(&shape(schedule.tone1(), drag.lambda1), &shape(schedule.tone2(), drag.lambda2));
    Ok(out)
}

/// Full propagator and leakage out of the computational subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmonOutcome {
    pub propagator: UnitaryMatrix,
    pub leakage: f64,
}

impl TransmonOutcome {
    /// Upper-left 3×3 block.
    pub fn block(&self) -> DMatrix<C64> {
        self.propagator.matrix().view((0, 0), (3, 3)).into_owned()
    }

    /// Average fidelity of the block to `target` after optimal output virtual phases.
    pub fn fidelity(&self, target: &UnitaryMatrix) -> f64 {
        block_fidelity(&self.block(), target)
    }
}

fn chirp_table(schedule: &PulseSchedule) -> Vec<f64> {
    let mut acc = vec![0.0; schedule.len()];
    for k in 1..schedule.len() {
        acc[k] = acc[k - 1] + 0.5 * schedule.dt * (schedule.detuning[k - 1] + schedule.detuning[k]);
    }
    acc
}

fn chirp_at(schedule: &PulseSchedule, table: &[f64], t: f64) -> f64 {
    let n = schedule.intervals();
    let x = (t / schedule.dt).clamp(0.0, n as f64);
    let k = (x.floor() as usize).min(n - 1);
    let tau = t - schedule.time(k);
    let (d0, d1) = (schedule.detuning[k], schedule.detuning[k + 1]);
    table[k] + d0 * tau + (d1 - d0) * tau * tau / (2.0 * schedule.dt)
}

pub(crate) fn transmon_hamiltonian<'a>(
    schedule: &'a PulseSchedule,
    model: &'a TransmonModel,
) -> impl Fn(f64) -> DMatrix<C64> + 'a {
    let table = chirp_table(schedule);
    move |t| {
        let (c1, c2, det) = schedule.at(t);
        let chirp = chirp_at(schedule, &table, t);
        let l = model.levels;
        let mut h = DMatrix::<C64>::zeros(l, l);
        h[(1, 1)] = C64::new(det, 0.0);
        for n in 0..l - 1 {
            let g = model.drive_coupling[n] * 0.5;
            let lower = c1.conj() * g * cis(model.coupling_phase(n, 1, t, chirp))
                + c2.conj() * (g * FRAC_1_SQRT_2) * cis(model.coupling_phase(n, 2, t, chirp));
            h[(n + 1, n)] += lower;
            h[(n, n + 1)] += lower.conj();
        }
        h
    }
}

pub fn transmon_evolve(
    schedule: &PulseSchedule,
    model: &TransmonModel,
    drag: Option<DragParams>,
    cfg: &SimConfig,
) -> Result<TransmonOutcome> {
    require_frame(cfg, Frame::MultilevelTransmon)?;
    model.validate()?;
    schedule.validate()?;
    let shaped = match drag {
        Some(d) => apply_drag(schedule, d, model.anharmonicity)?,
        None => schedule.clone(),
    };
    let u = propagate(
        model.levels,
        shaped.dt,
        shaped.intervals(),
        cfg,
        transmon_hamiltonian(&shaped, model),
        |_, _| {},
    )?;
    let propagator = UnitaryMatrix::with_tolerance(u, 1e-9)?;
    let m = propagator.matrix().view((0, 0), (3, 3)).into_owned();
    let leakage = (1.0 - (m.adjoint() * &m).trace().re / 3.0).max(0.0);
    Ok(TransmonOutcome { propagator, leakage })
}

/// `(Tr(M†M) + (Σ|(M V†)_ii|)²) / (d(d+1))`: leaky-gate average fidelity maximised over output diagonal phases.
pub fn block_fidelity(m: &DMatrix<C64>, target: &UnitaryMatrix) -> f64 {
    let d = m.nrows() as f64;
    let mv = m * target.matrix().adjoint();
    let s: f64 = (0..m.nrows()).map(|i| mv[(i, i)].norm()).sum();
    let tr = (m.adjoint() * m).trace().re;
    ((tr + s * s) / (d * (d + 1.0))).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    Anharmonicity,
    GateTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransmonGate {
    H,
    X,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSettings {
    pub levels: usize,
    pub dt: f64,
    /// Gate time held fixed on the anharmonicity axis (ns).
    pub duration: f64,
    /// Anharmonicity held fixed on the gate-time axis (rad/ns).
    pub anharmonicity: f64,
    pub shape: ChirpShape,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            levels: 4,
            dt: 0.02,
            duration: 35.0,
            anharmonicity: -2.0 * PI * 0.2,
            shape: ChirpShape::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoherentError {
    pub value: f64,
    pub error: f64,
    pub leakage: f64,
}

/// Uncalibrated coherent error of the designed gate on the transmon.
pub fn coherent_error(
    gate: TransmonGate,
    model: &TransmonModel,
    duration: f64,
    settings: &ScanSettings,
) -> Result<(f64, f64)> {
    let cfg = SimConfig::transmon(settings.dt);
    let dt = settings.dt.min(duration / 200.0);
    let (outcome, target) = match gate {
        TransmonGate::X => {
            let design = xgate::design(XKind::X, duration)?;
            let sched = xgate::rabi_from_invariant(&design, dt)?;
            (transmon_evolve(&sched, model, None, &cfg)?, XKind::X.target())
        }
        TransmonGate::H => {
            let sol = hgate::solve_h_conditions()?;
            let sched = hgate::chirped_schedule(&sol, duration, dt, settings.shape)?;
            let mut out = transmon_evolve(&sched, model, None, &cfg)?;
            let (_, pre) = sol.sandwich_phases();
            let mut pre_full = vec![0.0; model.levels];
            pre_full[..3].copy_from_slice(&pre);
            out.propagator = &out.propagator * &UnitaryMatrix::diagonal_phases(&pre_full);
            (out, crate::gates::h())
        }
    };
    Ok((1.0 - outcome.fidelity(&target), outcome.leakage))
}

pub fn coherent_error_scan(
    axis: ScanAxis,
    values: &[f64],
    gate: TransmonGate,
    settings: &ScanSettings,
) -> Result<Vec<CoherentError>> {
    let monotone = values.windows(2).all(|w| w[1] > w[0]) || values.windows(2).all(|w| w[1] < w[0]);
    if !monotone {
        return Err(Error::invalid("scan values must be strictly monotone"));
    }
    values
        .par_iter()
        .map(|&v| {
            let (alpha, duration) = match axis {
                ScanAxis::Anharmonicity => (v, settings.duration),
                ScanAxis::GateTime => (settings.anharmonicity, v),
            };
            let model = TransmonModel::new(settings.levels, 2.0 * PI * 4.993, alpha)?;
            let (error, leakage) = coherent_error(gate, &model, duration, settings)?;
            Ok(CoherentError { value: v, error, leakage })
        })
        .collect()
}
