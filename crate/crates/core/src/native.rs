//! Pulse-level library of the physical gates.
//!
//! Each gate is `post · U_pulse · pre`, with `pre` and `post` diagonal and realized as
//! virtual phases.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::clifford::{GateKind, GateOp};
use crate::error::{Error, Result};
use crate::gates::{diagonal_to_frame, virtual_phase};
use crate::hgate::{self, ChirpShape};
use crate::math::{UnitaryMatrix, C64};
use crate::schedule::PulseSchedule;
use crate::sim::{evolve, ErrorKnobs, SimConfig};
use crate::xgate::{self, XKind};

#[derive(Clone, Debug, PartialEq)]
pub struct NativeGate {
    pub kind: GateKind,
    pub schedule: PulseSchedule,
    /// Frame phases applied before the pulse.
    pub pre: (f64, f64),
    /// Frame phases applied after the pulse.
    pub post: (f64, f64),
}

impl NativeGate {
    /// `post · u · pre` for a simulated pulse propagator (or block) `u`.
    pub fn assemble(&self, u: &DMatrix<C64>) -> DMatrix<C64> {
        let pre = virtual_phase(self.pre.0, self.pre.1);
        let post = virtual_phase(self.post.0, self.post.1);
        post.matrix() * u * pre.matrix()
    }
}

/// Resonant Gaussian π pulse on a single tone, zero at both ends.
pub fn gaussian_pi_pulse(duration: f64, dt: f64, tone: usize) -> Result<PulseSchedule> {
    let mut s = PulseSchedule::zeros(duration, dt)?;
    let sigma = duration / 4.0;
    let edge = (-(duration / 2.0).powi(2) / (2.0 * sigma * sigma)).exp();
    let shape: Vec<f64> = s
        .times()
        .iter()
        .map(|&t| (-(t - duration / 2.0).powi(2) / (2.0 * sigma * sigma)).exp() - edge)
        .collect();
    let area = s.integral(&shape);
    let env: Vec<f64> = shape.iter().map(|v| v * PI / area).collect();
    match tone {
        1 => s.omega1 = env,
        2 => s.omega2 = env,
        _ => return Err(Error::invalid(format!("tone {tone} does not exist"))),
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NativeLibrary {
    gates: Vec<NativeGate>,
}

fn slot(kind: GateKind) -> usize {
    GateKind::PHYSICAL
        .iter()
        .position(|k| *k == kind)
        .expect("virtual phases have no pulse")
}

impl NativeLibrary {
    /// Designed schedules for all physical gates at a common duration.
    pub fn design(duration: f64, dt: f64) -> Result<Self> {
        let sol = hgate::solve_h_conditions()?;
        let mut gates = Vec::with_capacity(GateKind::PHYSICAL.len());
        for kind in GateKind::PHYSICAL {
            let g = match kind {
                GateKind::H | GateKind::HInv => {
                    let s = if kind == GateKind::H { sol } else { sol.inverse() };
                    let (left, right) = s.sandwich_phases();
                    NativeGate {
                        kind,
                        schedule: hgate::chirped_schedule(&s, duration, dt, ChirpShape::default())?,
                        pre: diagonal_to_frame(right),
                        post: diagonal_to_frame(left),
                    }
                }
                GateKind::X | GateKind::XInv | GateKind::X02 => {
                    let xk = match kind {
                        GateKind::X => XKind::X,
                        GateKind::XInv => XKind::XInverse,
                        _ => XKind::X02,
                    };
                    let d = xgate::design(xk, duration)?;
                    NativeGate {
                        kind,
                        schedule: xgate::rabi_from_invariant(&d, dt)?,
                        pre: (0.0, 0.0),
                        post: diagonal_to_frame(xgate::residual_phases(xk)),
                    }
                }
                GateKind::X01 => NativeGate {
                    kind,
                    schedule: gaussian_pi_pulse(duration, dt, 1)?,
                    pre: (0.0, 0.0),
                    post: diagonal_to_frame([PI / 2.0, PI / 2.0, 0.0]),
                },
                GateKind::X12 => NativeGate {
                    kind,
                    schedule: gaussian_pi_pulse(duration, dt, 2)?,
                    pre: (0.0, 0.0),
                    post: diagonal_to_frame([0.0, PI / 2.0, PI / 2.0]),
                },
                GateKind::VirtualPhase => unreachable!(),
            };
            gates.push(g);
        }
        Ok(Self { gates })
    }

    pub fn gate(&self, kind: GateKind) -> &NativeGate {
        &self.gates[slot(kind)]
    }

    pub fn gates(&self) -> &[NativeGate] {
        &self.gates
    }

    pub fn gate_mut(&mut self, kind: GateKind) -> &mut NativeGate {
        &mut self.gates[slot(kind)]
    }

    /// Simulates every gate once in the three-level model.
    pub fn simulate(&self, knobs: ErrorKnobs, cfg: &SimConfig) -> Result<GateSet> {
        let mats = self
            .gates
            .par_iter()
            .map(|g| evolve(&g.schedule, knobs, cfg).map(|u| g.assemble(u.matrix())))
            .collect::<Result<Vec<_>>>()?;
        Ok(GateSet { matrices: mats })
    }
}

/// Realized matrices of the physical gates; unitary or leaky blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSet {
    matrices: Vec<DMatrix<C64>>,
}

impl GateSet {
    pub fn from_matrices(matrices: Vec<DMatrix<C64>>) -> Result<Self> {
        if matrices.len() != GateKind::PHYSICAL.len() || matrices.iter().any(|m| m.shape() != (3, 3)) {
            return Err(Error::invalid("a gate set needs one 3x3 matrix per physical gate"));
        }
        Ok(Self { matrices })
    }

    /// Ideal gate matrices.
    pub fn ideal() -> Self {
        Self { matrices: GateKind::PHYSICAL.iter().map(|k| k.ideal().into_matrix()).collect() }
    }

    pub fn matrix(&self, kind: GateKind) -> &DMatrix<C64> {
        &self.matrices[slot(kind)]
    }

    /// Realized matrix of an op; drive-phase offsets act as exact frame conjugation.
    pub fn op_matrix(&self, op: &GateOp) -> DMatrix<C64> {
        let z = op.frame();
        if op.is_virtual() {
            return z.into_matrix();
        }
        z.adjoint().matrix() * self.matrix(op.kind) * z.matrix()
    }

    pub fn circuit(&self, ops: &[GateOp]) -> DMatrix<C64> {
        ops.iter().fold(DMatrix::identity(3, 3), |acc, op| self.op_matrix(op) * acc)
    }

    pub fn circuit_unitary(&self, ops: &[GateOp]) -> Result<UnitaryMatrix> {
        UnitaryMatrix::with_tolerance(self.circuit(ops), 1e-8)
    }
}
