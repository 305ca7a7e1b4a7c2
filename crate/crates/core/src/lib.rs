//! Qutrit gate synthesis, pulse-level simulation, Clifford compilation, benchmarking,
//! calibration and qudit algorithms.

pub mod algorithms;
pub mod calibration;
pub mod clifford;
pub mod device;
pub mod error;
pub mod fit;
pub mod gates;
pub mod hgate;
pub mod math;
pub mod native;
pub mod quad;
pub mod rb;
pub mod schedule;
pub mod sim;
pub mod xgate;

pub use error::{Error, Result};
pub use math::{average_gate_fidelity, canonicalize_phase, expm_hermitian, Hermitian, UnitaryMatrix, C64};
pub use schedule::PulseSchedule;
