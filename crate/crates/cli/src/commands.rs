use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use serde_json::{json, Value};

use qutrit::algorithms::{
    digits_to_phase, kitaev_density, kitaev_estimate, kitaev_fwhm, parity_check, ramsey_population,
    DihedralElement, ExactPhase,
};
use qutrit::calibration::{
    two_phase_optimize, write_history_csv, Bounds, CalibParams, CalibrationTarget, OptimizerConfig,
    TransmonObjective,
};
use qutrit::clifford::{CliffordTable, Convention, GateKind};
use qutrit::device::{fit_t1, fit_t2, populations_from_voltages, ReadoutCalib, T1Traces};
use qutrit::hgate::{self, h_phase_sandwich, solve_h_conditions, ChirpShape};
use qutrit::native::NativeLibrary;
use qutrit::rb::{
    clifford_error, depolarizing_from_error, fit_decay, irb_error, run_rb, NoiseModel, RbConfig, SurvivalPoint,
};
use qutrit::schedule::FORMAT_VERSION;
use qutrit::sim::transmon::TransmonModel;
use qutrit::sim::{evolve, population_trajectory, write_csv, ErrorKnobs, SimConfig};
use qutrit::xgate::{self, residual_phase_correction, XKind};
use qutrit::{average_gate_fidelity, gates, Error, PulseSchedule, Result};

use crate::output::Outputs;
use crate::{
    CalibrateArgs, CliffordArgs, ConventionArg, DesignArgs, DesignGate, FitCommand, IrbArgs, KitaevArgs, ParityArgs,
    RamseyArgs, RbArgs, RbCommon, SimulateArgs,
};

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn json_bytes(v: &Value) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Summaries go to stdout unless stdout carries the data itself.
fn note(data_on_stdout: bool, msg: &str) {
    if data_on_stdout {
        eprintln!("{msg}");
    } else {
        println!("{msg}");
    }
}

fn to_mhz(rad_per_ns: f64) -> f64 {
    rad_per_ns / (2.0 * PI) * 1e3
}

pub fn design(a: &DesignArgs) -> Result<()> {
    let t = a.duration;
    let mut out = Outputs::new();
    let (schedule, label) = match a.gate {
        DesignGate::H | DesignGate::HInv => {
            let base = solve_h_conditions()?;
            let (sol, target, label) = match a.gate {
                DesignGate::H => (base, gates::h(), "H"),
                _ => (base.inverse(), gates::h_inv(), "H_inv"),
            };
            let shape = ChirpShape { edge: a.edge, ..ChirpShape::default() };
            let s = hgate::chirped_schedule(&sol, t, a.dt, shape)?;
            let u = evolve(&s, ErrorKnobs::default(), &SimConfig::with_dt(a.dt))?;
            let f = average_gate_fidelity(&h_phase_sandwich(&u, &sol), &target)?;
            println!("gate {label}, T = {t} ns");
            println!("A = {:.4}", sol.area);
            println!("delta = {:.4}", sol.half_phase);
            println!("Omega1*T = {:.4}, Omega2*T = {:.4}, Delta*T = {:.4}", sol.omega1_t, sol.omega2_t, sol.delta_t);
            println!("Omega/2pi = {:.4} MHz", to_mhz(sol.omega1_t / t));
            println!("Delta/2pi = {:.4} MHz", to_mhz(sol.delta_t / t));
            println!("fidelity = {f:.8}");
            (s, label)
        }
        DesignGate::X | DesignGate::XInv | DesignGate::X02 => {
            let (kind, label) = match a.gate {
                DesignGate::X => (XKind::X, "X"),
                DesignGate::XInv => (XKind::XInverse, "X_inv"),
                _ => (XKind::X02, "X02"),
            };
            let d = xgate::design(kind, t)?;
            let s = xgate::rabi_from_invariant(&d, a.dt)?;
            let u = evolve(&s, ErrorKnobs::default(), &SimConfig::with_dt(a.dt))?;
            let f = average_gate_fidelity(&(&residual_phase_correction(kind) * &u), &kind.target())?;
            let peak = s.omega1.iter().chain(&s.omega2).fold(0.0f64, |m, v| m.max(v.abs()));
            println!("gate {label}, T = {t} ns");
            println!("lambda = {:.4}", d.lambda);
            println!("theta = {:.4} pi", d.theta_target / PI);
            println!("peak Omega/2pi = {:.4} MHz", to_mhz(peak));
            println!("fidelity = {f:.8}");
            (s, label)
        }
    };
    if let Some(p) = &a.out {
        out.emit(Some(p), schedule.to_json(Some(label))?.as_bytes())?;
    }
    out.commit()
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let s = PulseSchedule::read(&a.schedule)?;
    let cfg = SimConfig::with_dt(a.dt.unwrap_or(s.dt));
    let traj = population_trajectory(&s, a.init, &cfg)?;
    let mut buf = Vec::new();
    traj.write_csv(&mut buf)?;
    let mut out = Outputs::new();
    out.emit(a.out.as_deref(), &buf)?;
    out.commit()?;
    let p = traj.last();
    note(a.out.is_none(), &format!("final populations {:.6} {:.6} {:.6}", p[0], p[1], p[2]));
    Ok(())
}

fn convention(c: ConventionArg) -> Convention {
    match c {
        ConventionArg::ShortestWord => Convention::ShortestWord,
        ConventionArg::FewestPulses => Convention::FewestPulses,
        ConventionArg::MinimalSet => Convention::MinimalSet,
    }
}

pub fn clifford(a: &CliffordArgs) -> Result<()> {
    let t = CliffordTable::enumerate(convention(a.convention))?;
    let mut out = Outputs::new();
    out.emit(a.out.as_deref(), &json_bytes(&t.to_json())?)?;
    out.commit()?;
    let c = t.average_counts();
    note(
        a.out.is_none(),
        &format!("{} elements; average H {:.3}, S {:.3}, X {:.3}, Z {:.3}", t.len(), c.h, c.s, c.x, c.z),
    );
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseArg {
    Ideal,
    Depolarizing(f64),
    Pulse,
}

impl FromStr for NoiseArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.split_once(':') {
            None if s == "ideal" => Ok(NoiseArg::Ideal),
            None if s == "pulse" => Ok(NoiseArg::Pulse),
            Some(("depolarizing", p)) => p
                .parse()
                .map(NoiseArg::Depolarizing)
                .map_err(|_| format!("bad depolarizing parameter {p:?}")),
            _ => Err(format!("unknown noise {s:?}; use ideal, depolarizing:<p> or pulse")),
        }
    }
}

impl fmt::Display for NoiseArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseArg::Ideal => write!(f, "ideal"),
            NoiseArg::Depolarizing(p) => write!(f, "depolarizing:{p}"),
            NoiseArg::Pulse => write!(f, "pulse"),
        }
    }
}

fn noise_model(c: &RbCommon, p_interleaved: f64) -> Result<NoiseModel> {
    Ok(match c.noise {
        NoiseArg::Ideal => NoiseModel::Ideal,
        NoiseArg::Depolarizing(p) => NoiseModel::Depolarizing { p_clifford: p, p_interleaved },
        NoiseArg::Pulse => {
            let knobs = ErrorKnobs { eta1: c.eta1, eta2: c.eta2, zeta1: c.zeta1, zeta2: c.zeta2 };
            NoiseModel::Gates(NativeLibrary::design(c.duration, c.dt)?.simulate(knobs, &SimConfig::with_dt(c.dt))?)
        }
    })
}

fn rb_config(c: &RbCommon, seed: u64, noise: NoiseModel, interleaved: Option<GateKind>) -> RbConfig {
    RbConfig { lengths: c.lengths.clone(), n_sequences: c.sequences, shots: c.shots, seed, noise, interleaved }
}

fn decay_json(points: &[SurvivalPoint]) -> Result<(Value, f64)> {
    let fit = fit_decay(points)?;
    Ok((json!({ "points": points, "fit": fit }), fit.p))
}

const RB_UNITS: &str = "m: Cliffords; survival, A, p, B, errors: dimensionless";

pub fn rb(a: &RbArgs, seed: u64) -> Result<()> {
    let c = &a.common;
    let table = CliffordTable::enumerate(convention(c.convention))?;
    let cfg = rb_config(c, seed, noise_model(c, 1.0)?, None);
    let points = run_rb(&table, &cfg)?;
    let (mut v, p) = decay_json(&points)?;
    let r = clifford_error(p)?;
    let extra = json!({
        "units": RB_UNITS,
        "version": FORMAT_VERSION,
        "seed": seed,
        "noise": c.noise.to_string(),
        "r_c": r,
    });
    merge(&mut v, extra);
    let mut out = Outputs::new();
    out.emit(c.out.as_deref(), &json_bytes(&v)?)?;
    out.commit()?;
    note(c.out.is_none(), &format!("p = {p:.6}, r_c = {r:.6}"));
    Ok(())
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

pub fn irb(a: &IrbArgs, seed: u64) -> Result<()> {
    let c = &a.common;
    let kind = GateKind::from_name(&a.gate)
        .filter(|k| *k != GateKind::VirtualPhase)
        .ok_or_else(|| usage(format!("unknown gate {:?}", a.gate)))?;
    let table = CliffordTable::enumerate(convention(c.convention))?;
    let noise = noise_model(c, depolarizing_from_error(a.gate_error))?;
    let reference = run_rb(&table, &rb_config(c, seed, noise.clone(), None))?;
    let interleaved = run_rb(&table, &rb_config(c, seed, noise, Some(kind)))?;
    let (ref_json, p_ref) = decay_json(&reference)?;
    let (int_json, p_int) = decay_json(&interleaved)?;
    let est = irb_error(p_int, p_ref)?;
    let v = json!({
        "units": RB_UNITS,
        "version": FORMAT_VERSION,
        "seed": seed,
        "noise": c.noise.to_string(),
        "gate": kind.name(),
        "reference": ref_json,
        "interleaved": int_json,
        "r_gate": est.r,
        "unphysical": est.unphysical,
    });
    let mut out = Outputs::new();
    out.emit(c.out.as_deref(), &json_bytes(&v)?)?;
    out.commit()?;
    note(c.out.is_none(), &format!("r_{} = {:.6}{}", kind.name(), est.r, if est.unphysical { " (unphysical)" } else { "" }));
    Ok(())
}

pub fn ramsey(a: &RamseyArgs) -> Result<()> {
    if a.points == 0 {
        return Err(usage("need at least one phase sample"));
    }
    let names: Vec<String> = std::iter::once("phi".to_string()).chain((0..a.d).map(|k| format!("P{k}"))).collect();
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows = (0..a.points)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / a.points as f64;
            let mut row = vec![phi];
            for k in 0..a.d {
                row.push(ramsey_population(a.d, k, phi)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    write_csv(&mut buf, "phi: rad; populations: dimensionless", &header, rows)?;
    let mut out = Outputs::new();
    out.emit(a.out.as_deref(), &buf)?;
    out.commit()
}

fn parse_digits(s: &str, d: usize) -> Result<Vec<usize>> {
    s.chars()
        .map(|c| {
            c.to_digit(36)
                .map(|v| v as usize)
                .filter(|v| *v < d)
                .ok_or_else(|| usage(format!("{c:?} is not a base-{d} digit")))
        })
        .collect()
}

pub fn kitaev(a: &KitaevArgs) -> Result<()> {
    let phi = match (&a.expansion, a.phase) {
        (Some(e), _) => digits_to_phase(a.d, &parse_digits(e, a.d)?),
        (None, Some(p)) => p,
        (None, None) => return Err(usage("give --phase or --expansion")),
    };
    let digits = kitaev_estimate(a.d, a.digits, &ExactPhase(phi))?;
    let estimate = digits_to_phase(a.d, &digits);
    let error = (phi - estimate + PI).rem_euclid(2.0 * PI) - PI;
    let v = json!({
        "units": "phases: rad",
        "version": FORMAT_VERSION,
        "d": a.d,
        "digits": a.digits,
        "phase": phi,
        "estimate_digits": digits,
        "estimate": estimate,
        "error": error,
        "fwhm": kitaev_fwhm(a.d, a.digits)?,
    });
    let mut out = Outputs::new();
    if let Some(path) = &a.density {
        let rows = (0..=1000)
            .map(|i| {
                let x = -PI + 2.0 * PI * i as f64 / 1000.0;
                Ok(vec![x, kitaev_density(a.d, a.digits, x)?])
            })
            .collect::<Result<Vec<_>>>()?;
        let mut buf = Vec::new();
        write_csv(&mut buf, "dphi: rad; density: 1/rad", &["dphi", "density"], rows)?;
        out.emit(Some(path), &buf)?;
    }
    out.emit(a.out.as_deref(), &json_bytes(&v)?)?;
    out.commit()?;
    let shown: String = digits.iter().map(|k| std::char::from_digit(*k as u32, 36).unwrap_or('?')).collect();
    note(a.out.is_none(), &format!("digits {shown}, estimate {estimate:.6} rad, error {error:.3e} rad"));
    Ok(())
}

pub fn parity(a: &ParityArgs) -> Result<()> {
    let g: DihedralElement = a.perm.parse()?;
    let r = parity_check(a.d, a.m, &g)?;
    let v = json!({
        "units": "dimensionless",
        "version": FORMAT_VERSION,
        "d": a.d,
        "m": a.m,
        "permutation": g.one_line(),
        "reflected": g.reflected,
        "outcome": r.outcome,
        "probability": r.probability,
        "parity": r.parity,
    });
    let mut out = Outputs::new();
    out.emit(a.out.as_deref(), &json_bytes(&v)?)?;
    out.commit()?;
    note(a.out.is_none(), &format!("outcome {} with probability {:.6}", r.outcome, r.probability));
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CalibrateConfig {
    optimizer: OptimizerConfig,
    bounds: Bounds,
    anharmonicity_mhz: f64,
    duration: f64,
    dt: f64,
    initial: Option<CalibParams>,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            bounds: Bounds::calibration_default(),
            anharmonicity_mhz: -200.0,
            duration: 35.0,
            dt: 0.05,
            initial: None,
        }
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

pub fn calibrate(a: &CalibrateArgs, seed: Option<u64>) -> Result<()> {
    let mut cfg: CalibrateConfig = match &a.config {
        Some(p) => read_config(p)?,
        None => CalibrateConfig::default(),
    };
    if let Some(s) = seed {
        cfg.optimizer.seed = s;
    }
    let model = TransmonModel::with_anharmonicity(2.0 * PI * cfg.anharmonicity_mhz / 1e3)?;
    let target = CalibrationTarget::new(model, cfg.duration, cfg.dt)?;
    let objective = TransmonObjective::new(target, &cfg.optimizer);
    let initial = cfg.initial.map(|p| p.to_vec());
    let r = two_phase_optimize(&cfg.optimizer, &cfg.bounds, &objective, initial.as_deref())?;
    let best = CalibParams::from_slice(&r.best)?;
    let v = json!({
        "units": "Delta: rad/ns; phi: rad; other parameters and Z: dimensionless",
        "version": FORMAT_VERSION,
        "seed": cfg.optimizer.seed,
        "best": best,
        "best_z": r.best_z,
        "phase1_best_z": r.phase1_best_z,
        "phase1_converged": r.phase1_converged,
        "phase2_variation": r.phase2_variation,
        "no_improvement": r.no_improvement,
        "history_rows": r.history.len(),
    });
    let mut out = Outputs::new();
    if let Some(h) = &a.history {
        out.stage(h, |f| write_history_csv(f, &r.history))?;
    }
    out.emit(a.out.as_deref(), &json_bytes(&v)?)?;
    out.commit()?;
    let mut msg = format!("best Z = {:.6}, phase-II variation = {:.2}%", r.best_z, r.phase2_variation * 100.0);
    if r.no_improvement {
        msg.push_str("; no improvement over the initial population");
    }
    note(a.out.is_none(), &msg);
    Ok(())
}

fn read_table(path: &Path, columns: usize) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_path(path)?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        if rec.len() != columns {
            return Err(usage(format!("{}: row {} has {} columns, expected {columns}", path.display(), i + 1, rec.len())));
        }
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| usage(format!("{}: bad number {s:?}", path.display()))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn fit(cmd: &FitCommand) -> Result<()> {
    let (v, path, summary) = match cmd {
        FitCommand::T1 { input, out } => {
            let rows = read_table(input, 7)?;
            let traces = T1Traces {
                times: rows.iter().map(|r| r[0]).collect(),
                from1: rows.iter().map(|r| [r[1], r[2], r[3]]).collect(),
                from2: rows.iter().map(|r| [r[4], r[5], r[6]]).collect(),
            };
            let t1 = fit_t1(&traces)?;
            let s = format!("T1 = {:.3} / {:.3} / {:.3} us", t1[0], t1[1], t1[2]);
            (json!({ "units": "us", "version": FORMAT_VERSION, "t1": t1 }), out, s)
        }
        FitCommand::T2 { input, t1, out } => {
            let rows = read_table(input, 2)?;
            let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let values: Vec<f64> = rows.iter().map(|r| r[1]).collect();
            let f = fit_t2(&times, &values, *t1)?;
            let s = format!("T2 = {:.4} us, stretch = {:.4}", f.t2, f.stretch);
            (json!({ "units": "times: us; detuning: rad/us", "version": FORMAT_VERSION, "fit": f }), out, s)
        }
        FitCommand::Readout { calib, voltages, out } => {
            let c: ReadoutCalib = read_config(calib)?;
            let v: [f64; 3] = voltages.as_slice().try_into().map_err(|_| usage("give exactly three voltages"))?;
            let r = populations_from_voltages(v, &c)?;
            let s = format!("populations {:.6} {:.6} {:.6}", r.populations[0], r.populations[1], r.populations[2]);
            (json!({ "units": "dimensionless", "version": FORMAT_VERSION, "result": r }), out, s)
        }
    };
    let mut outputs = Outputs::new();
    outputs.emit(path.as_deref(), &json_bytes(&v)?)?;
    outputs.commit()?;
    note(path.is_none(), &summary);
    Ok(())
}
