use std::f64::consts::PI;

use qutrit::calibration::*;
use qutrit::clifford::GateKind;
use qutrit::math::C64;
use qutrit::native::{GateSet, NativeLibrary};
use qutrit::sim::transmon::TransmonModel;
use qutrit::sim::{evolve, ErrorKnobs, SimConfig};

const T: f64 = 35.0;
const DT: f64 = 0.05;

fn mhz(f: f64) -> f64 {
    2.0 * PI * f / 1000.0
}

fn model() -> TransmonModel {
    TransmonModel::with_anharmonicity(mhz(-200.0)).unwrap()
}

fn target() -> CalibrationTarget {
    CalibrationTarget::new(model(), T, DT).unwrap()
}

fn library() -> NativeLibrary {
    NativeLibrary::design(T, DT).unwrap()
}

#[test]
fn identity_knobs_render_bitwise() {
    let lib = library();
    let p = CalibParams::default();
    let x = &lib.gate(GateKind::X).schedule;
    let h = &lib.gate(GateKind::H).schedule;
    assert_eq!(&render_x_pulses(&p, x, model().anharmonicity).unwrap(), x);
    assert_eq!(&render_h_pulses(&p, h).unwrap(), h);
}

#[test]
fn drag_quadrature_is_scaled_derivative() {
    let lib = library();
    let base = &lib.gate(GateKind::X).schedule;
    let alpha = model().anharmonicity;
    let p = CalibParams { lambda_x1: 0.5, ..CalibParams::default() };
    let out = render_x_pulses(&p, base, alpha).unwrap();
    let (b, o) = (base.tone1(), out.tone1());
    let mut worst: f64 = 0.0;
    for k in 1..b.len() - 1 {
        let d = (b[k + 1] - b[k - 1]) / (2.0 * base.dt);
        let expected = b[k] + C64::new(0.0, 0.5 / alpha) * d;
        worst = worst.max((o[k] - expected).norm());
    }
    assert!(worst < 1e-9, "{worst}");
    assert_eq!(out.tone2(), base.tone2());
    assert!(render_x_pulses(&p, base, 0.0).is_err());
}

#[test]
fn detuning_ramps_tone_phase() {
    let lib = library();
    let base = &lib.gate(GateKind::X).schedule;
    let delta = mhz(2.0);
    let p = CalibParams { delta_x1: delta, ..CalibParams::default() };
    let out = render_x_pulses(&p, base, model().anharmonicity).unwrap();
    let (b, o, t) = (base.tone1(), out.tone1(), base.times());
    for k in 0..b.len() {
        let expected = b[k] * C64::from_polar(1.0, delta * t[k]);
        assert!((o[k] - expected).norm() < 1e-12);
    }
    let n = b.len() - 1;
    assert!((t[n] - t[0] - T).abs() < 1e-9);
}

#[test]
fn chirp_area_scales_with_b() {
    let lib = library();
    let base = &lib.gate(GateKind::H).schedule;
    let p = CalibParams { b_h1: 1.1, b_h2: 1.1, ..CalibParams::default() };
    let out = render_h_pulses(&p, base).unwrap();
    let area = out.integral(&out.detuning);
    assert!((area - 1.1 * 1.7050).abs() < 1e-4, "{area}");
    assert_eq!(out.tone1(), base.tone1());
}

#[test]
fn zero_h_amplitude_gives_identity() {
    let lib = library();
    let base = &lib.gate(GateKind::H).schedule;
    let p = CalibParams { a_h1: 0.0, a_h2: 0.0, ..CalibParams::default() };
    let out = render_h_pulses(&p, base).unwrap();
    assert!(out.tone1().iter().chain(out.tone2().iter()).all(|c| c.norm() == 0.0));
    let u = evolve(&out, ErrorKnobs::default(), &SimConfig::with_dt(DT)).unwrap();
    let id = nalgebra::DMatrix::<C64>::identity(3, 3);
    assert!((u.matrix() - id).norm() < 1e-12);
}

#[test]
fn ideal_gates_reach_unit_decay() {
    let t = target();
    let sets = sequence_sets(&t.table, 3, CALIBRATION_LENGTH, 4);
    let z = objective_for_gates(&GateSet::ideal(), &t.table, &sets, &t.prefixes).unwrap();
    assert!((z + 1.0).abs() < 1e-9, "{z}");
}

#[test]
fn detuned_drive_raises_objective() {
    let t = target();
    let sets = sequence_sets(&t.table, 5, CALIBRATION_LENGTH, 1);
    let z0 = rb_objective(&CalibParams::default(), &sets, &t).unwrap();
    let det = CalibParams { delta_x1: mhz(2.0), ..CalibParams::default() };
    let z1 = rb_objective(&det, &sets, &t).unwrap();
    assert!(z1 > z0, "{z1} vs {z0}");
    assert_eq!(rb_objective(&det, &sets, &t).unwrap(), z1);
}

#[test]
fn objective_descends_toward_design_point() {
    let t = target();
    let sets = sequence_sets(&t.table, 5, CALIBRATION_LENGTH, 1);
    let start = CalibParams { delta_x1: mhz(2.0), a_x1: 1.05, ..CalibParams::default() }.to_vec();
    let end = CalibParams::default().to_vec();
    let zs: Vec<f64> = (0..5)
        .map(|k| {
            let s = k as f64 / 4.0;
            let x: Vec<f64> = start.iter().zip(&end).map(|(a, b)| a + s * (b - a)).collect();
            rb_objective(&CalibParams::from_slice(&x).unwrap(), &sets, &t).unwrap()
        })
        .collect();
    let ripples = zs.windows(2).filter(|w| w[1] >= w[0]).count();
    assert!(ripples <= 1, "{zs:?}");
    assert!(zs[4] < zs[0]);
}

struct Planted {
    optimum: Vec<f64>,
    width: Vec<f64>,
}

impl Objective for Planted {
    fn dim(&self) -> usize {
        self.optimum.len()
    }

    fn evaluate(&self, x: &[f64], _stage: Stage) -> qutrit::Result<f64> {
        let s: f64 = x.iter().zip(&self.optimum).zip(&self.width).map(|((a, b), w)| ((a - b) / w).powi(2)).sum();
        Ok(-1.0 + s)
    }
}

fn planted_problem() -> (Bounds, Planted) {
    let centre = CalibParams::default().to_vec();
    let half: Vec<f64> = (0..16).map(|i| 0.02 + 0.003 * i as f64).collect();
    let lower: Vec<f64> = centre.iter().zip(&half).map(|(c, h)| c - h).collect();
    let upper: Vec<f64> = centre.iter().zip(&half).map(|(c, h)| c + h).collect();
    let optimum: Vec<f64> =
        (0..16).map(|i| lower[i] + (0.2 + 0.6 * ((i * 7 % 16) as f64 / 15.0)) * (upper[i] - lower[i])).collect();
    let width = half.iter().map(|h| 2.0 * h).collect();
    (Bounds::new(lower, upper).unwrap(), Planted { optimum, width })
}

fn planted_config() -> OptimizerConfig {
    OptimizerConfig {
        population: 40,
        phase1: StageConfig { mutation: 0.8, crossover: 0.9, sequences: 1, max_generations: 400 },
        phase2: StageConfig { mutation: 0.4, crossover: 0.5, sequences: 1, max_generations: 50 },
        convergence_threshold: 0.88,
        convergence_tolerance: 1e-5,
        seed: 11,
    }
}

#[test]
fn planted_optimum_is_recovered() {
    let (bounds, obj) = planted_problem();
    let r = two_phase_optimize(&planted_config(), &bounds, &obj, None).unwrap();
    for i in 0..16 {
        let err = (r.best[i] - obj.optimum[i]).abs();
        assert!(err < bounds.width(i) / 100.0, "parameter {i}: {err}");
    }
    assert!(!r.no_improvement);
}

#[test]
fn optimizer_is_deterministic_and_bounded() {
    let (bounds, obj) = planted_problem();
    let mut cfg = planted_config();
    cfg.phase1.max_generations = 30;
    cfg.phase2.max_generations = 10;
    cfg.convergence_threshold = 1.0;
    cfg.convergence_tolerance = 0.0;
    let a = two_phase_optimize(&cfg, &bounds, &obj, None).unwrap();
    let b = two_phase_optimize(&cfg, &bounds, &obj, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.history.len(), 31 + 11);
    assert_eq!(a.population.len(), cfg.population);
    assert!(a.population.iter().all(|x| bounds.contains(x)));
    assert!(bounds.contains(&a.best));
    let mut c = cfg;
    c.seed += 1;
    assert_ne!(two_phase_optimize(&c, &bounds, &obj, None).unwrap().best, a.best);
}

#[test]
fn invalid_settings_are_rejected() {
    let (bounds, obj) = planted_problem();
    let mut cfg = planted_config();
    cfg.phase2.mutation = 0.9;
    assert!(two_phase_optimize(&cfg, &bounds, &obj, None).is_err());
    let outside = vec![10.0; 16];
    assert!(two_phase_optimize(&planted_config(), &bounds, &obj, Some(&outside)).is_err());
    assert!(Bounds::new(vec![1.0], vec![0.0]).is_err());
}

fn reduced_config() -> OptimizerConfig {
    OptimizerConfig {
        population: 20,
        phase1: StageConfig { mutation: 0.8, crossover: 0.9, sequences: 3, max_generations: 60 },
        phase2: StageConfig { mutation: 0.4, crossover: 0.5, sequences: 3, max_generations: 10 },
        seed: 5,
        ..OptimizerConfig::default()
    }
}

#[test]
fn detuned_start_improves_on_transmon() {
    let cfg = reduced_config();
    let obj = TransmonObjective::new(target(), &cfg);
    let detuned = CalibParams { delta_x1: mhz(2.0), ..CalibParams::default() }.to_vec();
    let z_train = obj.evaluate(&detuned, Stage::Training).unwrap();
    let z_valid = obj.evaluate(&detuned, Stage::Validation).unwrap();
    let r = two_phase_optimize(&cfg, &Bounds::calibration_default(), &obj, Some(&detuned)).unwrap();
    assert!(r.phase1_best_z < z_train);
    assert!(r.best_z < z_valid);
    assert!(r.phase2_variation < 0.05, "{}", r.phase2_variation);
}

#[test]
fn history_csv_has_header() {
    let (bounds, obj) = planted_problem();
    let mut cfg = planted_config();
    cfg.phase1.max_generations = 2;
    cfg.phase2.max_generations = 1;
    let r = two_phase_optimize(&cfg, &bounds, &obj, None).unwrap();
    let mut buf = Vec::new();
    write_history_csv(&mut buf, &r.history).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().any(|l| l.starts_with("iteration,phase,generation,best_Z,mean_Z,population_spread")));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), r.history.len() + 1);
}
