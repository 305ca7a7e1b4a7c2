use std::f64::consts::PI;

use qutrit::gates;
use qutrit::hgate::{self, h_phase_sandwich, solve_h_conditions};
use qutrit::math::{average_gate_fidelity, UnitaryMatrix};
use qutrit::sim::{
    evolve, population_trajectory, robustness_scan, ErrorKnobs, Integrator, RobustGate, SimConfig,
};
use qutrit::xgate::{self, residual_phase_correction, XKind};

fn h_schedule() -> qutrit::PulseSchedule {
    hgate::chirped_h_schedule(35.0, 0.05, 5.0).unwrap()
}

fn x_schedule(kind: XKind, dt: f64) -> qutrit::PulseSchedule {
    let d = xgate::design(kind, 35.0).unwrap();
    xgate::rabi_from_invariant(&d, dt).unwrap()
}

#[test]
fn chirped_h_gate_reaches_target() {
    let sol = solve_h_conditions().unwrap();
    let u = evolve(&h_schedule(), ErrorKnobs::default(), &SimConfig::default()).unwrap();
    let f = average_gate_fidelity(&h_phase_sandwich(&u, &sol), &gates::h()).unwrap();
    assert!(f >= 0.9999, "fidelity {f}");
}

#[test]
fn chirped_h_inverse_reaches_target() {
    let sol = solve_h_conditions().unwrap().inverse();
    let s = hgate::chirped_schedule(&sol, 35.0, 0.05, Default::default()).unwrap();
    let u = evolve(&s, ErrorKnobs::default(), &SimConfig::default()).unwrap();
    let f = average_gate_fidelity(&h_phase_sandwich(&u, &sol), &gates::h_inv()).unwrap();
    assert!(f >= 0.9999, "fidelity {f}");
}

#[test]
fn x_type_schedules_reach_targets() {
    for kind in [XKind::X, XKind::XInverse, XKind::X02] {
        let u = evolve(&x_schedule(kind, 0.02), ErrorKnobs::default(), &SimConfig::default()).unwrap();
        let f = average_gate_fidelity(&(&residual_phase_correction(kind) * &u), &kind.target()).unwrap();
        assert!(f >= 0.9999, "{kind:?}: {f}");
    }
}

#[test]
fn x_times_x_inverse_is_identity() {
    let cfg = SimConfig::default();
    let ux = evolve(&x_schedule(XKind::X, 0.02), ErrorKnobs::default(), &cfg).unwrap();
    let ui = evolve(&x_schedule(XKind::XInverse, 0.02), ErrorKnobs::default(), &cfg).unwrap();
    let gx = &residual_phase_correction(XKind::X) * &ux;
    let gi = &residual_phase_correction(XKind::XInverse) * &ui;
    let f = average_gate_fidelity(&(&gx * &gi), &UnitaryMatrix::identity(3)).unwrap();
    assert!(f >= 1.0 - 1e-6, "{f}");
}

#[test]
fn halving_step_changes_propagator_below_contract() {
    for s in [h_schedule(), x_schedule(XKind::X, 0.02)] {
        let a = evolve(&s, ErrorKnobs::default(), &SimConfig::with_dt(0.02)).unwrap();
        let b = evolve(&s, ErrorKnobs::default(), &SimConfig::with_dt(0.01)).unwrap();
        let d = a.max_abs_diff(&b);
        assert!(d < 1e-8, "step halving changed result by {d:e}");
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let s = x_schedule(XKind::X, 0.1);
    let reference = evolve(&s, ErrorKnobs::default(), &SimConfig::with_dt(0.0125)).unwrap();
    let err = |dt: f64| {
        let cfg = SimConfig { dt, method: Integrator::Rk4, ..SimConfig::default() };
        evolve(&s, ErrorKnobs::default(), &cfg).unwrap().max_abs_diff(&reference)
    };
    let (e1, e2) = (err(0.1), err(0.05));
    let ratio = e1 / e2;
    assert!(ratio > 12.0 && ratio < 20.0, "error ratio {ratio} ({e1:e} -> {e2:e})");
}

#[test]
fn propagators_are_unitary() {
    let u = evolve(&x_schedule(XKind::X02, 0.02), ErrorKnobs { eta1: 0.1, eta2: -0.05, zeta1: 0.1, zeta2: 0.03 }, &SimConfig::default()).unwrap();
    assert!(u.unitarity_error() < 1e-9);
}

#[test]
fn h_trajectories_are_mirror_images() {
    let s = h_schedule();
    let cfg = SimConfig::default();
    let t0 = population_trajectory(&s, 0, &cfg).unwrap();
    let t2 = population_trajectory(&s, 2, &cfg).unwrap();
    for (a, b) in t0.populations.iter().zip(&t2.populations) {
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((a[0] - b[2]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6 && (a[2] - b[0]).abs() < 1e-6);
    }
    for p in t0.last() {
        assert!((p - 1.0 / 3.0).abs() < 1e-3, "{:?}", t0.last());
    }
}

#[test]
fn x_trajectory_ends_in_next_level() {
    let t = population_trajectory(&x_schedule(XKind::X, 0.02), 0, &SimConfig::default()).unwrap();
    let p = t.last();
    assert!(p[0] < 1e-3 && (p[1] - 1.0).abs() < 1e-3 && p[2] < 1e-3, "{p:?}");
    let target = XKind::X.target();
    for (col, want) in [0usize, 1, 2].iter().zip([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]) {
        let tr = population_trajectory(&x_schedule(XKind::X, 0.02), *col, &SimConfig::default()).unwrap();
        let got = tr.last();
        for r in 0..3 {
            assert!((got[r] - want[r]).abs() < 1e-4);
            assert!((target.get(r, *col).norm_sqr() - want[r]).abs() < 1e-15);
        }
    }
}

#[test]
fn pt_symmetry_on_sampled_hamiltonians() {
    let p = gates::x02();
    for kind in [XKind::X, XKind::XInverse, XKind::X02] {
        let s = x_schedule(kind, 0.02);
        let n = s.intervals();
        for k in 0..=n {
            let lhs = p.matrix() * s.hamiltonian_at(k) * p.matrix();
            let rhs = s.hamiltonian_at(n - k);
            let d = (lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(d < 1e-9, "{kind:?} sample {k}: {d}");
        }
    }
}

#[test]
fn pt_symmetry_of_propagator() {
    let cfg = SimConfig::default();
    let s = x_schedule(XKind::XInverse, 0.02);
    let u = evolve(&s, ErrorKnobs::default(), &cfg).unwrap();
    let ur = evolve(&s.time_reversed(), ErrorKnobs::default(), &cfg).unwrap();
    let p = gates::x02();
    let lhs = &(&p * &u) * &p;
    assert!(lhs.max_abs_diff(&ur) < 1e-8);
    assert!(u.transpose().max_abs_diff(&ur) < 1e-8);
}

#[test]
fn robustness_grid_properties() {
    let axis = [-0.15, -0.05, 0.0, 0.05, 0.15];
    let scan = robustness_scan(RobustGate::X02, 35.0, &axis, &axis, &SimConfig::default()).unwrap();
    let centre = scan.amplitude.at(2, 2);
    assert!(centre >= 0.9999);
    assert!(scan.amplitude.max() <= centre + 1e-6);
    assert!(scan.detuning.max() <= scan.detuning.at(2, 2) + 1e-6);
    for i in 0..5 {
        for j in 0..5 {
            assert!((scan.amplitude.at(i, j) - scan.amplitude.at(j, i)).abs() < 1e-6);
        }
        if axis[i].abs() <= 0.05 {
            assert!(scan.amplitude.at(i, 2) >= 0.99 && scan.amplitude.at(2, i) >= 0.99);
        }
    }
}

// Frozen values from an independent scipy expm propagation of the same Hamiltonian.
#[test]
fn amplitude_error_fidelities_match_reference() {
    let cases = [
        (RobustGate::X, 0.05, 0.976_153_334),
        (RobustGate::X, 0.15, 0.804_882_954),
        (RobustGate::X02, 0.05, 0.987_744_725),
        (RobustGate::X02, 0.15, 0.895_022_565),
    ];
    for (gate, eta, want) in cases {
        let scan = robustness_scan(gate, 35.0, &[eta], &[0.0], &SimConfig::default()).unwrap();
        let got = scan.amplitude.at(0, 0);
        assert!((got - want).abs() < 1e-6, "{gate:?} eta {eta}: {got} vs {want}");
    }
}

#[test]
fn detuning_error_phase_convention() {
    let s = x_schedule(XKind::X02, 0.02);
    let k = ErrorKnobs::detuning(0.05, 0.0);
    let f = qutrit::sim::x_gate_fidelity(&s, XKind::X02, k, &SimConfig::default()).unwrap();
    assert!(f < 1.0 && f > 0.9, "{f}");
    assert!((2.0 * PI * 0.05 / 35.0) > 0.0);
}

