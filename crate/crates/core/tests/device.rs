use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use qutrit::device::{
    fit_t1, fit_t2, populations_from_voltages, ramsey_model, rate_equation_evolve, DeviceParams,
    RamseyParams, ReadoutCalib, T1Traces,
};

fn grid(n: usize, end: f64) -> Vec<f64> {
    (0..n).map(|i| end * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn rate_equation_reference_points() {
    let d = DeviceParams::reference();
    let p = rate_equation_evolve([0.0, 0.0, 1.0], &d, 28.4).unwrap();
    assert!((p[2] - 0.349).abs() < 1e-3, "{p:?}");
    let want = (-(1.0 / 28.4 + 1.0 / 523.1) * 28.4f64).exp();
    assert!((p[2] - want).abs() < 1e-14);
    let late = rate_equation_evolve([0.0, 0.0, 1.0], &d, 1e5).unwrap();
    assert!((late[0] - 1.0).abs() < 1e-12);
    for t in grid(50, 500.0) {
        let p = rate_equation_evolve([0.2, 0.3, 0.5], &d, t).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|x| *x >= -1e-15));
    }
    assert!(rate_equation_evolve([0.5, 0.6, 0.0], &d, 1.0).is_err());
}

#[test]
fn rate_equation_matches_numerical_integration() {
    let d = DeviceParams::reference();
    let [k01, k12, k02] = d.rates();
    let mut p = [0.0, 0.0, 1.0];
    let h = 1e-3;
    let f = |p: [f64; 3]| [k01 * p[1] + k02 * p[2], k12 * p[2] - k01 * p[1], -(k12 + k02) * p[2]];
    for _ in 0..50_000 {
        let a = f(p);
        let b = f([0, 1, 2].map(|i| p[i] + 0.5 * h * a[i]));
        let c = f([0, 1, 2].map(|i| p[i] + 0.5 * h * b[i]));
        let e = f([0, 1, 2].map(|i| p[i] + h * c[i]));
        p = [0, 1, 2].map(|i| p[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + e[i]));
    }
    let closed = rate_equation_evolve([0.0, 0.0, 1.0], &d, 50.0).unwrap();
    for i in 0..3 {
        assert!((p[i] - closed[i]).abs() < 1e-10);
    }
}

#[test]
fn t1_round_trip_noiseless() {
    let d = DeviceParams::reference();
    let tr = T1Traces::synthesize(&d, &grid(60, 300.0)).unwrap();
    let t1 = fit_t1(&tr).unwrap();
    for i in 0..3 {
        assert!((t1[i] / d.t1[i] - 1.0).abs() < 0.01, "{t1:?}");
    }
}

#[test]
fn t1_round_trip_with_noise() {
    let d = DeviceParams::reference();
    let mut tr = T1Traces::synthesize(&d, &grid(200, 300.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let noise = Normal::new(0.0, 0.01).unwrap();
    for row in tr.from1.iter_mut().chain(tr.from2.iter_mut()) {
        for p in row.iter_mut() {
            *p += noise.sample(&mut rng);
        }
    }
    let t1 = fit_t1(&tr).unwrap();
    for i in 0..3 {
        assert!((t1[i] / d.t1[i] - 1.0).abs() < 0.05, "{t1:?}");
    }
}

#[test]
fn t1_constant_trace_fails() {
    let times = grid(20, 100.0);
    let tr = T1Traces { from1: vec![[0.0, 1.0, 0.0]; 20], from2: vec![[0.0, 0.0, 1.0]; 20], times };
    assert!(fit_t1(&tr).is_err());
}

fn ramsey_trace(t2: f64, n: f64, detuning: f64) -> (Vec<f64>, Vec<f64>) {
    let p = RamseyParams {
        amplitude: 0.45,
        detuning,
        phase: 0.3,
        t2,
        stretch: n,
        offset: 0.4,
        relaxation: 0.1,
        t1: 60.7,
    };
    let times = grid(300, 15.0);
    let ys = times.iter().map(|&t| ramsey_model(t, &p)).collect();
    (times, ys)
}

#[test]
fn t2_round_trip() {
    for (t2, n) in [(4.6, 1.0), (4.4, 1.3), (4.2, 0.8)] {
        let (t, y) = ramsey_trace(t2, n, 2.0 * PI * 1.5);
        let fit = fit_t2(&t, &y, 60.7).unwrap();
        assert!((fit.t2 / t2 - 1.0).abs() < 0.02, "{fit:?}");
        assert!((fit.stretch - n).abs() < 0.05, "{fit:?}");
    }
}

#[test]
fn t2_without_oscillation_fails() {
    let (t, y) = ramsey_trace(4.6, 1.0, 0.0);
    assert!(fit_t2(&t, &y, 60.7).is_err());
}

fn calib() -> ReadoutCalib {
    ReadoutCalib { v: [[1.0, 0.2, -0.3], [0.1, 0.9, 0.4], [-0.2, 0.3, 1.1]] }
}

#[test]
fn readout_inversion() {
    let c = calib();
    for n in 0..3 {
        let r = populations_from_voltages(c.v[n], &c).unwrap();
        for k in 0..3 {
            assert!((r.populations[k] - if k == n { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        assert!(!r.ill_conditioned && !r.projected);
    }
    let mid = [0, 1, 2].map(|j| 0.5 * (c.v[0][j] + c.v[2][j]));
    let r = populations_from_voltages(mid, &c).unwrap();
    assert!((r.populations[0] - 0.5).abs() < 1e-12 && r.populations[1].abs() < 1e-12);
    let p = [0.2, 0.5, 0.3];
    let r = populations_from_voltages(c.forward(p), &c).unwrap();
    for k in 0..3 {
        assert!((r.populations[k] - p[k]).abs() < 1e-10);
    }
}

#[test]
fn readout_projects_onto_simplex() {
    let c = calib();
    let v = c.forward([1.2, -0.1, -0.1]);
    let r = populations_from_voltages(v, &c).unwrap();
    assert!(r.projected);
    assert!((r.populations.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(r.populations.iter().all(|p| *p >= 0.0));
}

#[test]
fn readout_flags_conditioning() {
    let eps = 1e-8;
    let c = ReadoutCalib { v: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, eps]] };
    let r = populations_from_voltages([1.0, 0.0, 0.0], &c).unwrap();
    assert!(r.ill_conditioned);
    let s = ReadoutCalib { v: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]] };
    assert!(populations_from_voltages([1.0, 0.0, 0.0], &s).is_err());
}
