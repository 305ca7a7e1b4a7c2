use qutrit::clifford::{enumerate_clifford, GateKind};
use qutrit::device::DeviceParams;
use qutrit::native::{GateSet, NativeLibrary};
use qutrit::rb::{
    clifford_error, depolarizing_from_error, fit_decay, fit_decay_fixed_asymptote, incoherent_error_estimate,
    irb_error,
    rb_sequence, run_rb, NoiseModel, RbConfig, SurvivalPoint,
};
use qutrit::sim::{ErrorKnobs, SimConfig};

#[test]
fn ideal_sequences_return_to_ground() {
    let t = enumerate_clifford().unwrap();
    let gates = GateSet::ideal();
    for seed in 0..100 {
        let s = rb_sequence(&t, 50, seed, None);
        assert_eq!(s.cliffords.len(), 50);
        let ops: Vec<_> = s.elements().iter().flat_map(|&c| t.element(c).ops()).collect();
        let u = gates.circuit(&ops);
        assert!((u[(0, 0)].norm_sqr() - 1.0).abs() < 1e-10);
    }
    let h = t.lookup(&GateKind::H.ideal()).unwrap();
    let s = rb_sequence(&t, 20, 3, Some(h));
    let ops: Vec<_> = s.elements().iter().flat_map(|&c| t.element(c).ops()).collect();
    assert!((gates.circuit(&ops)[(0, 0)].norm_sqr() - 1.0).abs() < 1e-10);
    let one = rb_sequence(&t, 1, 9, None);
    assert_eq!(t.then(one.cliffords[0], one.inverse), t.identity());
}

#[test]
fn sequences_are_seeded() {
    let t = enumerate_clifford().unwrap();
    assert_eq!(rb_sequence(&t, 30, 7, None), rb_sequence(&t, 30, 7, None));
    assert_ne!(rb_sequence(&t, 30, 7, None), rb_sequence(&t, 30, 8, None));
    let cfg = RbConfig { noise: NoiseModel::depolarizing(0.98), seed: 11, ..RbConfig::default() };
    assert_eq!(run_rb(&t, &cfg).unwrap(), run_rb(&t, &cfg).unwrap());
}

#[test]
fn noiseless_decay_fit_is_exact() {
    let pts: Vec<SurvivalPoint> = [1usize, 5, 10, 20, 35, 50, 75, 100]
        .iter()
        .map(|&m| SurvivalPoint { m, mean: 0.6 * 0.98f64.powi(m as i32) + 1.0 / 3.0, std: 0.0 })
        .collect();
    let f = fit_decay(&pts).unwrap();
    assert!((f.a - 0.6).abs() < 1e-9 && (f.p - 0.98).abs() < 1e-9 && (f.b - 1.0 / 3.0).abs() < 1e-9, "{f:?}");
}

#[test]
fn degenerate_data_is_rejected() {
    let pts: Vec<SurvivalPoint> = [1usize, 5, 10].iter().map(|&m| SurvivalPoint { m, mean: 1.0, std: 0.0 }).collect();
    assert!(fit_decay(&pts).is_err());
    assert!(fit_decay(&pts[..2]).is_err());
}

#[test]
fn perfect_gates_give_flat_survival() {
    let t = enumerate_clifford().unwrap();
    let pts = run_rb(&t, &RbConfig::default()).unwrap();
    assert!(pts.iter().all(|p| p.mean == 1.0 && p.std == 0.0));
}

#[test]
fn depolarizing_rb_recovers_clifford_error() {
    let t = enumerate_clifford().unwrap();
    let cfg = RbConfig { noise: NoiseModel::depolarizing(0.9847), seed: 2024, ..RbConfig::default() };
    let f = fit_decay(&run_rb(&t, &cfg).unwrap()).unwrap();
    assert!((f.p - 0.9847).abs() < 1e-3, "{f:?}");
    assert!((f.b - 1.0 / 3.0).abs() < 0.01, "{f:?}");
    let r = clifford_error(f.p).unwrap();
    assert!((r - 0.0102).abs() < 5e-4);
}

#[test]
fn sampled_fit_within_three_sigma() {
    let t = enumerate_clifford().unwrap();
    let mut inside = 0;
    for seed in 0..20 {
        let cfg = RbConfig { noise: NoiseModel::depolarizing(0.97), seed, ..RbConfig::default() };
        let f = fit_decay(&run_rb(&t, &cfg).unwrap()).unwrap();
        if (f.p - 0.97).abs() <= 3.0 * f.p_std.unwrap() {
            inside += 1;
        }
    }
    assert!(inside >= 18, "{inside}/20");
}

#[test]
fn irb_isolates_gate_error() {
    let t = enumerate_clifford().unwrap();
    let p_c = 0.9847;
    let base = RbConfig { noise: NoiseModel::depolarizing(p_c), seed: 5, shots: 0, ..RbConfig::default() };
    let reference = fit_decay(&run_rb(&t, &base).unwrap()).unwrap();
    for (r_gate, kind) in [(0.0045, GateKind::H), (0.0046, GateKind::X)] {
        let p_g = depolarizing_from_error(r_gate);
        let cfg = RbConfig {
            noise: NoiseModel::Depolarizing { p_clifford: p_c, p_interleaved: p_g },
            interleaved: Some(kind),
            ..base.clone()
        };
        let inter = fit_decay(&run_rb(&t, &cfg).unwrap()).unwrap();
        let r = irb_error(inter.p, reference.p).unwrap().r;
        assert!((r - r_gate).abs() < 1e-4, "{kind:?}: {r}");
    }
    let ideal = RbConfig { interleaved: Some(GateKind::H), seed: 6, shots: 200, ..base.clone() };
    let reference = fit_decay(&run_rb(&t, &RbConfig { seed: 6, shots: 200, ..base.clone() }).unwrap()).unwrap();
    let inter = fit_decay(&run_rb(&t, &ideal).unwrap()).unwrap();
    assert!(irb_error(inter.p, reference.p).unwrap().r.abs() < 1e-3);
}

#[test]
fn incoherent_error_from_coherence_times() {
    let d = DeviceParams::reference();
    let e40 = incoherent_error_estimate(&d, 40.0).unwrap();
    let e92 = incoherent_error_estimate(&d, 91.6).unwrap();
    assert!((e40 / 4.7e-3 - 1.0).abs() < 0.02, "{e40}");
    assert!((e92 / 1.08e-2 - 1.0).abs() < 0.02, "{e92}");
    let inf = DeviceParams { t1: [f64::INFINITY; 3], t2: [f64::INFINITY; 3], ..d };
    assert_eq!(incoherent_error_estimate(&inf, 40.0).unwrap(), 0.0);
    let bad = DeviceParams { t1: [0.0, 1.0, 1.0], ..d };
    assert!(incoherent_error_estimate(&bad, 40.0).is_err());
}

#[test]
fn pulse_level_rb_has_small_error() {
    let t = enumerate_clifford().unwrap();
    let gates = NativeLibrary::design(35.0, 0.05).unwrap().simulate(ErrorKnobs::default(), &SimConfig::default()).unwrap();
    let cfg = RbConfig { noise: NoiseModel::Gates(gates), shots: 0, n_sequences: 10, ..RbConfig::default() };
    let pts = run_rb(&t, &cfg).unwrap();
    assert!(pts.iter().all(|p| p.mean > 0.97), "{pts:?}");
}

#[test]
fn depolarizing_survival_passes_chi_square() {
    let t = enumerate_clifford().unwrap();
    let p = 0.97;
    let chi2_crit = 15.507;
    let mut passed = 0;
    for seed in 0..40 {
        let cfg = RbConfig { noise: NoiseModel::depolarizing(p), seed, ..RbConfig::default() };
        let n = (cfg.n_sequences * cfg.shots as usize) as f64;
        let chi2: f64 = run_rb(&t, &cfg)
            .unwrap()
            .iter()
            .map(|pt| {
                let expected = 1.0 / 3.0 + (2.0 / 3.0) * p.powi(pt.m as i32 + 1);
                (pt.mean - expected).powi(2) / (expected * (1.0 - expected) / n)
            })
            .sum();
        if chi2 < chi2_crit {
            passed += 1;
        }
    }
    assert!(passed >= 34, "{passed}/40");
}

#[test]
fn ideal_interleaved_gate_leaves_decay_unchanged() {
    let t = enumerate_clifford().unwrap();
    let noise = NoiseModel::Depolarizing { p_clifford: 0.98, p_interleaved: 1.0 };
    let reference = RbConfig { noise: noise.clone(), seed: 5, ..RbConfig::default() };
    let interleaved = RbConfig { interleaved: Some(GateKind::X), seed: 6, ..reference.clone() };
    let a = fit_decay(&run_rb(&t, &reference).unwrap()).unwrap();
    let b = fit_decay(&run_rb(&t, &interleaved).unwrap()).unwrap();
    let sigma = a.p_std.unwrap().hypot(b.p_std.unwrap());
    assert!((a.p - b.p).abs() < 3.0 * sigma, "{} vs {} ({sigma})", a.p, b.p);
}

#[test]
fn fixed_asymptote_fit() {
    let pts: Vec<SurvivalPoint> = [1usize, 2, 5, 10, 20, 35, 50]
        .iter()
        .map(|&m| SurvivalPoint { m, mean: 0.65 * 0.99f64.powi(m as i32) + 1.0 / 3.0, std: 0.0 })
        .collect();
    let f = fit_decay_fixed_asymptote(&pts, 1.0 / 3.0).unwrap();
    assert!((f.p - 0.99).abs() < 1e-9 && (f.a - 0.65).abs() < 1e-9 && f.residual < 1e-10, "{f:?}");
    let rising: Vec<SurvivalPoint> =
        pts.iter().map(|p| SurvivalPoint { mean: 1.0 - 0.1 * (-(p.m as f64) / 10.0).exp(), ..*p }).collect();
    let g = fit_decay_fixed_asymptote(&rising, 1.0 / 3.0).unwrap();
    assert!(g.p <= 1.0);
}
