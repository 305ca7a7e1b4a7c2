use qutrit::clifford::{enumerate_clifford, CliffordTable, Convention, GateKind};
use qutrit::math::average_gate_fidelity;
use qutrit::native::NativeLibrary;
use qutrit::sim::{ErrorKnobs, SimConfig};

#[test]
fn native_gates_match_ideal() {
    let lib = NativeLibrary::design(35.0, 0.05).unwrap();
    let set = lib.simulate(ErrorKnobs::default(), &SimConfig::default()).unwrap();
    for k in GateKind::PHYSICAL {
        let u = qutrit::UnitaryMatrix::new(set.matrix(k).clone()).unwrap();
        let f = average_gate_fidelity(&u, &k.ideal()).unwrap();
        assert!(f >= 0.9999, "{k:?}: {f}");
    }
}

#[test]
fn every_clifford_word_holds_at_pulse_level() {
    let set = NativeLibrary::design(35.0, 0.05)
        .unwrap()
        .simulate(ErrorKnobs::default(), &SimConfig::default())
        .unwrap();
    for table in [enumerate_clifford().unwrap(), CliffordTable::enumerate(Convention::FewestPulses).unwrap()] {
        for e in table.elements() {
            let u = set.circuit_unitary(&e.ops()).unwrap();
            let f = average_gate_fidelity(&u, &e.canonical).unwrap();
            assert!(f >= 0.999, "{:?}: {f}", e.word);
        }
    }
}
