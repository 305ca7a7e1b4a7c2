use std::f64::consts::PI;

use qutrit::algorithms::{
    digits_to_phase, hadamard_d, kitaev_density, kitaev_estimate, kitaev_fwhm, parity_check,
    phase_precision, qfi, qfi_numeric, ramsey_population, ramsey_state, DihedralElement,
    ExactPhase, Parity,
};
use qutrit::gates;
use qutrit::quad::adaptive_simpson;
use qutrit::UnitaryMatrix;

#[test]
fn dft_properties() {
    let h2 = hadamard_d(2).unwrap();
    let s = 1.0 / 2f64.sqrt();
    assert!((h2.get(1, 1).re + s).abs() < 1e-15 && (h2.get(0, 1).re - s).abs() < 1e-15);
    assert!(hadamard_d(3).unwrap().max_abs_diff(&gates::h()) < 1e-15);
    for d in 2..=8 {
        let h = hadamard_d(d).unwrap();
        assert!(h.pow(4).max_abs_diff(&UnitaryMatrix::identity(d)) < 1e-12);
        let rev: Vec<usize> = (0..d).map(|k| (d - k) % d).collect();
        assert!(h.pow(2).max_abs_diff(&UnitaryMatrix::permutation(&rev).unwrap()) < 1e-12);
    }
    assert!(hadamard_d(1).is_err());
}

#[test]
fn ramsey_formula_matches_circuit() {
    for d in 2..=6 {
        for i in 0..100 {
            let phi = -PI + 2.0 * PI * i as f64 / 100.0 + 0.013;
            let state = ramsey_state(d, phi).unwrap().probabilities();
            let mut total = 0.0;
            for k in 0..d {
                let p = ramsey_population(d, k, phi).unwrap();
                assert!((p - state[k]).abs() < 1e-12, "d {d} k {k} phi {phi}");
                total += p;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn qutrit_ramsey_reference_points() {
    assert_eq!(ramsey_population(3, 0, 0.0).unwrap(), 1.0);
    assert!(ramsey_population(3, 0, 2.0 * PI / 3.0).unwrap() < 1e-15);
    for phi in [0.1, 0.7, 2.0, 3.0] {
        let want = (1.0 + 2.0 * f64::cos(phi)).powi(2) / 9.0;
        assert!((ramsey_population(3, 0, phi).unwrap() - want).abs() < 1e-14);
    }
    let near = ramsey_population(3, 1, 2.0 * PI / 3.0 + 1e-8).unwrap();
    assert!((near - 1.0).abs() < 1e-14);
}

#[test]
fn precision_saturates_fisher_bound() {
    assert!((phase_precision(3, 1e-5).unwrap() - (3.0f64 / 8.0).sqrt()).abs() < 1e-6);
    assert!((phase_precision(2, 1e-5).unwrap() - 1.0).abs() < 1e-6);
    assert!(phase_precision(3, 0.0).unwrap().is_infinite());
    for d in 2..=5 {
        let f = qfi(d).unwrap();
        let scan: Vec<f64> = (1..400).map(|i| phase_precision(d, i as f64 * 1e-3).unwrap()).collect();
        let (imin, min) = scan.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &v)| if v < a.1 { (i, v) } else { a });
        assert!(imin == 0 || scan[0] <= min + 1e-9, "d {d}");
        assert!((min * f.sqrt() - 1.0).abs() < 1e-3, "d {d}: {}", min * f.sqrt());
    }
}

#[test]
fn fisher_information() {
    assert_eq!(qfi(2).unwrap(), 1.0);
    assert!((qfi(3).unwrap() - 8.0 / 3.0).abs() < 1e-15);
    assert_eq!(qfi(5).unwrap(), 8.0);
    for d in 2..=8 {
        for phi in [0.0, 0.37, 2.1] {
            assert!((qfi_numeric(d, phi).unwrap() - qfi(d).unwrap()).abs() < 1e-8);
        }
    }
}

fn all_digits(d: usize, n: usize) -> Vec<Vec<usize>> {
    (0..d.pow(n as u32))
        .map(|mut x| {
            let mut v = vec![0; n];
            for slot in v.iter_mut().rev() {
                *slot = x % d;
                x /= d;
            }
            v
        })
        .collect()
}

#[test]
fn kitaev_recovers_exact_expansions() {
    for d in 2..=4 {
        for n in 1..=4 {
            for digits in all_digits(d, n) {
                let phi = digits_to_phase(d, &digits);
                assert_eq!(kitaev_estimate(d, n, &ExactPhase(phi)).unwrap(), digits);
            }
        }
    }
    let phi = digits_to_phase(3, &[1, 0, 2, 1]);
    assert_eq!(kitaev_estimate(3, 4, &ExactPhase(phi)).unwrap(), vec![1, 0, 2, 1]);
    assert_eq!(kitaev_estimate(5, 3, &ExactPhase(0.0)).unwrap(), vec![0, 0, 0]);
}

#[test]
fn binary_kitaev_matches_bit_expansion() {
    for x in 0u32..32 {
        let phi = 2.0 * PI * x as f64 / 32.0;
        let bits: Vec<usize> = (0..5).rev().map(|b| ((x >> b) & 1) as usize).collect();
        assert_eq!(kitaev_estimate(2, 5, &ExactPhase(phi)).unwrap(), bits);
    }
}

#[test]
fn kitaev_density_shape() {
    for (d, n) in [(2, 3), (3, 2), (3, 3), (4, 2)] {
        let f = |x: f64| kitaev_density(d, n, x).unwrap();
        let pieces = 64;
        let w = 2.0 * PI / pieces as f64;
        let integral: f64 = (0..pieces)
            .map(|i| adaptive_simpson(&f, -PI + i as f64 * w, -PI + (i + 1) as f64 * w, 1e-12).unwrap())
            .sum();
        assert!((integral - 1.0).abs() < 1e-6, "{d} {n}: {integral}");
        assert!(f(0.0) >= f(1e-3) && f(0.0) >= f(0.5));
    }
    for d in [2usize, 3, 4] {
        for n in 1..=3 {
            let ratio = kitaev_fwhm(d, n).unwrap() / kitaev_fwhm(d, n + 1).unwrap();
            assert!((ratio / d as f64 - 1.0).abs() < 0.1, "d {d} n {n}: {ratio}");
        }
    }
}

#[test]
fn dihedral_parsing_and_group_law() {
    let r: DihedralElement = "12340".parse().unwrap();
    assert_eq!((r.shift, r.reflected), (1, false));
    let s: DihedralElement = "43210".parse().unwrap();
    assert_eq!((s.shift, s.reflected), (4, true));
    assert!("13240".parse::<DihedralElement>().is_err());
    assert_eq!("4,3,2,1,0".parse::<DihedralElement>().unwrap(), s);
    for d in 3..=7 {
        let all = DihedralElement::all(d).unwrap();
        assert_eq!(all.len(), 2 * d);
        for a in &all {
            for b in &all {
                let c = a.compose(b).unwrap();
                let ua = a.unitary();
                let ub = b.unitary();
                assert!((&ua * &ub).max_abs_diff(&c.unitary()) < 1e-15);
                assert_eq!(c.parity() == Parity::Even, a.parity() == b.parity());
            }
            assert_eq!(a.to_string().parse::<DihedralElement>().unwrap(), *a);
        }
    }
}

#[test]
fn parity_check_is_deterministic() {
    let r: DihedralElement = "12340".parse().unwrap();
    let s: DihedralElement = "43210".parse().unwrap();
    assert_eq!(parity_check(5, 2, &r).unwrap().outcome, 2);
    assert_eq!(parity_check(5, 2, &s).unwrap().outcome, 3);
    let x = DihedralElement::from_one_line(&[1, 2, 0]).unwrap();
    let x01 = DihedralElement::from_one_line(&[1, 0, 2]).unwrap();
    assert_eq!(parity_check(3, 1, &x).unwrap().outcome, 1);
    assert_eq!(parity_check(3, 1, &x01).unwrap().outcome, 2);
    for d in 3..=7 {
        for m in (1..d).filter(|m| (1..=*m).rev().find(|g| m % g == 0 && d % g == 0) == Some(1)) {
            for g in DihedralElement::all(d).unwrap() {
                let out = parity_check(d, m, &g).unwrap();
                let want = if g.reflected { d - m } else { m };
                assert_eq!(out.outcome, want);
                assert!((out.probability - 1.0).abs() < 1e-10);
                assert_eq!(out.parity, Some(g.parity()));
            }
        }
    }
    assert!(parity_check(6, 2, &DihedralElement::new(6, 1, false).unwrap()).is_err());
    assert!(parity_check(5, 0, &r).is_err());
}
