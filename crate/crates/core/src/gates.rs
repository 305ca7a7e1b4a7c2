//! Fixed single-qutrit gate matrices.

use std::f64::consts::PI;

use crate::math::{cis, UnitaryMatrix, C64, ONE};

/// Primitive cube root of unity `e^{2πi/3}`.
pub fn omega() -> C64 {
    cis(2.0 * PI / 3.0)
}

/// Qutrit Hadamard (3-point DFT).
pub fn h() -> UnitaryMatrix {
    let w = omega();
    let s = 1.0 / 3f64.sqrt();
    let e = [ONE, ONE, ONE, ONE, w, w * w, ONE, w * w, w].map(|z| z * s);
    UnitaryMatrix::from_rows(3, &e).expect("H is unitary")
}

pub fn h_inv() -> UnitaryMatrix {
    h().adjoint()
}

/// Cyclic shift `|k> -> |k+1 mod 3>`.
pub fn x() -> UnitaryMatrix {
    UnitaryMatrix::permutation(&[1, 2, 0]).expect("permutation")
}

pub fn x_inv() -> UnitaryMatrix {
    x().adjoint()
}

pub fn x01() -> UnitaryMatrix {
    UnitaryMatrix::permutation(&[1, 0, 2]).expect("permutation")
}

pub fn x12() -> UnitaryMatrix {
    UnitaryMatrix::permutation(&[0, 2, 1]).expect("permutation")
}

pub fn x02() -> UnitaryMatrix {
    UnitaryMatrix::permutation(&[2, 1, 0]).expect("permutation")
}

/// `diag(1, e^{iφ1}, e^{i(φ1+φ2)})`.
pub fn virtual_phase(phi1: f64, phi2: f64) -> UnitaryMatrix {
    UnitaryMatrix::diagonal_phases(&[0.0, phi1, phi1 + phi2])
}

/// Frame phases of the clock gate `diag(1, ω, ω²)`.
pub const Z_PHASES: (f64, f64) = (2.0 * PI / 3.0, 2.0 * PI / 3.0);
/// Frame phases of `diag(1, 1, ω)`.
pub const S_PHASES: (f64, f64) = (0.0, 2.0 * PI / 3.0);
/// Frame phases of `diag(1, e^{2πi/9}, e^{-2πi/9})`.
pub const T_PHASES: (f64, f64) = (2.0 * PI / 9.0, -4.0 * PI / 9.0);

pub fn z() -> UnitaryMatrix {
    virtual_phase(Z_PHASES.0, Z_PHASES.1)
}

pub fn s() -> UnitaryMatrix {
    virtual_phase(S_PHASES.0, S_PHASES.1)
}

pub fn t() -> UnitaryMatrix {
    virtual_phase(T_PHASES.0, T_PHASES.1)
}

/// Converts a diagonal phase vector `diag(e^{i a})` to frame phases, dropping the global phase.
pub fn diagonal_to_frame(a: [f64; 3]) -> (f64, f64) {
    (a[1] - a[0], a[2] - a[1])
}

/// Returns the diagonal of a diagonal unitary as phases, or `None` if off-diagonal weight exceeds `tol`.
pub fn diagonal_phases_of(u: &UnitaryMatrix, tol: f64) -> Option<Vec<f64>> {
    let n = u.dim();
    for r in 0..n {
        for c in 0..n {
            if r != c && u.get(r, c).norm() > tol {
                return None;
            }
        }
    }
    Some((0..n).map(|k| u.get(k, k).arg()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::average_gate_fidelity;

    #[test]
    fn x_and_x02_fidelity_is_one_third() {
        let f = average_gate_fidelity(&x(), &x02()).unwrap();
        assert!((f - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn frame_phases_match_named_gates() {
        let w = omega();
        assert!((s().get(2, 2) - w).norm() < 1e-15);
        assert!((z().get(1, 1) - w).norm() < 1e-15);
        assert!((z().get(2, 2) - w * w).norm() < 1e-15);
        assert!((t().get(2, 2) - cis(-2.0 * PI / 9.0)).norm() < 1e-15);
    }
}
