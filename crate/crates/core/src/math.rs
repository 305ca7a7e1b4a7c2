//! Dense complex matrices: unitaries, Hermitian generators, exponentials and fidelities.

use std::ops::Mul;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Frobenius tolerance on `U†U - I`.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Entrywise tolerance on `H - H†`.
pub const HERMITICITY_TOL: f64 = 1e-12;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
pub fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

/// A square unitary matrix of dimension at least two.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix(DMatrix<C64>);

impl UnitaryMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(m, UNITARITY_TOL)
    }

    pub fn with_tolerance(m: DMatrix<C64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
        }
        if m.nrows() < 2 {
            return Err(Error::invalid("unitary dimension must be at least 2"));
        }
        let dev = unitarity_deviation(&m);
        if !(dev <= tol) {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix known to be unitary by construction.
    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        debug_assert!(unitarity_deviation(&m) < 1e-6);
        Self(m)
    }

    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(entries.len(), dim * dim));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// `diag(e^{i a_0}, e^{i a_1}, ...)`.
    pub fn diagonal_phases(phases: &[f64]) -> Self {
        let d = DVector::from_iterator(phases.len(), phases.iter().map(|&p| cis(p)));
        Self(DMatrix::from_diagonal(&d))
    }

    /// Permutation matrix sending `|k>` to `|perm[k]>`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let d = perm.len();
        let mut seen = vec![false; d];
        let mut m = DMatrix::zeros(d, d);
        for (k, &p) in perm.iter().enumerate() {
            if p >= d || seen[p] {
                return Err(Error::invalid(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
            m[(p, k)] = ONE;
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[(r, c)]
    }

    /// `e^{i phi} U`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        Self(self.0.map(|z| z * cis(phi)))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_deviation(&self.0)
    }
}

impl Mul<&UnitaryMatrix> for &UnitaryMatrix {
    type Output = UnitaryMatrix;
    fn mul(self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for UnitaryMatrix {
    type Output = UnitaryMatrix;
    fn mul(self, rhs: UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix(self.0 * rhs.0)
    }
}

/// A Hermitian matrix, typically a Hamiltonian in rad/ns.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(DMatrix<C64>);

impl Hermitian {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
        }
        let dev = max_abs_diff(&m, &m.adjoint());
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if !(dev <= HERMITICITY_TOL * scale) {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }
}

/// `exp(-i H t)` by eigendecomposition.
pub fn expm_hermitian(h: &Hermitian, t: f64) -> UnitaryMatrix {
    UnitaryMatrix::from_matrix_unchecked(expm_herm_raw(&h.0, t))
}

/// `exp(-i H t)` for a matrix the caller guarantees to be Hermitian.
///
/// Scaling and squaring with a degree-14 Taylor polynomial; accurate to rounding for any spectrum.
pub(crate) fn expm_herm_raw(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let n = h.nrows();
    let norm = h.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max) * t.abs();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let a = h * C64::new(0.0, -t / 2f64.powi(squarings));
    let id = DMatrix::<C64>::identity(n, n);
    let mut r = id.clone();
    for k in (1..=14).rev() {
        r = &id + &a * r / C64::new(k as f64, 0.0);
    }
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Average gate fidelity `(|Tr(U†V)|² + d) / (d(d+1))`.
pub fn average_gate_fidelity(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(u.dim(), v.dim()));
    }
    Ok(fidelity_raw(u.matrix(), v.matrix()))
}

pub(crate) fn fidelity_raw(u: &DMatrix<C64>, v: &DMatrix<C64>) -> f64 {
    let d = u.nrows() as f64;
    let tr = u.adjoint().mul(v).trace();
    ((tr.norm_sqr() + d) / (d * (d + 1.0))).clamp(0.0, 1.0)
}

/// Entries with modulus at or below this are treated as zero when canonicalizing.
pub const CANONICAL_ZERO: f64 = 1e-8;

/// Removes the global phase so the first nonzero entry (row-major) is real and positive.
pub fn canonicalize_phase(u: &UnitaryMatrix) -> UnitaryMatrix {
    UnitaryMatrix(canonicalize_raw(&u.0))
}

pub(crate) fn canonicalize_raw(m: &DMatrix<C64>) -> DMatrix<C64> {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            if z.norm() > CANONICAL_ZERO {
                let ph = (z / z.norm()).conj();
                let mut out = m.map(|w| w * ph);
                out[(r, c)] = C64::new(z.norm(), 0.0);
                return out;
            }
        }
    }
    m.clone()
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub(crate) fn unitarity_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    (m.adjoint() * m - DMatrix::<C64>::identity(n, n)).norm()
}

/// Distance between `u` and `v` after optimally aligning the global phase.
pub fn phase_aligned_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> f64 {
    let tr = (u.matrix().adjoint() * v.matrix()).trace();
    let ph = if tr.norm() > 0.0 { tr / tr.norm() } else { ONE };
    max_abs_diff(&u.matrix().map(|z| z * ph), v.matrix())
}
