//! Qudit Ramsey interferometry, base-d Kitaev phase estimation and dihedral parity checks.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{cis, UnitaryMatrix, C64};

const TAYLOR_CUTOFF: f64 = 1e-6;

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::invalid(format!("qudit dimension {d} must be at least 2")));
    }
    Ok(())
}

/// Normalized qudit state.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditState(DVector<C64>);

impl QuditState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(Self(v))
    }

    pub fn basis(d: usize, k: usize) -> Result<Self> {
        check_dim(d)?;
        if k >= d {
            return Err(Error::invalid(format!("level {k} outside dimension {d}")));
        }
        let mut v = DVector::zeros(d);
        v[k] = C64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn apply(&self, u: &UnitaryMatrix) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch(u.dim(), self.dim()));
        }
        Ok(Self(u.matrix() * &self.0))
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// `d`-point DFT matrix with entries `ω^{jk}/√d`.
pub fn hadamard_d(d: usize) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let s = 1.0 / (d as f64).sqrt();
    let e: Vec<C64> = (0..d * d)
        .map(|i| cis(2.0 * PI * ((i / d) * (i % d) % d) as f64 / d as f64) * s)
        .collect();
    UnitaryMatrix::from_rows(d, &e)
}

/// Free-evolution phase `diag(1, e^{iφ}, …, e^{i(d−1)φ})`.
pub fn phase_evolution(d: usize, phi: f64) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let p: Vec<f64> = (0..d).map(|j| j as f64 * phi).collect();
    Ok(UnitaryMatrix::diagonal_phases(&p))
}

/// Final state `H_d⁻¹ Z_φ H_d |0⟩` of the Ramsey sequence.
pub fn ramsey_state(d: usize, phi: f64) -> Result<QuditState> {
    let h = hadamard_d(d)?;
    QuditState::basis(d, 0)?.apply(&h)?.apply(&phase_evolution(d, phi)?)?.apply(&h.adjoint())
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI { y + 2.0 * PI } else { y }
}

/// `sin²(Mx/2) / (M² sin²(x/2))`, equal to 1 at `x = 0`.
fn dirichlet_normalized(m: f64, x: f64) -> f64 {
    let x = wrap(x);
    let s = (x / 2.0).sin();
    if s.abs() < TAYLOR_CUTOFF {
        1.0 - (m * m - 1.0) * x * x / 12.0
    } else {
        let r = (m * x / 2.0).sin() / (m * s);
        r * r
    }
}

/// Probability of outcome `k` after the Ramsey sequence with phase `phi`.
pub fn ramsey_population(d: usize, k: usize, phi: f64) -> Result<f64> {
    check_dim(d)?;
    if k >= d {
        return Err(Error::invalid(format!("outcome {k} outside dimension {d}")));
    }
    Ok(dirichlet_normalized(d as f64, phi - 2.0 * PI * k as f64 / d as f64))
}

/// Single-shot phase uncertainty `√(P₀(1−P₀)) / |∂P₀/∂φ|`; infinite at stationary points.
pub fn phase_precision(d: usize, phi: f64) -> Result<f64> {
    check_dim(d)?;
    let df = d as f64;
    let mut one_minus = 0.0;
    let mut slope = 0.0;
    for s in 1..d {
        let (w, sf) = ((d - s) as f64, s as f64);
        one_minus += w * (sf * phi / 2.0).sin().powi(2);
        slope += w * sf * (sf * phi).sin();
    }
    let one_minus = 4.0 * one_minus / (df * df);
    let slope = -2.0 * slope / (df * df);
    if slope == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(((1.0 - one_minus) * one_minus).max(0.0).sqrt() / slope.abs())
}

/// Quantum Fisher information `(d²−1)/3` of the phase-encoded state.
pub fn qfi(d: usize) -> Result<f64> {
    check_dim(d)?;
    Ok((d * d - 1) as f64 / 3.0)
}

/// QFI from a five-point derivative of `Z_φ H_d |0⟩`.
pub fn qfi_numeric(d: usize, phi: f64) -> Result<f64> {
    let h = hadamard_d(d)?;
    let plus = QuditState::basis(d, 0)?.apply(&h)?;
    let psi = |p: f64| -> Result<DVector<C64>> { Ok(plus.apply(&phase_evolution(d, p)?)?.0) };
    let step = 1e-3;
    let eight = C64::new(8.0, 0.0);
    let dpsi = (psi(phi - 2.0 * step)? - psi(phi - step)? * eight + psi(phi + step)? * eight
        - psi(phi + 2.0 * step)?)
        / C64::new(12.0 * step, 0.0);
    let v = psi(phi)?;
    let overlap = v.dotc(&dpsi);
    Ok(4.0 * (dpsi.norm_squared() - overlap.norm_sqr()))
}

/// Source of Ramsey measurement statistics for phase estimation.
pub trait PhaseOracle {
    /// Outcome distribution of the Ramsey sequence run with phase `power·φ − correction`.
    fn distribution(&self, d: usize, power: u64, correction: f64) -> Result<Vec<f64>>;
}

/// Noiseless oracle for a fixed phase `φ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactPhase(pub f64);

impl PhaseOracle for ExactPhase {
    fn distribution(&self, d: usize, power: u64, correction: f64) -> Result<Vec<f64>> {
        let phi = (self.0 * power as f64).rem_euclid(2.0 * PI) - correction;
        (0..d).map(|k| ramsey_population(d, k, phi)).collect()
    }
}

/// `2π·0.θ₀θ₁…` in base `d`.
pub fn digits_to_phase(d: usize, digits: &[usize]) -> f64 {
    2.0 * PI * digits.iter().rev().fold(0.0, |acc, &t| (acc + t as f64) / d as f64)
}

/// Base-`d` digits of `φ/2π`, most significant first, least significant measured first.
pub fn kitaev_estimate<O: PhaseOracle + ?Sized>(d: usize, n: usize, oracle: &O) -> Result<Vec<usize>> {
    check_dim(d)?;
    if n == 0 {
        return Err(Error::invalid("need at least one digit"));
    }
    let top = (d as u64)
        .checked_pow((n - 1) as u32)
        .ok_or_else(|| Error::invalid("d^(N-1) overflows the phase multiplier"))?;
    let mut digits = vec![0usize; n];
    let mut power = top;
    for j in (0..n).rev() {
        // Known less-significant digits contribute 2π·0.0θ_{j+1}…θ_{N−1}.
        let correction = digits_to_phase(d, &digits[j + 1..]) / d as f64;
        let dist = oracle.distribution(d, power, correction)?;
        if dist.len() != d || dist.iter().any(|p| !p.is_finite()) {
            return Err(Error::numerical("phase oracle returned an invalid distribution"));
        }
        digits[j] = dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        power /= d as u64;
    }
    Ok(digits)
}

fn total_resolution(d: usize, n: usize) -> Result<f64> {
    check_dim(d)?;
    let m = (d as f64).powi(n as i32);
    if !m.is_finite() {
        return Err(Error::invalid("d^N overflows"));
    }
    Ok(m)
}

/// Probability density of the estimate error `δφ` after `n` digits; integrates to 1 over a period.
pub fn kitaev_density(d: usize, n: usize, dphi: f64) -> Result<f64> {
    let m = total_resolution(d, n)?;
    Ok(m * dirichlet_normalized(m, dphi) / (2.0 * PI))
}

/// Full width at half maximum of the main density peak.
pub fn kitaev_fwhm(d: usize, n: usize) -> Result<f64> {
    let m = total_resolution(d, n)?;
    let (mut lo, mut hi) = (0.0, 2.0 * PI / m);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dirichlet_normalized(m, mid) > 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + hi)
}

/// Symmetry `k ↦ ±k + shift (mod d)` of the regular `d`-gon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DihedralElement {
    pub d: usize,
    pub shift: usize,
    pub reflected: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl DihedralElement {
    pub fn new(d: usize, shift: usize, reflected: bool) -> Result<Self> {
        check_dim(d)?;
        Ok(Self { d, shift: shift % d, reflected })
    }

    pub fn apply(&self, k: usize) -> usize {
        if self.reflected {
            (self.shift + self.d - k % self.d) % self.d
        } else {
            (k + self.shift) % self.d
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch(self.d, other.d));
        }
        let d = self.d;
        let shift = self.apply(other.shift);
        Ok(Self { d, shift, reflected: self.reflected != other.reflected })
    }

    pub fn parity(&self) -> Parity {
        if self.reflected { Parity::Odd } else { Parity::Even }
    }

    /// Recognizes a permutation in one-line notation, `perm[k] = π(k)`.
    pub fn from_one_line(perm: &[usize]) -> Result<Self> {
        let d = perm.len();
        check_dim(d)?;
        let r = perm[0] % d;
        for reflected in [false, true] {
            let g = Self { d, shift: r, reflected };
            if (0..d).all(|k| perm[k] == g.apply(k)) {
                return Ok(g);
            }
        }
        Err(Error::invalid(format!("{perm:?} is not a symmetry of the {d}-gon")))
    }

    pub fn one_line(&self) -> Vec<usize> {
        (0..self.d).map(|k| self.apply(k)).collect()
    }

    /// Permutation matrix `|k⟩ ↦ |π(k)⟩`.
    pub fn unitary(&self) -> UnitaryMatrix {
        UnitaryMatrix::permutation(&self.one_line()).expect("dihedral maps are bijections")
    }

    pub fn all(d: usize) -> Result<Vec<Self>> {
        check_dim(d)?;
        Ok([false, true].iter().flat_map(|&f| (0..d).map(move |r| Self { d, shift: r, reflected: f })).collect())
    }
}

impl FromStr for DihedralElement {
    type Err = Error;

    /// Accepts compact digits (`"43210"`) or separated indices (`"4,3,2,1,0"`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let perm: Option<Vec<usize>> = if s.contains([',', ' ']) {
            s.split([',', ' ']).filter(|t| !t.is_empty()).map(|t| t.parse().ok()).collect()
        } else {
            s.chars().map(|c| c.to_digit(10).map(|v| v as usize)).collect()
        };
        let perm = perm.ok_or_else(|| Error::invalid(format!("cannot parse permutation {s:?}")))?;
        Self::from_one_line(&perm)
    }
}

impl fmt::Display for DihedralElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.d > 10 { "," } else { "" };
        let parts: Vec<String> = self.one_line().iter().map(|k| k.to_string()).collect();
        write!(f, "{}", parts.join(sep))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityOutcome {
    pub outcome: usize,
    pub probability: f64,
    /// `None` when `m = d − m`, where the two parities give the same outcome.
    pub parity: Option<Parity>,
}

/// Runs `H_d⁻¹ U_π H_d |m⟩` and reads the most likely basis state.
pub fn parity_check(d: usize, m: usize, g: &DihedralElement) -> Result<ParityOutcome> {
    check_dim(d)?;
    if g.d != d {
        return Err(Error::DimensionMismatch(g.d, d));
    }
    if m >= d || gcd(m, d) != 1 {
        return Err(Error::invalid(format!("input {m} must be coprime to {d}")));
    }
    let h = hadamard_d(d)?;
    let out = QuditState::basis(d, m)?.apply(&h)?.apply(&g.unitary())?.apply(&h.adjoint())?;
    let probs = out.probabilities();
    let (outcome, &probability) = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty state");
    let parity = match (outcome == m, outcome == d - m) {
        (true, false) => Some(Parity::Even),
        (false, true) => Some(Parity::Odd),
        _ => None,
    };
    Ok(ParityOutcome { outcome, probability, parity })
}
