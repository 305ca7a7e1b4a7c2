//! Randomized and interleaved benchmarking.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordTable, GateKind};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::fit::{curve_fit, LmOptions};
use crate::math::C64;
use crate::native::GateSet;

pub const DEFAULT_LENGTHS: [usize; 8] = [1, 5, 10, 20, 35, 50, 75, 100];
pub const DEFAULT_SEQUENCES: usize = 30;
pub const DEFAULT_SHOTS: u32 = 200;

/// How each gate of a sequence is realized.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseModel {
    Ideal,
    /// Depolarizing channel after every Clifford and after every interleaved gate.
    Depolarizing { p_clifford: f64, p_interleaved: f64 },
    /// Realized gate matrices, e.g. from pulse simulation.
    Gates(GateSet),
}

impl NoiseModel {
    pub fn depolarizing(p: f64) -> Self {
        NoiseModel::Depolarizing { p_clifford: p, p_interleaved: 1.0 }
    }

    fn validate(&self) -> Result<()> {
        if let NoiseModel::Depolarizing { p_clifford, p_interleaved } = *self {
            for p in [p_clifford, p_interleaved] {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::invalid(format!("depolarizing parameter {p} outside (0, 1]")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RbConfig {
    pub lengths: Vec<usize>,
    pub n_sequences: usize,
    /// Shots per sequence; 0 records exact survival probabilities.
    pub shots: u32,
    pub seed: u64,
    pub noise: NoiseModel,
    pub interleaved: Option<GateKind>,
}

impl Default for RbConfig {
    fn default() -> Self {
        Self {
            lengths: DEFAULT_LENGTHS.to_vec(),
            n_sequences: DEFAULT_SEQUENCES,
            shots: DEFAULT_SHOTS,
            seed: 0,
            noise: NoiseModel::Ideal,
            interleaved: None,
        }
    }
}

impl RbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() || self.lengths[0] == 0 {
            return Err(Error::invalid("sequence lengths must be nonempty and at least 1"));
        }
        if self.lengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sequence lengths must be strictly increasing"));
        }
        if self.n_sequences == 0 {
            return Err(Error::invalid("need at least one sequence per length"));
        }
        if self.interleaved == Some(GateKind::VirtualPhase) {
            return Err(Error::invalid("interleave a physical gate"));
        }
        self.noise.validate()
    }
}

/// A random Clifford sequence closed by its inverse.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RbSequence {
    pub cliffords: Vec<usize>,
    /// Clifford index of the gate inserted after every random Clifford.
    pub interleaved: Option<usize>,
    pub inverse: usize,
}

impl RbSequence {
    /// All elements in time order, including the interleaved gates and the inverse.
    pub fn elements(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(2 * self.cliffords.len() + 1);
        for &c in &self.cliffords {
            v.push(c);
            v.extend(self.interleaved);
        }
        v.push(self.inverse);
        v
    }
}

fn sequence_with<R: Rng>(table: &CliffordTable, m: usize, interleaved: Option<usize>, rng: &mut R) -> RbSequence {
    let mut acc = table.identity();
    let mut cliffords = Vec::with_capacity(m);
    for _ in 0..m {
        let c = rng.gen_range(0..table.len());
        cliffords.push(c);
        acc = table.then(acc, c);
        if let Some(g) = interleaved {
            acc = table.then(acc, g);
        }
    }
    RbSequence { cliffords, interleaved, inverse: table.inverse(acc) }
}

/// Seeded sequence of `m` uniform random Cliffords.
pub fn rb_sequence(table: &CliffordTable, m: usize, seed: u64, interleaved: Option<usize>) -> RbSequence {
    sequence_with(table, m, interleaved, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub m: usize,
    pub mean: f64,
    pub std: f64,
}

fn interleaved_index(table: &CliffordTable, kind: Option<GateKind>) -> Result<Option<usize>> {
    kind.map(|k| {
        table
            .lookup(&k.ideal())
            .ok_or_else(|| Error::invalid(format!("{} is not a Clifford", k.name())))
    })
    .transpose()
}

/// Exact survival probability of `|0⟩` for one sequence.
fn survival(seq: &RbSequence, noise: &NoiseModel, realized: Option<&Realized>) -> f64 {
    match noise {
        NoiseModel::Ideal => 1.0,
        NoiseModel::Depolarizing { p_clifford, p_interleaved } => {
            let m = seq.cliffords.len() as i32;
            let gates = if seq.interleaved.is_some() { p_interleaved.powi(m) } else { 1.0 };
            1.0 / 3.0 + (2.0 / 3.0) * p_clifford.powi(m + 1) * gates
        }
        NoiseModel::Gates(_) => {
            let r = realized.expect("realized Cliffords for gate noise");
            let mut psi = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
            let mut apply = |m: &DMatrix<C64>| {
                let next = [0, 1, 2].map(|i| (0..3).map(|j| m[(i, j)] * psi[j]).sum::<C64>());
                psi = next;
            };
            for &c in &seq.cliffords {
                apply(&r.cliffords[c]);
                if let Some(g) = &r.interleaved {
                    apply(g);
                }
            }
            apply(&r.cliffords[seq.inverse]);
            psi[0].norm_sqr().min(1.0)
        }
    }
}

struct Realized {
    cliffords: Vec<DMatrix<C64>>,
    interleaved: Option<DMatrix<C64>>,
}

fn realize(table: &CliffordTable, gates: &GateSet, interleaved: Option<GateKind>) -> Realized {
    Realized {
        cliffords: table.elements().iter().map(|e| gates.circuit(&e.ops())).collect(),
        interleaved: interleaved.map(|k| gates.matrix(k).clone()),
    }
}

/// Mean and standard deviation of the sampled survival at each length.
pub fn run_rb(table: &CliffordTable, cfg: &RbConfig) -> Result<Vec<SurvivalPoint>> {
    cfg.validate()?;
    let inter = interleaved_index(table, cfg.interleaved)?;
    let realized = match &cfg.noise {
        NoiseModel::Gates(g) => Some(realize(table, g, cfg.interleaved)),
        _ => None,
    };
    let n = cfg.n_sequences;
    let jobs: Vec<(usize, usize)> =
        (0..cfg.lengths.len()).flat_map(|l| (0..n).map(move |s| (l, s))).collect();
    let samples = jobs
        .par_iter()
        .map(|&(l, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream((l * n + s) as u64);
            let seq = sequence_with(table, cfg.lengths[l], inter, &mut rng);
            let p = survival(&seq, &cfg.noise, realized.as_ref());
            if cfg.shots == 0 {
                return Ok(p);
            }
            let b = Binomial::new(cfg.shots as u64, p.clamp(0.0, 1.0))
                .map_err(|e| Error::numerical(format!("binomial sampling: {e}")))?;
            Ok(b.sample(&mut rng) as f64 / cfg.shots as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(cfg
        .lengths
        .iter()
        .zip(samples.chunks(n))
        .map(|(&m, ys)| {
            let mean = ys.iter().sum::<f64>() / n as f64;
            let var = if n > 1 { ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
            SurvivalPoint { m, mean, std: var.sqrt() }
        })
        .collect())
}

/// Fit of `A·p^m + B`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    #[serde(rename = "A")]
    pub a: f64,
    pub p: f64,
    #[serde(rename = "B")]
    pub b: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    /// Standard error of `p`, when the fit has spare degrees of freedom.
    pub p_std: Option<f64>,
}

impl DecayFit {
    pub fn eval(&self, m: f64) -> f64 {
        self.a * self.p.powf(m) + self.b
    }
}

pub fn fit_decay(points: &[SurvivalPoint]) -> Result<DecayFit> {
    let mut ms: Vec<usize> = points.iter().map(|p| p.m).collect();
    ms.sort_unstable();
    ms.dedup();
    if ms.len() < 3 {
        return Err(Error::invalid("decay fit needs at least three distinct lengths"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.m as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if hi - lo < 1e-12 {
        return Err(Error::Degenerate("constant survival leaves the decay unidentifiable".into()));
    }
    let first = points.iter().min_by_key(|p| p.m).unwrap();
    let last = points.iter().max_by_key(|p| p.m).unwrap();
    let b0 = 1.0 / 3.0;
    let a0 = first.mean - b0;
    let ratio = (last.mean - b0) / (first.mean - b0);
    let p0 = if ratio > 0.0 && ratio.is_finite() {
        ratio.powf(1.0 / (last.m - first.m) as f64).clamp(0.05, 0.9999)
    } else {
        0.9
    };
    let model = |x: f64, q: &[f64]| q[0] * q[1].powf(x) + q[2];
    let fit = curve_fit(model, &xs, &ys, &[a0, p0, b0], LmOptions::default())?;
    let p = fit.params[1];
    if !p.is_finite() || p <= 0.0 || p > 1.0 + 1e-9 {
        return Err(Error::numerical(format!("fitted decay parameter {p} outside (0, 1]")));
    }
    Ok(DecayFit { a: fit.params[0], p, b: fit.params[2], residual: fit.rms, p_std: fit.std_err(1) })
}

/// Fit of `A·p^m + b` with the asymptote held at `b` and `p = e^{−q²}` kept in (0, 1].
pub fn fit_decay_fixed_asymptote(points: &[SurvivalPoint], b: f64) -> Result<DecayFit> {
    if points.len() < 2 {
        return Err(Error::invalid("decay fit needs at least two points"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.m as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let first = points.iter().min_by_key(|p| p.m).unwrap();
    let last = points.iter().max_by_key(|p| p.m).unwrap();
    let ratio = (last.mean - b) / (first.mean - b);
    let p0 = if ratio > 0.0 && ratio < 1.0 && last.m > first.m {
        ratio.powf(1.0 / (last.m - first.m) as f64)
    } else {
        0.99
    };
    let a0 = (first.mean - b) / p0.powf(first.m as f64);
    let model = |x: f64, q: &[f64]| q[0] * (-q[1] * q[1] * x).exp() + b;
    let fit = curve_fit(model, &xs, &ys, &[a0, (-p0.ln()).sqrt()], LmOptions::default())?;
    let p = (-fit.params[1].powi(2)).exp();
    let p_std = fit.std_err(1).map(|s| 2.0 * p * fit.params[1].abs() * s);
    Ok(DecayFit { a: fit.params[0], p, b, residual: fit.rms, p_std })
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("depolarizing parameter {p} outside (0, 1]")))
    }
}

/// Average error per Clifford, `(1 − p)(1 − 1/3)`.
pub fn clifford_error(p_c: f64) -> Result<f64> {
    check_p(p_c)?;
    Ok((1.0 - p_c) * (2.0 / 3.0))
}

/// Depolarizing parameter with average error `r`.
pub fn depolarizing_from_error(r: f64) -> f64 {
    1.0 - 1.5 * r
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrbEstimate {
    pub r: f64,
    /// Set when `p_gate > p_ref`, which yields a negative error.
    pub unphysical: bool,
}

pub fn irb_error(p_gate: f64, p_ref: f64) -> Result<IrbEstimate> {
    check_p(p_gate)?;
    check_p(p_ref)?;
    let r = (1.0 - p_gate / p_ref) * (2.0 / 3.0);
    Ok(IrbEstimate { r, unphysical: r < 0.0 })
}

/// Incoherent error of a gate of duration `tau` ns from coherence times in µs.
pub fn incoherent_error_estimate(device: &DeviceParams, tau: f64) -> Result<f64> {
    device.validate()?;
    if !(tau >= 0.0) {
        return Err(Error::invalid(format!("gate duration {tau} must be nonnegative")));
    }
    let [t1_01, t1_12, _] = device.t1;
    let [t2_01, t2_12, t2_02] = device.t2;
    let rate = 2.0 / t2_01 + 2.0 / t2_12 + 2.0 / t2_02 + 1.0 / t1_01 + 1.0 / t1_12;
    Ok(rate * tau * 1e-3 / 12.0)
}
