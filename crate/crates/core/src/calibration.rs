//! Parameterized pulse rendering and two-phase evolutionary calibration against a simulated RB objective.

use std::io::Write;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{CliffordTable, GateKind};
use crate::error::{Error, Result};
use crate::math::{cis, C64};
use crate::native::{GateSet, NativeLibrary};
use crate::rb::{fit_decay_fixed_asymptote, SurvivalPoint};
use crate::schedule::{PulseSchedule, FORMAT_VERSION};
use crate::sim::transmon::{sample_derivative, transmon_evolve, TransmonModel};
use crate::sim::SimConfig;

/// Ratio of the detuning to the tone-1 Rabi frequency in the designed H pulse.
pub const H_CHIRP_RATIO: f64 = 0.6581;

/// Experimental knobs of the X and H pulses; frequencies in rad/ns, phases in rad.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibParams {
    pub a_x1: f64,
    pub a_x2: f64,
    pub delta_x1: f64,
    pub delta_x2: f64,
    pub lambda_x1: f64,
    pub lambda_x2: f64,
    pub a_h1: f64,
    pub a_h2: f64,
    pub b_h1: f64,
    pub b_h2: f64,
    /// Offsets added to the designed output frame of H.
    pub phi_h1: f64,
    pub phi_h2: f64,
    /// Offsets added to the input (`φ_x1`, `φ_x2`) and output (`φ_x3`, `φ_x4`) frames of X.
    pub phi_x1: f64,
    pub phi_x2: f64,
    pub phi_x3: f64,
    pub phi_x4: f64,
}

impl Default for CalibParams {
    fn default() -> Self {
        Self::from_slice(&IDENTITY).expect("16 values")
    }
}

const IDENTITY: [f64; 16] = [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];

impl CalibParams {
    pub const LEN: usize = 16;
    pub const NAMES: [&'static str; 16] = [
        "A_x1", "A_x2", "Delta_x1", "Delta_x2", "lambda_x1", "lambda_x2", "A_h1", "A_h2", "B_h1", "B_h2",
        "phi_h1", "phi_h2", "phi_x1", "phi_x2", "phi_x3", "phi_x4",
    ];

    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.a_x1, self.a_x2, self.delta_x1, self.delta_x2, self.lambda_x1, self.lambda_x2, self.a_h1,
            self.a_h2, self.b_h1, self.b_h2, self.phi_h1, self.phi_h2, self.phi_x1, self.phi_x2, self.phi_x3,
            self.phi_x4,
        ]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != Self::LEN {
            return Err(Error::DimensionMismatch(v.len(), Self::LEN));
        }
        Ok(Self {
            a_x1: v[0],
            a_x2: v[1],
            delta_x1: v[2],
            delta_x2: v[3],
            lambda_x1: v[4],
            lambda_x2: v[5],
            a_h1: v[6],
            a_h2: v[7],
            b_h1: v[8],
            b_h2: v[9],
            phi_h1: v[10],
            phi_h2: v[11],
            phi_x1: v[12],
            phi_x2: v[13],
            phi_x3: v[14],
            phi_x4: v[15],
        })
    }
}

/// `(AΩ + i(λA/α)Ω̇)·e^{iΔt}` on each tone of an X-type schedule.
pub fn render_x_pulses(params: &CalibParams, base: &PulseSchedule, anharmonicity: f64) -> Result<PulseSchedule> {
    let knobs = [
        (params.a_x1, params.lambda_x1, params.delta_x1),
        (params.a_x2, params.lambda_x2, params.delta_x2),
    ];
    if knobs.iter().all(|&(a, l, d)| a == 1.0 && l == 0.0 && d == 0.0) {
        return Ok(base.clone());
    }
    if anharmonicity == 0.0 && knobs.iter().any(|k| k.1 != 0.0) {
        return Err(Error::invalid("DRAG correction requires nonzero anharmonicity"));
    }
    let times = base.times();
    let render = |tone: Vec<C64>, (a, lambda, delta): (f64, f64, f64)| -> Vec<C64> {
        let deriv = sample_derivative(&tone, base.dt);
        let q = if lambda == 0.0 { 0.0 } else { lambda * a / anharmonicity };
        tone.iter()
            .zip(&deriv)
            .zip(&times)
            .map(|((c, dc), &t)| (c * a + C64::new(0.0, q) * dc) * cis(delta * t))
            .collect()
    };
    let mut out = base.clone();
    out.set_complex(&render(base.tone1(), knobs[0]), &render(base.tone2(), knobs[1]));
    Ok(out)
}

/// Scales the H drive by `A_h` and the chirp by `B_h·A_h`; unequal tone chirps become a tone-2 phase.
pub fn render_h_pulses(params: &CalibParams, base: &PulseSchedule) -> Result<PulseSchedule> {
    let (a1, a2, b1, b2) = (params.a_h1, params.a_h2, params.b_h1, params.b_h2);
    if a1 == 1.0 && a2 == 1.0 && b1 == 1.0 && b2 == 1.0 {
        return Ok(base.clone());
    }
    let mut out = base.clone();
    let (s1, s2) = (b1 * a1, b2 * a2);
    out.detuning = base.detuning.iter().map(|d| d * s1).collect();
    let mut mismatch = vec![0.0; base.len()];
    for k in 1..base.len() {
        mismatch[k] = mismatch[k - 1] + 0.5 * base.dt * (s2 - s1) * (base.detuning[k - 1] + base.detuning[k]);
    }
    let t1: Vec<C64> = base.tone1().iter().map(|c| c * a1).collect();
    let t2: Vec<C64> = base.tone2().iter().zip(&mismatch).map(|(c, m)| c * a2 * cis(*m)).collect();
    out.set_complex(&t1, &t2);
    Ok(out)
}

/// A fixed random Clifford sequence whose prefixes give the RB lengths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceSet {
    pub cliffords: Vec<usize>,
}

pub const CALIBRATION_LENGTH: usize = 50;
pub const PREFIX_LENGTHS: [usize; 7] = [1, 2, 5, 10, 20, 35, 50];

/// `count` seeded sequences of length `m`.
pub fn sequence_sets(table: &CliffordTable, count: usize, m: usize, seed: u64) -> Vec<SequenceSet> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            SequenceSet { cliffords: (0..m).map(|_| rng.gen_range(0..table.len())).collect() }
        })
        .collect()
}

fn set_objective(realized: &[DMatrix<C64>], table: &CliffordTable, set: &SequenceSet, prefixes: &[usize]) -> Result<(f64, f64)> {
    let mut psi = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    let mut acc = table.identity();
    let mut points = Vec::with_capacity(prefixes.len());
    for (k, &c) in set.cliffords.iter().enumerate() {
        let m = &realized[c];
        psi = [0, 1, 2].map(|i| (0..3).map(|j| m[(i, j)] * psi[j]).sum::<C64>());
        acc = table.then(acc, c);
        if prefixes.contains(&(k + 1)) {
            let inv = &realized[table.inverse(acc)];
            let amp: C64 = (0..3).map(|j| inv[(0, j)] * psi[j]).sum();
            points.push(SurvivalPoint { m: k + 1, mean: amp.norm_sqr().min(1.0), std: 0.0 });
        }
    }
    if points.iter().all(|p| p.mean >= 1.0 - 1e-12) {
        return Ok((1.0, 0.0));
    }
    let fit = fit_decay_fixed_asymptote(&points, 1.0 / 3.0)?;
    Ok((fit.p, fit.residual))
}

/// `mean(0.3·ε − p)` over the sequence sets, each fitted on its prefixes.
pub fn objective_for_gates(gates: &GateSet, table: &CliffordTable, sets: &[SequenceSet], prefixes: &[usize]) -> Result<f64> {
    if sets.is_empty() {
        return Err(Error::invalid("objective needs at least one sequence set"));
    }
    let realized: Vec<DMatrix<C64>> = table.elements().iter().map(|e| gates.circuit(&e.ops())).collect();
    let mut total = 0.0;
    for s in sets {
        let (p, eps) = set_objective(&realized, table, s, prefixes)?;
        total += 0.3 * eps - p;
    }
    Ok(total / sets.len() as f64)
}

/// Designed pulses, transmon model and Clifford table used by the calibration objective.
#[derive(Clone, Debug)]
pub struct CalibrationTarget {
    pub model: TransmonModel,
    pub library: NativeLibrary,
    pub table: CliffordTable,
    pub cfg: SimConfig,
    pub prefixes: Vec<usize>,
}

impl CalibrationTarget {
    pub fn new(model: TransmonModel, duration: f64, dt: f64) -> Result<Self> {
        Ok(Self {
            model,
            library: NativeLibrary::design(duration, dt)?,
            table: CliffordTable::enumerate(crate::clifford::Convention::ShortestWord)?,
            cfg: SimConfig::transmon(dt),
            prefixes: PREFIX_LENGTHS.to_vec(),
        })
    }

    /// Realized gates: rendered H and X simulated on the transmon, the rest ideal.
    pub fn realize(&self, params: &CalibParams) -> Result<GateSet> {
        let mut mats: Vec<DMatrix<C64>> = GateKind::PHYSICAL.iter().map(|k| k.ideal().into_matrix()).collect();
        let h = self.library.gate(GateKind::H);
        let hs = render_h_pulses(params, &h.schedule)?;
        let hu = transmon_evolve(&hs, &self.model, None, &self.cfg)?;
        let mut hg = h.clone();
        hg.post = (hg.post.0 + params.phi_h1, hg.post.1 + params.phi_h2);
        mats[0] = hg.assemble(&hu.block());
        let x = self.library.gate(GateKind::X);
        let xs = render_x_pulses(params, &x.schedule, self.model.anharmonicity)?;
        let xu = transmon_evolve(&xs, &self.model, None, &self.cfg)?;
        let mut xg = x.clone();
        xg.pre = (xg.pre.0 + params.phi_x1, xg.pre.1 + params.phi_x2);
        xg.post = (xg.post.0 + params.phi_x3, xg.post.1 + params.phi_x4);
        mats[2] = xg.assemble(&xu.block());
        GateSet::from_matrices(mats)
    }
}

/// Calibration objective `Z` on a simulated transmon; lower is better.
pub fn rb_objective(params: &CalibParams, sets: &[SequenceSet], target: &CalibrationTarget) -> Result<f64> {
    objective_for_gates(&target.realize(params)?, &target.table, sets, &target.prefixes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Training,
    Validation,
}

pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn evaluate(&self, x: &[f64], stage: Stage) -> Result<f64>;
}

/// RB objective with fixed training and validation sequence sets.
pub struct TransmonObjective {
    pub target: CalibrationTarget,
    pub training: Vec<SequenceSet>,
    pub validation: Vec<SequenceSet>,
}

impl TransmonObjective {
    pub fn new(target: CalibrationTarget, cfg: &OptimizerConfig) -> Self {
        let training = sequence_sets(&target.table, cfg.phase1.sequences, CALIBRATION_LENGTH, cfg.seed);
        let validation = sequence_sets(&target.table, cfg.phase2.sequences, CALIBRATION_LENGTH, cfg.seed ^ 0x5eed_0002);
        Self { target, training, validation }
    }
}

impl Objective for TransmonObjective {
    fn dim(&self) -> usize {
        CalibParams::LEN
    }

    fn evaluate(&self, x: &[f64], stage: Stage) -> Result<f64> {
        let sets = match stage {
            Stage::Training => &self.training,
            Stage::Validation => &self.validation,
        };
        rb_objective(&CalibParams::from_slice(x)?, sets, &self.target)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let b = Self { lower, upper };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() || self.lower.is_empty() {
            return Err(Error::invalid("bounds need matching nonempty lower and upper vectors"));
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(Error::invalid(format!("invalid bound [{l}, {u}]")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(i, v)| *v >= self.lower[i] && *v <= self.upper[i])
    }

    fn clamp(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }

    /// Default search box around the identity knobs.
    pub fn calibration_default() -> Self {
        let two_pi_mhz = 2.0 * std::f64::consts::PI * 1e-3;
        let mut lower = Vec::with_capacity(16);
        let mut upper = Vec::with_capacity(16);
        for (i, v) in IDENTITY.iter().enumerate() {
            let half = match i {
                0 | 1 | 6 | 7 | 8 | 9 => 0.1,
                2 | 3 => 3.0 * two_pi_mhz,
                4 | 5 => 1.0,
                _ => 0.3,
            };
            lower.push(v - half);
            upper.push(v + half);
        }
        Self { lower, upper }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    /// Differential weight `F`.
    pub mutation: f64,
    /// Binomial crossover rate `CR`.
    pub crossover: f64,
    pub sequences: usize,
    pub max_generations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    pub population: usize,
    pub phase1: StageConfig,
    pub phase2: StageConfig,
    /// Fraction of the population that must be near the best to stop a phase.
    pub convergence_threshold: f64,
    /// Relative fitness distance from the best that counts as near.
    pub convergence_tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            population: 40,
            phase1: StageConfig { mutation: 0.8, crossover: 0.9, sequences: 5, max_generations: 60 },
            phase2: StageConfig { mutation: 0.4, crossover: 0.5, sequences: 6, max_generations: 20 },
            convergence_threshold: 0.88,
            convergence_tolerance: 0.01,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::invalid("differential evolution needs a population of at least 4"));
        }
        for s in [&self.phase1, &self.phase2] {
            let ok = |v: f64| v > 0.0 && v < 1.0;
            if !ok(s.mutation) || !ok(s.crossover) {
                return Err(Error::invalid("mutation and crossover rates must lie in (0, 1)"));
            }
            if s.sequences == 0 {
                return Err(Error::invalid("each phase needs at least one sequence set"));
            }
        }
        if self.phase1.mutation < self.phase2.mutation || self.phase1.crossover < self.phase2.crossover {
            return Err(Error::invalid("phase-1 rates must not be below phase-2 rates"));
        }
        if !(self.convergence_threshold > 0.0 && self.convergence_threshold <= 1.0) || !(self.convergence_tolerance >= 0.0) {
            return Err(Error::invalid("invalid convergence settings"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub stage: Stage,
    pub iteration: usize,
    pub best_z: f64,
    pub mean_z: f64,
    /// Mean per-parameter standard deviation in units of the bound width.
    pub population_spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub best: Vec<f64>,
    pub best_z: f64,
    pub phase1_best_z: f64,
    pub phase1_converged: bool,
    /// Largest relative deviation of the validation mean fitness from the phase-1 best.
    pub phase2_variation: f64,
    /// Set when no candidate improved on the best initial sample.
    pub no_improvement: bool,
    pub history: Vec<HistoryRow>,
    pub population: Vec<Vec<f64>>,
}

struct Population {
    members: Vec<Vec<f64>>,
    fitness: Vec<f64>,
}

impl Population {
    fn best(&self) -> (usize, f64) {
        self.fitness
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &z)| if z < acc.1 { (i, z) } else { acc })
    }

    fn row(&self, stage: Stage, iteration: usize, bounds: &Bounds) -> HistoryRow {
        let finite: Vec<f64> = self.fitness.iter().copied().filter(|z| z.is_finite()).collect();
        let mean_z = if finite.is_empty() { f64::INFINITY } else { finite.iter().sum::<f64>() / finite.len() as f64 };
        let n = self.members.len() as f64;
        let mut spread = 0.0;
        for i in 0..bounds.dim() {
            let w = bounds.width(i);
            if w == 0.0 {
                continue;
            }
            let m = self.members.iter().map(|x| x[i]).sum::<f64>() / n;
            let v = self.members.iter().map(|x| (x[i] - m).powi(2)).sum::<f64>() / n;
            spread += v.sqrt() / w;
        }
        HistoryRow { stage, iteration, best_z: self.best().1, mean_z, population_spread: spread / bounds.dim() as f64 }
    }

    fn converged(&self, threshold: f64, tol: f64) -> bool {
        let best = self.best().1;
        if !best.is_finite() {
            return false;
        }
        let near = self.fitness.iter().filter(|&&z| (z - best).abs() <= tol * best.abs().max(1e-300)).count();
        near as f64 >= threshold * self.fitness.len() as f64
    }
}

fn stream_rng(seed: u64, stage: Stage, stream: u64) -> ChaCha8Rng {
    let salt = match stage {
        Stage::Training => 0x0001,
        Stage::Validation => 0x0002,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (salt << 48));
    rng.set_stream(stream);
    rng
}

fn evaluate_all<O: Objective>(objective: &O, members: &[Vec<f64>], stage: Stage) -> Vec<f64> {
    members
        .par_iter()
        .map(|x| objective.evaluate(x, stage).ok().filter(|z| z.is_finite()).unwrap_or(f64::INFINITY))
        .collect()
}

fn latin_hypercube(n: usize, bounds: &Bounds, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut members = vec![vec![0.0; bounds.dim()]; n];
    for d in 0..bounds.dim() {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        for (i, s) in strata.into_iter().enumerate() {
            let u = (s as f64 + rng.gen::<f64>()) / n as f64;
            members[i][d] = bounds.lower[d] + u * bounds.width(d);
        }
    }
    members
}

fn evolve_stage<O: Objective>(
    objective: &O,
    pop: &mut Population,
    stage: Stage,
    sc: &StageConfig,
    cfg: &OptimizerConfig,
    bounds: &Bounds,
    history: &mut Vec<HistoryRow>,
) -> bool {
    let n = pop.members.len();
    let dim = bounds.dim();
    history.push(pop.row(stage, 0, bounds));
    if pop.converged(cfg.convergence_threshold, cfg.convergence_tolerance) {
        return true;
    }
    for generation in 1..=sc.max_generations {
        let trials: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut rng = stream_rng(cfg.seed, stage, (generation * n + i) as u64);
                let mut pick = || loop {
                    let r = rng.gen_range(0..n);
                    if r != i {
                        break r;
                    }
                };
                let r1 = pick();
                let (mut r2, mut r3) = (pick(), pick());
                while r2 == r1 {
                    r2 = pick();
                }
                while r3 == r1 || r3 == r2 {
                    r3 = pick();
                }
                let forced = rng.gen_range(0..dim);
                let mut trial = pop.members[i].clone();
                for d in 0..dim {
                    if d == forced || rng.gen::<f64>() < sc.crossover {
                        trial[d] = pop.members[r1][d] + sc.mutation * (pop.members[r2][d] - pop.members[r3][d]);
                    }
                }
                bounds.clamp(&mut trial);
                trial
            })
            .collect();
        let scores = evaluate_all(objective, &trials, stage);
        for (i, (trial, z)) in trials.into_iter().zip(scores).enumerate() {
            if z <= pop.fitness[i] {
                pop.members[i] = trial;
                pop.fitness[i] = z;
            }
        }
        history.push(pop.row(stage, generation, bounds));
        if pop.converged(cfg.convergence_threshold, cfg.convergence_tolerance) {
            return true;
        }
    }
    false
}

/// Phase I explores from a Latin hypercube on the training sets; phase II refines the final
/// population on fresh validation sets with lower rates.
pub fn two_phase_optimize<O: Objective>(
    cfg: &OptimizerConfig,
    bounds: &Bounds,
    objective: &O,
    initial: Option<&[f64]>,
) -> Result<OptimizeResult> {
    cfg.validate()?;
    bounds.validate()?;
    if objective.dim() != bounds.dim() {
        return Err(Error::DimensionMismatch(objective.dim(), bounds.dim()));
    }
    let mut members = latin_hypercube(cfg.population, bounds, &mut stream_rng(cfg.seed, Stage::Training, u64::MAX));
    if let Some(x) = initial {
        if !bounds.contains(x) {
            return Err(Error::invalid("initial candidate lies outside the bounds"));
        }
        members[0] = x.to_vec();
    }
    let fitness = evaluate_all(objective, &members, Stage::Training);
    let mut pop = Population { members, fitness };
    let initial_best = pop.best().1;
    let mut history = Vec::new();
    let phase1_converged = evolve_stage(objective, &mut pop, Stage::Training, &cfg.phase1, cfg, bounds, &mut history);
    let phase1_best_z = pop.best().1;
    let improved = phase1_best_z < initial_best;

    pop.fitness = evaluate_all(objective, &pop.members, Stage::Validation);
    let start = history.len();
    evolve_stage(objective, &mut pop, Stage::Validation, &cfg.phase2, cfg, bounds, &mut history);
    let phase2_variation = history[start..]
        .iter()
        .map(|r| (r.mean_z - phase1_best_z).abs() / phase1_best_z.abs())
        .fold(0.0, f64::max);
    let (bi, best_z) = pop.best();
    if !best_z.is_finite() {
        return Err(Error::numerical("every candidate failed to evaluate"));
    }
    Ok(OptimizeResult {
        best: pop.members[bi].clone(),
        best_z,
        phase1_best_z,
        phase1_converged,
        phase2_variation,
        no_improvement: !improved,
        history,
        population: pop.members,
    })
}

pub fn write_history_csv<W: Write>(mut w: W, history: &[HistoryRow]) -> Result<()> {
    writeln!(w, "# units: Z: dimensionless; spread: fraction of bound width; version: {FORMAT_VERSION}")?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iteration", "phase", "generation", "best_Z", "mean_Z", "population_spread"])?;
    for (k, r) in history.iter().enumerate() {
        let phase = match r.stage {
            Stage::Training => "1",
            Stage::Validation => "2",
        };
        out.write_record([
            k.to_string(),
            phase.to_string(),
            r.iteration.to_string(),
            format!("{:.12e}", r.best_z),
            format!("{:.12e}", r.mean_z),
            format!("{:.12e}", r.population_spread),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_round_trip() {
        let p = CalibParams::default();
        assert_eq!(CalibParams::from_slice(&p.to_vec()).unwrap(), p);
        assert_eq!(p.a_x1, 1.0);
        assert!(CalibParams::from_slice(&[0.0; 3]).is_err());
    }

    #[test]
    fn default_bounds_contain_identity() {
        let b = Bounds::calibration_default();
        assert!(b.contains(&IDENTITY));
    }
}
