//! Qutrit Pauli and Clifford groups, gate words and virtual-Z compilation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::gates;
use crate::math::{average_gate_fidelity, canonicalize_raw, UnitaryMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    HInv,
    X,
    XInv,
    X01,
    X12,
    X02,
    VirtualPhase,
}

impl GateKind {
    pub const PHYSICAL: [GateKind; 7] = [
        GateKind::H,
        GateKind::HInv,
        GateKind::X,
        GateKind::XInv,
        GateKind::X01,
        GateKind::X12,
        GateKind::X02,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::HInv => "H_inv",
            GateKind::X => "X",
            GateKind::XInv => "X_inv",
            GateKind::X01 => "X01",
            GateKind::X12 => "X12",
            GateKind::X02 => "X02",
            GateKind::VirtualPhase => "VZ",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::PHYSICAL.into_iter().chain([GateKind::VirtualPhase]).find(|k| k.name() == s)
    }

    /// Ideal matrix of a physical gate; the identity for `VirtualPhase`.
    pub fn ideal(self) -> UnitaryMatrix {
        match self {
            GateKind::H => gates::h(),
            GateKind::HInv => gates::h_inv(),
            GateKind::X => gates::x(),
            GateKind::XInv => gates::x_inv(),
            GateKind::X01 => gates::x01(),
            GateKind::X12 => gates::x12(),
            GateKind::X02 => gates::x02(),
            GateKind::VirtualPhase => UnitaryMatrix::identity(3),
        }
    }
}

/// A gate in a time-ordered circuit.
///
/// For `VirtualPhase`, `phases` defines `diag(1, e^{iφ₁}, e^{i(φ₁+φ₂)})`. For physical gates,
/// `phases` are the drive-phase offsets of the two tones, which realize `Z_φ† U Z_φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub phases: (f64, f64),
}

impl GateOp {
    pub fn physical(kind: GateKind) -> Self {
        Self { kind, phases: (0.0, 0.0) }
    }

    pub fn virtual_phase(phi1: f64, phi2: f64) -> Self {
        Self { kind: GateKind::VirtualPhase, phases: (phi1, phi2) }
    }

    pub fn is_virtual(&self) -> bool {
        self.kind == GateKind::VirtualPhase
    }

    pub fn frame(&self) -> UnitaryMatrix {
        gates::virtual_phase(self.phases.0, self.phases.1)
    }

    pub fn ideal_unitary(&self) -> UnitaryMatrix {
        if self.is_virtual() {
            return self.frame();
        }
        let z = self.frame();
        &(&z.adjoint() * &self.kind.ideal()) * &z
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.phases;
        if self.is_virtual() {
            write!(f, "VZ({a:.9},{b:.9})")
        } else if a == 0.0 && b == 0.0 {
            write!(f, "{}", self.kind.name())
        } else {
            write!(f, "{}[{a:.9},{b:.9}]", self.kind.name())
        }
    }
}

/// Product of a time-ordered circuit: the last gate is the leftmost factor.
pub fn circuit_unitary(ops: &[GateOp]) -> UnitaryMatrix {
    ops.iter().fold(UnitaryMatrix::identity(3), |acc, op| &op.ideal_unitary() * &acc)
}

/// Letters of Clifford words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Generator {
    H,
    S,
    X,
    Z,
    HInv,
    XInv,
    X01,
    X12,
    X02,
    S2,
    Z2,
}

impl Generator {
    pub fn op(self) -> GateOp {
        use gates::{S_PHASES as S, Z_PHASES as Z};
        match self {
            Generator::H => GateOp::physical(GateKind::H),
            Generator::HInv => GateOp::physical(GateKind::HInv),
            Generator::X => GateOp::physical(GateKind::X),
            Generator::XInv => GateOp::physical(GateKind::XInv),
            Generator::X01 => GateOp::physical(GateKind::X01),
            Generator::X12 => GateOp::physical(GateKind::X12),
            Generator::X02 => GateOp::physical(GateKind::X02),
            Generator::S => GateOp::virtual_phase(S.0, S.1),
            Generator::S2 => GateOp::virtual_phase(2.0 * S.0, 2.0 * S.1),
            Generator::Z => GateOp::virtual_phase(Z.0, Z.1),
            Generator::Z2 => GateOp::virtual_phase(2.0 * Z.0, 2.0 * Z.1),
        }
    }

    pub fn is_physical(self) -> bool {
        !self.op().is_virtual()
    }

    pub fn label(self) -> &'static str {
        match self {
            Generator::H => "H",
            Generator::S => "S",
            Generator::X => "X",
            Generator::Z => "Z",
            Generator::HInv => "H_inv",
            Generator::XInv => "X_inv",
            Generator::X01 => "X01",
            Generator::X12 => "X12",
            Generator::X02 => "X02",
            Generator::S2 => "S2",
            Generator::Z2 => "Z2",
        }
    }

    /// Contribution to the `(H, S, X, Z)` gate counts.
    fn counts(self) -> [f64; 4] {
        match self {
            Generator::H | Generator::HInv => [1.0, 0.0, 0.0, 0.0],
            Generator::S => [0.0, 1.0, 0.0, 0.0],
            Generator::S2 => [0.0, 2.0, 0.0, 0.0],
            Generator::X | Generator::XInv | Generator::X01 | Generator::X12 | Generator::X02 => {
                [0.0, 0.0, 1.0, 0.0]
            }
            Generator::Z => [0.0, 0.0, 0.0, 1.0],
            Generator::Z2 => [0.0, 0.0, 0.0, 2.0],
        }
    }
}

/// How the stored word of each Clifford element is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// Shortest word over {H, S, X, Z}; ties broken lexicographically in that order.
    ShortestWord,
    /// Fewest physical pulses over {H, H⁻¹, X, X⁻¹, X01, X12, X02} with free virtual
    /// {S, S², Z, Z²}; ties broken by word length, then lexicographically.
    FewestPulses,
    /// Shortest word over the minimal generating set {H, S}.
    MinimalSet,
}

impl Convention {
    pub fn alphabet(self) -> &'static [Generator] {
        use Generator::*;
        match self {
            Convention::ShortestWord => &[H, S, X, Z],
            Convention::FewestPulses => &[H, S, X, Z, HInv, XInv, X01, X12, X02, S2, Z2],
            Convention::MinimalSet => &[H, S],
        }
    }

    fn key(self, word: &[Generator]) -> (usize, usize) {
        match self {
            Convention::FewestPulses => (word.iter().filter(|g| g.is_physical()).count(), word.len()),
            _ => (0, word.len()),
        }
    }

    fn better(self, a: &[Generator], b: &[Generator]) -> bool {
        match self.key(a).cmp(&self.key(b)) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => a < b,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CliffordElement {
    pub canonical: UnitaryMatrix,
    pub word: Vec<Generator>,
}

impl CliffordElement {
    /// The stored word as time-ordered gate operations.
    pub fn ops(&self) -> Vec<GateOp> {
        self.word.iter().map(|g| g.op()).collect()
    }
}

/// Average number of H-type, S, X-type and Z gates per element.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GateCounts {
    pub h: f64,
    pub s: f64,
    pub x: f64,
    pub z: f64,
}

impl GateCounts {
    pub fn physical(&self) -> f64 {
        self.h + self.x
    }
}

type Key = [i64; 18];

const KEY_SCALE: f64 = 1e8;
const SAFETY_BOUND: usize = 10_000;

fn key_of(m: &DMatrix<C64>) -> Key {
    let c = canonicalize_raw(m);
    let mut k = [0i64; 18];
    for (i, z) in c.iter().enumerate().take(9) {
        // Column-major order; +0.0 normalizes negative zero.
        k[2 * i] = (z.re * KEY_SCALE).round() as i64;
        k[2 * i + 1] = (z.im * KEY_SCALE).round() as i64;
    }
    k
}

/// The 216-element Clifford group modulo phase, with multiplication and inverse tables.
#[derive(Clone, Debug)]
pub struct CliffordTable {
    pub convention: Convention,
    elements: Vec<CliffordElement>,
    index: HashMap<Key, usize>,
    product: Vec<u16>,
    inverse: Vec<u16>,
}

/// Closure of the identity under the default alphabet.
pub fn enumerate_clifford() -> Result<CliffordTable> {
    CliffordTable::enumerate(Convention::ShortestWord)
}

impl CliffordTable {
    pub fn enumerate(convention: Convention) -> Result<Self> {
        let alphabet = convention.alphabet();
        let gens: Vec<DMatrix<C64>> =
            alphabet.iter().map(|g| g.op().ideal_unitary().into_matrix()).collect();
        let id = DMatrix::<C64>::identity(3, 3);
        let mut mats = vec![canonicalize_raw(&id)];
        let mut words: Vec<Vec<Generator>> = vec![vec![]];
        let mut index = HashMap::new();
        index.insert(key_of(&id), 0usize);
        let mut head = 0;
        while head < mats.len() {
            for (gi, g) in gens.iter().enumerate() {
                let m = g * &mats[head];
                let k = key_of(&m);
                if !index.contains_key(&k) {
                    if mats.len() >= SAFETY_BOUND {
                        return Err(Error::numerical("Clifford closure exceeded the safety bound"));
                    }
                    index.insert(k, mats.len());
                    let mut w = words[head].clone();
                    w.push(alphabet[gi]);
                    words.push(w);
                    mats.push(canonicalize_raw(&m));
                }
            }
            head += 1;
        }
        // Relax words to the optimum under the convention's ordering.
        let n = mats.len();
        let succ: Vec<Vec<usize>> = (0..n)
            .map(|i| gens.iter().map(|g| index[&key_of(&(g * &mats[i]))]).collect())
            .collect();
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..n {
                for (gi, &j) in succ[i].iter().enumerate() {
                    let mut cand = words[i].clone();
                    cand.push(alphabet[gi]);
                    if convention.better(&cand, &words[j]) {
                        words[j] = cand;
                        changed = true;
                    }
                }
            }
        }
        let elements: Vec<CliffordElement> = mats
            .into_iter()
            .zip(words)
            .map(|(m, word)| CliffordElement { canonical: UnitaryMatrix::from_matrix_unchecked(m), word })
            .collect();
        let mut product = vec![0u16; n * n];
        let mut inverse = vec![u16::MAX; n];
        for a in 0..n {
            for b in 0..n {
                let m = elements[b].canonical.matrix() * elements[a].canonical.matrix();
                let c = *index
                    .get(&key_of(&m))
                    .ok_or_else(|| Error::numerical("Clifford set is not closed under multiplication"))?;
                product[a * n + b] = c as u16;
                if c == 0 {
                    inverse[a] = b as u16;
                }
            }
        }
        if inverse.contains(&u16::MAX) {
            return Err(Error::numerical("Clifford element without inverse"));
        }
        Ok(Self { convention, elements, index, product, inverse })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &CliffordElement {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[CliffordElement] {
        &self.elements
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// Index of `U_b·U_a`, i.e. `a` applied first.
    pub fn then(&self, a: usize, b: usize) -> usize {
        self.product[a * self.len() + b] as usize
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }

    pub fn lookup(&self, u: &UnitaryMatrix) -> Option<usize> {
        if u.dim() != 3 {
            return None;
        }
        self.index.get(&key_of(u.matrix())).copied()
    }

    pub fn average_counts(&self) -> GateCounts {
        let mut acc = [0.0; 4];
        for e in &self.elements {
            for g in &e.word {
                for (a, c) in acc.iter_mut().zip(g.counts()) {
                    *a += c;
                }
            }
        }
        let n = self.len() as f64;
        GateCounts { h: acc[0] / n, s: acc[1] / n, x: acc[2] / n, z: acc[3] / n }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let elems: Vec<_> = self
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let m = e.canonical.matrix();
                let rows: Vec<Vec<[f64; 2]>> =
                    (0..3).map(|r| (0..3).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect();
                json!({
                    "index": i,
                    "canonical": rows,
                    "word": e.ops().iter().map(|o| o.to_string()).collect::<Vec<_>>(),
                    "generators": e.word.iter().map(|g| g.label()).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "units": "dimensionless; phases in rad",
            "version": crate::schedule::FORMAT_VERSION,
            "convention": self.convention,
            "size": self.len(),
            "average_counts": self.average_counts(),
            "elements": elems,
        })
    }
}

/// The Pauli generators `(X, Z)`.
pub fn pauli_generators() -> (UnitaryMatrix, UnitaryMatrix) {
    (gates::x(), gates::z())
}

/// Whether `u` is `X^a Z^b` up to global phase.
pub fn is_pauli(u: &UnitaryMatrix) -> bool {
    let (x, z) = pauli_generators();
    let k = key_of(u.matrix());
    (0..3).any(|a| (0..3).any(|b| key_of((&x.pow(a) * &z.pow(b)).matrix()) == k))
}

/// Letters of `X = H·S·H²·S²·H` as a time-ordered word (rightmost factor first).
pub fn minimal_set_word() -> Vec<Generator> {
    use Generator::{H, S};
    let mut w = vec![H, S, H, H, S, S, H];
    w.reverse();
    w
}

/// Fidelity between a generator word and a target, modulo global phase.
pub fn word_fidelity(word: &[Generator], target: &UnitaryMatrix) -> f64 {
    let ops: Vec<GateOp> = word.iter().map(|g| g.op()).collect();
    average_gate_fidelity(&circuit_unitary(&ops), target).unwrap_or(0.0)
}

/// Checks `X = H·S·H²·S²·H` and returns the match fidelity.
pub fn verify_minimal_set_identity() -> f64 {
    word_fidelity(&minimal_set_word(), &gates::x())
}

/// A circuit with all virtual phases moved to a single trailing phase gate.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledCircuit {
    pub physical: Vec<GateOp>,
    pub trailing: GateOp,
}

impl CompiledCircuit {
    pub fn unitary(&self) -> UnitaryMatrix {
        &self.trailing.ideal_unitary() * &circuit_unitary(&self.physical)
    }
}

/// Pushes every virtual phase to the end of a time-ordered circuit.
///
/// A gate `G` preceded by accumulated phase `Z` becomes `Z† G Z`, realized by adding the
/// accumulated phases to its drive-phase offsets.
pub fn compile_virtual_z(circuit: &[GateOp]) -> CompiledCircuit {
    let mut acc = (0.0, 0.0);
    let mut physical = Vec::with_capacity(circuit.len());
    for op in circuit {
        if op.is_virtual() {
            acc = (acc.0 + op.phases.0, acc.1 + op.phases.1);
        } else {
            physical.push(GateOp { kind: op.kind, phases: (op.phases.0 + acc.0, op.phases.1 + acc.1) });
        }
    }
    CompiledCircuit { physical, trailing: GateOp::virtual_phase(acc.0, acc.1) }
}
