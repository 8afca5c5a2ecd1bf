//! Gate-level circuits: construction, dense simulation, controlled-swap
//! decompositions, Pauli/readout noise, and shot sampling.
//!
//! Qubit 0 is the most significant bit of a basis index, matching the
//! rest of the crate. Outcome bitstrings written by this module keep that
//! order ("internal" labels); the published histogram bit order is
//! produced only by `format_outcome_label`.

use crate::channels::DensityMatrix;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::tensor::{Complex64, ComplexMatrix};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Dense simulation refuses circuits wider than this.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    X,
    H,
    /// pi/8 phase gate; present because the Toffoli decomposition needs a
    /// non-Clifford 1-qubit gate.
    T,
    Tdag,
    Cnot,
    Swap,
    Toffoli,
    Cswap,
    /// Swap of two targets conditioned on the control being |0>.
    AntiCswap,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::X | GateKind::H | GateKind::T | GateKind::Tdag => 1,
            GateKind::Cnot | GateKind::Swap => 2,
            GateKind::Toffoli | GateKind::Cswap | GateKind::AntiCswap => 3,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::T => "T",
            GateKind::Tdag => "TDAG",
            GateKind::Cnot => "CNOT",
            GateKind::Swap => "SWAP",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::Cswap => "CSWAP",
            GateKind::AntiCswap => "ANTI_CSWAP",
        }
    }

    pub fn from_token(s: &str) -> Option<Self> {
        Some(match s {
            "X" => GateKind::X,
            "H" => GateKind::H,
            "T" => GateKind::T,
            "TDAG" => GateKind::Tdag,
            "CNOT" => GateKind::Cnot,
            "SWAP" => GateKind::Swap,
            "TOFFOLI" => GateKind::Toffoli,
            "CSWAP" => GateKind::Cswap,
            "ANTI_CSWAP" => GateKind::AntiCswap,
            _ => return None,
        })
    }

    /// Local unitary on `arity` qubits; the first listed qubit is the most
    /// significant local bit (controls come first).
    fn local_matrix(self) -> ComplexMatrix {
        let one = Complex64::new(1.0, 0.0);
        let t_phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let permutation = |dim: usize, swap: (usize, usize)| {
            let mut m = ComplexMatrix::zeros(dim, dim);
            for i in 0..dim {
                let j = if i == swap.0 {
                    swap.1
                } else if i == swap.1 {
                    swap.0
                } else {
                    i
                };
                m.set(j, i, one);
            }
            m
        };
        match self {
            GateKind::X => permutation(2, (0, 1)),
            GateKind::H => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                ComplexMatrix::new(2, 2, vec![h, h, h, -h]).expect("static gate")
            }
            GateKind::T => {
                ComplexMatrix::new(2, 2, vec![one, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), t_phase])
                    .expect("static gate")
            }
            GateKind::Tdag => ComplexMatrix::new(
                2,
                2,
                vec![one, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), t_phase.conj()],
            )
            .expect("static gate"),
            // |10> <-> |11|: flip target when the control is set
            GateKind::Cnot => permutation(4, (2, 3)),
            GateKind::Swap => permutation(4, (1, 2)),
            GateKind::Toffoli => permutation(8, (6, 7)),
            GateKind::Cswap => permutation(8, (5, 6)),
            GateKind::AntiCswap => permutation(8, (1, 2)),
        }
    }
}

/// One gate instance: kind plus the qubits it touches, controls first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidGate(format!(
                "{} takes {} qubits, got {:?}",
                kind.token(),
                kind.arity(),
                qubits
            )));
        }
        let mut sorted = qubits.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != qubits.len() {
            return Err(Error::InvalidGate(format!(
                "{} qubits must be distinct, got {:?}",
                kind.token(),
                qubits
            )));
        }
        Ok(Self { kind, qubits })
    }

    pub fn x(q: usize) -> Self {
        Self { kind: GateKind::X, qubits: vec![q] }
    }

    pub fn h(q: usize) -> Self {
        Self { kind: GateKind::H, qubits: vec![q] }
    }

    pub fn t(q: usize) -> Self {
        Self { kind: GateKind::T, qubits: vec![q] }
    }

    pub fn tdag(q: usize) -> Self {
        Self { kind: GateKind::Tdag, qubits: vec![q] }
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Self::new(GateKind::Cnot, vec![control, target])
    }

    pub fn swap(a: usize, b: usize) -> Result<Self> {
        Self::new(GateKind::Swap, vec![a, b])
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Result<Self> {
        Self::new(GateKind::Toffoli, vec![c1, c2, target])
    }

    pub fn cswap(control: usize, a: usize, b: usize) -> Result<Self> {
        Self::new(GateKind::Cswap, vec![control, a, b])
    }

    pub fn anti_cswap(control: usize, a: usize, b: usize) -> Result<Self> {
        Self::new(GateKind::AntiCswap, vec![control, a, b])
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.token())?;
        for q in &self.qubits {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

/// Ordered gate list on a fixed register width. The protocol circuits use
/// 4-5 qubits; anything up to `MAX_QUBITS` simulates, wider is refused.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidCircuit("zero-width circuit".into()));
        }
        if n_qubits > MAX_QUBITS {
            return Err(Error::InvalidCircuit(format!(
                "{n_qubits} qubits exceeds the dense-simulation limit of {MAX_QUBITS}"
            )));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn with_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::InvalidCircuit(format!(
                "gate {gate} touches qubit {q}, circuit has {}",
                self.n_qubits
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }
}

/// Embeds a local unitary on the listed qubits into the full register.
/// The first listed qubit is the most significant local bit.
fn embed_gate(n_qubits: usize, local: &ComplexMatrix, qubits: &[usize]) -> ComplexMatrix {
    let dim = 1 << n_qubits;
    let arity = qubits.len();
    let bit_of = |x: usize, q: usize| (x >> (n_qubits - 1 - q)) & 1;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut loc_col = 0usize;
        for &q in qubits {
            loc_col = (loc_col << 1) | bit_of(col, q);
        }
        for loc_row in 0..(1 << arity) {
            let v = local.get(loc_row, loc_col);
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut row = col;
            for (k, &q) in qubits.iter().enumerate() {
                let shift = n_qubits - 1 - q;
                let bit = (loc_row >> (arity - 1 - k)) & 1;
                row = (row & !(1 << shift)) | (bit << shift);
            }
            out.set(row, col, v);
        }
    }
    out
}

/// Full-register unitary of the circuit, gates applied left to right.
pub fn build_unitary(c: &Circuit) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(c.dim());
    for gate in c.gates() {
        let g = embed_gate(c.n_qubits(), &gate.kind.local_matrix(), &gate.qubits);
        u = g.matmul(&u).expect("square product");
    }
    u
}

/// Statevector with a scratch buffer so repeated gate application does not
/// allocate.
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let dim = 1 << n_qubits;
        assert!(index < dim, "basis index out of range");
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Self {
            n_qubits,
            amps,
            scratch: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        self.apply_local(&gate.kind.local_matrix(), &gate.qubits);
    }

    pub fn apply_local(&mut self, local: &ComplexMatrix, qubits: &[usize]) {
        let n = self.n_qubits;
        let arity = qubits.len();
        let bit_of = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
        self.scratch.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        for (col, &amp) in self.amps.iter().enumerate() {
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut loc_col = 0usize;
            for &q in qubits {
                loc_col = (loc_col << 1) | bit_of(col, q);
            }
            for loc_row in 0..(1 << arity) {
                let v = local.get(loc_row, loc_col);
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut row = col;
                for (k, &q) in qubits.iter().enumerate() {
                    let shift = n - 1 - q;
                    let bit = (loc_row >> (arity - 1 - k)) & 1;
                    row = (row & !(1 << shift)) | (bit << shift);
                }
                self.scratch[row] += v * amp;
            }
        }
        std::mem::swap(&mut self.amps, &mut self.scratch);
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }
}

/// Controlled-swap into CNOT + Toffoli; the open-control variant wraps the
/// same sequence in X on the control.
pub fn decompose_cswap(g: &Gate) -> Result<Vec<Gate>> {
    let (control, a, b, open_control) = match g.kind {
        GateKind::Cswap => (g.qubits[0], g.qubits[1], g.qubits[2], false),
        GateKind::AntiCswap => (g.qubits[0], g.qubits[1], g.qubits[2], true),
        _ => {
            return Err(Error::InvalidGate(format!(
                "cannot decompose {} as a controlled swap",
                g.kind.token()
            )))
        }
    };
    let core = vec![
        Gate::cnot(b, a)?,
        Gate::toffoli(control, a, b)?,
        Gate::cnot(b, a)?,
    ];
    if open_control {
        let mut seq = vec![Gate::x(control)];
        seq.extend(core);
        seq.push(Gate::x(control));
        Ok(seq)
    } else {
        Ok(core)
    }
}

/// Standard 15-gate Toffoli decomposition into H, T, Tdag, and CNOT.
pub fn decompose_toffoli(g: &Gate) -> Result<Vec<Gate>> {
    if g.kind != GateKind::Toffoli {
        return Err(Error::InvalidGate(format!(
            "cannot decompose {} as a Toffoli",
            g.kind.token()
        )));
    }
    let (c1, c2, t) = (g.qubits[0], g.qubits[1], g.qubits[2]);
    Ok(vec![
        Gate::h(t),
        Gate::cnot(c2, t)?,
        Gate::tdag(t),
        Gate::cnot(c1, t)?,
        Gate::t(t),
        Gate::cnot(c2, t)?,
        Gate::tdag(t),
        Gate::cnot(c1, t)?,
        Gate::t(c2),
        Gate::t(t),
        Gate::h(t),
        Gate::cnot(c1, c2)?,
        Gate::t(c1),
        Gate::tdag(c2),
        Gate::cnot(c1, c2)?,
    ])
}

/// Rewrites every 3-qubit gate down to 1- and 2-qubit gates. Required
/// before noise insertion, which attaches errors to 1q/2q gates only.
pub fn decompose_to_2q(c: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(c.n_qubits())?;
    for gate in c.gates() {
        match gate.kind {
            GateKind::Cswap | GateKind::AntiCswap => {
                for g in decompose_cswap(gate)? {
                    if g.kind == GateKind::Toffoli {
                        for gg in decompose_toffoli(&g)? {
                            out.push(gg)?;
                        }
                    } else {
                        out.push(g)?;
                    }
                }
            }
            GateKind::Toffoli => {
                for g in decompose_toffoli(gate)? {
                    out.push(g)?;
                }
            }
            _ => out.push(gate.clone())?,
        }
    }
    Ok(out)
}

/// Register layout of the 4-qubit SWITCH experiment: control, work,
/// reservoir A, reservoir B.
pub const Q_CONTROL: usize = 0;
pub const Q_WORK: usize = 1;
pub const Q_RES_A: usize = 2;
pub const Q_RES_B: usize = 3;

/// The four-controlled-swap realization of the SWITCH: with the control
/// set, work passes through reservoir A then B; with it clear, B then A.
pub fn switch_circuit_full() -> Circuit {
    Circuit::with_gates(
        4,
        vec![
            Gate::cswap(Q_CONTROL, Q_WORK, Q_RES_A).expect("static circuit"),
            Gate::cswap(Q_CONTROL, Q_WORK, Q_RES_B).expect("static circuit"),
            Gate::anti_cswap(Q_CONTROL, Q_WORK, Q_RES_B).expect("static circuit"),
            Gate::anti_cswap(Q_CONTROL, Q_WORK, Q_RES_A).expect("static circuit"),
        ],
    )
    .expect("static circuit")
}

/// Three-gate equivalent of `switch_circuit_full`, obtained by circuit
/// identities: the two middle swaps collapse into one unconditional swap.
pub fn switch_circuit_simplified() -> Circuit {
    Circuit::with_gates(
        4,
        vec![
            Gate::cswap(Q_CONTROL, Q_WORK, Q_RES_A).expect("static circuit"),
            Gate::swap(Q_WORK, Q_RES_B).expect("static circuit"),
            Gate::anti_cswap(Q_CONTROL, Q_WORK, Q_RES_A).expect("static circuit"),
        ],
    )
    .expect("static circuit")
}

/// The runnable experiment: Hadamards on the control realize the |+>
/// preparation and the +/- measurement in the computational basis.
pub fn switch_experiment_circuit(simplified: bool) -> Circuit {
    let body = if simplified {
        switch_circuit_simplified()
    } else {
        switch_circuit_full()
    };
    let mut c = Circuit::new(4).expect("static circuit");
    c.push(Gate::h(Q_CONTROL)).expect("static circuit");
    for g in body.gates() {
        c.push(g.clone()).expect("static circuit");
    }
    c.push(Gate::h(Q_CONTROL)).expect("static circuit");
    c
}

/// Depth (greedy layering), total gate count, and 2-qubit gate count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GateMetrics {
    pub depth: usize,
    pub total_gates: usize,
    pub two_qubit_gates: usize,
}

pub fn gate_metrics(c: &Circuit) -> GateMetrics {
    let mut busy_until = vec![0usize; c.n_qubits()];
    let mut depth = 0;
    let mut two_qubit = 0;
    for gate in c.gates() {
        let layer = 1 + gate.qubits.iter().map(|&q| busy_until[q]).max().unwrap_or(0);
        for &q in &gate.qubits {
            busy_until[q] = layer;
        }
        depth = depth.max(layer);
        if gate.kind.arity() == 2 {
            two_qubit += 1;
        }
    }
    GateMetrics {
        depth,
        total_gates: c.gates().len(),
        two_qubit_gates: two_qubit,
    }
}

/// Stochastic error model: after every gate, each participating qubit
/// independently suffers X, Y, or Z with the configured probabilities
/// (one triple for 1-qubit gates, one for 2-qubit gates); classical
/// readout bits flip 0->1 and 1->0 with the given probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub pauli_after_1q: [f64; 3],
    pub pauli_after_2q: [f64; 3],
    pub readout_flip: [f64; 2],
}

impl NoiseSpec {
    pub fn zero() -> Self {
        Self {
            pauli_after_1q: [0.0; 3],
            pauli_after_2q: [0.0; 3],
            readout_flip: [0.0; 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let triples = [("pauli_after_1q", self.pauli_after_1q), ("pauli_after_2q", self.pauli_after_2q)];
        for (name, t) in triples {
            if t.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidNoise(format!("{name} probabilities must lie in [0,1]")));
            }
            if t.iter().sum::<f64>() > 1.0 + 1e-12 {
                return Err(Error::InvalidNoise(format!("{name} probabilities sum past 1")));
            }
        }
        if self.readout_flip.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidNoise("readout_flip probabilities must lie in [0,1]".into()));
        }
        Ok(())
    }

    fn pauli_for_arity(&self, arity: usize) -> [f64; 3] {
        if arity == 1 {
            self.pauli_after_1q
        } else {
            self.pauli_after_2q
        }
    }

    pub fn is_zero(&self) -> bool {
        self.pauli_after_1q == [0.0; 3]
            && self.pauli_after_2q == [0.0; 3]
            && self.readout_flip == [0.0; 2]
    }
}

/// Aggregated measurement outcomes. Keys are internal-order bitstrings:
/// leftmost character is qubit 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShotResult {
    pub counts: BTreeMap<String, u64>,
    pub n_shots: u64,
    pub bit_order: String,
}

pub const INTERNAL_BIT_ORDER: &str = "leftmost bit = qubit 0";

fn internal_label(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if (index >> (n_qubits - 1 - q)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parses an internal-order bitstring into a basis index.
pub fn parse_basis_label(label: &str, n_qubits: usize) -> Result<usize> {
    if label.len() != n_qubits {
        return Err(Error::InvalidScenario(format!(
            "basis state {label:?} has {} bits, circuit has {n_qubits} qubits",
            label.len()
        )));
    }
    let mut idx = 0usize;
    for ch in label.chars() {
        idx = (idx << 1)
            | match ch {
                '0' => 0,
                '1' => 1,
                _ => {
                    return Err(Error::InvalidScenario(format!(
                        "basis state {label:?} contains a character other than 0/1"
                    )))
                }
            };
    }
    Ok(idx)
}

/// Converts internal-order experiment bits (control, work, reservoir A,
/// reservoir B) into the published histogram label, whose bits run from
/// least to most significant as control, reservoir A, work, reservoir B.
pub fn format_outcome_label(bits_by_qubit: [u8; 4]) -> String {
    let [control, work, res_a, res_b] = bits_by_qubit;
    format!("{res_b}{work}{res_a}{control}")
}

/// Re-keys an internal 4-bit label into the published histogram order.
pub fn outcome_label_from_internal(internal: &str) -> Result<String> {
    let idx = parse_basis_label(internal, 4)?;
    let bit = |q: usize| ((idx >> (3 - q)) & 1) as u8;
    Ok(format_outcome_label([bit(0), bit(1), bit(2), bit(3)]))
}

fn pauli_matrices() -> [ComplexMatrix; 3] {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        ComplexMatrix::new(2, 2, vec![z, one, one, z]).expect("static"),
        ComplexMatrix::new(2, 2, vec![z, -i, i, z]).expect("static"),
        ComplexMatrix::new(2, 2, vec![one, z, z, -one]).expect("static"),
    ]
}

/// Samples computational-basis outcomes of the circuit on a basis-state
/// input. Noiseless runs draw from the exact output distribution; with a
/// `NoiseSpec`, 3-qubit gates are first decomposed and each shot inserts
/// stochastic Pauli errors per gate and readout flips at the end. Shot i
/// uses RNG substream i of the seed, so results do not depend on
/// evaluation order.
pub fn simulate_shots(
    c: &Circuit,
    input_basis_state: &str,
    noise: Option<&NoiseSpec>,
    n_shots: u64,
    seed: u64,
) -> Result<ShotResult> {
    parse_basis_label(input_basis_state, c.n_qubits())?;
    let mut weights = BTreeMap::new();
    weights.insert(input_basis_state.to_string(), 1.0);
    run_shots(c, &weights, noise, n_shots, seed)
}

/// Per shot, first draws an input basis state from `weights`, then samples
/// the circuit once; this realizes mixed-state inputs by reweighting basis
/// states. A point mass is sampled identically to `simulate_shots`.
pub fn mixed_input_run(
    c: &Circuit,
    weights: &BTreeMap<String, f64>,
    noise: Option<&NoiseSpec>,
    n_shots: u64,
    seed: u64,
) -> Result<ShotResult> {
    if weights.is_empty() {
        return Err(Error::InvalidScenario("no input weights given".into()));
    }
    let mut total = 0.0;
    for (label, &w) in weights {
        parse_basis_label(label, c.n_qubits())?;
        if !(0.0..=1.0 + 1e-9).contains(&w) {
            return Err(Error::InvalidScenario(format!(
                "weight {w} for input {label} lies outside [0,1]"
            )));
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidScenario(format!(
            "input weights sum to {total}, expected 1"
        )));
    }
    run_shots(c, weights, noise, n_shots, seed)
}

fn run_shots(
    c: &Circuit,
    weights: &BTreeMap<String, f64>,
    noise: Option<&NoiseSpec>,
    n_shots: u64,
    seed: u64,
) -> Result<ShotResult> {
    if n_shots == 0 {
        return Err(Error::InvalidScenario("n_shots must be positive".into()));
    }
    if let Some(ns) = noise {
        ns.validate()?;
    }
    let noise = noise.filter(|ns| !ns.is_zero());
    let circuit = match noise {
        Some(_) => decompose_to_2q(c)?,
        None => c.clone(),
    };
    let inputs: Vec<(usize, f64)> = weights
        .iter()
        .map(|(label, &w)| Ok((parse_basis_label(label, c.n_qubits())?, w)))
        .collect::<Result<_>>()?;
    let point_mass = inputs.len() == 1;
    let paulis = pauli_matrices();

    // noiseless runs reuse the exact per-input distribution
    let mut dist_cache: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for shot in 0..n_shots {
        let mut rng = substream(seed, shot);
        let input = if point_mass {
            inputs[0].0
        } else {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut chosen = inputs[inputs.len() - 1].0;
            for &(idx, w) in &inputs {
                acc += w;
                if u < acc {
                    chosen = idx;
                    break;
                }
            }
            chosen
        };
        let outcome = match noise {
            None => {
                let probs = dist_cache.entry(input).or_insert_with(|| {
                    let mut sv = StateVector::basis(circuit.n_qubits(), input);
                    for gate in circuit.gates() {
                        sv.apply_gate(gate);
                    }
                    sv.probabilities()
                });
                sample_index(probs, rng.gen())
            }
            Some(ns) => {
                let mut sv = StateVector::basis(circuit.n_qubits(), input);
                for gate in circuit.gates() {
                    sv.apply_gate(gate);
                    let triple = ns.pauli_for_arity(gate.kind.arity());
                    for &q in &gate.qubits {
                        let u: f64 = rng.gen();
                        if u < triple[0] {
                            sv.apply_local(&paulis[0], &[q]);
                        } else if u < triple[0] + triple[1] {
                            sv.apply_local(&paulis[1], &[q]);
                        } else if u < triple[0] + triple[1] + triple[2] {
                            sv.apply_local(&paulis[2], &[q]);
                        }
                    }
                }
                let mut outcome = sample_index(&sv.probabilities(), rng.gen());
                // readout errors touch only the reported classical bits
                let [p01, p10] = ns.readout_flip;
                for q in 0..circuit.n_qubits() {
                    let shift = circuit.n_qubits() - 1 - q;
                    let bit = (outcome >> shift) & 1;
                    let u: f64 = rng.gen();
                    let flip = if bit == 0 { u < p01 } else { u < p10 };
                    if flip {
                        outcome ^= 1 << shift;
                    }
                }
                outcome
            }
        };
        *counts.entry(internal_label(outcome, circuit.n_qubits())).or_insert(0) += 1;
    }
    Ok(ShotResult {
        counts,
        n_shots,
        bit_order: INTERNAL_BIT_ORDER.to_string(),
    })
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Exact density-matrix evolution through the circuit. With noise, 3-qubit
/// gates are decomposed and each gate is followed by the per-qubit Pauli
/// channel; readout flips do not apply here because no classical bits are
/// produced.
pub fn simulate_density(
    c: &Circuit,
    rho_in: &DensityMatrix,
    noise: Option<&NoiseSpec>,
) -> Result<DensityMatrix> {
    if rho_in.n_qubits() != c.n_qubits() {
        return Err(Error::DimMismatch(format!(
            "input state has {} qubits, circuit {}",
            rho_in.n_qubits(),
            c.n_qubits()
        )));
    }
    if let Some(ns) = noise {
        ns.validate()?;
    }
    let noise = noise.filter(|ns| !ns.is_zero());
    let circuit = match noise {
        Some(_) => decompose_to_2q(c)?,
        None => c.clone(),
    };
    let paulis = pauli_matrices();
    let n = circuit.n_qubits();
    let mut rho = rho_in.mat().clone();
    for gate in circuit.gates() {
        let u = embed_gate(n, &gate.kind.local_matrix(), &gate.qubits);
        rho = u.matmul(&rho)?.matmul(&u.dagger())?;
        if let Some(ns) = noise {
            let triple = ns.pauli_for_arity(gate.kind.arity());
            let p_id = 1.0 - triple.iter().sum::<f64>();
            for &q in &gate.qubits {
                let mut mixed = rho.scale_re(p_id);
                for (k, p) in triple.iter().enumerate() {
                    if *p == 0.0 {
                        continue;
                    }
                    let pk = embed_gate(n, &paulis[k], &[q]);
                    mixed = mixed.add(&pk.matmul(&rho)?.matmul(&pk.dagger())?.scale_re(*p));
                }
                rho = mixed;
            }
        }
    }
    DensityMatrix::from_matrix(rho)
}

/// Writes the line format `qubits N` followed by one `KIND q...` per gate.
pub fn circuit_to_text(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n", c.n_qubits());
    for gate in c.gates() {
        out.push_str(&gate.to_string());
        out.push('\n');
    }
    out
}

/// Parses the format written by `circuit_to_text`. Blank lines and lines
/// starting with `#` are ignored.
pub fn circuit_from_text(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().expect("nonempty line");
        if head == "qubits" {
            if circuit.is_some() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "duplicate qubits header".into(),
                });
            }
            let n: usize = parts
                .next()
                .ok_or(Error::Parse {
                    line: lineno,
                    msg: "qubits header needs a count".into(),
                })?
                .parse()
                .map_err(|_| Error::Parse {
                    line: lineno,
                    msg: "qubit count is not an integer".into(),
                })?;
            circuit = Some(Circuit::new(n).map_err(|e| Error::Parse {
                line: lineno,
                msg: e.to_string(),
            })?);
            continue;
        }
        let kind = GateKind::from_token(head).ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("unknown gate {head:?}"),
        })?;
        let qubits: Vec<usize> = parts
            .map(|p| {
                p.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad qubit index {p:?}"),
                })
            })
            .collect::<Result<_>>()?;
        let gate = Gate::new(kind, qubits).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        circuit
            .as_mut()
            .ok_or(Error::Parse {
                line: lineno,
                msg: "gate before qubits header".into(),
            })?
            .push(gate)
            .map_err(|e| Error::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
    }
    circuit.ok_or(Error::Parse {
        line: 0,
        msg: "no qubits header found".into(),
    })
}
