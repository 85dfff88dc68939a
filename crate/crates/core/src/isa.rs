// Copyright 2026 QuVIS Contributors
// SPDX-License-Identifier: Apache-2.0

//! Instruction sets and circuit lowering.
//!
//! Three sets are provided:
//!
//! * the 3-qubit variational set `U_0 … U_8`,
//! * a 2-qubit variational set (`U_0`, a Hadamard step and single
//!   phase-and-swap steps `S_2 … S_8`),
//! * the rotation/CNOT microinstruction set.
//!
//! Every variational gate is a short circuit of Hadamards, controlled phases
//! `CP(π/2^p)` and adjacent swaps on a linear chain. The QFT is compiled with
//! the linear-nearest-neighbour recursion `QFT_N = chain_N ; QFT_{N−1}`,
//! where `chain_N` is `H(1)` followed by `CP(π/2^p)` and `SWAP` on wires
//! `(p, p+1)` for `p = 1 … N−1`. The variational compilations close with one
//! virtual wire swap, a relabelling of two outputs that costs no time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{ErrorMetric, Evaluator, EvolutionConfig};
use crate::gates::{self, apply_placed, Gate};
use crate::golden;
use crate::linalg::ComplexMatrix;
use crate::optimizer::{best_of_restarts, OptimizationReport, OptimizerConfig};
use crate::schedule::PulseSchedule;
use crate::spin::{Axis, SpinChainModel};

use std::f64::consts::PI;

/// Field strength assumed by the rotation time model `T = |θ| / h`.
pub const ROTATION_FIELD: f64 = 10.0;
/// Time of one CNOT.
pub const CNOT_TIME: f64 = 0.5;
/// Time assumed for variational 2-qubit gates that have no reference table.
pub const NOMINAL_STEP_TIME: f64 = 1.5;

/// Circuit building blocks of the variational gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    H,
    Cp(f64),
    Swap,
}

impl Primitive {
    pub fn gate(self) -> Gate {
        match self {
            Primitive::H => gates::hadamard(),
            Primitive::Cp(t) => gates::controlled_phase(t),
            Primitive::Swap => gates::swap2(),
        }
    }
}

/// Primitive circuit: `(primitive, one-based wires)`, first entry acts first.
pub type PrimitiveCircuit = Vec<(Primitive, Vec<usize>)>;

fn r(p: u32) -> Primitive {
    Primitive::Cp(PI / f64::from(1u32 << p))
}

/// `CP(π/2^p)` then `SWAP` on wires `(a, a+1)`.
fn step(p: u32, a: usize) -> [(Primitive, Vec<usize>); 2] {
    [(r(p), vec![a, a + 1]), (Primitive::Swap, vec![a, a + 1])]
}

fn check_index(m: usize, max: usize, what: &'static str) -> Result<()> {
    if m > max {
        return Err(Error::OutOfRange {
            what,
            value: m.to_string(),
        });
    }
    Ok(())
}

/// Width and primitive circuit of the 3-qubit-set gate `U_m`.
pub fn quvis3_circuit(m: usize) -> Result<(usize, PrimitiveCircuit)> {
    check_index(m, 8, "3-qubit set gate index")?;
    let mut c = PrimitiveCircuit::new();
    let width = match m {
        0 => {
            c.push((Primitive::H, vec![1]));
            c.push((r(1), vec![1, 2]));
            c.push((Primitive::H, vec![2]));
            2
        }
        1 => {
            // U_2 followed by U_0 on the first two wires
            c.extend(quvis3_circuit(2)?.1);
            c.extend(quvis3_circuit(0)?.1);
            3
        }
        2 => {
            c.push((Primitive::H, vec![1]));
            c.extend(step(1, 1));
            c.extend(step(2, 2));
            3
        }
        m if m % 2 == 1 => {
            c.extend(step(m as u32, 1));
            2
        }
        m => {
            c.extend(step(m as u32 - 1, 1));
            c.extend(step(m as u32, 2));
            3
        }
    };
    Ok((width, c))
}

/// Width and primitive circuit of gate `id` of the 2-qubit set.
pub fn quvis2_circuit(id: usize) -> Result<(usize, PrimitiveCircuit)> {
    check_index(id, 8, "2-qubit set gate index")?;
    let mut c = PrimitiveCircuit::new();
    match id {
        0 => c.extend(quvis3_circuit(0)?.1),
        1 => {
            c.push((Primitive::H, vec![1]));
            c.extend(step(1, 1));
        }
        p => c.extend(step(p as u32, 1)),
    }
    Ok((2, c))
}

pub fn primitive_matrix(width: usize, circuit: &PrimitiveCircuit) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(1 << width);
    for (p, wires) in circuit {
        apply_placed(&mut u, &p.gate().matrix, wires, width)?;
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    /// Elementary gate of the instruction set.
    Gate { id: usize },
    /// `exp(−iθ S^α)` on one qubit.
    Rotation { axis: Axis, theta: f64 },
    /// Control on the first listed qubit.
    Cnot,
    /// `diag(1, e^{iα})` on one qubit, free.
    Phase { alpha: f64 },
    /// `e^{iφ}` on the whole register, free; takes no qubits.
    GlobalPhase { phi: f64 },
    /// Relabelling of two output wires, free and exact.
    WireSwap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub op: Op,
    pub qubits: Vec<usize>,
}

impl Placement {
    pub fn new(op: Op, qubits: &[usize]) -> Self {
        Self {
            op,
            qubits: qubits.to_vec(),
        }
    }
}

/// Rotation/CNOT lowering of a primitive circuit.
pub fn lower_to_qumis(circuit: &PrimitiveCircuit) -> Vec<Placement> {
    let mut out = Vec::new();
    for (p, w) in circuit {
        match p {
            Primitive::H => {
                // H = e^{iπ/2} Rz(π/2) Rx(π/2) Rz(π/2)
                let q = w[0];
                out.push(Placement::new(
                    Op::Rotation {
                        axis: Axis::Z,
                        theta: PI / 2.0,
                    },
                    &[q],
                ));
                out.push(Placement::new(
                    Op::Rotation {
                        axis: Axis::X,
                        theta: PI / 2.0,
                    },
                    &[q],
                ));
                out.push(Placement::new(
                    Op::Rotation {
                        axis: Axis::Z,
                        theta: PI / 2.0,
                    },
                    &[q],
                ));
                out.push(Placement::new(Op::GlobalPhase { phi: PI / 2.0 }, &[]));
            }
            Primitive::Cp(theta) => {
                out.extend(relocate(&qumis_decompose_controlled_phase(*theta).placements, w));
            }
            Primitive::Swap => {
                let (a, b) = (w[0], w[1]);
                out.push(Placement::new(Op::Cnot, &[a, b]));
                out.push(Placement::new(Op::Cnot, &[b, a]));
                out.push(Placement::new(Op::Cnot, &[a, b]));
            }
        }
    }
    out
}

fn relocate(placements: &[Placement], wires: &[usize]) -> Vec<Placement> {
    placements
        .iter()
        .map(|p| Placement {
            op: p.op,
            qubits: p.qubits.iter().map(|&q| wires[q - 1]).collect(),
        })
        .collect()
}

/// Controlled phase as `S(α) · Rz(θ₁) · CNOT · Rz(θ₂) · CNOT · Rz(θ₃)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QumisDecomposition {
    pub alpha: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    /// On wires 1 (control) and 2 (target), first entry acts first.
    pub placements: Vec<Placement>,
}

pub fn qumis_decompose_controlled_phase(theta: f64) -> QumisDecomposition {
    let (alpha, theta1, theta2, theta3) = (theta / 2.0, theta / 2.0, -theta / 2.0, 0.0);
    let rz = |t: f64| {
        Placement::new(
            Op::Rotation {
                axis: Axis::Z,
                theta: t,
            },
            &[2],
        )
    };
    let placements = vec![
        rz(theta3),
        Placement::new(Op::Cnot, &[1, 2]),
        rz(theta2),
        Placement::new(Op::Cnot, &[1, 2]),
        rz(theta1),
        Placement::new(Op::Phase { alpha }, &[1]),
    ];
    QumisDecomposition {
        alpha,
        theta1,
        theta2,
        theta3,
        placements,
    }
}

/// Rotation/CNOT time of a placement list: `|θ|/10` per rotation, 0.5 per CNOT.
pub fn qumis_time_cost(placements: &[Placement]) -> Result<f64> {
    let mut t = 0.0;
    for p in placements {
        t += match p.op {
            Op::Rotation { theta, .. } => theta.abs() / ROTATION_FIELD,
            Op::Cnot => CNOT_TIME,
            Op::Phase { .. } | Op::GlobalPhase { .. } | Op::WireSwap => 0.0,
            Op::Gate { id } => {
                return Err(Error::UnknownGate(format!(
                    "elementary gate {id} in a rotation/CNOT list"
                )))
            }
        };
    }
    Ok(t)
}

/// Rotation/CNOT time of `U_m` from the 3-qubit set.
pub fn qumis_cost_of_quvis_gate(m: usize) -> Result<f64> {
    qumis_time_cost(&lower_to_qumis(&quvis3_circuit(m)?.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    QuVis,
    QuMis,
}

mod schedule_text {
    use super::PulseSchedule;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(s: &Option<PulseSchedule>, ser: S) -> Result<S::Ok, S::Error> {
        s.as_ref().map(|s| s.write_pulse_table()).serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<PulseSchedule>, D::Error> {
        let text: Option<String> = Option::deserialize(de)?;
        text.map(|t| PulseSchedule::read_pulse_table(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementaryGate {
    pub id: usize,
    pub gate: Gate,
    pub time_cost: f64,
    /// Index of the reference table realizing this gate, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub golden: Option<usize>,
    #[serde(default, with = "schedule_text", skip_serializing_if = "Option::is_none")]
    pub realized_schedule: Option<PulseSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realized_error: Option<f64>,
    /// Unitary actually produced; rebuilt from the schedule after loading.
    #[serde(skip)]
    pub realized_matrix: Option<ComplexMatrix>,
}

impl ElementaryGate {
    fn new(id: usize, gate: Gate, time_cost: f64, golden: Option<usize>) -> Self {
        Self {
            id,
            gate,
            time_cost,
            golden,
            realized_schedule: None,
            realized_error: None,
            realized_matrix: None,
        }
    }

    pub fn width(&self) -> usize {
        self.gate.n_qubits
    }
}

/// `U_m` of the 3-qubit set, matrix only, costed at its direct-control time.
pub fn quvis_gate(m: usize) -> Result<ElementaryGate> {
    let (width, circuit) = quvis3_circuit(m)?;
    let gate = Gate::new(format!("U{m}"), primitive_matrix(width, &circuit)?, Vec::new())?;
    Ok(ElementaryGate::new(m, gate, golden::QUVIS_TIME[m], Some(m)))
}

fn quvis2_gate(id: usize) -> Result<ElementaryGate> {
    let (width, circuit) = quvis2_circuit(id)?;
    let label = match id {
        0 => "U0".to_string(),
        1 => "HS1".to_string(),
        p => format!("S{p}"),
    };
    let gate = Gate::new(label, primitive_matrix(width, &circuit)?, Vec::new())?;
    // gates shared with the 3-qubit set reuse its tables and times
    let golden = match id {
        0 | 3 | 5 | 7 => Some(id),
        _ => None,
    };
    let time = golden.map_or(NOMINAL_STEP_TIME, |m| golden::QUVIS_TIME[m]);
    Ok(ElementaryGate::new(id, gate, time, golden))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionSet {
    pub label: String,
    pub kind: SetKind,
    pub max_width: usize,
    pub gates: Vec<ElementaryGate>,
}

/// Time budget for synthesizing one gate of a set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealizationPlan {
    pub id: usize,
    pub total_time: f64,
    /// Defaults to the optimizer's initial slice rule.
    pub initial_slices: Option<usize>,
}

impl InstructionSet {
    pub fn quvis3() -> Self {
        Self {
            label: "quvis3".into(),
            kind: SetKind::QuVis,
            max_width: 3,
            gates: (0..=8).map(|m| quvis_gate(m).expect("shipped gate")).collect(),
        }
    }

    pub fn quvis2() -> Self {
        Self {
            label: "quvis2".into(),
            kind: SetKind::QuVis,
            max_width: 2,
            gates: (0..=8).map(|m| quvis2_gate(m).expect("shipped gate")).collect(),
        }
    }

    /// Rotations are parametric ops; the only stored gate is the CNOT (id 0).
    pub fn qumis() -> Self {
        Self {
            label: "qumis".into(),
            kind: SetKind::QuMis,
            max_width: 2,
            gates: vec![ElementaryGate::new(0, gates::cnot(), CNOT_TIME, None)],
        }
    }

    pub fn by_label(label: &str) -> Result<Self> {
        match label {
            "quvis3" => Ok(Self::quvis3()),
            "quvis2" => Ok(Self::quvis2()),
            "qumis" => Ok(Self::qumis()),
            other => Err(Error::InvalidConfig(format!("unknown instruction set {other:?}"))),
        }
    }

    pub fn gate(&self, id: usize) -> Result<&ElementaryGate> {
        self.gates
            .get(id)
            .filter(|g| g.id == id)
            .ok_or_else(|| Error::UnknownGate(format!("{} has no gate {id}", self.label)))
    }

    fn gate_mut(&mut self, id: usize) -> Result<&mut ElementaryGate> {
        let label = self.label.clone();
        self.gates
            .get_mut(id)
            .filter(|g| g.id == id)
            .ok_or_else(|| Error::UnknownGate(format!("{label} has no gate {id}")))
    }

    fn cnot_id(&self) -> Option<usize> {
        self.gates.iter().find(|g| g.gate.label == "CNOT").map(|g| g.id)
    }

    /// Records `schedule` as the realization of gate `id`, evolving it on the
    /// first `width` qubits of `model`.
    pub fn set_realization(
        &mut self,
        id: usize,
        schedule: PulseSchedule,
        model: &SpinChainModel,
        evo: &EvolutionConfig,
    ) -> Result<f64> {
        let g = self.gate_mut(id)?;
        let local = model.restrict(g.width())?;
        let eval = Evaluator::new(&g.gate.matrix, &local, evo)?;
        let u = eval.evolve(&schedule)?;
        let err = evo.metric.distance(&g.gate.matrix, &u)?;
        g.time_cost = schedule.total_time();
        g.realized_schedule = Some(schedule);
        g.realized_error = Some(err);
        g.realized_matrix = Some(u);
        Ok(err)
    }

    /// Treats gate `id` as realized without error.
    pub fn mark_exact(&mut self, id: usize) -> Result<()> {
        let g = self.gate_mut(id)?;
        g.realized_matrix = Some(g.gate.matrix.clone());
        g.realized_error = Some(0.0);
        Ok(())
    }

    /// Realizes every gate that has a reference table; returns the ids done.
    pub fn load_golden(&mut self, model: &SpinChainModel, evo: &EvolutionConfig) -> Result<Vec<usize>> {
        let mut done = Vec::new();
        for id in 0..self.gates.len() {
            if let Some(m) = self.gates[id].golden {
                self.set_realization(id, golden::schedule(m)?, model, evo)?;
                done.push(id);
            }
        }
        Ok(done)
    }

    /// Recomputes realized matrices from stored schedules (after deserializing).
    pub fn rebuild_realizations(&mut self, model: &SpinChainModel, evo: &EvolutionConfig) -> Result<()> {
        for id in 0..self.gates.len() {
            if let Some(s) = self.gates[id].realized_schedule.clone() {
                self.set_realization(id, s, model, evo)?;
            }
        }
        Ok(())
    }

    pub fn unrealized(&self) -> Vec<usize> {
        self.gates
            .iter()
            .filter(|g| g.realized_matrix.is_none())
            .map(|g| g.id)
            .collect()
    }

    fn realized(&self, id: usize) -> Result<&ComplexMatrix> {
        self.gate(id)?
            .realized_matrix
            .as_ref()
            .ok_or(Error::MissingRealization(id))
    }

    /// Time cost of one op under this set's cost model.
    pub fn op_time(&self, op: &Op) -> Result<f64> {
        Ok(match *op {
            Op::Gate { id } => self.gate(id)?.time_cost,
            Op::Cnot => self
                .cnot_id()
                .map_or(Ok(CNOT_TIME), |id| self.gate(id).map(|g| g.time_cost))?,
            Op::Rotation { theta, .. } => theta.abs() / ROTATION_FIELD,
            Op::Phase { .. } | Op::GlobalPhase { .. } | Op::WireSwap => 0.0,
        })
    }

    fn op_width(&self, op: &Op) -> Result<usize> {
        Ok(match *op {
            Op::Gate { id } => self.gate(id)?.width(),
            Op::Cnot | Op::WireSwap => 2,
            Op::Rotation { .. } | Op::Phase { .. } => 1,
            Op::GlobalPhase { .. } => 0,
        })
    }

    fn apply(&self, u: &mut ComplexMatrix, p: &Placement, n: usize, realized: bool) -> Result<()> {
        let gate_matrix = match p.op {
            Op::Gate { id } if realized => self.realized(id)?.clone(),
            Op::Gate { id } => self.gate(id)?.gate.matrix.clone(),
            Op::Cnot => match (realized, self.cnot_id()) {
                (true, Some(id)) => self.realized(id)?.clone(),
                _ => gates::cnot().matrix,
            },
            Op::Rotation { axis, theta } => gates::rotation(axis, theta).matrix,
            Op::Phase { alpha } => gates::phase(alpha).matrix,
            Op::WireSwap => gates::swap2().matrix,
            Op::GlobalPhase { phi } => {
                *u = u.scale(num_complex::Complex64::from_polar(1.0, phi));
                return Ok(());
            }
        };
        apply_placed(u, &gate_matrix, &p.qubits, n)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instruction sets serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledCircuit {
    pub target_label: String,
    pub set_label: String,
    pub n_qubits: usize,
    pub placements: Vec<Placement>,
    pub total_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_error: Option<f64>,
}

impl CompiledCircuit {
    pub fn new(
        target_label: impl Into<String>,
        n_qubits: usize,
        placements: Vec<Placement>,
        set: &InstructionSet,
    ) -> Result<Self> {
        let mut total_time = 0.0;
        for p in &placements {
            let w = set.op_width(&p.op)?;
            if w > set.max_width {
                return Err(Error::BadPlacement(format!(
                    "{w}-qubit op exceeds the {}-qubit set {}",
                    set.max_width, set.label
                )));
            }
            if p.qubits.len() != w {
                return Err(Error::BadPlacement(format!(
                    "{:?} given {} qubits",
                    p.op,
                    p.qubits.len()
                )));
            }
            if let Some(&q) = p.qubits.iter().find(|&&q| q == 0 || q > n_qubits) {
                return Err(Error::BadPlacement(format!("qubit {q} outside 1..={n_qubits}")));
            }
            total_time += set.op_time(&p.op)?;
        }
        Ok(Self {
            target_label: target_label.into(),
            set_label: set.label.clone(),
            n_qubits,
            placements,
            total_time,
            predicted_error: None,
        })
    }

    /// Elementary gate ids in placement order.
    pub fn gate_ids(&self) -> Vec<usize> {
        self.placements
            .iter()
            .filter_map(|p| match p.op {
                Op::Gate { id } => Some(id),
                _ => None,
            })
            .collect()
    }

    pub fn count(&self, pred: impl Fn(&Op) -> bool) -> usize {
        self.placements.iter().filter(|p| pred(&p.op)).count()
    }

    /// `self` followed by `later` on the same register.
    pub fn concat(&self, later: &CompiledCircuit, set: &InstructionSet) -> Result<Self> {
        if self.n_qubits != later.n_qubits {
            return Err(Error::dims(self.n_qubits, later.n_qubits));
        }
        let mut placements = self.placements.clone();
        placements.extend(later.placements.iter().cloned());
        Self::new(
            format!("{}+{}", self.target_label, later.target_label),
            self.n_qubits,
            placements,
            set,
        )
    }

    fn compose(&self, set: &InstructionSet, realized: bool) -> Result<ComplexMatrix> {
        let mut u = ComplexMatrix::identity(1 << self.n_qubits);
        for p in &self.placements {
            set.apply(&mut u, p, self.n_qubits, realized)?;
        }
        Ok(u)
    }

    /// Product of the ideal gate matrices.
    pub fn exact_unitary(&self, set: &InstructionSet) -> Result<ComplexMatrix> {
        self.compose(set, false)
    }

    /// Product of the realized (imperfect) gate unitaries.
    pub fn realized_unitary(&self, set: &InstructionSet) -> Result<ComplexMatrix> {
        self.compose(set, true)
    }
}

/// Distance between the composed realized unitaries and the ideal composition.
pub fn circuit_error_estimate(circuit: &CompiledCircuit, set: &InstructionSet, metric: ErrorMetric) -> Result<f64> {
    let realized = circuit.realized_unitary(set)?;
    metric.distance(&circuit.exact_unitary(set)?, &realized)
}

fn qft_range(n: usize, lo: usize) -> Result<()> {
    if n < lo || n > 9 {
        return Err(Error::OutOfRange {
            what: "QFT width",
            value: n.to_string(),
        });
    }
    Ok(())
}

fn g(id: usize, wires: &[usize]) -> Placement {
    Placement::new(Op::Gate { id }, wires)
}

fn quvis3_qft_placements(n: usize, out: &mut Vec<Placement>) {
    if n == 3 {
        out.push(g(1, &[1, 2, 3]));
        out.push(Placement::new(Op::WireSwap, &[1, 2]));
        return;
    }
    let last_even = if n % 2 == 1 { n - 1 } else { n - 2 };
    for m in (2..=last_even).step_by(2) {
        out.push(g(m, &[m - 1, m, m + 1]));
    }
    if n.is_multiple_of(2) {
        out.push(g(n - 1, &[n - 1, n]));
    }
    quvis3_qft_placements(n - 1, out);
}

fn quvis2_qft_placements(n: usize, out: &mut Vec<Placement>) {
    if n == 2 {
        out.push(g(0, &[1, 2]));
        out.push(Placement::new(Op::WireSwap, &[1, 2]));
        return;
    }
    out.push(g(1, &[1, 2]));
    for p in 2..n {
        out.push(g(p, &[p, p + 1]));
    }
    quvis2_qft_placements(n - 1, out);
}

/// Primitive-circuit form of the N-qubit QFT (no trailing swaps needed).
pub fn qft_primitive_circuit(n: usize) -> PrimitiveCircuit {
    let mut c = PrimitiveCircuit::new();
    for width in (1..=n).rev() {
        c.push((Primitive::H, vec![1]));
        for p in 1..width {
            c.extend(step(p as u32, p));
        }
    }
    c
}

/// `N`-qubit QFT over the 3-qubit set, `3 ≤ N ≤ 9`.
pub fn compile_qft_quvis(n: usize) -> Result<CompiledCircuit> {
    compile_qft(&InstructionSet::quvis3(), n)
}

/// `N`-qubit QFT over any of the shipped sets; times are taken from `set`.
pub fn compile_qft(set: &InstructionSet, n: usize) -> Result<CompiledCircuit> {
    let mut placements = Vec::new();
    match (set.kind, set.max_width) {
        (SetKind::QuVis, 3) => {
            qft_range(n, 3)?;
            quvis3_qft_placements(n, &mut placements);
        }
        (SetKind::QuVis, 2) => {
            qft_range(n, 2)?;
            quvis2_qft_placements(n, &mut placements);
        }
        (SetKind::QuMis, _) => {
            qft_range(n, 1)?;
            placements = lower_to_qumis(&qft_primitive_circuit(n));
        }
        _ => {
            return Err(Error::InvalidConfig(format!(
                "no QFT compilation for set {}",
                set.label
            )))
        }
    }
    CompiledCircuit::new(format!("QFT{n}"), n, placements, set)
}

/// Swap chain moving qubit 1 to wire `N`, lowered to rotations and CNOTs.
pub fn compile_swap_chain_qumis(n: usize) -> Result<CompiledCircuit> {
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "swap chain width",
            value: n.to_string(),
        });
    }
    let circuit: PrimitiveCircuit = (1..n).map(|p| (Primitive::Swap, vec![p, p + 1])).collect();
    CompiledCircuit::new(
        format!("SWAPCHAIN{n}"),
        n,
        lower_to_qumis(&circuit),
        &InstructionSet::qumis(),
    )
}

/// Plan realizing every gate of `set` at its current time cost.
pub fn default_plan(set: &InstructionSet) -> Vec<RealizationPlan> {
    set.gates
        .iter()
        .map(|g| RealizationPlan {
            id: g.id,
            total_time: g.time_cost,
            initial_slices: None,
        })
        .collect()
}

/// Synthesizes the planned gates (in parallel under `cfg.policy`) and
/// returns one outcome per plan entry, in plan order.
pub fn synthesize_gates(
    set: &InstructionSet,
    model: &SpinChainModel,
    cfg: &OptimizerConfig,
    plan: &[RealizationPlan],
) -> Vec<Result<OptimizationReport>> {
    let inner = OptimizerConfig {
        policy: crate::par::ExecPolicy::Sequential,
        ..cfg.clone()
    };
    cfg.policy.map(plan, |p| {
        let g = set.gate(p.id)?;
        let local = model.restrict(g.width())?;
        let k0 = p.initial_slices.unwrap_or_else(|| cfg.initial_slices(p.total_time));
        best_of_restarts(&g.gate.matrix, &local, p.total_time, k0, &inner)
    })
}

/// Synthesizes the planned gates and records their schedules. Fails with
/// [`Error::SynthesisFailed`] (lowest id first) if a gate misses `error_budget`.
pub fn realize_instruction_set(
    set: &InstructionSet,
    model: &SpinChainModel,
    cfg: &OptimizerConfig,
    plan: &[RealizationPlan],
    error_budget: f64,
) -> Result<InstructionSet> {
    let widest = set.gates.iter().map(|g| g.width()).max().unwrap_or(0);
    if model.n_qubits() < widest {
        return Err(Error::dims(
            format!("model with at least {widest} qubits"),
            model.n_qubits(),
        ));
    }
    let mut out = set.clone();
    for (p, outcome) in plan.iter().zip(synthesize_gates(set, model, cfg, plan)) {
        let report = outcome?;
        if report.final_error > error_budget {
            return Err(Error::SynthesisFailed {
                label: set.gate(p.id)?.gate.label.clone(),
                budget: error_budget,
                report: Box::new(report),
            });
        }
        out.set_realization(p.id, report.final_schedule, model, &cfg.evolution)?;
    }
    Ok(out)
}

/// Realizes the CNOT of a rotation/CNOT set by synthesis; rotations stay ideal.
pub fn realize_qumis(
    model: &SpinChainModel,
    cfg: &OptimizerConfig,
    total_time: f64,
) -> Result<(InstructionSet, OptimizationReport)> {
    let set = InstructionSet::qumis();
    let local = model.restrict(2)?;
    let report = best_of_restarts(
        &set.gates[0].gate.matrix,
        &local,
        total_time,
        cfg.initial_slices(total_time),
        cfg,
    )?;
    let mut out = set;
    out.set_realization(0, report.final_schedule.clone(), model, &cfg.evolution)?;
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{controlled_phase, qft_matrix, rotation};
    use crate::linalg::{frobenius_distance, phase_aligned_distance};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn decomposition_product(theta: f64) -> ComplexMatrix {
        let d = qumis_decompose_controlled_phase(theta);
        let c = CompiledCircuit::new("cp", 2, d.placements, &InstructionSet::qumis()).unwrap();
        c.exact_unitary(&InstructionSet::qumis()).unwrap()
    }

    #[test]
    fn quvis_gates_are_unitary_with_expected_widths() {
        for m in 0..=8 {
            let g = quvis_gate(m).unwrap();
            assert!(g.gate.matrix.unitarity_defect() <= 1e-12);
            assert_eq!(g.width(), [2, 3, 3, 2, 3, 2, 3, 2, 3][m], "U{m}");
        }
        assert!(matches!(quvis_gate(9), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn odd_gate_is_phase_then_swap() {
        let u3 = quvis_gate(3).unwrap().gate.matrix;
        let oracle = gates::swap2().matrix.matmul(&controlled_phase(PI / 8.0).matrix);
        assert!(frobenius_distance(&u3, &oracle).unwrap() < 1e-14);
    }

    #[test]
    fn qft_primitive_circuit_is_exact() {
        for n in 1..=6 {
            let u = primitive_matrix(n, &qft_primitive_circuit(n)).unwrap();
            assert!(frobenius_distance(&u, &qft_matrix(n).matrix).unwrap() < 1e-12, "N={n}");
        }
    }

    #[test]
    fn qft_composition_small_widths() {
        for set in [
            InstructionSet::quvis3(),
            InstructionSet::quvis2(),
            InstructionSet::qumis(),
        ] {
            let lo = match set.label.as_str() {
                "quvis3" => 3,
                "quvis2" => 2,
                _ => 1,
            };
            for n in lo..=5 {
                let c = compile_qft(&set, n).unwrap();
                let u = c.exact_unitary(&set).unwrap();
                let d = frobenius_distance(&u, &qft_matrix(n).matrix).unwrap();
                assert!(d <= 1e-10, "{} N={n}: {d}", set.label);
            }
        }
    }

    #[test]
    fn qft_recursion_gate_ids() {
        assert_eq!(compile_qft_quvis(3).unwrap().gate_ids(), vec![1]);
        assert_eq!(compile_qft_quvis(4).unwrap().gate_ids(), vec![2, 3, 1]);
        assert_eq!(compile_qft_quvis(5).unwrap().gate_ids(), vec![2, 4, 2, 3, 1]);
        assert_eq!(compile_qft_quvis(6).unwrap().gate_ids(), vec![2, 4, 5, 2, 4, 2, 3, 1]);
        assert!(compile_qft_quvis(2).is_err());
        assert!(compile_qft_quvis(10).is_err());
    }

    #[test]
    fn compiled_widths_respect_the_set() {
        for set in [
            InstructionSet::quvis3(),
            InstructionSet::quvis2(),
            InstructionSet::qumis(),
        ] {
            let c = compile_qft(&set, 6).unwrap();
            for p in &c.placements {
                assert!(p.qubits.len() <= set.max_width);
            }
        }
        let bad = vec![g(2, &[1, 2, 3])];
        assert!(CompiledCircuit::new("x", 3, bad, &InstructionSet::quvis2()).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let d = qumis_decompose_controlled_phase(0.0);
        assert_eq!((d.alpha, d.theta1, d.theta2, d.theta3), (0.0, 0.0, -0.0, 0.0));
        assert!(frobenius_distance(&decomposition_product(0.0), &ComplexMatrix::identity(4)).unwrap() <= 1e-12);

        let d = qumis_decompose_controlled_phase(PI / 2.0);
        assert_eq!(
            (d.alpha, d.theta1, d.theta2, d.theta3),
            (PI / 4.0, PI / 4.0, -PI / 4.0, 0.0)
        );
        for theta in [PI / 8.0, PI / 4.0, PI / 2.0] {
            let dist = frobenius_distance(&decomposition_product(theta), &controlled_phase(theta).matrix).unwrap();
            assert!(dist <= 1e-12, "{theta}: {dist}");
        }
    }

    #[test]
    fn decomposition_random_angles_and_rz_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let theta = rng.random_range(-2.0 * PI..2.0 * PI);
            let dist = frobenius_distance(&decomposition_product(theta), &controlled_phase(theta).matrix).unwrap();
            assert!(dist <= 1e-12);
            let d = qumis_decompose_controlled_phase(theta);
            let prod = rotation(Axis::Z, d.theta1)
                .matrix
                .matmul(&rotation(Axis::Z, d.theta2).matrix)
                .matmul(&rotation(Axis::Z, d.theta3).matrix);
            assert!(frobenius_distance(&prod, &ComplexMatrix::identity(2)).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn qumis_costs() {
        assert_eq!(qumis_time_cost(&[]).unwrap(), 0.0);
        let cp = qumis_decompose_controlled_phase(PI / 2.0).placements;
        let expect = 2.0 * 0.5 + (PI / 4.0 + PI / 4.0) / 10.0;
        assert!((qumis_time_cost(&cp).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 1.157).abs() < 1e-3);
        let rz = [Placement::new(
            Op::Rotation {
                axis: Axis::Z,
                theta: PI,
            },
            &[1],
        )];
        assert!((qumis_time_cost(&rz).unwrap() - PI / 10.0).abs() < 1e-15);
        assert!(matches!(qumis_time_cost(&[g(0, &[1])]), Err(Error::UnknownGate(_))));
    }

    #[test]
    fn hadamard_lowering_is_exact() {
        let c = CompiledCircuit::new(
            "h",
            1,
            lower_to_qumis(&vec![(Primitive::H, vec![1])]),
            &InstructionSet::qumis(),
        )
        .unwrap();
        let u = c.exact_unitary(&InstructionSet::qumis()).unwrap();
        assert!(frobenius_distance(&u, &gates::hadamard().matrix).unwrap() < 1e-14);
        assert!((c.total_time - 3.0 * PI / 20.0).abs() < 1e-15);
    }

    #[test]
    fn qumis_rows_within_tolerance_band() {
        for m in 0..=8 {
            let t = qumis_cost_of_quvis_gate(m).unwrap();
            let published = golden::QUMIS_TIME[m];
            assert!((t - published).abs() / published <= 0.3, "U{m}: {t} vs {published}");
        }
    }

    #[test]
    fn lowered_gates_match_their_matrices() {
        let set = InstructionSet::qumis();
        for m in 0..=8 {
            let (w, circuit) = quvis3_circuit(m).unwrap();
            let c = CompiledCircuit::new(format!("U{m}"), w, lower_to_qumis(&circuit), &set).unwrap();
            let u = c.exact_unitary(&set).unwrap();
            assert!(frobenius_distance(&u, &quvis_gate(m).unwrap().gate.matrix).unwrap() < 1e-12);
        }
    }

    #[test]
    fn time_cost_is_additive() {
        let set = InstructionSet::quvis3();
        let a = compile_qft(&set, 4).unwrap();
        let b = compile_qft(&set, 4).unwrap();
        let ab = a.concat(&b, &set).unwrap();
        assert!((ab.total_time - (a.total_time + b.total_time)).abs() < 1e-12);
        // 3-qubit QFT costs exactly U1's time
        assert_eq!(compile_qft(&set, 3).unwrap().total_time, golden::QUVIS_TIME[1]);
    }

    #[test]
    fn error_estimate_trivial_cases() {
        let mut set = InstructionSet::quvis3();
        for id in 0..=8 {
            set.mark_exact(id).unwrap();
        }
        let c = compile_qft(&set, 5).unwrap();
        assert!(circuit_error_estimate(&c, &set, ErrorMetric::PhaseAligned).unwrap() < 1e-6);

        let fresh = InstructionSet::quvis3();
        assert!(matches!(
            circuit_error_estimate(&c, &fresh, ErrorMetric::PhaseAligned),
            Err(Error::MissingRealization(_))
        ));
    }

    #[test]
    fn single_gate_circuit_carries_the_gate_error() {
        let model = SpinChainModel::chain(3);
        let evo = EvolutionConfig::default();
        let mut set = InstructionSet::quvis3();
        let err = set
            .set_realization(4, golden::schedule(4).unwrap(), &model, &evo)
            .unwrap();
        let c = CompiledCircuit::new("U4", 3, vec![g(4, &[1, 2, 3])], &set).unwrap();
        let est = circuit_error_estimate(&c, &set, ErrorMetric::PhaseAligned).unwrap();
        assert!((est - err).abs() < 1e-9);
    }

    #[test]
    fn estimate_matches_brute_force_composition() {
        let model = SpinChainModel::chain(3);
        let evo = EvolutionConfig::default();
        let mut set = InstructionSet::quvis3();
        set.load_golden(&model, &evo).unwrap();
        let c = compile_qft(&set, 3).unwrap();
        let est = circuit_error_estimate(&c, &set, ErrorMetric::PhaseAligned).unwrap();
        // U1 then a swap of wires 1 and 2, built with explicit placement
        let u1 = set.gates[1].realized_matrix.clone().unwrap();
        let sw = gates::place(&gates::swap2(), &[1, 2], 3).unwrap();
        let brute = sw.matmul(&u1);
        let oracle = phase_aligned_distance(&qft_matrix(3).matrix, &brute).unwrap();
        assert!((est - oracle).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip_keeps_schedules() {
        let model = SpinChainModel::chain(3);
        let evo = EvolutionConfig::default();
        let mut set = InstructionSet::quvis2();
        set.load_golden(&model, &evo).unwrap();
        let text = set.to_json();
        let mut back = InstructionSet::from_json(&text).unwrap();
        assert!(back.gates[0].realized_matrix.is_none());
        back.rebuild_realizations(&model, &evo).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.unrealized(), vec![1, 2, 4, 6, 8]);
    }
}
