//! Circuit representation and synthesis of recovery networks, encoders,
//! ancilla preparation and verification.
//!
//! Every synthesized schedule runs one gate per time step. Qubit indices are
//! local to the circuit; [`Circuit::remap`] places a circuit on a larger
//! machine.

use std::fmt;
use std::ops::Range;

use crate::codes::StabilizerCode;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::pauli::{Pauli, PauliOperator, SignedPauli};

/// Index of a classical measurement record within a circuit.
pub type Label = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    PrepZero(usize),
    /// Identity gate; occupies a time step and can fail like any other gate.
    Id(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot(usize, usize),
    Cz(usize, usize),
    MeasureZ(usize, Label),
    MeasureX(usize, Label),
    /// Applies `pauli` when the XOR of the listed records is 1.
    ClassicalPauli {
        qubit: usize,
        pauli: Pauli,
        condition: Vec<Label>,
    },
}

impl Gate {
    /// Qubits acted on; the second entry is set for two-qubit gates.
    #[inline]
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Cnot(a, b) | Gate::Cz(a, b) => (a, Some(b)),
            Gate::PrepZero(q)
            | Gate::Id(q)
            | Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::MeasureZ(q, _)
            | Gate::MeasureX(q, _) => (q, None),
            Gate::ClassicalPauli { qubit, .. } => (qubit, None),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Gate::PrepZero(_) => "prep_zero",
            Gate::Id(_) => "identity",
            Gate::H(_) => "hadamard",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "s_dag",
            Gate::X(_) => "pauli_x",
            Gate::Y(_) => "pauli_y",
            Gate::Z(_) => "pauli_z",
            Gate::Cnot(..) => "cnot",
            Gate::Cz(..) => "cz",
            Gate::MeasureZ(..) => "measure_z",
            Gate::MeasureX(..) => "measure_x",
            Gate::ClassicalPauli { pauli, .. } => match pauli {
                Pauli::X => "classical_x",
                Pauli::Y => "classical_y",
                Pauli::Z => "classical_z",
                Pauli::I => "classical_i",
            },
        }
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Gate::MeasureZ(..) | Gate::MeasureX(..))
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(
            self,
            Gate::PrepZero(_) | Gate::MeasureZ(..) | Gate::MeasureX(..) | Gate::ClassicalPauli { .. }
        )
    }

    /// Inverse of a unitary gate.
    pub fn inverse(&self) -> Option<Gate> {
        match *self {
            Gate::S(q) => Some(Gate::Sdg(q)),
            Gate::Sdg(q) => Some(Gate::S(q)),
            ref g if g.is_unitary() => Some(g.clone()),
            _ => None,
        }
    }

    fn map_qubits(&self, map: &[usize], label_offset: usize) -> Gate {
        let m = |q: usize| map[q];
        match self {
            Gate::PrepZero(q) => Gate::PrepZero(m(*q)),
            Gate::Id(q) => Gate::Id(m(*q)),
            Gate::H(q) => Gate::H(m(*q)),
            Gate::S(q) => Gate::S(m(*q)),
            Gate::Sdg(q) => Gate::Sdg(m(*q)),
            Gate::X(q) => Gate::X(m(*q)),
            Gate::Y(q) => Gate::Y(m(*q)),
            Gate::Z(q) => Gate::Z(m(*q)),
            Gate::Cnot(a, b) => Gate::Cnot(m(*a), m(*b)),
            Gate::Cz(a, b) => Gate::Cz(m(*a), m(*b)),
            Gate::MeasureZ(q, l) => Gate::MeasureZ(m(*q), l + label_offset),
            Gate::MeasureX(q, l) => Gate::MeasureX(m(*q), l + label_offset),
            Gate::ClassicalPauli {
                qubit,
                pauli,
                condition,
            } => Gate::ClassicalPauli {
                qubit: m(*qubit),
                pauli: *pauli,
                condition: condition.iter().map(|l| l + label_offset).collect(),
            },
        }
    }
}

/// Conjugates `p` by a unitary gate: `p -> g p g†`.
pub fn conjugate(p: &mut SignedPauli, gate: &Gate) -> Result<()> {
    match *gate {
        Gate::Id(_) => {}
        Gate::H(q) => p.conj_h(q),
        Gate::S(q) => p.conj_s(q),
        Gate::Sdg(q) => p.conj_sdg(q),
        Gate::X(q) => p.conj_pauli(q, Pauli::X),
        Gate::Y(q) => p.conj_pauli(q, Pauli::Y),
        Gate::Z(q) => p.conj_pauli(q, Pauli::Z),
        Gate::Cnot(c, t) => p.conj_cnot(c, t),
        Gate::Cz(a, b) => p.conj_cz(a, b),
        ref g => {
            return Err(Error::InvalidParameter(format!(
                "{} is not unitary",
                g.kind_name()
            )))
        }
    }
    Ok(())
}

/// Named contiguous range of qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

/// Ordered gate schedule; gate `i` runs at time step `i`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Circuit {
    num_qubits: usize,
    registers: Vec<Register>,
    gates: Vec<Gate>,
    labels: Vec<String>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            ..Self::default()
        }
    }

    /// Appends a register after the existing qubits and returns its range.
    pub fn add_register(&mut self, name: &str, len: usize) -> Range<usize> {
        let start = self.num_qubits;
        self.num_qubits += len;
        self.registers.push(Register {
            name: name.to_string(),
            start,
            len,
        });
        start..start + len
    }

    /// Names an existing range of qubits.
    pub fn name_register(&mut self, name: &str, range: Range<usize>) {
        assert!(range.end <= self.num_qubits);
        self.registers.push(Register {
            name: name.to_string(),
            start: range.start,
            len: range.len(),
        });
    }

    pub fn register(&self, name: &str) -> Option<Range<usize>> {
        self.registers.iter().find(|r| r.name == name).map(Register::range)
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn label_name(&self, label: Label) -> &str {
        &self.labels[label]
    }

    pub fn label(&self, name: &str) -> Option<Label> {
        self.labels.iter().position(|l| l == name)
    }

    /// Validating push. Classical conditions must refer to records produced
    /// by earlier measurements.
    pub fn try_push(&mut self, gate: Gate) -> Result<()> {
        let (a, b) = gate.qubits();
        if a >= self.num_qubits || b.is_some_and(|b| b >= self.num_qubits) {
            return Err(Error::InvalidParameter(format!(
                "{} on qubit outside a {}-qubit circuit",
                gate.kind_name(),
                self.num_qubits
            )));
        }
        if b == Some(a) {
            return Err(Error::InvalidParameter(format!(
                "{} with repeated qubit {a}",
                gate.kind_name()
            )));
        }
        match &gate {
            Gate::MeasureZ(_, l) | Gate::MeasureX(_, l) => {
                if *l >= self.labels.len() || self.measured(*l) {
                    return Err(Error::InvalidParameter(format!("bad measurement record {l}")));
                }
            }
            Gate::ClassicalPauli { condition, .. } => {
                if let Some(l) = condition.iter().find(|&&l| !self.measured(l)) {
                    return Err(Error::InvalidParameter(format!(
                        "condition uses record {l} before it is measured"
                    )));
                }
            }
            _ => {}
        }
        self.gates.push(gate);
        Ok(())
    }

    fn measured(&self, l: Label) -> bool {
        self.gates.iter().any(|g| match g {
            Gate::MeasureZ(_, m) | Gate::MeasureX(_, m) => *m == l,
            _ => false,
        })
    }

    fn push(&mut self, gate: Gate) -> &mut Self {
        let (a, b) = gate.qubits();
        assert!(a < self.num_qubits && b.map_or(true, |b| b < self.num_qubits && b != a));
        self.gates.push(gate);
        self
    }

    pub fn prep_zero(&mut self, q: usize) -> &mut Self {
        self.push(Gate::PrepZero(q))
    }

    pub fn id(&mut self, q: usize) -> &mut Self {
        self.push(Gate::Id(q))
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.push(Gate::H(q))
    }

    pub fn s(&mut self, q: usize) -> &mut Self {
        self.push(Gate::S(q))
    }

    pub fn sdg(&mut self, q: usize) -> &mut Self {
        self.push(Gate::Sdg(q))
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.push(Gate::X(q))
    }

    pub fn y(&mut self, q: usize) -> &mut Self {
        self.push(Gate::Y(q))
    }

    pub fn z(&mut self, q: usize) -> &mut Self {
        self.push(Gate::Z(q))
    }

    pub fn cnot(&mut self, control: usize, target: usize) -> &mut Self {
        self.push(Gate::Cnot(control, target))
    }

    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        self.push(Gate::Cz(a, b))
    }

    fn new_label(&mut self, name: &str) -> Label {
        self.labels.push(name.to_string());
        self.labels.len() - 1
    }

    pub fn measure_z(&mut self, q: usize, name: &str) -> Label {
        let l = self.new_label(name);
        self.push(Gate::MeasureZ(q, l));
        l
    }

    pub fn measure_x(&mut self, q: usize, name: &str) -> Label {
        let l = self.new_label(name);
        self.push(Gate::MeasureX(q, l));
        l
    }

    pub fn classical_pauli(&mut self, q: usize, pauli: Pauli, condition: &[Label]) -> Result<()> {
        self.try_push(Gate::ClassicalPauli {
            qubit: q,
            pauli,
            condition: condition.to_vec(),
        })
    }

    /// Appends `other` with its qubit `i` placed at `map[i]`; returns the
    /// offset added to `other`'s record labels.
    pub fn append(&mut self, other: &Circuit, map: &[usize]) -> usize {
        assert_eq!(map.len(), other.num_qubits);
        assert!(map.iter().all(|&q| q < self.num_qubits));
        let offset = self.labels.len();
        self.labels.extend(other.labels.iter().cloned());
        self.gates
            .extend(other.gates.iter().map(|g| g.map_qubits(map, offset)));
        offset
    }

    /// Same schedule on a `width`-qubit machine with qubit `i` at `map[i]`.
    pub fn remap(&self, map: &[usize], width: usize) -> Circuit {
        let mut out = Circuit::new(width);
        out.append(self, map);
        for r in &self.registers {
            if r.len > 0 && (r.start..r.start + r.len).all(|q| map[q] == map[r.start] + q - r.start) {
                out.name_register(&r.name, map[r.start]..map[r.start] + r.len);
            }
        }
        out
    }

    /// Inverse schedule; fails on non-unitary gates.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut out = Circuit::new(self.num_qubits);
        out.registers = self.registers.clone();
        for g in self.gates.iter().rev() {
            let inv = g.inverse().ok_or_else(|| {
                Error::InvalidParameter(format!("{} has no inverse", g.kind_name()))
            })?;
            out.gates.push(inv);
        }
        Ok(out)
    }

    /// Two-qubit gates with one qubit in `a` and the other in `b`.
    pub fn coupling_count(&self, a: &Range<usize>, b: &Range<usize>) -> usize {
        self.gates
            .iter()
            .filter(|g| match g.qubits() {
                (p, Some(q)) => (a.contains(&p) && b.contains(&q)) || (a.contains(&q) && b.contains(&p)),
                _ => false,
            })
            .count()
    }

    /// Text dump, one gate per line: `t=<step> <kind> <qubits> [label]`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, g) in self.gates.iter().enumerate() {
            let (a, b) = g.qubits();
            out.push_str(&format!("t={t} {} {a}", g.kind_name()));
            if let Some(b) = b {
                out.push_str(&format!(" {b}"));
            }
            match g {
                Gate::MeasureZ(_, l) | Gate::MeasureX(_, l) => {
                    out.push(' ');
                    out.push_str(&self.labels[*l]);
                }
                Gate::ClassicalPauli { condition, .. } => {
                    let names: Vec<&str> = condition.iter().map(|&l| self.labels[l].as_str()).collect();
                    out.push(' ');
                    out.push_str(&names.join("^"));
                }
                _ => {}
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Classical post-processing: output bit `i` is the XOR of the records in `bits[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Readout {
    pub bits: Vec<Vec<Label>>,
}

impl Readout {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn evaluate(&self, records: &[bool]) -> BitVector {
        let mut out = BitVector::zeros(self.bits.len());
        for (i, labels) in self.bits.iter().enumerate() {
            if labels.iter().fold(false, |acc, &l| acc ^ records[l]) {
                out.set(i, true);
            }
        }
        out
    }
}

/// A circuit preparing a stabilizer state from `|0...0>`.
#[derive(Clone, Debug)]
pub struct StatePrep {
    pub circuit: Circuit,
    /// `pivots[i]`: qubit whose `Z` the circuit maps onto generator `i`
    /// (modulo earlier generators).
    pub pivots: Vec<usize>,
}

/// Synthesizes a Clifford circuit `E` with `E|0...0>` stabilized by every
/// generator. With fewer generators than qubits, the non-pivot qubits act as
/// inputs. Generators must be Hermitian, independent and commuting.
pub fn synth_stabilizer_state(width: usize, gens: &[SignedPauli]) -> Result<StatePrep> {
    for (i, g) in gens.iter().enumerate() {
        if g.num_qubits() != width {
            return Err(Error::Dimension(format!(
                "generator {i} acts on {} qubits, expected {width}",
                g.num_qubits()
            )));
        }
        if !g.is_hermitian() {
            return Err(Error::InvalidParameter(format!("generator {i} is not Hermitian")));
        }
        for (j, h) in gens.iter().enumerate().skip(i + 1) {
            if g.anticommutes_with(h) {
                return Err(Error::InvalidParameter(format!(
                    "generators {i} and {j} anticommute"
                )));
            }
        }
    }
    let mut rows = gens.to_vec();
    let mut disentangler: Vec<Gate> = Vec::new();
    let mut pivots = Vec::with_capacity(rows.len());
    let apply = |rows: &mut [SignedPauli], g: &Gate, out: &mut Vec<Gate>| {
        for r in rows.iter_mut() {
            conjugate(r, g).expect("unitary");
        }
        out.push(g.clone());
    };
    for i in 0..rows.len() {
        let support: Vec<usize> = (0..width)
            .filter(|&q| rows[i].x_mask().get(q) || rows[i].z_mask().get(q))
            .collect();
        let Some(&p) = support.first() else {
            return Err(Error::InvalidParameter(format!(
                "generator {i} depends on the earlier ones"
            )));
        };
        for &q in &support {
            match (rows[i].x_mask().get(q), rows[i].z_mask().get(q)) {
                (true, false) => apply(&mut rows, &Gate::H(q), &mut disentangler),
                (true, true) => {
                    apply(&mut rows, &Gate::Sdg(q), &mut disentangler);
                    apply(&mut rows, &Gate::H(q), &mut disentangler);
                }
                _ => {}
            }
        }
        for &q in &support[1..] {
            apply(&mut rows, &Gate::Cnot(q, p), &mut disentangler);
        }
        if rows[i].is_negative() {
            apply(&mut rows, &Gate::X(p), &mut disentangler);
        }
        debug_assert!(rows[i].x_mask().is_zero() && rows[i].z_mask().weight() == 1);
        debug_assert_eq!(rows[i].phase(), 0);
        let pivot_row = rows[i].clone();
        for (j, r) in rows.iter_mut().enumerate() {
            if j != i && r.z_mask().get(p) {
                *r = r.mul(&pivot_row);
            }
        }
        pivots.push(p);
    }
    let mut circuit = Circuit::new(width);
    for g in disentangler.iter().rev() {
        circuit.push(g.inverse().expect("unitary"));
    }
    Ok(StatePrep { circuit, pivots })
}

/// Encoding circuit for a stabilizer code.
#[derive(Clone, Debug)]
pub struct Encoder {
    pub circuit: Circuit,
    /// Qubit carrying logical input `j`; all other inputs must be `|0>`.
    pub logical_inputs: Vec<usize>,
}

/// Encoder mapping `|0...0>` to `|0_E>`, and a basis state on the logical
/// inputs to the matching logical basis state.
pub fn synth_encoder(code: &StabilizerCode) -> Encoder {
    let mut gens: Vec<SignedPauli> = code
        .generators()
        .iter()
        .map(SignedPauli::hermitian)
        .collect();
    gens.extend(code.logical_z().iter().map(SignedPauli::hermitian));
    let prep = synth_stabilizer_state(code.n(), &gens).expect("code generators are valid");
    let mut circuit = prep.circuit;
    circuit.name_register("data", 0..code.n());
    Encoder {
        circuit,
        logical_inputs: prep.pivots[code.num_generators()..].to_vec(),
    }
}

/// Appends the uniform superposition over the row space of `generator` on
/// `qubits` (prep_zero first, then Hadamards on RREF pivots and CNOT fan-out).
fn push_code_state(c: &mut Circuit, generator: &BitMatrix, qubits: &[usize]) {
    for &q in qubits {
        c.prep_zero(q);
    }
    let (reduced, pivots) = generator.rref();
    for &p in &pivots {
        c.h(qubits[p]);
    }
    for (row, &p) in pivots.iter().enumerate() {
        for q in reduced.row(row).ones().filter(|&q| q != p) {
            c.cnot(qubits[p], qubits[q]);
        }
    }
}

/// Appends a measurement of the Hermitian Pauli `p` (local qubit `i` at
/// `map[i]`) using the fresh qubit `v`. Returns the record and the outcome
/// expected on a +1 eigenstate.
fn push_pauli_measurement(
    c: &mut Circuit,
    v: usize,
    p: &SignedPauli,
    map: &[usize],
    name: &str,
) -> (Label, bool) {
    debug_assert!(p.is_hermitian());
    c.prep_zero(v);
    if p.x_mask().is_zero() {
        for q in p.z_mask().ones() {
            c.cnot(map[q], v);
        }
        let l = c.measure_z(v, name);
        return (l, p.is_negative());
    }
    c.h(v);
    push_controlled_pauli(c, v, p, map);
    c.h(v);
    (c.measure_z(v, name), false)
}

/// Controlled-`p` from `v` (including the phase of `p`).
fn push_controlled_pauli(c: &mut Circuit, v: usize, p: &SignedPauli, map: &[usize]) {
    for q in 0..p.num_qubits() {
        if p.z_mask().get(q) {
            c.cz(v, map[q]);
        }
        if p.x_mask().get(q) {
            c.cnot(v, map[q]);
        }
    }
    // The gates above implement controlled-(X^x Z^z) = controlled-(i^-phase p).
    match p.phase() {
        1 => {
            c.s(v);
        }
        2 => {
            c.z(v);
        }
        3 => {
            c.sdg(v);
        }
        _ => {}
    }
}

/// Which ancilla stabilizers the verification measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckSet {
    /// Only the parity checks that fix the syndrome readout.
    Parity,
    /// A full generating set of the ancilla's stabilizer, parity checks first.
    Full,
}

/// Verification circuit: accept iff every record equals its expected value.
#[derive(Clone, Debug)]
pub struct Verification {
    pub circuit: Circuit,
    pub checks: Vec<(Label, bool)>,
}

impl Verification {
    pub fn accepts(&self, records: &[bool]) -> bool {
        self.checks.iter().all(|&(l, want)| records[l] == want)
    }
}

/// One verification qubit per check: `verifiers[i]` measures `checks[i]`,
/// whose local qubit `j` is `ancilla[j]`. Checks run in the given order.
pub fn synth_verification(
    checks: &[SignedPauli],
    ancilla: &[usize],
    verifiers: &[usize],
    width: usize,
) -> Result<Verification> {
    if verifiers.len() < checks.len() {
        return Err(Error::Dimension(format!(
            "{} checks but {} verification qubits",
            checks.len(),
            verifiers.len()
        )));
    }
    let mut circuit = Circuit::new(width);
    let mut out = Vec::with_capacity(checks.len());
    for (i, p) in checks.iter().enumerate() {
        if p.num_qubits() != ancilla.len() {
            return Err(Error::Dimension(format!(
                "check {i} acts on {} qubits, ancilla has {}",
                p.num_qubits(),
                ancilla.len()
            )));
        }
        out.push(push_pauli_measurement(
            &mut circuit,
            verifiers[i],
            p,
            ancilla,
            &format!("v{i}"),
        ));
    }
    Ok(Verification {
        circuit,
        checks: out,
    })
}

/// Recovery network style.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Style {
    /// One ancilla qubit per generator, coupled wherever the generator acts.
    Direct,
    /// A `2n`-qubit prepared ancilla coupled once per qubit.
    Ancilla,
    /// Separate X-error and Z-error rounds with an `n`-qubit ancilla.
    Css,
}

impl Style {
    pub fn name(self) -> &'static str {
        match self {
            Style::Direct => "direct",
            Style::Ancilla => "ancilla",
            Style::Css => "css",
        }
    }
}

impl std::str::FromStr for Style {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Style::Direct),
            "ancilla" => Ok(Style::Ancilla),
            "css" => Ok(Style::Css),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

/// A syndrome-extraction network on `num_data + num_ancilla` qubits, data first.
///
/// `prep` readies the ancilla (no measurements), `extract` couples and
/// measures it, and `readout` turns the records of `extract` into syndrome
/// bits for the generators listed in `syndrome_rows`.
#[derive(Clone, Debug)]
pub struct Network {
    pub name: &'static str,
    pub num_data: usize,
    pub num_ancilla: usize,
    pub prep: Circuit,
    pub extract: Circuit,
    pub readout: Readout,
    pub syndrome_rows: Vec<usize>,
    /// Stabilizer generators of the prepared ancilla over ancilla-local
    /// qubits, parity checks first.
    pub ancilla_checks: Vec<SignedPauli>,
    pub num_parity_checks: usize,
}

impl Network {
    pub fn width(&self) -> usize {
        self.num_data + self.num_ancilla
    }

    pub fn data(&self) -> Range<usize> {
        0..self.num_data
    }

    pub fn ancilla(&self) -> Range<usize> {
        self.num_data..self.width()
    }

    /// Preparation followed by extraction; readout labels stay valid.
    pub fn circuit(&self) -> Circuit {
        let mut c = self.prep.clone();
        let map: Vec<usize> = (0..self.width()).collect();
        let offset = c.append(&self.extract, &map);
        debug_assert_eq!(offset, 0);
        c
    }

    pub fn coupling_count(&self) -> usize {
        self.extract.coupling_count(&self.data(), &self.ancilla())
    }

    pub fn checks(&self, set: CheckSet) -> &[SignedPauli] {
        match set {
            CheckSet::Parity => &self.ancilla_checks[..self.num_parity_checks],
            CheckSet::Full => &self.ancilla_checks,
        }
    }
}

fn new_network_circuit(n: usize, na: usize) -> Circuit {
    let mut c = Circuit::new(0);
    c.add_register("data", n);
    c.add_register("ancilla", na);
    c
}

/// One ancilla qubit per generator, measured by a controlled-generator between
/// Hadamards.
pub fn synth_direct_network(code: &StabilizerCode) -> Network {
    let n = code.n();
    let m = code.num_generators();
    let mut prep = new_network_circuit(n, m);
    for i in 0..m {
        prep.prep_zero(n + i).h(n + i);
    }
    let mut extract = new_network_circuit(n, m);
    let data: Vec<usize> = (0..n).collect();
    let mut bits = Vec::with_capacity(m);
    for (i, g) in code.generators().iter().enumerate() {
        let a = n + i;
        push_controlled_pauli(&mut extract, a, &SignedPauli::hermitian(g), &data);
        extract.h(a);
        bits.push(vec![extract.measure_z(a, &format!("s{i}"))]);
    }
    let ancilla_checks = (0..m)
        .map(|i| SignedPauli::hermitian(&PauliOperator::single(m, i, Pauli::X)))
        .collect();
    Network {
        name: "direct",
        num_data: n,
        num_ancilla: m,
        prep,
        extract,
        readout: Readout { bits },
        syndrome_rows: (0..m).collect(),
        ancilla_checks,
        num_parity_checks: 0,
    }
}

/// `2n`-qubit ancilla `(a | b)`: CNOT `a_j -> d_j` for every `j`, then CNOT
/// `d_j -> b_j`; `a` is read in the X basis and `b` in the Z basis, and
/// syndrome bit `i` is the parity of row `i` of `(hx | hz)` on `(m_a | m_b)`.
///
/// The ancilla is prepared so that after the coupling it holds the uniform
/// superposition over all `2n`-bit words passing those parity checks (in the
/// measured bases), independently of the data.
pub fn synth_ancilla_network(code: &StabilizerCode) -> Result<Network> {
    let n = code.n();
    let m = code.num_generators();
    let width = 3 * n;
    let a = |j: usize| n + j;
    let b = |j: usize| 2 * n + j;

    let mut extract = new_network_circuit(n, 2 * n);
    for j in 0..n {
        extract.cnot(a(j), j);
    }
    for j in 0..n {
        extract.cnot(j, b(j));
    }
    let ma: Vec<Label> = (0..n).map(|j| extract.measure_x(a(j), &format!("a{j}"))).collect();
    let mb: Vec<Label> = (0..n).map(|j| extract.measure_z(b(j), &format!("b{j}"))).collect();
    let bits = (0..m)
        .map(|i| {
            let mut labels: Vec<Label> = code.hx().row(i).ones().map(|j| ma[j]).collect();
            labels.extend(code.hz().row(i).ones().map(|j| mb[j]));
            labels
        })
        .collect();

    // Ancilla stabilizers after coupling, pulled back through the coupling.
    let coupling: Vec<Gate> = extract.gates().iter().filter(|g| g.is_unitary()).cloned().collect();
    let pull_back = |post: SignedPauli| -> SignedPauli {
        let mut p = post;
        for g in coupling.iter().rev() {
            conjugate(&mut p, g).expect("unitary");
        }
        p
    };
    let ancilla_qubits: Vec<usize> = (n..width).collect();
    let data_qubits: Vec<usize> = (0..n).collect();
    let mut checks = Vec::with_capacity(2 * n);
    for (i, g) in code.generators().iter().enumerate() {
        let mut post = SignedPauli::identity(width);
        let mut op = PauliOperator::identity(width);
        for j in code.hx().row(i).ones() {
            op.apply(a(j), Pauli::X);
        }
        for j in code.hz().row(i).ones() {
            op.apply(b(j), Pauli::Z);
        }
        post = post.mul(&SignedPauli::hermitian(&op));
        let pre = pull_back(post);
        let data_part = pre.restrict(&data_qubits).unsigned();
        if &data_part != g {
            return Err(Error::InvalidCode(format!(
                "coupling maps parity check {i} onto {data_part}, not generator {g}"
            )));
        }
        let strip = SignedPauli::hermitian(g).embed(width, &data_qubits);
        let anc = pre.mul(&strip);
        debug_assert!(anc.restrict(&data_qubits).unsigned().is_identity());
        checks.push(anc.restrict(&ancilla_qubits));
    }
    let full = code.hx().hstack(code.hz())?;
    for uv in full.nullspace_basis().rows() {
        let mut op = PauliOperator::identity(width);
        for j in 0..n {
            if uv.get(j) {
                op.apply(a(j), Pauli::Z);
            }
            if uv.get(n + j) {
                op.apply(b(j), Pauli::X);
            }
        }
        let pre = pull_back(SignedPauli::hermitian(&op));
        if !pre.restrict(&data_qubits).unsigned().is_identity() {
            return Err(Error::InvalidCode("coupling leaks data onto the ancilla".into()));
        }
        checks.push(pre.restrict(&ancilla_qubits));
    }

    let state = synth_stabilizer_state(2 * n, &checks)?;
    let mut prep = new_network_circuit(n, 2 * n);
    for q in n..width {
        prep.prep_zero(q);
    }
    prep.append(&state.circuit, &ancilla_qubits);

    Ok(Network {
        name: "ancilla",
        num_data: n,
        num_ancilla: 2 * n,
        prep,
        extract,
        readout: Readout { bits },
        syndrome_rows: (0..m).collect(),
        ancilla_checks: checks,
        num_parity_checks: m,
    })
}

/// The two rounds of CSS recovery, each with an `n`-qubit ancilla and `n`
/// transversal CNOTs.
///
/// * X round (detects X errors): ancilla is the uniform superposition of the
///   words passing the Z-type checks, which for codes with equal X and Z
///   checks is `|0_E>` followed by transversal Hadamards; CNOT data -> ancilla,
///   measure Z.
/// * Z round (detects Z errors): ancilla is the uniform superposition of the
///   X-type check row space, i.e. `|0_E>`; CNOT ancilla -> data, measure X.
pub fn synth_css_networks(code: &StabilizerCode) -> Result<(Network, Network)> {
    let css = code.css().ok_or(Error::NotCss)?;
    let n = code.n();
    let data: Vec<usize> = (0..n).collect();
    let anc: Vec<usize> = (n..2 * n).collect();

    let round = |name: &'static str,
                 codewords: BitMatrix,
                 parity: &BitMatrix,
                 rows: &[usize],
                 x_round: bool|
     -> Network {
        let mut prep = new_network_circuit(n, n);
        push_code_state(&mut prep, &codewords, &anc);
        let mut extract = new_network_circuit(n, n);
        for j in 0..n {
            if x_round {
                extract.cnot(data[j], anc[j]);
            } else {
                extract.cnot(anc[j], data[j]);
            }
        }
        let records: Vec<Label> = (0..n)
            .map(|j| {
                if x_round {
                    extract.measure_z(anc[j], &format!("m{j}"))
                } else {
                    extract.measure_x(anc[j], &format!("m{j}"))
                }
            })
            .collect();
        let bits = parity
            .rows()
            .iter()
            .map(|h| h.ones().map(|j| records[j]).collect())
            .collect();
        // Stabilizers of the ancilla: parity checks in one basis, codeword
        // basis in the other.
        let (parity_pauli, word_pauli): (fn(BitVector) -> PauliOperator, fn(BitVector) -> PauliOperator) =
            if x_round {
                (PauliOperator::z_type, PauliOperator::x_type)
            } else {
                (PauliOperator::x_type, PauliOperator::z_type)
            };
        let second = if x_round { codewords.clone() } else { codewords.nullspace_basis() };
        let mut checks: Vec<SignedPauli> = parity
            .rows()
            .iter()
            .map(|r| SignedPauli::hermitian(&parity_pauli(r.clone())))
            .collect();
        let num_parity_checks = checks.len();
        checks.extend(
            second
                .rows()
                .iter()
                .map(|r| SignedPauli::hermitian(&word_pauli(r.clone()))),
        );
        Network {
            name,
            num_data: n,
            num_ancilla: n,
            prep,
            extract,
            readout: Readout { bits },
            syndrome_rows: rows.to_vec(),
            ancilla_checks: checks,
            num_parity_checks,
        }
    };

    let x_words = css.z_checks.nullspace_basis();
    let (x_reduced, x_piv) = css.x_checks.rref();
    let z_words = BitMatrix::from_rows(n, x_reduced.rows()[..x_piv.len()].to_vec())?;
    let x_round = round("css-x", x_words, &css.z_checks, &css.z_rows, true);
    let z_round = round("css-z", z_words, &css.x_checks, &css.x_rows, false);
    Ok((x_round, z_round))
}

/// Pairwise CNOTs `a[j] -> b[j]`.
pub fn transversal_cnot(a: &[usize], b: &[usize], width: usize) -> Result<Circuit> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "blocks have {} and {} qubits",
            a.len(),
            b.len()
        )));
    }
    let mut c = Circuit::new(width);
    for (&x, &y) in a.iter().zip(b) {
        c.try_push(Gate::Cnot(x, y))?;
    }
    Ok(c)
}
