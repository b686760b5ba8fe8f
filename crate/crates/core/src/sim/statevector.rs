use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use super::{uniform_pauli, NoiseParams, RngStream};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator, SignedPauli};

pub const MAX_STATEVECTOR_QUBITS: usize = 20;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pure state of `n` qubits; qubit `i` is bit `i` of the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`. Panics beyond [`MAX_STATEVECTOR_QUBITS`].
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        assert!(n <= MAX_STATEVECTOR_QUBITS, "{n} qubits exceed the statevector limit");
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    /// Normalizes the given amplitudes; fails on a wrong length or zero norm.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n > MAX_STATEVECTOR_QUBITS {
            return Err(Error::WidthOverflow {
                qubits: n,
                max: MAX_STATEVECTOR_QUBITS,
            });
        }
        if amps.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "{} amplitudes for {n} qubits",
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidParameter("state has zero norm".into()));
        }
        Ok(Self {
            n,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    /// Random single-qubit state `cos(t/2)|0> + e^{i f} sin(t/2)|1>`.
    pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let theta = rng.gen::<f64>() * std::f64::consts::PI;
        let phi = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
        Self {
            n: 1,
            amps: vec![
                Complex64::new((theta / 2.0).cos(), 0.0),
                Complex64::from_polar((theta / 2.0).sin(), phi),
            ],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `self ⊗ other` with `self` on the low qubits.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let n = self.n + other.n;
        assert!(n <= MAX_STATEVECTOR_QUBITS);
        let mut amps = Vec::with_capacity(1 << n);
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        StateVector { n, amps }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.n, other.n);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `sqrt(<psi| (|phi><phi| ⊗ I) |psi>)` with `phi` on the low qubits.
    pub fn overlap_with_subsystem(&self, phi: &StateVector) -> f64 {
        assert!(phi.n <= self.n);
        let low = 1usize << phi.n;
        let mut total = 0.0;
        for chunk in self.amps.chunks(low) {
            let c: Complex64 = phi
                .amps
                .iter()
                .zip(chunk)
                .map(|(p, a)| p.conj() * a)
                .sum();
            total += c.norm_sqr();
        }
        total.sqrt()
    }

    /// The state of the low `k` qubits, assuming the state is a product
    /// across the split; fails when it is entangled.
    pub fn factor_low(&self, k: usize) -> Result<StateVector> {
        assert!(k <= self.n);
        let low = 1usize << k;
        let best = self
            .amps
            .chunks(low)
            .enumerate()
            .map(|(i, c)| (i, c.iter().map(|a| a.norm_sqr()).sum::<f64>()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc })
            .0;
        let phi = StateVector::from_amplitudes(k, self.amps[best * low..(best + 1) * low].to_vec())?;
        if (self.overlap_with_subsystem(&phi) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(
                "state is entangled across the split".into(),
            ));
        }
        Ok(phi)
    }

    #[inline]
    fn pairs(&mut self, q: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let bit = 1usize << q;
        for base in (0..self.amps.len()).step_by(bit << 1) {
            for i in base..base + bit {
                let (lo, hi) = self.amps.split_at_mut(i + bit);
                f(&mut lo[i], &mut hi[0]);
            }
        }
    }

    pub fn apply_h(&mut self, q: usize) {
        self.pairs(q, |a, b| {
            let (x, y) = (*a, *b);
            *a = (x + y) * FRAC_1_SQRT_2;
            *b = (x - y) * FRAC_1_SQRT_2;
        });
    }

    pub fn apply_s(&mut self, q: usize) {
        self.pairs(q, |_, b| *b *= I);
    }

    pub fn apply_sdg(&mut self, q: usize) {
        self.pairs(q, |_, b| *b *= -I);
    }

    pub fn apply_x(&mut self, q: usize) {
        self.pairs(q, std::mem::swap);
    }

    pub fn apply_y(&mut self, q: usize) {
        self.pairs(q, |a, b| {
            let (x, y) = (*a, *b);
            *a = -I * y;
            *b = I * x;
        });
    }

    pub fn apply_z(&mut self, q: usize) {
        self.pairs(q, |_, b| *b = -*b);
    }

    pub fn apply_cnot(&mut self, c: usize, t: usize) {
        let (cb, tb) = (1usize << c, 1usize << t);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let m = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & m == m {
                *amp = -*amp;
            }
        }
    }

    pub fn apply_pauli_gate(&mut self, q: usize, p: Pauli) {
        match p {
            Pauli::I => {}
            Pauli::X => self.apply_x(q),
            Pauli::Y => self.apply_y(q),
            Pauli::Z => self.apply_z(q),
        }
    }

    /// Applies `p` to qubits `0..p.num_qubits()` (global phase ignored).
    pub fn apply_pauli(&mut self, p: &PauliOperator) {
        assert!(p.num_qubits() <= self.n);
        for q in 0..p.num_qubits() {
            self.apply_pauli_gate(q, p.get(q));
        }
    }

    /// `<psi|P|psi>`, real for Hermitian `P`.
    pub fn expectation(&self, p: &SignedPauli) -> f64 {
        assert_eq!(p.num_qubits(), self.n);
        let mask = |v: &crate::gf2::BitVector| (0..self.n).fold(0usize, |m, q| m | (v.get(q) as usize) << q);
        let (x, z) = (mask(p.x_mask()), mask(p.z_mask()));
        let phase = [
            Complex64::new(1.0, 0.0),
            I,
            Complex64::new(-1.0, 0.0),
            -I,
        ][p.phase() as usize];
        let mut total = ZERO;
        for (i, a) in self.amps.iter().enumerate() {
            let sign = if (i & z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            total += self.amps[i ^ x].conj() * a * sign;
        }
        (total * phase).re
    }

    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn project(&mut self, q: usize, outcome: bool, prob: f64) {
        let bit = 1usize << q;
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
    }

    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> bool {
        let p1 = self.prob_one(q).clamp(0.0, 1.0);
        let outcome = rng.gen::<f64>() < p1;
        self.project(q, outcome, if outcome { p1 } else { 1.0 - p1 });
        outcome
    }

    pub fn measure_x<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> bool {
        self.apply_h(q);
        let m = self.measure_z(q, rng);
        self.apply_h(q);
        m
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) {
        if self.measure_z(q, rng) {
            self.apply_x(q);
        }
    }

    /// Reset that needs no randomness because qubit `q` is in a Z eigenstate.
    fn reset_deterministic(&mut self, q: usize) -> Result<()> {
        let p1 = self.prob_one(q);
        if p1 < 1e-12 {
            self.project(q, false, 1.0 - p1);
        } else if p1 > 1.0 - 1e-12 {
            self.project(q, true, p1);
            self.apply_x(q);
        } else {
            return Err(Error::InvalidParameter(format!(
                "reset of qubit {q} has a random outcome"
            )));
        }
        Ok(())
    }

    fn apply_unitary(&mut self, g: &Gate) {
        match *g {
            Gate::Id(_) => {}
            Gate::H(q) => self.apply_h(q),
            Gate::S(q) => self.apply_s(q),
            Gate::Sdg(q) => self.apply_sdg(q),
            Gate::X(q) => self.apply_x(q),
            Gate::Y(q) => self.apply_y(q),
            Gate::Z(q) => self.apply_z(q),
            Gate::Cnot(c, t) => self.apply_cnot(c, t),
            Gate::Cz(a, b) => self.apply_cz(a, b),
            _ => unreachable!("not unitary"),
        }
    }
}

fn check_width(c: &Circuit, input: &StateVector) -> Result<()> {
    if c.num_qubits() > MAX_STATEVECTOR_QUBITS {
        return Err(Error::WidthOverflow {
            qubits: c.num_qubits(),
            max: MAX_STATEVECTOR_QUBITS,
        });
    }
    if c.num_qubits() != input.n {
        return Err(Error::Dimension(format!(
            "circuit has {} qubits, state has {}",
            c.num_qubits(),
            input.n
        )));
    }
    Ok(())
}

/// Runs `c` exactly on `input`, first applying `injected` to the low qubits.
/// Returns the final state and one record per circuit label.
pub fn run_statevector(
    c: &Circuit,
    input: StateVector,
    injected: Option<&PauliOperator>,
    rng: &mut RngStream,
) -> Result<(StateVector, Vec<bool>)> {
    run_statevector_noisy(c, input, injected, &FaultSchedule::default(), rng)
}

/// Sampled faults for one noisy run, as produced by [`sample_faults`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultSchedule {
    /// `(step, qubit, pauli)`: applied right after the gate at `step`; sorted by step.
    pub paulis: Vec<(usize, usize, Pauli)>,
    /// `(step, bit)`: the measurement at `step` reports `bit`.
    pub measurements: Vec<(usize, bool)>,
}

impl FaultSchedule {
    pub fn is_empty(&self) -> bool {
        self.paulis.is_empty() && self.measurements.is_empty()
    }
}

/// Draws faults gate by gate and qubit by qubit (no skipping); identity draws
/// are dropped.
pub fn sample_faults<R: Rng + ?Sized>(c: &Circuit, noise: &NoiseParams, rng: &mut R) -> FaultSchedule {
    let mut out = FaultSchedule::default();
    for (t, g) in c.gates().iter().enumerate() {
        let (a, b) = g.qubits();
        if noise.gamma > 0.0 && rng.gen::<f64>() < noise.gamma {
            if g.is_measurement() {
                out.measurements.push((t, rng.gen::<bool>()));
            } else {
                for q in std::iter::once(a).chain(b) {
                    let p = uniform_pauli(rng);
                    if p != Pauli::I {
                        out.paulis.push((t, q, p));
                    }
                }
            }
        }
        if noise.epsilon > 0.0 {
            for q in 0..c.num_qubits() {
                if q == a || Some(q) == b {
                    continue;
                }
                if rng.gen::<f64>() < noise.epsilon {
                    let p = uniform_pauli(rng);
                    if p != Pauli::I {
                        out.paulis.push((t, q, p));
                    }
                }
            }
        }
    }
    out
}

/// Runs `c` with the given faults applied as exact operators.
pub fn run_statevector_noisy(
    c: &Circuit,
    mut state: StateVector,
    injected: Option<&PauliOperator>,
    faults: &FaultSchedule,
    rng: &mut RngStream,
) -> Result<(StateVector, Vec<bool>)> {
    check_width(c, &state)?;
    if let Some(e) = injected {
        state.apply_pauli(e);
    }
    let mut records = vec![false; c.num_labels()];
    let mut pi = 0;
    let mut mi = 0;
    for (t, g) in c.gates().iter().enumerate() {
        match g {
            Gate::PrepZero(q) => state.reset(*q, rng),
            Gate::MeasureZ(q, l) => records[*l] = state.measure_z(*q, rng),
            Gate::MeasureX(q, l) => records[*l] = state.measure_x(*q, rng),
            Gate::ClassicalPauli {
                qubit,
                pauli,
                condition,
            } => {
                if condition.iter().fold(false, |acc, &l| acc ^ records[l]) {
                    state.apply_pauli_gate(*qubit, *pauli);
                }
            }
            g => state.apply_unitary(g),
        }
        while mi < faults.measurements.len() && faults.measurements[mi].0 == t {
            if let Gate::MeasureZ(_, l) | Gate::MeasureX(_, l) = g {
                records[*l] = faults.measurements[mi].1;
            }
            mi += 1;
        }
        while pi < faults.paulis.len() && faults.paulis[pi].0 == t {
            let (_, q, p) = faults.paulis[pi];
            state.apply_pauli_gate(q, p);
            pi += 1;
        }
    }
    Ok((state, records))
}

/// Outcome histogram of `shots` noisy runs from `|0...0>`, keyed by the
/// record word (bit `l` = record `l`).
///
/// Requires every measurement to sit in a final block on distinct qubits,
/// resets to be deterministic and no classical control. Runs sharing a fault
/// configuration reuse one evolved state, and fault-free prefixes are cached.
pub fn sample_outcomes_statevector(
    c: &Circuit,
    noise: &NoiseParams,
    shots: usize,
    seed: u64,
) -> Result<BTreeMap<u64, u64>> {
    let n = c.num_qubits();
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::WidthOverflow {
            qubits: n,
            max: MAX_STATEVECTOR_QUBITS,
        });
    }
    if c.num_labels() > 20 {
        return Err(Error::TooLarge(format!("{} measurement records", c.num_labels())));
    }
    let gates = c.gates();
    let suffix = gates.iter().position(Gate::is_measurement).unwrap_or(gates.len());
    let mut measured_at = vec![usize::MAX; n];
    let mut outputs = Vec::new(); // (qubit, x_basis, label)
    for (t, g) in gates.iter().enumerate().skip(suffix) {
        match *g {
            Gate::MeasureZ(q, l) | Gate::MeasureX(q, l) if measured_at[q] == usize::MAX => {
                measured_at[q] = t;
                outputs.push((q, matches!(g, Gate::MeasureX(..)), l));
            }
            _ => {
                return Err(Error::InvalidParameter(
                    "measurements must form a final block on distinct qubits".into(),
                ))
            }
        }
    }
    if gates.iter().any(|g| matches!(g, Gate::ClassicalPauli { .. })) {
        return Err(Error::InvalidParameter("classical control is not supported here".into()));
    }

    // Fault-free states after each prefix length, subsampled to bound memory.
    let stride = ((suffix as u64 * (16u64 << n)) / (256u64 << 20) + 1) as usize;
    let mut checkpoints: Vec<(usize, StateVector)> = Vec::new();
    let mut s = StateVector::zero(n);
    checkpoints.push((0, s.clone()));
    for (t, g) in gates[..suffix].iter().enumerate() {
        match g {
            Gate::PrepZero(q) => s.reset_deterministic(*q)?,
            g => s.apply_unitary(g),
        }
        if (t + 1) % stride == 0 {
            checkpoints.push((t + 1, s.clone()));
        }
    }

    type Key = (Vec<(usize, usize, Pauli)>, Vec<(usize, Pauli)>);
    let mut cache: HashMap<Key, Vec<f64>> = HashMap::new();
    let mut rng = RngStream::new(seed, 0);
    let mut hist = BTreeMap::new();
    for _ in 0..shots {
        let faults = sample_faults(c, noise, &mut rng);
        let mut early = Vec::new();
        let mut late = Vec::new();
        for &(t, q, p) in &faults.paulis {
            if t < suffix {
                early.push((t, q, p));
            } else if measured_at[q] != usize::MAX && measured_at[q] > t {
                late.push((q, p));
            }
        }
        let key = (early, late);
        if !cache.contains_key(&key) {
            let first = key.0.first().map_or(suffix, |f| f.0);
            let (start, base) = checkpoints
                .iter()
                .rev()
                .find(|(len, _)| *len <= first)
                .expect("checkpoint at 0");
            let mut st = base.clone();
            let mut fi = 0;
            for (t, g) in gates.iter().enumerate().take(suffix).skip(*start) {
                match g {
                    Gate::PrepZero(q) => st.reset_deterministic(*q)?,
                    g => st.apply_unitary(g),
                }
                while fi < key.0.len() && key.0[fi].0 == t {
                    st.apply_pauli_gate(key.0[fi].1, key.0[fi].2);
                    fi += 1;
                }
            }
            for &(q, p) in &key.1 {
                st.apply_pauli_gate(q, p);
            }
            for &(q, x_basis, _) in &outputs {
                if x_basis {
                    st.apply_h(q);
                }
            }
            let mut probs = vec![0.0; 1 << outputs.len()];
            for (i, a) in st.amps.iter().enumerate() {
                let w = outputs
                    .iter()
                    .enumerate()
                    .fold(0usize, |w, (k, &(q, _, _))| w | ((i >> q) & 1) << k);
                probs[w] += a.norm_sqr();
            }
            let mut acc = 0.0;
            for p in probs.iter_mut() {
                acc += *p;
                *p = acc;
            }
            cache.insert(key.clone(), probs);
        }
        let cdf = &cache[&key];
        let u = rng.gen::<f64>() * cdf[cdf.len() - 1];
        let w = cdf.partition_point(|&x| x <= u).min(cdf.len() - 1);
        let mut word = 0u64;
        for (k, &(_, _, l)) in outputs.iter().enumerate() {
            word |= (((w >> k) & 1) as u64) << l;
        }
        for &(t, bit) in &faults.measurements {
            if let Gate::MeasureZ(_, l) | Gate::MeasureX(_, l) = gates[t] {
                word = (word & !(1u64 << l)) | (bit as u64) << l;
            }
        }
        *hist.entry(word).or_insert(0) += 1;
    }
    Ok(hist)
}
