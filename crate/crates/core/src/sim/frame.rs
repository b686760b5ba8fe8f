use std::collections::BTreeMap;

use rand::Rng;

use super::{geometric_gap, uniform_pauli, NoiseParams, RngStream};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::pauli::{Pauli, PauliOperator};

/// X and Z error masks relative to the ideal run.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliFrame {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            x: vec![0; words],
            z: vec![0; words],
        }
    }

    /// Frame holding `p` on qubits `0..p.num_qubits()`.
    pub fn from_pauli(n: usize, p: &PauliOperator) -> Self {
        let mut f = Self::new(n);
        for q in p.support() {
            f.apply(q, p.get(q));
        }
        f
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x(&self, q: usize) -> bool {
        self.x[q >> 6] >> (q & 63) & 1 == 1
    }

    #[inline]
    pub fn z(&self, q: usize) -> bool {
        self.z[q >> 6] >> (q & 63) & 1 == 1
    }

    #[inline]
    fn set_x(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q & 63);
        if v {
            self.x[q >> 6] |= m;
        } else {
            self.x[q >> 6] &= !m;
        }
    }

    #[inline]
    fn set_z(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q & 63);
        if v {
            self.z[q >> 6] |= m;
        } else {
            self.z[q >> 6] &= !m;
        }
    }

    #[inline]
    fn flip_x(&mut self, q: usize) {
        self.x[q >> 6] ^= 1u64 << (q & 63);
    }

    #[inline]
    fn flip_z(&mut self, q: usize) {
        self.z[q >> 6] ^= 1u64 << (q & 63);
    }

    /// Multiplies the frame by `p` on qubit `q`.
    #[inline]
    pub fn apply(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        if x {
            self.flip_x(q);
        }
        if z {
            self.flip_z(q);
        }
    }

    /// Multiplies the frame by `p` placed on `qubits` (`p`'s qubit `i` at `qubits[i]`).
    pub fn apply_operator(&mut self, p: &PauliOperator, qubits: &[usize]) {
        for i in p.support() {
            self.apply(qubits[i], p.get(i));
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.x.iter_mut().for_each(|w| *w = 0);
        self.z.iter_mut().for_each(|w| *w = 0);
    }

    /// The frame restricted to `qubits`, as an operator on `qubits.len()` qubits.
    pub fn restrict(&self, qubits: &[usize]) -> PauliOperator {
        let mut x = BitVector::zeros(qubits.len());
        let mut z = BitVector::zeros(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            x.set(i, self.x(q));
            z.set(i, self.z(q));
        }
        PauliOperator::from_masks(x, z).expect("equal lengths")
    }

    pub fn to_pauli(&self) -> PauliOperator {
        self.restrict(&(0..self.n).collect::<Vec<_>>())
    }

    /// Packed X and Z masks of `qubits` (at most 64).
    pub fn packed(&self, qubits: &[usize]) -> (u64, u64) {
        debug_assert!(qubits.len() <= 64);
        let mut x = 0;
        let mut z = 0;
        for (i, &q) in qubits.iter().enumerate() {
            x |= (self.x(q) as u64) << i;
            z |= (self.z(q) as u64) << i;
        }
        (x, z)
    }

    /// Uniformly random Z component on every qubit. Valid when every qubit
    /// of the ideal state is in a Z eigenstate.
    pub fn randomize_z<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for (i, w) in self.z.iter_mut().enumerate() {
            let live = (self.n - 64 * i).min(64);
            let mask = if live == 64 { u64::MAX } else { (1u64 << live) - 1 };
            *w = rng.gen::<u64>() & mask;
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FrameOptions {
    /// Randomize the component a measurement or reset leaves undetermined, so
    /// that reference-plus-flip outcomes follow the true distribution.
    pub randomize_gauge: bool,
}

/// Fault counts of one or more runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FrameStats {
    pub gate_faults: u64,
    pub measurement_faults: u64,
    pub idle_faults: u64,
}

/// A circuit prepared for repeated Pauli-frame runs.
#[derive(Clone, Debug)]
pub struct FrameProgram {
    gates: Vec<Gate>,
    width: usize,
    num_labels: usize,
    /// `idle_before[t]`: idle opportunities in steps `0..t`.
    idle_before: Vec<u64>,
}

impl FrameProgram {
    pub fn new(c: &Circuit) -> Result<Self> {
        let width = c.num_qubits();
        let mut idle_before = Vec::with_capacity(c.len() + 1);
        let mut acc = 0u64;
        idle_before.push(0);
        for g in c.gates() {
            let (_, b) = g.qubits();
            let involved = 1 + b.is_some() as usize;
            acc += width.saturating_sub(involved) as u64;
            idle_before.push(acc);
        }
        Ok(Self {
            gates: c.gates().to_vec(),
            width,
            num_labels: c.num_labels(),
            idle_before,
        })
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    /// Total idle opportunities over the schedule.
    pub fn idle_opportunities(&self) -> u64 {
        *self.idle_before.last().expect("non-empty")
    }

    /// Propagates `frame` through the schedule with sampled noise. `records[l]`
    /// receives the flip of record `l` relative to the ideal run.
    pub fn run<R: Rng + ?Sized>(
        &self,
        frame: &mut PauliFrame,
        records: &mut [bool],
        noise: &NoiseParams,
        rng: &mut R,
        opts: FrameOptions,
        stats: &mut FrameStats,
    ) {
        debug_assert!(frame.n >= self.width);
        debug_assert!(records.len() >= self.num_labels);
        let mut next_gate = geometric_gap(rng, noise.gamma);
        let mut next_idle = geometric_gap(rng, noise.epsilon);
        for (t, g) in self.gates.iter().enumerate() {
            match *g {
                Gate::Id(_) | Gate::X(_) | Gate::Y(_) | Gate::Z(_) => {}
                Gate::H(q) => {
                    let (x, z) = (frame.x(q), frame.z(q));
                    frame.set_x(q, z);
                    frame.set_z(q, x);
                }
                Gate::S(q) | Gate::Sdg(q) => {
                    if frame.x(q) {
                        frame.flip_z(q);
                    }
                }
                Gate::Cnot(c, tq) => {
                    if frame.x(c) {
                        frame.flip_x(tq);
                    }
                    if frame.z(tq) {
                        frame.flip_z(c);
                    }
                }
                Gate::Cz(a, b) => {
                    let (xa, xb) = (frame.x(a), frame.x(b));
                    if xb {
                        frame.flip_z(a);
                    }
                    if xa {
                        frame.flip_z(b);
                    }
                }
                Gate::PrepZero(q) => {
                    frame.set_x(q, false);
                    let r = opts.randomize_gauge && rng.gen::<bool>();
                    frame.set_z(q, r);
                }
                Gate::MeasureZ(q, l) => {
                    records[l] = frame.x(q);
                    let r = opts.randomize_gauge && rng.gen::<bool>();
                    frame.set_z(q, r);
                }
                Gate::MeasureX(q, l) => {
                    records[l] = frame.z(q);
                    let r = opts.randomize_gauge && rng.gen::<bool>();
                    frame.set_x(q, r);
                }
                Gate::ClassicalPauli {
                    qubit,
                    pauli,
                    ref condition,
                } => {
                    if condition.iter().fold(false, |acc, &l| acc ^ records[l]) {
                        frame.apply(qubit, pauli);
                    }
                }
            }
            if t as u64 == next_gate {
                match *g {
                    Gate::MeasureZ(_, l) | Gate::MeasureX(_, l) => {
                        records[l] = rng.gen::<bool>();
                        stats.measurement_faults += 1;
                    }
                    _ => {
                        let (a, b) = g.qubits();
                        frame.apply(a, uniform_pauli(rng));
                        if let Some(b) = b {
                            frame.apply(b, uniform_pauli(rng));
                        }
                        stats.gate_faults += 1;
                    }
                }
                next_gate = next_gate
                    .saturating_add(1)
                    .saturating_add(geometric_gap(rng, noise.gamma));
            }
            let end = self.idle_before[t + 1];
            if next_idle < end {
                let (a, b) = g.qubits();
                let (lo, hi) = match b {
                    Some(b) => (a.min(b), Some(a.max(b))),
                    None => (a, None),
                };
                while next_idle < end {
                    let mut q = (next_idle - self.idle_before[t]) as usize;
                    if q >= lo {
                        q += 1;
                    }
                    if hi.is_some_and(|hi| q >= hi) {
                        q += 1;
                    }
                    frame.apply(q, uniform_pauli(rng));
                    stats.idle_faults += 1;
                    next_idle = next_idle
                        .saturating_add(1)
                        .saturating_add(geometric_gap(rng, noise.epsilon));
                }
            }
        }
    }
}

/// One Pauli-frame run of `c`, starting from the frame `injected` (or the
/// identity). Records hold flips relative to the ideal run.
pub fn run_pauli_frame(
    c: &Circuit,
    noise: &NoiseParams,
    rng: &mut RngStream,
    injected: Option<&PauliOperator>,
    opts: FrameOptions,
) -> Result<(PauliFrame, Vec<bool>, FrameStats)> {
    let prog = FrameProgram::new(c)?;
    let mut frame = match injected {
        Some(p) => {
            if p.num_qubits() > c.num_qubits() {
                return Err(Error::Dimension(format!(
                    "injected error on {} qubits, circuit has {}",
                    p.num_qubits(),
                    c.num_qubits()
                )));
            }
            PauliFrame::from_pauli(c.num_qubits(), p)
        }
        None => PauliFrame::new(c.num_qubits()),
    };
    let mut records = vec![false; c.num_labels()];
    let mut stats = FrameStats::default();
    prog.run(&mut frame, &mut records, noise, rng, opts, &mut stats);
    Ok((frame, records, stats))
}

/// Outcome histogram of `shots` runs from `|0...0>`: each outcome is the
/// `reference` record word (a noiseless sample) XOR the sampled flips, with
/// gauge randomization on. Shot `i` uses stream `i` of `seed`.
pub fn sample_outcomes_frame(
    c: &Circuit,
    noise: &NoiseParams,
    shots: usize,
    seed: u64,
    reference: &[bool],
) -> Result<BTreeMap<u64, u64>> {
    if c.num_labels() > 64 || reference.len() != c.num_labels() {
        return Err(Error::Dimension(format!(
            "{} records, reference has {}",
            c.num_labels(),
            reference.len()
        )));
    }
    let prog = FrameProgram::new(c)?;
    let opts = FrameOptions {
        randomize_gauge: true,
    };
    let base = reference
        .iter()
        .enumerate()
        .fold(0u64, |w, (l, &b)| w | (b as u64) << l);
    let mut hist = BTreeMap::new();
    let mut records = vec![false; c.num_labels()];
    let mut stats = FrameStats::default();
    for shot in 0..shots {
        let mut rng = RngStream::new(seed, shot as u64);
        let mut frame = PauliFrame::new(c.num_qubits());
        frame.randomize_z(&mut rng);
        prog.run(&mut frame, &mut records, noise, &mut rng, opts, &mut stats);
        let flips = records
            .iter()
            .enumerate()
            .fold(0u64, |w, (l, &b)| w | (b as u64) << l);
        *hist.entry(base ^ flips).or_insert(0) += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless() -> NoiseParams {
        NoiseParams::noiseless()
    }

    #[test]
    fn cnot_spreads_x_forward_and_z_backward() {
        let mut c = Circuit::new(2);
        c.cnot(0, 1);
        let mut rng = RngStream::new(0, 0);
        let (f, _, _) =
            run_pauli_frame(&c, &noiseless(), &mut rng, Some(&"XI".parse().unwrap()), FrameOptions::default())
                .unwrap();
        assert_eq!(f.to_pauli().to_string(), "XX");
        let (f, _, _) =
            run_pauli_frame(&c, &noiseless(), &mut rng, Some(&"IZ".parse().unwrap()), FrameOptions::default())
                .unwrap();
        assert_eq!(f.to_pauli().to_string(), "ZZ");
    }

    #[test]
    fn h_s_cz_rules() {
        let mut c = Circuit::new(2);
        c.h(0).s(0).cz(0, 1);
        let mut rng = RngStream::new(0, 0);
        // Z -H-> X -S-> Y -CZ-> Y Z
        let (f, _, _) =
            run_pauli_frame(&c, &noiseless(), &mut rng, Some(&"ZI".parse().unwrap()), FrameOptions::default())
                .unwrap();
        assert_eq!(f.to_pauli().to_string(), "YZ");
    }

    #[test]
    fn measurement_flips_and_prep_resets() {
        let mut c = Circuit::new(2);
        c.measure_z(0, "a");
        c.measure_x(1, "b");
        c.prep_zero(0);
        let mut rng = RngStream::new(0, 0);
        let (f, rec, _) =
            run_pauli_frame(&c, &noiseless(), &mut rng, Some(&"XZ".parse().unwrap()), FrameOptions::default())
                .unwrap();
        assert_eq!(rec, vec![true, true]);
        assert_eq!(f.to_pauli().to_string(), "IZ");
    }

    #[test]
    fn gamma_one_faults_every_gate() {
        let mut c = Circuit::new(1);
        c.h(0);
        let noise = NoiseParams::new(1.0, 0.0).unwrap();
        let mut hit = 0;
        let runs = 40_000;
        for s in 0..runs {
            let mut rng = RngStream::new(3, s);
            let (f, _, st) = run_pauli_frame(&c, &noise, &mut rng, None, FrameOptions::default()).unwrap();
            assert_eq!(st.gate_faults, 1);
            hit += !f.is_identity() as u32;
        }
        let frac = hit as f64 / runs as f64;
        assert!((frac - 0.75).abs() < 0.01, "{frac}");
    }

    #[test]
    fn fault_opportunities_match_schedule() {
        let mut c = Circuit::new(4);
        c.h(0).cnot(1, 2).prep_zero(3);
        c.measure_z(0, "m");
        let prog = FrameProgram::new(&c).unwrap();
        assert_eq!(prog.idle_opportunities(), 3 + 2 + 3 + 3);
        let noise = NoiseParams::new(1.0, 1.0).unwrap();
        let mut rng = RngStream::new(1, 0);
        let mut frame = PauliFrame::new(4);
        let mut rec = vec![false; 1];
        let mut st = FrameStats::default();
        prog.run(&mut frame, &mut rec, &noise, &mut rng, FrameOptions::default(), &mut st);
        assert_eq!(st.gate_faults + st.measurement_faults, c.len() as u64);
        assert_eq!(st.idle_faults, prog.idle_opportunities());
    }

    #[test]
    fn idle_noise_skips_involved_qubits() {
        // Only qubit 1 can be hit: qubits 0 and 2 are in the gate.
        let mut c = Circuit::new(3);
        c.cnot(2, 0);
        let noise = NoiseParams::new(0.0, 1.0).unwrap();
        for s in 0..200 {
            let mut rng = RngStream::new(4, s);
            let (f, _, _) = run_pauli_frame(&c, &noise, &mut rng, None, FrameOptions::default()).unwrap();
            let p = f.to_pauli();
            assert_eq!(p.get(0), Pauli::I);
            assert_eq!(p.get(2), Pauli::I);
        }
    }

    #[test]
    fn idle_rate_matches_epsilon() {
        let mut c = Circuit::new(5);
        for _ in 0..100 {
            c.h(0);
        }
        let noise = NoiseParams::new(0.0, 0.01).unwrap();
        let prog = FrameProgram::new(&c).unwrap();
        let mut st = FrameStats::default();
        let runs = 5000u64;
        for s in 0..runs {
            let mut rng = RngStream::new(8, s);
            let mut f = PauliFrame::new(5);
            prog.run(&mut f, &mut [], &noise, &mut rng, FrameOptions::default(), &mut st);
        }
        let expect = runs as f64 * 400.0 * 0.01;
        let sd = expect.sqrt();
        assert!((st.idle_faults as f64 - expect).abs() < 4.0 * sd);
    }

    #[test]
    fn classical_control_follows_flips() {
        let mut c = Circuit::new(2);
        let m = c.measure_z(0, "m");
        c.classical_pauli(1, Pauli::X, &[m]).unwrap();
        let mut rng = RngStream::new(0, 0);
        let (f, _, _) =
            run_pauli_frame(&c, &noiseless(), &mut rng, Some(&"XI".parse().unwrap()), FrameOptions::default())
                .unwrap();
        assert!(f.x(1));
    }
}
