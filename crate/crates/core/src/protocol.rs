//! Fault-tolerant recovery: verified ancilla preparation with retries, `r`
//! repeated syndrome cycles, bitwise-majority decoding and correction, and
//! Monte Carlo estimation of the failure rate of one computational step.
//!
//! All circuits of a protocol run on one machine register laid out as
//! `blocks * n` data qubits, then the ancilla, then one verification qubit per
//! ancilla check. Corrections are applied noiselessly (they are Pauli frame
//! updates), and each trial ends with an ideal decode of every block.

use rand::Rng;
use rayon::prelude::*;

use crate::analysis::format_sig;
use crate::circuit::{
    synth_ancilla_network, synth_css_networks, synth_direct_network, synth_encoder,
    synth_verification, transversal_cnot, CheckSet, Circuit, Label, Network, Readout, Style,
};
use crate::codes::{build_decoder_table, ClassicalDecoder, DecoderTable, PackedCode, StabilizerCode, Syndrome};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::pauli::{Pauli, PauliOperator};
use crate::sim::{
    run_statevector, FrameOptions, FrameProgram, FrameStats, NoiseParams, PauliFrame, RngStream,
    StateVector,
};

/// Parameters of one recovery.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecoveryConfig {
    /// Syndrome cycles per recovery (odd).
    pub r: usize,
    /// Preparation attempts allowed per cycle.
    pub max_prep_retries: usize,
    pub style: Style,
    /// Ancilla stabilizers checked before coupling.
    pub check_set: CheckSet,
}

impl RecoveryConfig {
    pub fn new(r: usize, max_prep_retries: usize, style: Style) -> Result<Self> {
        if r == 0 || r % 2 == 0 {
            return Err(Error::InvalidParameter(format!("r = {r} must be odd and positive")));
        }
        if max_prep_retries == 0 {
            return Err(Error::InvalidParameter("max_prep_retries must be at least 1".into()));
        }
        Ok(Self {
            r,
            max_prep_retries,
            style,
            check_set: CheckSet::Full,
        })
    }

    pub fn with_check_set(mut self, set: CheckSet) -> Self {
        self.check_set = set;
        self
    }
}

/// Which errors a syndrome cycle looks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RoundKind {
    /// Every generator at once.
    All,
    /// Z-type checks only (detects X errors).
    XErrors,
    /// X-type checks only (detects Z errors).
    ZErrors,
}

impl RoundKind {
    pub fn name(self) -> &'static str {
        match self {
            RoundKind::All => "all",
            RoundKind::XErrors => "x",
            RoundKind::ZErrors => "z",
        }
    }
}

/// One syndrome cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeRecord {
    pub block: usize,
    pub kind: RoundKind,
    /// Index of the cycle within its recovery, `< r`.
    pub round: usize,
    /// Measured syndrome.
    pub syndrome: Syndrome,
    /// Syndrome of the data error at the start of the coupling.
    pub data_syndrome: Syndrome,
    pub retries: usize,
}

impl SyndromeRecord {
    pub fn is_wrong(&self) -> bool {
        self.syndrome != self.data_syndrome
    }
}

/// One majority decision and the correction it produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub block: usize,
    pub kind: RoundKind,
    pub majority: Syndrome,
    /// Syndrome of the data error after the last cycle.
    pub data_syndrome: Syndrome,
    pub applied: PauliOperator,
}

impl Correction {
    pub fn is_wrong(&self) -> bool {
        self.majority != self.data_syndrome
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub logical_failure: bool,
    pub retries_exhausted: bool,
    /// Data error after the final ideal decode, blocks concatenated.
    pub residual: PauliOperator,
    pub records: Vec<SyndromeRecord>,
    pub corrections: Vec<Correction>,
    pub stats: FrameStats,
}

#[derive(Clone, Debug)]
enum RoundDecoder {
    Table(DecoderTable),
    /// Classical decoder whose error pattern is corrected with the given Pauli.
    Classical(ClassicalDecoder, Pauli),
}

impl RoundDecoder {
    fn correction(&self, n: usize, syndrome: &BitVector) -> PauliOperator {
        match self {
            RoundDecoder::Table(t) => t.decode(&Syndrome(syndrome.clone())),
            RoundDecoder::Classical(d, p) => {
                let e = d.decode(syndrome);
                let mut op = PauliOperator::identity(n);
                for q in e.ones() {
                    op.set(q, *p);
                }
                op
            }
        }
    }
}

/// A round kind with its network and decoder.
#[derive(Clone, Debug)]
struct RoundSpec {
    kind: RoundKind,
    network: Network,
    decoder: RoundDecoder,
    /// Packed `(x, z)` masks of the generators the round reads.
    rows: Vec<(u64, u64)>,
    verification: bool,
}

/// A round kind compiled for one block of the machine.
#[derive(Clone, Debug)]
struct CompiledRound {
    prep: FrameProgram,
    verify: FrameProgram,
    verify_labels: Vec<Label>,
    extract: FrameProgram,
    readout: Readout,
}

/// Scratch state reused across trials.
#[derive(Clone, Debug)]
pub struct Workspace {
    pub frame: PauliFrame,
    records: Vec<bool>,
    pub stats: FrameStats,
}

/// A recovery procedure compiled for a code, a configuration and a machine.
#[derive(Clone, Debug)]
pub struct Protocol {
    code: StabilizerCode,
    config: RecoveryConfig,
    packed: PackedCode,
    blocks: usize,
    width: usize,
    specs: Vec<RoundSpec>,
    compiled: Vec<Vec<CompiledRound>>,
    final_decoders: Vec<(Vec<(u64, u64)>, RoundDecoder)>,
    step: FrameProgram,
    max_labels: usize,
}

fn pack_rows(code: &StabilizerCode, rows: &[usize]) -> Vec<(u64, u64)> {
    rows.iter()
        .map(|&i| (code.hx().row(i).to_u64(), code.hz().row(i).to_u64()))
        .collect()
}

fn packed_syndrome(rows: &[(u64, u64)], x: u64, z: u64) -> u64 {
    rows.iter().enumerate().fold(0u64, |s, (i, &(gx, gz))| {
        s | ((((gx & z) ^ (gz & x)).count_ones() & 1) as u64) << i
    })
}

impl Protocol {
    /// Synthesizes the networks of `config.style` and compiles them. Codes
    /// with CSS structure run the two-block step (transversal CNOT); other
    /// codes run a single block through an identity step.
    pub fn new(code: &StabilizerCode, config: RecoveryConfig) -> Result<Self> {
        if code.n() > 64 || code.num_generators() > 64 {
            return Err(Error::TooLarge(format!("{} qubits exceed the 64-qubit frame packing", code.n())));
        }
        let n = code.n();
        let specs = match config.style {
            Style::Css => {
                let css = code.css().ok_or(Error::NotCss)?;
                let (xr, zr) = synth_css_networks(code)?;
                vec![
                    RoundSpec {
                        kind: RoundKind::XErrors,
                        rows: pack_rows(code, &xr.syndrome_rows),
                        network: xr,
                        decoder: RoundDecoder::Classical(ClassicalDecoder::new(&css.z_checks)?, Pauli::X),
                        verification: true,
                    },
                    RoundSpec {
                        kind: RoundKind::ZErrors,
                        rows: pack_rows(code, &zr.syndrome_rows),
                        network: zr,
                        decoder: RoundDecoder::Classical(ClassicalDecoder::new(&css.x_checks)?, Pauli::Z),
                        verification: true,
                    },
                ]
            }
            Style::Ancilla | Style::Direct => {
                let (network, verification) = if config.style == Style::Ancilla {
                    (synth_ancilla_network(code)?, true)
                } else {
                    (synth_direct_network(code), false)
                };
                vec![RoundSpec {
                    kind: RoundKind::All,
                    rows: pack_rows(code, &network.syndrome_rows),
                    network,
                    decoder: RoundDecoder::Table(build_decoder_table(code)?),
                    verification,
                }]
            }
        };
        let final_decoders = match code.css() {
            Some(css) => vec![
                (
                    pack_rows(code, &css.z_rows),
                    RoundDecoder::Classical(ClassicalDecoder::new(&css.z_checks)?, Pauli::X),
                ),
                (
                    pack_rows(code, &css.x_rows),
                    RoundDecoder::Classical(ClassicalDecoder::new(&css.x_checks)?, Pauli::Z),
                ),
            ],
            None => {
                let table = specs
                    .iter()
                    .find_map(|s| match &s.decoder {
                        RoundDecoder::Table(t) => Some(t.clone()),
                        RoundDecoder::Classical(..) => None,
                    })
                    .map_or_else(|| build_decoder_table(code), Ok)?;
                vec![(
                    pack_rows(code, &(0..code.num_generators()).collect::<Vec<_>>()),
                    RoundDecoder::Table(table),
                )]
            }
        };

        let blocks = if code.is_css() { 2 } else { 1 };
        let num_ancilla = specs.iter().map(|s| s.network.num_ancilla).max().unwrap_or(0);
        let num_verifiers = specs
            .iter()
            .filter(|s| s.verification)
            .map(|s| s.network.checks(config.check_set).len())
            .max()
            .unwrap_or(0);
        let anc0 = blocks * n;
        let ver0 = anc0 + num_ancilla;
        let width = ver0 + num_verifiers;

        let mut compiled = Vec::with_capacity(blocks);
        let mut max_labels = 0;
        for b in 0..blocks {
            let mut per_block = Vec::with_capacity(specs.len());
            for s in &specs {
                let nw = &s.network;
                let map: Vec<usize> = (0..n)
                    .map(|j| b * n + j)
                    .chain((0..nw.num_ancilla).map(|i| anc0 + i))
                    .collect();
                let prep = nw.prep.remap(&map, width);
                let ancilla: Vec<usize> = (anc0..anc0 + nw.num_ancilla).collect();
                let verifiers: Vec<usize> = (ver0..width).collect();
                let checks = if s.verification { nw.checks(config.check_set) } else { &[] };
                let v = synth_verification(checks, &ancilla, &verifiers, width)?;
                let extract = nw.extract.remap(&map, width);
                max_labels = max_labels.max(v.circuit.num_labels()).max(extract.num_labels());
                per_block.push(CompiledRound {
                    prep: FrameProgram::new(&prep)?,
                    verify: FrameProgram::new(&v.circuit)?,
                    verify_labels: v.checks.iter().map(|&(l, _)| l).collect(),
                    extract: FrameProgram::new(&extract)?,
                    readout: nw.readout.clone(),
                });
            }
            compiled.push(per_block);
        }

        let step = if blocks == 2 {
            transversal_cnot(
                &(0..n).collect::<Vec<_>>(),
                &(n..2 * n).collect::<Vec<_>>(),
                width,
            )?
        } else {
            let mut c = Circuit::new(width);
            for q in 0..n {
                c.id(q);
            }
            c
        };

        Ok(Self {
            code: code.clone(),
            config,
            packed: PackedCode::new(code),
            blocks,
            width,
            specs,
            compiled,
            final_decoders,
            step: FrameProgram::new(&step)?,
            max_labels,
        })
    }

    /// Replaces the decoder table used by the rounds (the final ideal decode
    /// keeps the minimum-weight table). Only for table-decoded styles.
    pub fn with_decoder_table(mut self, table: DecoderTable) -> Result<Self> {
        if table.num_qubits() != self.code.n() {
            return Err(Error::Dimension(format!(
                "table on {} qubits for a {}-qubit code",
                table.num_qubits(),
                self.code.n()
            )));
        }
        let mut replaced = false;
        for s in &mut self.specs {
            if let RoundDecoder::Table(t) = &mut s.decoder {
                *t = table.clone();
                replaced = true;
            }
        }
        if !replaced {
            return Err(Error::InvalidParameter(format!(
                "{} rounds use classical decoders",
                self.config.style.name()
            )));
        }
        Ok(self)
    }

    pub fn code(&self) -> &StabilizerCode {
        &self.code
    }

    pub fn config(&self) -> &RecoveryConfig {
        &self.config
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    /// Qubits of the machine register.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn round_kinds(&self) -> Vec<RoundKind> {
        self.specs.iter().map(|s| s.kind).collect()
    }

    /// The networks of the round kinds, in recovery order.
    pub fn networks(&self) -> Vec<&Network> {
        self.specs.iter().map(|s| &s.network).collect()
    }

    pub fn workspace(&self) -> Workspace {
        Workspace {
            frame: PauliFrame::new(self.width),
            records: vec![false; self.max_labels],
            stats: FrameStats::default(),
        }
    }

    fn block_qubits(&self, block: usize) -> Vec<usize> {
        (block * self.code.n()..(block + 1) * self.code.n()).collect()
    }

    fn block_masks(&self, frame: &PauliFrame, block: usize) -> (u64, u64) {
        frame.packed(&self.block_qubits(block))
    }

    fn spec_index(&self, kind: RoundKind) -> Result<usize> {
        self.specs
            .iter()
            .position(|s| s.kind == kind)
            .ok_or_else(|| Error::InvalidParameter(format!("no {} round in this protocol", kind.name())))
    }

    /// Runs preparation and verification of the `kind` ancilla until it
    /// passes, at most `max_prep_retries` times. Returns the failed attempts.
    pub fn prepare_verified_ancilla<R: Rng + ?Sized>(
        &self,
        ws: &mut Workspace,
        block: usize,
        kind: RoundKind,
        noise: &NoiseParams,
        rng: &mut R,
    ) -> Result<usize> {
        let round = &self.compiled[block][self.spec_index(kind)?];
        self.prepare(ws, round, noise, rng, None)
    }

    fn prepare<R: Rng + ?Sized>(
        &self,
        ws: &mut Workspace,
        round: &CompiledRound,
        noise: &NoiseParams,
        rng: &mut R,
        injected: Option<&PauliOperator>,
    ) -> Result<usize> {
        let opts = FrameOptions::default();
        for attempt in 0..self.config.max_prep_retries {
            round
                .prep
                .run(&mut ws.frame, &mut ws.records, noise, rng, opts, &mut ws.stats);
            if let Some(e) = injected {
                let anc0 = self.blocks * self.code.n();
                ws.frame
                    .apply_operator(e, &(anc0..anc0 + e.num_qubits()).collect::<Vec<_>>());
            }
            round
                .verify
                .run(&mut ws.frame, &mut ws.records, noise, rng, opts, &mut ws.stats);
            if round.verify_labels.iter().all(|&l| !ws.records[l]) {
                return Ok(attempt);
            }
        }
        Err(Error::RetriesExhausted(self.config.max_prep_retries))
    }

    /// One cycle: verified preparation, coupling, measurement and readout.
    pub fn generate_syndrome_once<R: Rng + ?Sized>(
        &self,
        ws: &mut Workspace,
        block: usize,
        kind: RoundKind,
        round_index: usize,
        noise: &NoiseParams,
        rng: &mut R,
    ) -> Result<SyndromeRecord> {
        let si = self.spec_index(kind)?;
        let spec = &self.specs[si];
        let round = &self.compiled[block][si];
        let retries = self.prepare(ws, round, noise, rng, None)?;
        let (x, z) = self.block_masks(&ws.frame, block);
        let m = spec.rows.len();
        let data_syndrome = BitVector::from_u64(m, packed_syndrome(&spec.rows, x, z));
        round.extract.run(
            &mut ws.frame,
            &mut ws.records,
            noise,
            rng,
            FrameOptions::default(),
            &mut ws.stats,
        );
        Ok(SyndromeRecord {
            block,
            kind,
            round: round_index,
            syndrome: Syndrome(round.readout.evaluate(&ws.records)),
            data_syndrome: Syndrome(data_syndrome),
            retries,
        })
    }

    /// `r` cycles of every round kind on `block`, each followed by a majority
    /// decision and its correction.
    pub fn recover<R: Rng + ?Sized>(
        &self,
        ws: &mut Workspace,
        block: usize,
        noise: &NoiseParams,
        rng: &mut R,
        records: &mut Vec<SyndromeRecord>,
        corrections: &mut Vec<Correction>,
    ) -> Result<()> {
        let n = self.code.n();
        let qubits = self.block_qubits(block);
        for spec in &self.specs {
            let start = records.len();
            for c in 0..self.config.r {
                records.push(self.generate_syndrome_once(ws, block, spec.kind, c, noise, rng)?);
            }
            let batch = &records[start..];
            let m = spec.rows.len();
            let mut majority = BitVector::zeros(m);
            for i in 0..m {
                let ones = batch.iter().filter(|rec| rec.syndrome.0.get(i)).count();
                majority.set(i, 2 * ones > self.config.r);
            }
            let (x, z) = self.block_masks(&ws.frame, block);
            let data_syndrome = BitVector::from_u64(m, packed_syndrome(&spec.rows, x, z));
            let applied = spec.decoder.correction(n, &majority);
            ws.frame.apply_operator(&applied, &qubits);
            corrections.push(Correction {
                block,
                kind: spec.kind,
                majority: Syndrome(majority),
                data_syndrome: Syndrome(data_syndrome),
                applied,
            });
        }
        Ok(())
    }

    /// Ideal decode of `block`; returns whether a logical error remains.
    fn final_decode(&self, frame: &mut PauliFrame, block: usize) -> bool {
        let n = self.code.n();
        let qubits = self.block_qubits(block);
        for (rows, decoder) in &self.final_decoders {
            let (x, z) = frame.packed(&qubits);
            let s = BitVector::from_u64(rows.len(), packed_syndrome(rows, x, z));
            frame.apply_operator(&decoder.correction(n, &s), &qubits);
        }
        let (x, z) = frame.packed(&qubits);
        self.packed.flips_logical(x, z)
    }

    /// One computational step from ideal encoded blocks: the noisy logical
    /// gate, recovery of each block in turn, then an ideal decode.
    pub fn run_logical_step_trial<R: Rng + ?Sized>(
        &self,
        ws: &mut Workspace,
        noise: &NoiseParams,
        rng: &mut R,
    ) -> TrialOutcome {
        ws.frame.clear();
        ws.stats = FrameStats::default();
        self.step.run(
            &mut ws.frame,
            &mut ws.records,
            noise,
            rng,
            FrameOptions::default(),
            &mut ws.stats,
        );
        let mut records = Vec::new();
        let mut corrections = Vec::new();
        let mut retries_exhausted = false;
        for b in 0..self.blocks {
            if self
                .recover(ws, b, noise, rng, &mut records, &mut corrections)
                .is_err()
            {
                retries_exhausted = true;
                break;
            }
        }
        let mut logical_failure = retries_exhausted;
        if !retries_exhausted {
            for b in 0..self.blocks {
                logical_failure |= self.final_decode(&mut ws.frame, b);
            }
        }
        let data: Vec<usize> = (0..self.blocks * self.code.n()).collect();
        TrialOutcome {
            logical_failure,
            retries_exhausted,
            residual: ws.frame.restrict(&data),
            records,
            corrections,
            stats: ws.stats,
        }
    }

    /// Independent trials on `RngStream::new(seed, i)`, run in parallel; the
    /// result does not depend on the thread count.
    pub fn estimate_failure_rate(&self, noise: &NoiseParams, trials: u64, seed: u64) -> Estimate {
        let tally = (0..trials)
            .into_par_iter()
            .map_init(
                || self.workspace(),
                |ws, i| {
                    let mut rng = RngStream::new(seed, i);
                    Tally::of(&self.run_logical_step_trial(ws, noise, &mut rng))
                },
            )
            .reduce(Tally::default, Tally::add);
        Estimate::from_tally(tally)
    }

    /// Recovers an `n`-qubit data state exactly (no noise, no verification):
    /// `r` cycles per round kind on `data ⊗ |0...0>`, majority, correction.
    /// Returns the recovered data state and the majority syndromes.
    pub fn recover_statevector(
        &self,
        data: &StateVector,
        rng: &mut RngStream,
    ) -> Result<(StateVector, Vec<Syndrome>)> {
        let n = self.code.n();
        if data.num_qubits() != n {
            return Err(Error::Dimension(format!(
                "state has {} qubits, code has {n}",
                data.num_qubits()
            )));
        }
        let mut state = data.clone();
        let mut majorities = Vec::new();
        for spec in &self.specs {
            let nw = &spec.network;
            let circuit = nw.circuit();
            let m = nw.readout.len();
            let mut counts = vec![0usize; m];
            for _ in 0..self.config.r {
                let input = state.tensor(&StateVector::zero(nw.num_ancilla));
                let (out, rec) = run_statevector(&circuit, input, None, rng)?;
                let s = nw.readout.evaluate(&rec);
                for (i, c) in counts.iter_mut().enumerate() {
                    *c += s.get(i) as usize;
                }
                state = out.factor_low(n)?;
            }
            let majority =
                BitVector::from_bools(&counts.iter().map(|&c| 2 * c > self.config.r).collect::<Vec<_>>());
            state.apply_pauli(&spec.decoder.correction(n, &majority));
            majorities.push(Syndrome(majority));
        }
        Ok((state, majorities))
    }

    /// `|<phi_E| R e |phi_E>|` for the encoding `phi_E` of `logical`.
    pub fn recovery_overlap(
        &self,
        error: &PauliOperator,
        logical: &StateVector,
        rng: &mut RngStream,
    ) -> Result<f64> {
        let encoded = encode_state(&self.code, logical)?;
        let mut corrupted = encoded.clone();
        corrupted.apply_pauli(error);
        let (recovered, _) = self.recover_statevector(&corrupted, rng)?;
        Ok(encoded.inner(&recovered).norm())
    }
}

/// Encodes a `k`-qubit state with the code's encoder.
pub fn encode_state(code: &StabilizerCode, logical: &StateVector) -> Result<StateVector> {
    let k = code.k();
    if logical.num_qubits() != k {
        return Err(Error::Dimension(format!(
            "logical state has {} qubits, code encodes {k}",
            logical.num_qubits()
        )));
    }
    let enc = synth_encoder(code);
    let n = code.n();
    if n > crate::sim::MAX_STATEVECTOR_QUBITS {
        return Err(Error::WidthOverflow {
            qubits: n,
            max: crate::sim::MAX_STATEVECTOR_QUBITS,
        });
    }
    let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); 1 << n];
    for (i, a) in logical.amplitudes().iter().enumerate() {
        let idx = enc
            .logical_inputs
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &q)| acc | ((i >> j) & 1) << q);
        amps[idx] = *a;
    }
    let input = StateVector::from_amplitudes(n, amps)?;
    let (out, _) = run_statevector(&enc.circuit, input, None, &mut RngStream::new(0, 0))?;
    Ok(out)
}

/// Counts accumulated over trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub trials: u64,
    pub failures: u64,
    pub retries_exhausted: u64,
    pub cycles: u64,
    pub wrong_cycles: u64,
    pub prep_retries: u64,
    pub corrections: u64,
    pub wrong_corrections: u64,
}

impl Tally {
    pub fn of(o: &TrialOutcome) -> Self {
        Self {
            trials: 1,
            failures: o.logical_failure as u64,
            retries_exhausted: o.retries_exhausted as u64,
            cycles: o.records.len() as u64,
            wrong_cycles: o.records.iter().filter(|r| r.is_wrong()).count() as u64,
            prep_retries: o.records.iter().map(|r| r.retries as u64).sum(),
            corrections: o.corrections.len() as u64,
            wrong_corrections: o.corrections.iter().filter(|c| c.is_wrong()).count() as u64,
        }
    }

    pub fn add(self, o: Self) -> Self {
        Self {
            trials: self.trials + o.trials,
            failures: self.failures + o.failures,
            retries_exhausted: self.retries_exhausted + o.retries_exhausted,
            cycles: self.cycles + o.cycles,
            wrong_cycles: self.wrong_cycles + o.wrong_cycles,
            prep_retries: self.prep_retries + o.prep_retries,
            corrections: self.corrections + o.corrections,
            wrong_corrections: self.wrong_corrections + o.wrong_corrections,
        }
    }
}

/// Monte Carlo failure estimate with a Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub tally: Tally,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    pub fn from_tally(tally: Tally) -> Self {
        let (ci_low, ci_high) = wilson_interval(tally.failures, tally.trials);
        let p_hat = if tally.trials == 0 {
            0.0
        } else {
            tally.failures as f64 / tally.trials as f64
        };
        Self {
            tally,
            p_hat,
            ci_low,
            ci_high,
        }
    }

    /// Fraction of syndrome cycles whose measured syndrome differs from the
    /// data syndrome at the start of the coupling.
    pub fn wrong_cycle_rate(&self) -> f64 {
        ratio(self.tally.wrong_cycles, self.tally.cycles)
    }

    /// Fraction of majority decisions that differ from the data syndrome
    /// after the last cycle.
    pub fn wrong_correction_rate(&self) -> f64 {
        ratio(self.tally.wrong_corrections, self.tally.corrections)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (low, high)
}

pub const ESTIMATE_CSV_HEADER: &str =
    "code,style,r,gamma,epsilon,trials,failures,p_hat,ci_low,ci_high,seed";

/// One CSV row in the [`ESTIMATE_CSV_HEADER`] layout.
pub fn estimate_csv_row(protocol: &Protocol, noise: &NoiseParams, seed: u64, est: &Estimate) -> String {
    let code = protocol.code();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        code.name().map_or_else(|| code.label(), str::to_string),
        protocol.config().style.name(),
        protocol.config().r,
        format_sig(noise.gamma),
        format_sig(noise.epsilon),
        est.tally.trials,
        est.tally.failures,
        format_sig(est.p_hat),
        format_sig(est.ci_low),
        format_sig(est.ci_high),
        seed
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::paulis_up_to;

    fn protocol(code: &StabilizerCode, style: Style, r: usize) -> Protocol {
        Protocol::new(code, RecoveryConfig::new(r, 100, style).unwrap()).unwrap()
    }

    #[test]
    fn config_validates() {
        assert!(RecoveryConfig::new(2, 1, Style::Css).is_err());
        assert!(RecoveryConfig::new(0, 1, Style::Css).is_err());
        assert!(RecoveryConfig::new(3, 0, Style::Css).is_err());
        assert!(Protocol::new(&StabilizerCode::five_qubit(), RecoveryConfig::new(1, 1, Style::Css).unwrap()).is_err());
    }

    #[test]
    fn layouts() {
        let p = protocol(&StabilizerCode::five_qubit(), Style::Ancilla, 3);
        assert_eq!((p.num_blocks(), p.width()), (1, 5 + 10 + 10));
        let p = protocol(&StabilizerCode::five_qubit(), Style::Direct, 3);
        assert_eq!(p.width(), 5 + 4);
        let p = protocol(&StabilizerCode::steane7(), Style::Css, 3);
        assert_eq!((p.num_blocks(), p.width()), (2, 14 + 7 + 7));
    }

    #[test]
    fn noiseless_frame_syndromes_match_commutation() {
        let noise = NoiseParams::noiseless();
        for (code, style) in [
            (StabilizerCode::five_qubit(), Style::Ancilla),
            (StabilizerCode::five_qubit(), Style::Direct),
            (StabilizerCode::steane7(), Style::Css),
            (StabilizerCode::steane7(), Style::Ancilla),
        ] {
            let p = protocol(&code, style, 1);
            let mut ws = p.workspace();
            let mut rng = RngStream::new(0, 0);
            for e in paulis_up_to(code.n(), code.t()) {
                for (si, spec) in p.specs.iter().enumerate() {
                    ws.frame = PauliFrame::from_pauli(p.width(), &e);
                    let rec = p
                        .generate_syndrome_once(&mut ws, 0, spec.kind, 0, &noise, &mut rng)
                        .unwrap();
                    let full = code.commutation_syndrome(&e).unwrap();
                    let want: Vec<bool> =
                        p.specs[si].network.syndrome_rows.iter().map(|&i| full.0.get(i)).collect();
                    assert_eq!(rec.syndrome.0, BitVector::from_bools(&want), "{e} {style:?}");
                    assert!(!rec.is_wrong());
                    assert_eq!(rec.retries, 0);
                }
            }
        }
    }

    #[test]
    fn noiseless_trial_never_fails() {
        for (code, style) in [
            (StabilizerCode::five_qubit(), Style::Ancilla),
            (StabilizerCode::steane7(), Style::Css),
        ] {
            let p = protocol(&code, style, 3);
            let est = p.estimate_failure_rate(&NoiseParams::noiseless(), 50, 1);
            assert_eq!(est.tally.failures, 0);
            assert_eq!(est.p_hat, 0.0);
        }
    }

    #[test]
    fn recovery_removes_correctable_frame_errors() {
        let noise = NoiseParams::noiseless();
        for (code, style) in [
            (StabilizerCode::five_qubit(), Style::Ancilla),
            (StabilizerCode::steane7(), Style::Css),
            (StabilizerCode::steane7(), Style::Direct),
        ] {
            let p = protocol(&code, style, 3);
            let mut ws = p.workspace();
            let mut rng = RngStream::new(0, 0);
            for e in paulis_up_to(code.n(), code.t()) {
                ws.frame = PauliFrame::from_pauli(p.width(), &e);
                let (mut recs, mut cors) = (Vec::new(), Vec::new());
                p.recover(&mut ws, 0, &noise, &mut rng, &mut recs, &mut cors).unwrap();
                assert_eq!(recs.len(), 3 * p.specs.len());
                let residual = ws.frame.restrict(&p.block_qubits(0));
                assert!(code.is_stabilizer(&residual), "{e}: {residual}");
            }
        }
    }

    #[test]
    fn majority_survives_one_corrupted_record() {
        // Two of three syndromes agree; the corrupted one is outvoted.
        let code = StabilizerCode::five_qubit();
        let p = protocol(&code, Style::Ancilla, 3);
        let e: PauliOperator = "XIIII".parse().unwrap();
        let good = code.commutation_syndrome(&e).unwrap().0;
        let mut bad = good.clone();
        bad.flip(0);
        bad.flip(2);
        let records = [good.clone(), bad, good.clone()];
        let mut majority = BitVector::zeros(4);
        for i in 0..4 {
            majority.set(i, records.iter().filter(|s| s.get(i)).count() >= 2);
        }
        assert_eq!(majority, good);
        assert_eq!(p.specs[0].decoder.correction(5, &majority), e);
    }

    #[test]
    fn injected_flip_before_verification_is_rejected() {
        let code = StabilizerCode::steane7();
        let config = RecoveryConfig::new(1, 1, Style::Css).unwrap();
        let p = Protocol::new(&code, config).unwrap();
        let mut ws = p.workspace();
        let mut rng = RngStream::new(0, 0);
        let round = &p.compiled[0][0];
        for q in 0..7 {
            let e = PauliOperator::single(7, q, Pauli::X);
            let r = p.prepare(&mut ws, round, &NoiseParams::noiseless(), &mut rng, Some(&e));
            assert!(matches!(r, Err(Error::RetriesExhausted(1))), "qubit {q}");
        }
        assert_eq!(p.prepare(&mut ws, round, &NoiseParams::noiseless(), &mut rng, None).unwrap(), 0);
    }

    #[test]
    fn noisy_preparation_retries_geometrically() {
        let code = StabilizerCode::steane7();
        let p = Protocol::new(&code, RecoveryConfig::new(1, 1_000_000, Style::Css).unwrap()).unwrap();
        let noise = NoiseParams::new(0.3, 0.0).unwrap();
        let mut ws = p.workspace();
        let trials = 10_000u64;
        let mut counts = [0u64; 4];
        let mut total = 0u64;
        let mut accepted = 0u64;
        for i in 0..trials {
            let mut rng = RngStream::new(11, i);
            if let Ok(k) = p.prepare_verified_ancilla(&mut ws, 0, RoundKind::XErrors, &noise, &mut rng) {
                accepted += 1;
                total += k as u64;
                if k < 4 {
                    counts[k] += 1;
                }
            }
        }
        assert_eq!(accepted, trials);
        // Geometric: P(k) = (1-a)^k a with a = 1 / (1 + mean).
        let mean = total as f64 / trials as f64;
        assert!(mean > 0.1, "acceptance probability {:.3}", 1.0 / (1.0 + mean));
        let a = 1.0 / (1.0 + mean);
        for (k, &c) in counts.iter().enumerate() {
            let expect = trials as f64 * (1.0 - a).powi(k as i32) * a;
            let sd = (expect * (1.0 - expect / trials as f64)).sqrt();
            assert!((c as f64 - expect).abs() < 5.0 * sd, "k={k}: {c} vs {expect:.0}");
        }
    }

    #[test]
    fn statevector_recovery_contract_small() {
        let code = StabilizerCode::steane7();
        let p = protocol(&code, Style::Css, 1);
        let mut rng = RngStream::new(5, 0);
        let phi = StateVector::random_qubit(&mut rng);
        for e in ["IIIXIII", "ZIIIIII", "IIYIIII", "IIIIIII"] {
            let ov = p.recovery_overlap(&e.parse().unwrap(), &phi, &mut rng).unwrap();
            assert!((ov - 1.0).abs() < 1e-10, "{e}: {ov}");
        }
        let ov = p.recovery_overlap(&"XXIIIII".parse().unwrap(), &phi, &mut rng).unwrap();
        assert!(ov < 1.0 - 1e-6 || phi.amplitudes()[0].norm() > 0.999);
    }

    #[test]
    fn estimate_is_deterministic_and_bounded() {
        let p = protocol(&StabilizerCode::five_qubit(), Style::Ancilla, 1);
        let noise = NoiseParams::new(0.02, 0.002).unwrap();
        let a = p.estimate_failure_rate(&noise, 300, 9);
        let b = p.estimate_failure_rate(&noise, 300, 9);
        assert_eq!(a, b);
        assert!(a.ci_low <= a.p_hat && a.p_hat <= a.ci_high);
        assert!(a.tally.failures > 0);
    }

    #[test]
    fn large_gamma_saturates() {
        let p = protocol(&StabilizerCode::steane7(), Style::Css, 3);
        let noise = NoiseParams::with_default_epsilon(0.1, 7).unwrap();
        let est = p.estimate_failure_rate(&noise, 300, 2);
        assert!(est.p_hat > 0.3, "{}", est.p_hat);
    }

    #[test]
    fn wilson_matches_reference_values() {
        // Closed-form values for 0/10 and 5/10.
        let (lo, hi) = wilson_interval(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.277_532).abs() < 1e-5);
        let (lo, hi) = wilson_interval(5, 10);
        assert!((lo - 0.236_593).abs() < 1e-5 && (hi - 0.763_407).abs() < 1e-5);
    }
}
