use std::collections::BTreeMap;

use qstab::circuit::{synth_ancilla_network, synth_encoder, Circuit, Network};
use qstab::codes::StabilizerCode;
use qstab::sim::{
    run_statevector, sample_outcomes_frame, sample_outcomes_statevector, NoiseParams, RngStream, StateVector,
};

/// Distribution of the decoded parity word, from record-word histograms.
fn parity_histogram(
    hist: &BTreeMap<u64, u64>,
    labels: usize,
    eval: impl Fn(&[bool]) -> u64,
) -> BTreeMap<u64, u64> {
    let mut out = BTreeMap::new();
    for (&word, &count) in hist {
        let bits: Vec<bool> = (0..labels).map(|l| word >> l & 1 == 1).collect();
        *out.entry(eval(&bits)).or_insert(0) += count;
    }
    out
}

/// `|0_E>` on the data block followed by the extraction network.
fn encoded_network(code: &StabilizerCode) -> (Network, Circuit) {
    let nw = synth_ancilla_network(code).unwrap();
    let mut c = Circuit::new(nw.width());
    let data: Vec<usize> = nw.data().collect();
    c.append(&synth_encoder(code).circuit, &data);
    let all: Vec<usize> = (0..nw.width()).collect();
    c.append(&nw.circuit(), &all);
    (nw, c)
}

#[test]
fn engines_agree_on_the_five_qubit_ancilla_network() {
    let code = StabilizerCode::five_qubit();
    let (nw, c) = encoded_network(&code);
    assert_eq!(c.num_qubits(), 15);
    let noise = NoiseParams::with_default_epsilon(0.01, 5).unwrap();
    let shots = 100_000;

    let sv = sample_outcomes_statevector(&c, &noise, shots, 11).unwrap();
    let (_, reference) = run_statevector(&c, StateVector::zero(15), None, &mut RngStream::new(12, 0)).unwrap();
    let fr = sample_outcomes_frame(&c, &noise, shots, 13, &reference).unwrap();

    let labels = c.num_labels();
    let eval = |bits: &[bool]| nw.readout.evaluate(bits).to_u64();
    let a = parity_histogram(&sv, labels, eval);
    let b = parity_histogram(&fr, labels, eval);
    assert!(a.get(&0).copied().unwrap_or(0) > shots as u64 / 2);

    let n = shots as f64;
    for word in 0..16u64 {
        let pa = *a.get(&word).unwrap_or(&0) as f64 / n;
        let pb = *b.get(&word).unwrap_or(&0) as f64 / n;
        let pooled = (pa + pb) / 2.0;
        let sigma = (2.0 * pooled * (1.0 - pooled) / n).sqrt();
        assert!(
            (pa - pb).abs() <= 3.0 * sigma,
            "parity word {word:04b}: statevector {pa:.5}, frame {pb:.5}, 3 sigma {:.5}",
            3.0 * sigma
        );
    }
}

#[test]
fn noiseless_network_reports_trivial_parity() {
    let code = StabilizerCode::five_qubit();
    let (nw, c) = encoded_network(&code);
    let hist = sample_outcomes_statevector(&c, &NoiseParams::noiseless(), 2000, 1).unwrap();
    let labels = c.num_labels();
    let parity = parity_histogram(&hist, labels, |bits| nw.readout.evaluate(bits).to_u64());
    assert_eq!(parity.len(), 1);
    assert_eq!(parity[&0], 2000);
    // The raw records themselves are random: the gauge is not fixed.
    assert!(hist.len() > 1);
}
