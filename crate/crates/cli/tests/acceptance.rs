//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Tolerances are the ones the criteria state.

use std::collections::{BTreeMap, BTreeSet};
use std::process::{Command, Output};
use std::time::Instant;

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use qstab::analysis::{self, CurveConfig};
use qstab::circuit::{synth_ancilla_network, synth_css_networks, Circuit, Style};
use qstab::codes::{build_decoder_table, ClassicalCode, StabilizerCode, Syndrome};
use qstab::protocol::{encode_state, Protocol, RecoveryConfig};
use qstab::sim::{
    run_statevector, sample_outcomes_frame, sample_outcomes_statevector, NoiseParams, RngStream,
    StateVector,
};
use qstab::{BitVector, PauliOperator};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn c1_recovery_contract() -> Check {
    let code = StabilizerCode::five_qubit();
    let protocol = Protocol::new(&code, RecoveryConfig::new(1, 1, Style::Ancilla).map_err(e)?).map_err(e)?;
    let width = protocol.networks()[0].width();
    ensure(width == 15, || format!("network has {width} qubits, expected 15"))?;
    let errors = qstab::codes::paulis_up_to(5, 1);
    ensure(errors.len() == 16, || format!("{} correctable errors", errors.len()))?;
    let mut rng = RngStream::new(1, 0);
    let states: Vec<StateVector> = (0..3).map(|_| StateVector::random_qubit(&mut rng)).collect();
    let shots = 3;
    let mut worst: f64 = 0.0;
    for err in &errors {
        for phi in &states {
            for _ in 0..shots {
                let ov = protocol.recovery_overlap(err, phi, &mut rng).map_err(e)?;
                worst = worst.max((ov - 1.0).abs());
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max |overlap - 1| = {worst:e}"))?;
    Ok(format!(
        "16 errors x 3 encoded states x {shots} shots on 15 qubits, max |overlap - 1| = {worst:.1e}"
    ))
}

fn c2_css_structure() -> Check {
    let code = StabilizerCode::steane7();
    let (xr, zr) = synth_css_networks(&code).map_err(e)?;
    let mut rng = RngStream::new(2, 0);

    // Ancilla after preparation versus H^7 |0_E>.
    let (prepared, _) = run_statevector(&xr.prep, StateVector::zero(14), None, &mut rng).map_err(e)?;
    let zero = StateVector::from_amplitudes(1, vec![1.0.into(), 0.0.into()]).map_err(e)?;
    let mut expect_anc = encode_state(&code, &zero).map_err(e)?;
    for q in 0..7 {
        expect_anc.apply_h(q);
    }
    let expect = StateVector::zero(7).tensor(&expect_anc);
    let diff = prepared
        .amplitudes()
        .iter()
        .zip(expect.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    ensure(diff <= 1e-10, || format!("prepared ancilla differs from H^7|0_E> by {diff:e}"))?;

    // Parity words against the Hamming parity-check matrix, errors of each round's type.
    let hamming = ClassicalCode::hamming7();
    let h = hamming.parity_check();
    let phi = StateVector::random_qubit(&mut rng);
    let encoded = encode_state(&code, &phi).map_err(e)?;
    for (nw, pauli) in [(&xr, qstab::Pauli::X), (&zr, qstab::Pauli::Z)] {
        let circuit = nw.circuit();
        for j in 0..7 {
            let err = PauliOperator::single(7, j, pauli);
            let input = encoded.tensor(&StateVector::zero(nw.num_ancilla));
            let (_, rec) = run_statevector(&circuit, input, Some(&err), &mut rng).map_err(e)?;
            let word = nw.readout.evaluate(&rec);
            let column = h.column(j);
            ensure(word == column, || {
                format!("{} round, {pauli:?} on qubit {j}: parity word {word}, Hamming syndrome {column}", nw.name)
            })?;
        }
    }
    Ok(format!(
        "prepared ancilla = H^7|0_E> (max amplitude error {diff:.1e}); 14/14 parity words equal Hamming syndromes"
    ))
}

fn symplectic_anticommute(a: &str, b: &str) -> bool {
    let bits = |c: char| match c {
        'I' => (false, false),
        'X' => (true, false),
        'Z' => (false, true),
        'Y' => (true, true),
        _ => panic!("bad Pauli {c}"),
    };
    a.chars()
        .zip(b.chars())
        .filter(|&(p, q)| {
            let (px, pz) = bits(p);
            let (qx, qz) = bits(q);
            (px & qz) ^ (pz & qx)
        })
        .count()
        % 2
        == 1
}

fn c3_perfect_code() -> Check {
    let code = StabilizerCode::five_qubit();
    let table = build_decoder_table(&code).map_err(e)?;
    let gens: Vec<String> = code.generators().iter().map(|g| g.to_string()).collect();
    let mut oracle: BTreeMap<Vec<bool>, String> = BTreeMap::new();
    let mut paulis = vec!["IIIII".to_string()];
    for q in 0..5 {
        for p in ['X', 'Y', 'Z'] {
            let mut s: Vec<char> = "IIIII".chars().collect();
            s[q] = p;
            paulis.push(s.into_iter().collect());
        }
    }
    for p in &paulis {
        let s: Vec<bool> = gens.iter().map(|g| symplectic_anticommute(g, p)).collect();
        if let Some(prev) = oracle.insert(s, p.clone()) {
            return Err(format!("{prev} and {p} share a syndrome"));
        }
    }
    ensure(oracle.len() == 16, || format!("{} distinct syndromes", oracle.len()))?;
    ensure(table.len() == 16, || format!("table has {} entries", table.len()))?;
    for (s, p) in &oracle {
        let syn = Syndrome(BitVector::from_bools(s));
        let got = table.lookup(&syn).map(|c| c.to_string());
        ensure(got.as_deref() == Some(p.as_str()), || format!("syndrome {syn}: table {got:?}, oracle {p}"))?;
    }
    Ok("16 table entries = 16 distinct syndromes of {I} and the 15 weight-1 Paulis".into())
}

fn c4_coupling_minimality() -> Check {
    let mut lines = Vec::new();
    for name in StabilizerCode::REGISTRY {
        let code = StabilizerCode::by_name(name).map_err(e)?;
        let n = code.n();
        let nw = synth_ancilla_network(&code).map_err(e)?;
        let data = nw.data();
        let anc = nw.ancilla();
        let mut partners: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        let mut couplings = 0;
        for g in nw.extract.gates().iter().chain(nw.prep.gates()) {
            if let (a, Some(b)) = g.qubits() {
                let (d, x) = if data.contains(&a) && anc.contains(&b) {
                    (a, b)
                } else if data.contains(&b) && anc.contains(&a) {
                    (b, a)
                } else {
                    ensure(!(data.contains(&a) || data.contains(&b)), || format!("{name}: data-data gate {g:?}"))?;
                    continue;
                };
                couplings += 1;
                partners.entry(x).or_default().insert(d);
            }
        }
        ensure(couplings == 2 * n, || format!("{name}: {couplings} couplings, expected {}", 2 * n))?;
        ensure(partners.len() == 2 * n, || format!("{name}: {} ancilla qubits coupled", partners.len()))?;
        ensure(partners.values().all(|s| s.len() == 1), || format!("{name}: an ancilla qubit touches two data qubits"))?;
        lines.push(format!("{name} {couplings}"));
    }
    Ok(format!("2n couplings, one data partner per ancilla qubit ({})", lines.join(", ")))
}

/// Direct term-by-term evaluation of the failure model for the oracle.
fn naive_point(n: usize, t: usize, c: usize, gamma: f64, r_max: usize) -> (usize, f64) {
    let eps = gamma / (10.0 * n as f64);
    let alpha = 1.0 - ((1.0 - gamma) * (1.0 - eps).powi(n as i32)).powi(3 * n as i32);
    let q = gamma + n as f64 * eps;
    let tail = |big_n: usize, from: usize, x: f64| {
        let mut coef = 1.0f64;
        let mut terms = Vec::new();
        for i in 0..=big_n {
            if i >= from {
                terms.push(coef * x.powi(i as i32));
            }
            coef = coef * (big_n - i) as f64 / (i + 1) as f64;
        }
        terms.sort_by(f64::total_cmp);
        terms.iter().sum::<f64>()
    };
    let mut r = 3;
    loop {
        let p1 = tail(r, r.div_ceil(2), alpha);
        let p2 = tail(n * (4 * r + c), t + 1, q);
        if p1 < p2 || r + 2 > r_max {
            return (r, (4.0 * (p1 + p2)).min(1.0));
        }
        r += 2;
    }
}

fn c5_analytic_anchors() -> Check {
    let steane = CurveConfig::new("steane7", 7, 1);
    let g_star = analysis::break_even(&steane).map_err(e)?.ok_or("no break-even for steane7")?;
    ensure((3e-5..=3e-4).contains(&g_star), || format!("(a) gamma* = {g_star:.3e}"))?;

    let mut kinks = 0;
    let mut slopes = Vec::new();
    for (name, n, t) in [("five_qubit", 5, 1), ("steane7", 7, 1), ("golay23", 23, 3)] {
        let mut cfg = CurveConfig::new(name, n, t);
        cfg.gamma_min = 1e-7;
        cfg.gamma_max = 1e-2;
        cfg.points = 201;
        let pts = analysis::curve(&cfg).map_err(e)?;
        ensure(pts.iter().all(|p| p.r % 2 == 1 && (3..=15).contains(&p.r)), || format!("(b) {name}: r outside 3..15"))?;
        // Slope jumps happen exactly where r changes (ignoring the clipped region).
        let slope = |i: usize| (pts[i + 1].p / pts[i].p).ln() / (pts[i + 1].gamma / pts[i].gamma).ln();
        for i in 0..pts.len() - 2 {
            if pts[i + 2].p >= 1.0 {
                break;
            }
            let r_changes = pts[i].r != pts[i + 1].r || pts[i + 1].r != pts[i + 2].r;
            let kink = (slope(i + 1) - slope(i)).abs() > 0.05;
            ensure(kink == r_changes, || {
                format!(
                    "(b) {name} near gamma {:.3e}: slope change {:.3}, r {} {} {}",
                    pts[i + 1].gamma,
                    slope(i + 1) - slope(i),
                    pts[i].r,
                    pts[i + 1].r,
                    pts[i + 2].r
                )
            })?;
            kinks += (kink && pts[i].r != pts[i + 1].r) as usize;
        }
        // Slope well below break-even.
        let low: Vec<(f64, f64)> = pts.iter().filter(|p| p.gamma <= 1e-6).map(|p| (p.gamma, p.p)).collect();
        let s = log_log_slope(&low);
        ensure((s - (t as f64 + 1.0)).abs() <= 0.2, || format!("(c) {name}: slope {s:.3}, expected {}", t + 1))?;
        slopes.push(format!("{name} {s:.3}"));
    }

    // (d) Golay: module against the direct evaluation, then the threshold claim.
    let mut golay = CurveConfig::new("golay23", 23, 3);
    golay.gamma_min = 1e-6;
    golay.gamma_max = 1e-4;
    golay.points = 41;
    let pts = analysis::curve(&golay).map_err(e)?;
    for p in &pts {
        let (r, naive) = naive_point(23, 3, 1, p.gamma, 15);
        ensure(r == p.r && (p.p / naive - 1.0).abs() < 1e-6, || {
            format!("(d) gamma {:.3e}: module r={} p={:e}, direct r={r} p={naive:e}", p.gamma, p.r, p.p)
        })?;
    }
    let best = pts.iter().filter(|p| p.p <= 1e-9).map(|p| p.gamma).fold(0.0, f64::max);
    ensure(best >= 1e-6, || "(d) golay23 never reaches p <= 1e-9 for gamma >= 1e-6".into())?;
    Ok(format!(
        "(a) gamma* = {g_star:.3e}; (b) r in 3..15, {kinks} kinks all at r changes; (c) slopes {}; (d) golay23 p <= 1e-9 up to gamma = {best:.2e}",
        slopes.join(", ")
    ))
}

fn c6_monte_carlo_scaling() -> Check {
    let code = StabilizerCode::five_qubit();
    let protocol = Protocol::new(&code, RecoveryConfig::new(3, 1000, Style::Ancilla).map_err(e)?).map_err(e)?;
    let trials = 100_000;
    let mut pts = Vec::new();
    let mut shown = Vec::new();
    for (i, gamma) in [1e-3, 3e-3, 1e-2].into_iter().enumerate() {
        let noise = NoiseParams::with_default_epsilon(gamma, 5).map_err(e)?;
        let est = protocol.estimate_failure_rate(&noise, trials, 600 + i as u64);
        ensure(est.tally.failures > 0, || format!("no failures at gamma {gamma}"))?;
        pts.push((gamma, est.p_hat));
        shown.push(format!("{:.2e}", est.p_hat));
    }
    let slope = log_log_slope(&pts);
    ensure((slope - 2.0).abs() <= 0.5, || format!("slope {slope:.3} (p_hat {})", shown.join(", ")))?;
    let control = protocol.estimate_failure_rate(&NoiseParams::noiseless(), trials, 699);
    ensure(control.tally.failures == 0, || format!("noiseless control: {} failures", control.tally.failures))?;
    Ok(format!(
        "p_hat = {} at gamma = 1e-3, 3e-3, 1e-2; slope {slope:.3}; noiseless control 0/{trials}",
        shown.join(", ")
    ))
}

fn random_clifford_circuit(n: usize, rng: &mut RngStream) -> Circuit {
    let mut c = Circuit::new(n);
    let depth = rng.gen_range(10..=40);
    for _ in 0..depth {
        let q = rng.gen_range(0..n);
        let two = n > 1 && rng.gen_bool(0.4);
        if two {
            let mut b = rng.gen_range(0..n - 1);
            if b >= q {
                b += 1;
            }
            if rng.gen_bool(0.5) {
                c.cnot(q, b);
            } else {
                c.cz(q, b);
            }
        } else {
            match rng.gen_range(0..7) {
                0 | 1 => c.h(q),
                2 => c.s(q),
                3 => c.sdg(q),
                4 => c.x(q),
                5 => c.z(q),
                _ => c.id(q),
            };
        }
    }
    for q in 0..n {
        if rng.gen_bool(0.5) {
            c.measure_z(q, &format!("m{q}"));
        } else {
            c.measure_x(q, &format!("m{q}"));
        }
    }
    c
}

/// Two-sample chi-square p-value (equal sample sizes), bins with expected
/// count below 5 pooled.
fn chi_square_p(a: &BTreeMap<u64, u64>, b: &BTreeMap<u64, u64>) -> (f64, usize) {
    let keys: BTreeSet<u64> = a.keys().chain(b.keys()).copied().collect();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for k in keys {
        let x = *a.get(&k).unwrap_or(&0) as f64;
        let y = *b.get(&k).unwrap_or(&0) as f64;
        if (x + y) / 2.0 < 5.0 {
            pooled.0 += x;
            pooled.1 += y;
        } else {
            bins.push((x, y));
        }
    }
    if pooled.0 + pooled.1 > 0.0 {
        bins.push(pooled);
    }
    if bins.len() < 2 {
        return (1.0, bins.len());
    }
    let stat: f64 = bins
        .iter()
        .map(|&(x, y)| if x + y > 0.0 { (x - y) * (x - y) / (x + y) } else { 0.0 })
        .sum();
    let df = (bins.len() - 1) as f64;
    let dist = ChiSquared::new(df).expect("df > 0");
    (1.0 - dist.cdf(stat), bins.len())
}

fn c7_engine_cross_validation() -> Check {
    let shots = 100_000;
    let noise = NoiseParams::new(0.02, 0.005).map_err(e)?;
    let mut gen = RngStream::new(7, 0);
    let mut worst: f64 = 1.0;
    let mut failures = Vec::new();
    for i in 0..50u64 {
        let n = 1 + (i as usize % 8);
        let c = random_clifford_circuit(n, &mut gen);
        let sv = sample_outcomes_statevector(&c, &noise, shots, 1000 + i).map_err(e)?;
        let (_, reference) = run_statevector(&c, StateVector::zero(n), None, &mut RngStream::new(3000 + i, 0)).map_err(e)?;
        let fr = sample_outcomes_frame(&c, &noise, shots, 2000 + i, &reference).map_err(e)?;
        let (p, _) = chi_square_p(&sv, &fr);
        worst = worst.min(p);
        if p < 0.001 {
            failures.push(format!("circuit {i} ({n} qubits): p = {p:.2e}"));
        }
    }
    ensure(failures.is_empty(), || format!("{} of 50 rejected: {}", failures.len(), failures.join("; ")))?;
    Ok(format!("50 circuits on 1..8 qubits, {shots} shots per engine, smallest p-value {worst:.4}"))
}

fn c8_syndrome_cycle_rate() -> Check {
    let code = StabilizerCode::steane7();
    let protocol = Protocol::new(&code, RecoveryConfig::new(3, 1000, Style::Css).map_err(e)?).map_err(e)?;
    let mut parts = Vec::new();
    for (i, gamma) in [1e-4, 3e-4, 1e-3, 3e-3, 1e-2].into_iter().enumerate() {
        let noise = NoiseParams::with_default_epsilon(gamma, 7).map_err(e)?;
        let est = protocol.estimate_failure_rate(&noise, 100_000, 800 + i as u64);
        let alpha = analysis::alpha_approx(7, gamma, noise.epsilon);
        let ratio = est.wrong_cycle_rate() / alpha;
        ensure((1.0 / 3.0..=3.0).contains(&ratio), || {
            format!("gamma {gamma:e}: measured {:.3e}, alpha {alpha:.3e}, ratio {ratio:.3}", est.wrong_cycle_rate())
        })?;
        parts.push(format!("{gamma:.0e}: {ratio:.2}"));
    }
    Ok(format!("measured / 3n(gamma + n eps) per cycle: {}", parts.join(", ")))
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qstab"))
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .env_remove("QSTAB_SEED")
        .output()
        .expect("spawn qstab")
}

fn c9_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(e)?;
    // (command line, writes an output file)
    let invocations = [
        ("mc --code steane7 --style css --gamma 1e-3,1e-2 --trials 20000 --seed 99", true),
        ("mc --code five_qubit --style ancilla --gamma 3e-3 --trials 20000 --seed 5 --r 5", true),
        ("verify --code five_qubit --style ancilla --seed 8", false),
        ("analyze curve --code golay23 --points 31", true),
        ("analyze break-even --code steane7", false),
        ("synth --code five_qubit --style ancilla", true),
    ];
    for (i, (line, writes)) in invocations.iter().enumerate() {
        let out = dir.path().join(format!("run{i}.out"));
        let mut outputs = Vec::new();
        for threads in ["1", "4", "4"] {
            let mut args: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            if args[0] == "mc" {
                args.extend(["--threads".to_string(), threads.to_string()]);
            }
            if *writes {
                args.extend(["--out".to_string(), out.display().to_string()]);
            }
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            let o = run_cli(&refs);
            ensure(o.status.success(), || format!("{line}: exit {:?}", o.status.code()))?;
            let (file, manifest) = if *writes {
                (
                    std::fs::read(&out).map_err(e)?,
                    std::fs::read(format!("{}.manifest.json", out.display())).map_err(e)?,
                )
            } else {
                (Vec::new(), Vec::new())
            };
            outputs.push((o.stdout, o.stderr, file, manifest));
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || format!("{line}: outputs differ"))?;
    }
    Ok(format!(
        "{} invocations x 3 runs (mc with 1, 4, 4 threads): stdout, stderr, output files and manifests byte-identical",
        invocations.len()
    ))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Check); 9] = [
        (1, "recovery contract", c1_recovery_contract),
        (2, "CSS structure", c2_css_structure),
        (3, "perfect-code property", c3_perfect_code),
        (4, "coupling minimality", c4_coupling_minimality),
        (5, "analytic anchors", c5_analytic_anchors),
        (6, "Monte Carlo scaling", c6_monte_carlo_scaling),
        (7, "engine cross-validation", c7_engine_cross_validation),
        (8, "syndrome-cycle error rate", c8_syndrome_cycle_rate),
        (9, "determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("acceptance {id} PASS {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("acceptance {id} FAIL {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {}/9 criteria pass", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

