use std::fs;
use std::process::{Command, Output};

fn qstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qstab"))
        .args(args)
        .env_remove("QSTAB_SEED")
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("spawn qstab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn code_info_summarizes() {
    let o = qstab(&["code", "info", "five_qubit"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("[[5,1,3]]"));
    let o = qstab(&["code", "info", "golay23"]);
    assert!(stdout(&o).starts_with("[[23,1,7]]"));
}

#[test]
fn build_css_from_hamming() {
    let o = qstab(&["code", "build-css", "--classical", "hamming7"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("# [[7,1,3]]"));
    let o = qstab(&["code", "build-css", "--classical", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn validate_and_emit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("steane.stab");
    let o = qstab(&["code", "emit", "steane7", "--out", good.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(dir.path().join("steane.stab.manifest.json").exists());
    let o = qstab(&["code", "validate", good.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "valid [[7,1,3]]");
    // A code file also works wherever a registry name does.
    let o = qstab(&["code", "info", good.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("[[7,1,3]]"));

    let bad = dir.path().join("bad.stab");
    fs::write(&bad, "10|00\n01|00\n00|10\n").unwrap();
    let o = qstab(&["code", "validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error"));
}

#[test]
fn synth_reports_couplings() {
    let o = qstab(&["synth", "--code", "five_qubit", "--style", "ancilla"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("ancilla: ") && stdout(&o).contains("10 data-ancilla couplings"));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("css.txt");
    let o = qstab(&["synth", "--code", "steane7", "--style", "css", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let summary = stdout(&o);
    assert_eq!(summary.matches("7 data-ancilla couplings").count(), 2, "{summary}");
    let dump = fs::read_to_string(&out).unwrap();
    assert!(dump.contains("# network css-x") && dump.contains("# network css-z"));
    assert!(dump.contains("cnot"));
}

#[test]
fn synth_usage_and_domain_errors() {
    let o = qstab(&["synth", "--style", "css"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qstab(&["synth", "--code", "five_qubit", "--style", "css"]);
    assert_eq!(o.status.code(), Some(1));
    let o = qstab(&["synth", "--code", "no_such_code"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_passes_and_detects_corruption() {
    let o = qstab(&["verify", "--code", "steane7", "--style", "css"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("22/22 pass"));

    let o = qstab(&["verify", "--code", "five_qubit", "--style", "ancilla", "--exhaustive"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("16/16 pass"));

    let o = qstab(&["verify", "--code", "five_qubit", "--style", "direct", "--corrupt-decoder"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn verify_rejects_wide_networks() {
    let o = qstab(&["verify", "--code", "golay23", "--style", "css"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("at most 20"));
}

#[test]
fn mc_noiseless_has_no_failures() {
    let o = qstab(&[
        "mc", "--code", "five_qubit", "--gamma", "0", "--epsilon", "0", "--trials", "2000",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[6], "0");
}

#[test]
fn mc_rejects_bad_probability() {
    let o = qstab(&["mc", "--code", "five_qubit", "--gamma", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qstab(&["mc", "--code", "five_qubit", "--gamma", "0.1", "--r", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mc_is_seeded_and_thread_independent() {
    let args = |threads: &'static str| {
        vec![
            "mc", "--code", "steane7", "--style", "css", "--gamma", "3e-3,1e-2", "--trials", "3000",
            "--seed", "17", "--threads", threads,
        ]
    };
    let a = qstab(&args("1"));
    let b = qstab(&args("3"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);

    let c = Command::new(env!("CARGO_BIN_EXE_qstab"))
        .args(["mc", "--code", "steane7", "--style", "css", "--gamma", "3e-3,1e-2", "--trials", "3000"])
        .env("QSTAB_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
    let d = qstab(&["mc", "--code", "steane7", "--style", "css", "--gamma", "1e-2", "--trials", "3000", "--seed", "18"]);
    assert_ne!(stdout(&a).lines().nth(2), stdout(&d).lines().nth(1));
}

#[test]
fn mc_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_qstab"))
        .args(["mc", "--code", "five_qubit", "--gamma", "1e-2", "--trials", "500", "--seed", "4"])
        .args(["--out", out.to_str().unwrap()])
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap();
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("code,style,r,gamma,epsilon,trials,failures,p_hat,ci_low,ci_high,seed\n"));
    let manifest = fs::read_to_string(dir.path().join("mc.csv.manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["command"], "mc");
    assert_eq!(v["seed"], 4);
    assert_eq!(v["timestamp"], 1_700_000_000u64);
    assert_eq!(v["parameters"]["trials"], 500);
}

#[test]
fn analyze_curve_and_break_even() {
    let o = qstab(&["analyze", "curve", "--code", "steane7"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("code,gamma,epsilon,r,alpha,p1,p2,p"));
    for line in lines {
        let r: usize = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((3..=15).contains(&r) && r % 2 == 1);
    }

    let o = qstab(&["analyze", "break-even", "--code", "steane7"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("gamma* = 3.81e-5"), "{}", stdout(&o));

    let o = qstab(&["analyze", "break-even", "--code", "steane7", "--gamma-max", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));

    let o = qstab(&["analyze", "curve", "--code", "golay23", "--gamma-min", "1e-6", "--gamma-max", "1e-4", "--points", "21"]);
    let best = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(7).unwrap().parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(best <= 1e-9);
}
