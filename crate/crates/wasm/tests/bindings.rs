use qstab_wasm::{failure_curve_json, inspect_code_json, load_code, recover_error_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn inspect_lists_networks_per_style() {
    let v = parse(&inspect_code_json("steane7").unwrap());
    assert_eq!(v["label"], "[[7,1,3]]");
    assert_eq!(v["css"], true);
    assert_eq!(v["generators"].as_array().unwrap().len(), 6);
    let nets = v["networks"].as_array().unwrap();
    // direct, ancilla, and the two CSS rounds
    assert_eq!(nets.len(), 4);
    let ancilla = nets.iter().find(|n| n["name"] == "ancilla").unwrap();
    assert_eq!(ancilla["couplings"], 14);

    let v = parse(&inspect_code_json("five_qubit").unwrap());
    assert_eq!(v["css"], false);
    assert_eq!(v["networks"].as_array().unwrap().len(), 2);
}

#[test]
fn inspect_accepts_code_text() {
    let text = qstab::codes::emit_code_file(&qstab::codes::StabilizerCode::five_qubit());
    let v = parse(&inspect_code_json(&text).unwrap());
    assert_eq!(v["label"], "[[5,1,3]]");
    assert!(inspect_code_json("not a code").is_err());
    assert!(load_code("golay23").is_ok());
}

#[test]
fn recovery_reports_matching_syndromes() {
    let v = parse(&recover_error_json("five_qubit", "ancilla", "IIYII", 3, 1).unwrap());
    let expected = v["expected_syndrome"].as_str().unwrap();
    let rounds = v["rounds"].as_array().unwrap();
    assert_eq!(rounds.len(), 3);
    assert!(rounds.iter().all(|r| r["syndrome"] == expected));
    assert_eq!(v["restored"], true);

    let v = parse(&recover_error_json("steane7", "css", "XIIIIIZ", 1, 1).unwrap());
    assert_eq!(v["rounds"].as_array().unwrap().len(), 2);
    assert_eq!(v["restored"], true);
}

#[test]
fn recovery_rejects_bad_input() {
    assert!(recover_error_json("five_qubit", "ancilla", "XX", 3, 0).is_err());
    assert!(recover_error_json("five_qubit", "css", "XIIII", 3, 0).is_err());
    assert!(recover_error_json("five_qubit", "ancilla", "XIIII", 2, 0).is_err());
    assert!(recover_error_json("five_qubit", "sideways", "XIIII", 3, 0).is_err());
}

#[test]
fn curve_carries_break_even() {
    let v = parse(&failure_curve_json("steane7", 1e-7, 1e-2, 101).unwrap());
    let g = v["break_even"].as_f64().unwrap();
    assert!((g - 3.81e-5).abs() < 0.01e-5);
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 101);
    assert!(pts.iter().all(|p| p["r"].as_u64().unwrap() % 2 == 1));
    assert!(failure_curve_json("steane7", 1e-2, 1e-7, 11).is_err());
}
