//! Browser bindings. Each operation takes plain strings and numbers and
//! returns a JSON document; the `*_json` functions are the native entry points
//! and the `#[wasm_bindgen]` wrappers only convert errors.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qstab::analysis::{self, CurveConfig};
use qstab::circuit::Style;
use qstab::codes::{parse_code_file, StabilizerCode};
use qstab::protocol::{Protocol, RecoveryConfig};
use qstab::sim::{NoiseParams, PauliFrame, RngStream};
use qstab::PauliOperator;

/// A registry name, or the text of a code file.
pub fn load_code(spec: &str) -> Result<StabilizerCode, String> {
    let spec = spec.trim();
    if StabilizerCode::REGISTRY.contains(&spec) {
        return StabilizerCode::by_name(spec).map_err(|e| e.to_string());
    }
    parse_code_file(spec).map_err(|e| format!("not a registry code ({}) and not a valid code file: {e}", StabilizerCode::REGISTRY.join(", ")))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct NetworkSummary {
    name: String,
    qubits: usize,
    gates: usize,
    couplings: usize,
}

#[derive(Serialize)]
struct CodeSummary {
    label: String,
    n: usize,
    k: usize,
    d: usize,
    t: usize,
    css: bool,
    generators: Vec<String>,
    logical_x: Vec<String>,
    logical_z: Vec<String>,
    networks: Vec<NetworkSummary>,
}

/// Parameters, generators, logicals and the recovery networks of each style
/// the code supports.
pub fn inspect_code_json(spec: &str) -> Result<String, String> {
    let code = load_code(spec)?;
    let mut networks = Vec::new();
    for style in [Style::Direct, Style::Ancilla, Style::Css] {
        if style == Style::Css && !code.is_css() {
            continue;
        }
        let cfg = RecoveryConfig::new(1, 1, style).map_err(|e| e.to_string())?;
        let protocol = Protocol::new(&code, cfg).map_err(|e| e.to_string())?;
        for nw in protocol.networks() {
            networks.push(NetworkSummary {
                name: nw.name.to_string(),
                qubits: nw.width(),
                gates: nw.circuit().len(),
                couplings: nw.coupling_count(),
            });
        }
    }
    to_json(&CodeSummary {
        label: code.label(),
        n: code.n(),
        k: code.k(),
        d: code.d(),
        t: code.t(),
        css: code.is_css(),
        generators: code.generators().iter().map(|g| g.to_string()).collect(),
        logical_x: code.logical_x().iter().map(|p| p.to_string()).collect(),
        logical_z: code.logical_z().iter().map(|p| p.to_string()).collect(),
        networks,
    })
}

#[derive(Serialize)]
struct RoundReport {
    kind: &'static str,
    round: usize,
    syndrome: String,
}

#[derive(Serialize)]
struct RecoveryReport {
    error: String,
    expected_syndrome: String,
    rounds: Vec<RoundReport>,
    corrections: Vec<String>,
    residual: String,
    restored: bool,
}

/// Injects `error` on the data block, runs one noiseless recovery of `r`
/// rounds through the chosen network and reports what was measured and
/// applied.
pub fn recover_error_json(spec: &str, style: &str, error: &str, r: usize, seed: u64) -> Result<String, String> {
    let code = load_code(spec)?;
    let style: Style = style.parse().map_err(|e: qstab::Error| e.to_string())?;
    let e: PauliOperator = error.trim().parse().map_err(|e: qstab::Error| e.to_string())?;
    if e.num_qubits() != code.n() {
        return Err(format!("error acts on {} qubits, the code has {}", e.num_qubits(), code.n()));
    }
    let cfg = RecoveryConfig::new(r, 1, style).map_err(|e| e.to_string())?;
    let protocol = Protocol::new(&code, cfg).map_err(|e| e.to_string())?;
    let mut ws = protocol.workspace();
    ws.frame = PauliFrame::from_pauli(protocol.width(), &e);
    let mut rng = RngStream::new(seed, 0);
    let (mut records, mut corrections) = (Vec::new(), Vec::new());
    protocol
        .recover(&mut ws, 0, &NoiseParams::noiseless(), &mut rng, &mut records, &mut corrections)
        .map_err(|e| e.to_string())?;
    let data: Vec<usize> = (0..code.n()).collect();
    let residual = ws.frame.restrict(&data);
    to_json(&RecoveryReport {
        error: e.to_string(),
        expected_syndrome: code.commutation_syndrome(&e).map_err(|e| e.to_string())?.to_string(),
        rounds: records
            .iter()
            .map(|rec| RoundReport {
                kind: rec.kind.name(),
                round: rec.round,
                syndrome: rec.syndrome.to_string(),
            })
            .collect(),
        corrections: corrections.iter().map(|c| c.applied.to_string()).collect(),
        restored: code.is_stabilizer(&residual),
        residual: residual.to_string(),
    })
}

#[derive(Serialize)]
struct CurveReport {
    code: String,
    break_even: Option<f64>,
    points: Vec<CurvePoint>,
}

#[derive(Serialize)]
struct CurvePoint {
    gamma: f64,
    r: usize,
    p1: f64,
    p2: f64,
    p: f64,
}

/// Failure-model curve on a log grid plus the break-even rate.
pub fn failure_curve_json(spec: &str, gamma_min: f64, gamma_max: f64, points: usize) -> Result<String, String> {
    let code = load_code(spec)?;
    let mut cfg = CurveConfig::new(&code.label(), code.n(), code.t());
    cfg.gamma_min = gamma_min;
    cfg.gamma_max = gamma_max;
    cfg.points = points;
    let pts = analysis::curve(&cfg).map_err(|e| e.to_string())?;
    let g_star = analysis::break_even(&cfg).map_err(|e| e.to_string())?;
    to_json(&CurveReport {
        code: code.label(),
        break_even: g_star,
        points: pts
            .iter()
            .map(|p| CurvePoint {
                gamma: p.gamma,
                r: p.r,
                p1: p.p1,
                p2: p.p2,
                p: p.p,
            })
            .collect(),
    })
}

#[wasm_bindgen]
pub fn inspect_code(spec: &str) -> Result<String, JsError> {
    inspect_code_json(spec).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn recover_error(spec: &str, style: &str, error: &str, r: usize, seed: u64) -> Result<String, JsError> {
    recover_error_json(spec, style, error, r, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn failure_curve(spec: &str, gamma_min: f64, gamma_max: f64, points: usize) -> Result<String, JsError> {
    failure_curve_json(spec, gamma_min, gamma_max, points).map_err(|e| JsError::new(&e))
}
