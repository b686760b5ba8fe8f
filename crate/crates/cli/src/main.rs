//! `qstab`: command-line front end.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qstab::analysis::{self, CurveConfig, EpsilonRule};
use qstab::circuit::{synth_verification, CheckSet, Style};
use qstab::codes::{
    build_decoder_table, css_from_classical, emit_code_file, paulis_up_to, parse_code_file,
    ClassicalCode, StabilizerCode, Syndrome,
};
use qstab::gf2::BitMatrix;
use qstab::protocol::{estimate_csv_row, Protocol, RecoveryConfig, ESTIMATE_CSV_HEADER};
use qstab::sim::{NoiseParams, RngStream, StateVector, MAX_STATEVECTOR_QUBITS};
use qstab::PauliOperator;

#[derive(Parser, Debug)]
#[command(name = "qstab", version, about = "Fault-tolerant syndrome extraction toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect, validate, build and emit stabilizer codes.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Synthesize a recovery network and dump its circuits.
    Synth(SynthArgs),
    /// Check the recovery contract exactly on the statevector engine.
    Verify(VerifyArgs),
    /// Monte Carlo failure rate of one computational step.
    Mc(McArgs),
    /// Closed-form failure model.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
}

#[derive(Subcommand, Debug)]
enum CodeCmd {
    /// Print parameters, generators and logical operators.
    Info { code: String },
    /// Parse a code file and check its invariants.
    Validate { file: PathBuf },
    /// CSS code from a classical parity-check matrix (name or file).
    BuildCss {
        #[arg(long)]
        classical: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a code in the code file format.
    Emit {
        code: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum StyleArg {
    Direct,
    Ancilla,
    Css,
}

impl From<StyleArg> for Style {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Direct => Style::Direct,
            StyleArg::Ancilla => Style::Ancilla,
            StyleArg::Css => Style::Css,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ChecksArg {
    Parity,
    Full,
}

impl From<ChecksArg> for CheckSet {
    fn from(c: ChecksArg) -> Self {
        match c {
            ChecksArg::Parity => CheckSet::Parity,
            ChecksArg::Full => CheckSet::Full,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    /// Registry name or code file.
    #[arg(long)]
    code: String,
    #[arg(long, value_enum, default_value = "ancilla")]
    style: StyleArg,
    #[arg(long, value_enum, default_value = "full")]
    checks: ChecksArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    code: String,
    #[arg(long, value_enum, default_value = "ancilla")]
    style: StyleArg,
    /// Also check logical basis states and more measurement branches.
    #[arg(long)]
    exhaustive: bool,
    /// Swap two decoder table entries (negative control).
    #[arg(long)]
    corrupt_decoder: bool,
    #[arg(long, default_value_t = 1, value_parser = parse_odd)]
    r: usize,
    #[arg(long, env = "QSTAB_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct McArgs {
    #[arg(long)]
    code: String,
    #[arg(long, value_enum, default_value = "ancilla")]
    style: StyleArg,
    /// Comma-separated gate failure probabilities.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_probability)]
    gamma: Vec<f64>,
    /// Idle failure probability per step; default `gamma / (10 n)`.
    #[arg(long, value_parser = parse_probability, conflicts_with = "epsilon_rule")]
    epsilon: Option<f64>,
    #[arg(long, value_enum)]
    epsilon_rule: Option<EpsilonRuleArg>,
    #[arg(long, default_value_t = 3, value_parser = parse_odd)]
    r: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, env = "QSTAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    #[serde(skip)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    max_retries: usize,
    #[arg(long, value_enum, default_value = "full")]
    checks: ChecksArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum EpsilonRuleArg {
    /// `epsilon = gamma / (10 n)`.
    Tenth,
}

#[derive(Subcommand, Debug)]
enum AnalyzeCmd {
    /// Failure probability per step over a gamma grid, as CSV.
    Curve(CurveArgs),
    /// Gamma at which an encoded step fails as often as a bare gate.
    BreakEven(CurveArgs),
}

#[derive(Args, Debug, Serialize)]
struct CurveArgs {
    #[arg(long)]
    code: String,
    #[arg(long, default_value_t = 1e-7, value_parser = parse_probability)]
    gamma_min: f64,
    #[arg(long, default_value_t = 1e-2, value_parser = parse_probability)]
    gamma_max: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Gate-step opportunities per qubit.
    #[arg(long, default_value_t = 1)]
    c: usize,
    #[arg(long, default_value_t = 15)]
    r_max: usize,
    /// Fixed idle probability instead of `gamma / (10 n)`.
    #[arg(long, value_parser = parse_probability)]
    epsilon: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_probability(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not a probability in [0, 1]"))
    }
}

fn parse_odd(s: &str) -> std::result::Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    if v % 2 == 1 {
        Ok(v)
    } else {
        Err(format!("{v} must be odd"))
    }
}

#[derive(Serialize)]
struct RunManifest<'a, P: Serialize> {
    command: &'a str,
    parameters: &'a P,
    seed: Option<u64>,
    version: &'static str,
    /// From `SOURCE_DATE_EPOCH`; absent otherwise so that reruns stay identical.
    timestamp: Option<u64>,
}

/// Writes `text` to `out` with a manifest next to it, or to stdout.
fn emit<P: Serialize>(out: Option<&Path>, text: &str, command: &str, params: &P, seed: Option<u64>) -> Result<()> {
    match out {
        None => print!("{text}"),
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            let manifest = RunManifest {
                command,
                parameters: params,
                seed,
                version: env!("CARGO_PKG_VERSION"),
                timestamp: std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.parse().ok()),
            };
            let mpath = PathBuf::from(format!("{}.manifest.json", path.display()));
            let json = serde_json::to_string_pretty(&manifest)? + "\n";
            fs::write(&mpath, json).with_context(|| format!("writing {}", mpath.display()))?;
        }
    }
    Ok(())
}

/// Registry name, or a path to a code file.
fn load_code(spec: &str) -> Result<StabilizerCode> {
    if StabilizerCode::REGISTRY.contains(&spec) {
        return Ok(StabilizerCode::by_name(spec)?);
    }
    let text = fs::read_to_string(spec)
        .with_context(|| format!("{spec:?} is neither a registry code ({}) nor a readable file", StabilizerCode::REGISTRY.join(", ")))?;
    Ok(parse_code_file(&text).with_context(|| format!("parsing {spec}"))?)
}

fn code_info(code: &StabilizerCode) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", code.label(), code.name().unwrap_or("custom"));
    let _ = writeln!(s, "n = {}, k = {}, d = {}, t = {}", code.n(), code.k(), code.d(), code.t());
    let _ = writeln!(s, "css: {}", if code.is_css() { "yes" } else { "no" });
    let _ = writeln!(s, "generators (x|z):");
    for i in 0..code.num_generators() {
        let _ = writeln!(s, "  {}  {}|{}", code.generator(i), code.hx().row(i), code.hz().row(i));
    }
    for (i, (x, z)) in code.logical_x().iter().zip(code.logical_z()).enumerate() {
        let _ = writeln!(s, "logical {i}: X = {x}, Z = {z}");
    }
    s
}

fn cmd_code(cmd: CodeCmd) -> Result<()> {
    match cmd {
        CodeCmd::Info { code } => {
            print!("{}", code_info(&load_code(&code)?));
        }
        CodeCmd::Validate { file } => {
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let code = parse_code_file(&text).with_context(|| format!("{} is invalid", file.display()))?;
            println!("valid {}", code.label());
        }
        CodeCmd::BuildCss { classical, out } => {
            let c = match ClassicalCode::by_name(&classical) {
                Ok(c) => c,
                Err(_) => {
                    let text = fs::read_to_string(&classical).with_context(|| {
                        format!("{classical:?} is neither a classical registry code (hamming7, golay23) nor a readable file")
                    })?;
                    ClassicalCode::new(BitMatrix::parse_text(&text)?)
                }
            };
            let code = css_from_classical(&c, None)?;
            eprintln!("{}", code.label());
            let params = BTreeMap::from([("classical", classical.as_str())]);
            emit(out.as_deref(), &emit_code_file(&code), "code build-css", &params, None)?;
        }
        CodeCmd::Emit { code, out } => {
            let c = load_code(&code)?;
            let params = BTreeMap::from([("code", code.as_str())]);
            emit(out.as_deref(), &emit_code_file(&c), "code emit", &params, None)?;
        }
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let code = load_code(&args.code)?;
    let config = RecoveryConfig::new(1, 1, args.style.into())?.with_check_set(args.checks.into());
    let protocol = Protocol::new(&code, config)?;
    let mut dump = String::new();
    let mut summary = String::new();
    for nw in protocol.networks() {
        let checks = if args.style == StyleArg::Direct { &[][..] } else { nw.checks(config.check_set) };
        let ancilla: Vec<usize> = nw.ancilla().collect();
        let verifiers: Vec<usize> = (nw.width()..nw.width() + checks.len()).collect();
        let v = synth_verification(checks, &ancilla, &verifiers, nw.width() + checks.len())?;
        let _ = writeln!(dump, "# network {} on {} data + {} ancilla qubits", nw.name, nw.num_data, nw.num_ancilla);
        let _ = writeln!(dump, "# prep");
        dump.push_str(&nw.prep.to_text());
        let _ = writeln!(dump, "# verification ({} checks)", checks.len());
        dump.push_str(&v.circuit.to_text());
        let _ = writeln!(dump, "# extract");
        dump.push_str(&nw.extract.to_text());
        let _ = writeln!(
            summary,
            "{}: {} gates (prep {}, verification {}, extract {}), {} data-ancilla couplings",
            nw.name,
            nw.prep.len() + v.circuit.len() + nw.extract.len(),
            nw.prep.len(),
            v.circuit.len(),
            nw.extract.len(),
            nw.coupling_count()
        );
    }
    match &args.out {
        Some(_) => {
            emit(args.out.as_deref(), &dump, "synth", args, None)?;
            print!("{summary}");
        }
        None => {
            print!("{dump}");
            for line in summary.lines() {
                println!("# {line}");
            }
        }
    }
    Ok(())
}

/// Swaps the corrections of the first two weight-1 syndromes.
fn corrupted_table(code: &StabilizerCode) -> Result<qstab::codes::DecoderTable> {
    let mut table = build_decoder_table(code)?;
    let mut singles: Vec<(Syndrome, PauliOperator)> = table.iter().filter(|(_, c)| c.weight() == 1).collect();
    singles.sort_by(|a, b| a.1.lex_cmp(&b.1));
    if singles.len() < 2 {
        bail!("decoder table has fewer than two single-qubit entries");
    }
    table.set_entry(&singles[0].0, &singles[1].1);
    table.set_entry(&singles[1].0, &singles[0].1);
    Ok(table)
}

fn logical_states(k: usize, exhaustive: bool, rng: &mut RngStream) -> Result<Vec<(String, StateVector)>> {
    let product = |qs: Vec<StateVector>| qs.into_iter().reduce(|a, b| a.tensor(&b)).expect("k >= 1");
    let mut out = Vec::new();
    if exhaustive {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| qstab::sim::Complex64::new(re, im);
        let basis = [
            ("0", vec![c(1.0, 0.0), c(0.0, 0.0)]),
            ("1", vec![c(0.0, 0.0), c(1.0, 0.0)]),
            ("+", vec![c(h, 0.0), c(h, 0.0)]),
            ("+i", vec![c(h, 0.0), c(0.0, h)]),
        ];
        for (name, amps) in basis {
            let q = StateVector::from_amplitudes(1, amps)?;
            out.push((format!("|{name}>^{k}"), product(vec![q; k])));
        }
    }
    let randoms = if exhaustive { 3 } else { 1 };
    for i in 0..randoms {
        out.push((format!("random{i}"), product((0..k).map(|_| StateVector::random_qubit(rng)).collect())));
    }
    Ok(out)
}

/// Returns whether every check passed.
fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let code = load_code(&args.code)?;
    let config = RecoveryConfig::new(args.r, 1, args.style.into())?;
    let mut protocol = Protocol::new(&code, config)?;
    for nw in protocol.networks() {
        if nw.width() > MAX_STATEVECTOR_QUBITS {
            bail!(
                "{} network needs {} + {} = {} qubits; the statevector engine handles at most {}",
                nw.name,
                nw.num_data,
                nw.num_ancilla,
                nw.width(),
                MAX_STATEVECTOR_QUBITS
            );
        }
    }
    if args.corrupt_decoder {
        protocol = protocol.with_decoder_table(corrupted_table(&code)?)?;
    }
    let mut rng = RngStream::new(args.seed, 0);
    let states = logical_states(code.k(), args.exhaustive, &mut rng)?;
    let shots = if args.exhaustive { 3 } else { 1 };
    let errors = paulis_up_to(code.n(), code.t());
    let mut passed = 0;
    for e in &errors {
        let mut worst: f64 = 1.0;
        let mut worst_state = String::new();
        for (name, phi) in &states {
            for _ in 0..shots {
                let ov = protocol.recovery_overlap(e, phi, &mut rng)?;
                if ov < worst {
                    worst = ov;
                    worst_state = name.clone();
                }
            }
        }
        if (worst - 1.0).abs() <= 1e-10 {
            passed += 1;
            println!("pass {e}");
        } else {
            println!("FAIL {e} overlap {worst:.6} on {worst_state}");
        }
    }
    println!(
        "{}/{} pass ({} {}, {} states x {} shots, r = {})",
        passed,
        errors.len(),
        code.label(),
        Style::from(args.style).name(),
        states.len(),
        shots,
        args.r
    );
    Ok(passed == errors.len())
}

fn cmd_mc(args: &McArgs) -> Result<()> {
    let code = load_code(&args.code)?;
    let config = RecoveryConfig::new(args.r, args.max_retries, args.style.into())?.with_check_set(args.checks.into());
    let protocol = Protocol::new(&code, config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    let mut csv = String::from(ESTIMATE_CSV_HEADER);
    csv.push('\n');
    for &gamma in &args.gamma {
        let epsilon = match (args.epsilon, args.epsilon_rule) {
            (Some(e), _) => e,
            (None, None | Some(EpsilonRuleArg::Tenth)) => EpsilonRule::TenthPerQubit.epsilon(gamma, code.n()),
        };
        let noise = NoiseParams::new(gamma, epsilon)?;
        let est = pool.install(|| protocol.estimate_failure_rate(&noise, args.trials, args.seed));
        csv.push_str(&estimate_csv_row(&protocol, &noise, args.seed, &est));
        csv.push('\n');
        let alpha = analysis::alpha_approx(code.n(), gamma, epsilon);
        let p1 = analysis::p1(args.r, analysis::alpha(code.n(), gamma, epsilon))?;
        eprintln!(
            "gamma {}: wrong cycles {} (3n(gamma + n epsilon) = {}), wrong majorities {} (P1 = {}), retries exhausted {}",
            analysis::format_sig(gamma),
            analysis::format_sig(est.wrong_cycle_rate()),
            analysis::format_sig(alpha),
            analysis::format_sig(est.wrong_correction_rate()),
            analysis::format_sig(p1),
            est.tally.retries_exhausted
        );
    }
    emit(args.out.as_deref(), &csv, "mc", args, Some(args.seed))
}

fn curve_config(args: &CurveArgs) -> Result<(StabilizerCode, CurveConfig)> {
    let code = load_code(&args.code)?;
    let mut cfg = CurveConfig::new(code.name().unwrap_or("custom"), code.n(), code.t());
    cfg.gamma_min = args.gamma_min;
    cfg.gamma_max = args.gamma_max;
    cfg.points = args.points;
    cfg.c = args.c;
    cfg.r_max = args.r_max;
    if let Some(e) = args.epsilon {
        cfg.epsilon = EpsilonRule::Fixed(e);
    }
    cfg.validate()?;
    Ok((code, cfg))
}

fn cmd_analyze(cmd: &AnalyzeCmd) -> Result<()> {
    match cmd {
        AnalyzeCmd::Curve(args) => {
            let (_, cfg) = curve_config(args)?;
            let points = analysis::curve(&cfg)?;
            emit(args.out.as_deref(), &analysis::curve_csv(&cfg.name, &points), "analyze curve", args, None)
        }
        AnalyzeCmd::BreakEven(args) => {
            let (code, cfg) = curve_config(args)?;
            let g = analysis::break_even(&cfg)?.ok_or_else(|| {
                anyhow!(
                    "p(gamma) - gamma does not change sign on [{}, {}]",
                    analysis::format_sig(cfg.gamma_min),
                    analysis::format_sig(cfg.gamma_max)
                )
            })?;
            let pt = analysis::evaluate(&cfg, g)?;
            let text = format!(
                "{} break-even gamma* = {:.2e} (r = {}, c = {})\n",
                code.label(),
                g,
                pt.r,
                cfg.c
            );
            emit(args.out.as_deref(), &text, "analyze break-even", args, None)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Code(cmd) => cmd_code(cmd).map(|_| true),
        Command::Synth(args) => cmd_synth(&args).map(|_| true),
        Command::Verify(args) => cmd_verify(&args),
        Command::Mc(args) => cmd_mc(&args).map(|_| true),
        Command::Analyze(cmd) => cmd_analyze(&cmd).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
