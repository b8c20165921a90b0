//! `prchan`: decide phase retrievability of channels and frames from JSON files.
//!
//! Exit codes: 0 PR, 1 NOT_PR, 2 LIKELY_PR (or no conclusion), 3 input error,
//! 4 a construction whose claim did not verify.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use prchannel::construct::{self, ConstructionResult, FIXTURE_NAMES};
use prchannel::decide::{self, Certificate, NecessaryOutcome, PRVerdict, Pipeline, ScalarSpectrum, Status};
use prchannel::frame::{self, Frame, FrameReport, PrStatus};
use prchannel::linalg::CVector;
use prchannel::oracle::OracleConfig;
use prchannel::{io, Field, QuantumChannel, Tolerance, ValidationReport};

#[derive(Parser)]
#[command(name = "prchan", version, about = "Phase retrievability of quantum channels and frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Necessary,
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Recipe {
    Rank2,
    Rankr,
    FromObservables,
    Projection,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

#[derive(clap::Args)]
struct Common {
    /// Oracle restarts
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Absolute residual tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Output::Text)]
    output: Output,
}

impl Common {
    fn tolerance(&self) -> Result<Tolerance, Failure> {
        let d = Tolerance::default();
        match self.tol {
            None => Ok(d),
            Some(t) => Tolerance::new(d.rank_rel, t, d.root_cluster).map_err(Failure::from),
        }
    }

    fn oracle(&self) -> Result<OracleConfig, Failure> {
        let cfg = OracleConfig { restarts: self.restarts, ..OracleConfig::with_seed(self.seed) };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a channel is phase retrievable
    Check {
        path: PathBuf,
        /// Restrict the decision pipeline
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Build a channel with rank-one observables from a recipe
    Construct {
        #[arg(long, value_enum)]
        recipe: Recipe,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        /// Block sizes for the projection recipe, e.g. 1,1
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        /// Frame JSON for the from-observables recipe
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
        field: FieldArg,
        /// Directory for channel.json, povm.json and verdict.json
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Frame bounds, complement property and phase retrievability of a frame
    Frame {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Scalar relative spectrum of one Kraus operator against the others
    Spectrum {
        path: PathBuf,
        /// Kraus operator index, starting at 1
        #[arg(long)]
        j: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Output::Text)]
        output: Output,
    },
    /// Write the named example channels and frames as JSON
    Fixtures {
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
    },
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Unverified(String),
}

impl From<prchannel::Error> for Failure {
    fn from(e: prchannel::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    io::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Pr => 0,
        Status::NotPr => 1,
        Status::LikelyPr => 2,
    }
}

fn name<T: Serialize>(t: &T) -> String {
    match serde_json::to_value(t) {
        Ok(Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

fn fmt_c(z: Complex64) -> String {
    // no "-0.000000" for roundoff-sized parts
    let clean = |x: f64| if x.abs() < 5e-7 { 0.0 } else { x };
    format!("{:.6}{:+.6}i", clean(z.re), clean(z.im))
}

fn fmt_v(v: &[Complex64]) -> String {
    let parts: Vec<String> = v.iter().map(|&z| fmt_c(z)).collect();
    format!("({})", parts.join(", "))
}

fn fmt_vec(v: &CVector) -> String {
    fmt_v(v.as_slice())
}

fn verdict_text(out: &mut String, v: &PRVerdict) {
    let _ = writeln!(out, "status: {}", name(&v.status));
    let _ = writeln!(out, "method: {}", name(&v.method));
    match &v.certificate {
        Certificate::PencilClash { lambda, x, y } => {
            let _ = writeln!(out, "certificate: PENCIL_CLASH at lambda = {}", fmt_c(*lambda));
            let _ = writeln!(out, "  x = {}\n  y = {}", fmt_vec(x), fmt_vec(y));
        }
        Certificate::InnerProductViolation { j, lambda, mu, x, y } => {
            let _ = writeln!(out, "certificate: INNER_PRODUCT_VIOLATION for Kraus operator {}", j + 1);
            let _ = writeln!(out, "  lambda = {}\n  mu = {}", fmt_v(lambda), fmt_v(mu));
            let _ = writeln!(out, "  x = {}\n  y = {}", fmt_vec(x), fmt_vec(y));
        }
        Certificate::TensorWitness { x, y, kind } => {
            let _ = writeln!(out, "certificate: TENSOR_WITNESS ({})", name(kind));
            let _ = writeln!(out, "  x = {}\n  y = {}", fmt_vec(x), fmt_vec(y));
        }
        Certificate::StateWitness { x, y } => {
            let _ = writeln!(out, "certificate: STATE_WITNESS");
            let _ = writeln!(out, "  x = {}\n  y = {}", fmt_vec(x), fmt_vec(y));
        }
        Certificate::Empty => {}
    }
    if let Some(f) = v.floor {
        let _ = writeln!(out, "oracle floor: {f:.6e}");
    }
    for (k, r) in &v.residuals {
        let _ = writeln!(out, "residual {k}: {r:.3e}");
    }
}

fn validation_text(out: &mut String, r: &ValidationReport) {
    let _ = writeln!(
        out,
        "trace preserving: {} (residual {:.3e})\ncompletely positive: {}\nunital: {} (residual {:.3e})\nChoi rank: {}",
        r.is_trace_preserving, r.tp_residual, r.is_completely_positive, r.is_unital, r.unital_residual, r.choi_rank
    );
}

fn emit(output: Output, text: String, value: Value) {
    match output {
        Output::Text => print!("{text}"),
        Output::Json => print!("{}", io::to_json(&value)),
    }
}

fn run_check(path: &Path, method: Option<MethodArg>, common: &Common) -> Result<u8, Failure> {
    let tol = common.tolerance()?;
    let cfg = common.oracle()?;
    let ch: QuantumChannel = read_json(path)?;
    let report = ch.validate(&tol);
    let mut text = String::new();
    validation_text(&mut text, &report);
    let pipeline = match method {
        None => Pipeline::Full,
        Some(MethodArg::Exact) => Pipeline::Exact,
        Some(MethodArg::Oracle) => Pipeline::Oracle,
        Some(MethodArg::Necessary) => {
            return match decide::necessary_inner_product_check(&ch, &tol)? {
                NecessaryOutcome::Violation(v) => {
                    verdict_text(&mut text, &v);
                    emit(common.output, text, json!({ "validation": report, "verdict": v }));
                    Ok(1)
                }
                NecessaryOutcome::Pass => {
                    text.push_str("necessary condition: PASS (no conclusion)\n");
                    emit(common.output, text, json!({ "validation": report, "necessary": "PASS" }));
                    Ok(2)
                }
            };
        }
    };
    let v = decide::decide_with(&ch, &cfg, &tol, pipeline)?;
    verdict_text(&mut text, &v);
    let code = status_code(v.status);
    emit(common.output, text, json!({ "validation": report, "verdict": v }));
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn run_construct(
    recipe: Recipe,
    n: Option<usize>,
    r: Option<usize>,
    dims: &[usize],
    frame_path: Option<&Path>,
    field: Field,
    out: Option<&Path>,
    common: &Common,
) -> Result<u8, Failure> {
    let tol = common.tolerance()?;
    let cfg = common.oracle()?;
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| Failure::Input(format!("recipe needs --{flag}")));
    let res: ConstructionResult = match recipe {
        Recipe::Rank2 => construct::rank2_injective_plus_rankone(need(n, "n")?, field, common.seed, &tol)?,
        Recipe::Rankr => construct::rankr_positive_construction(need(n, "n")?, need(r, "r")?, field, common.seed, &tol)?,
        Recipe::FromObservables => {
            let path = frame_path.ok_or_else(|| Failure::Input("recipe needs --frame".into()))?;
            let f: Frame = read_json(path)?;
            construct::channel_from_observables(&f, need(r, "r")?, common.seed, &cfg, &tol)?
        }
        Recipe::Projection => {
            let dims = if dims.is_empty() { vec![1; need(n, "n")?] } else { dims.to_vec() };
            if let Some(n) = n {
                if dims.iter().sum::<usize>() != n {
                    return Err(Failure::Input(format!("--dims {dims:?} do not sum to --n {n}")));
                }
            }
            construct::orthogonal_projection_channel(&dims)?
        }
    };
    let verified = construct::verify_claim(&res, &cfg, &tol);
    let verdict = decide::decide(&res.channel, &cfg, &tol);
    let summary = json!({
        "claimed_status": res.claimed_status,
        "verified": verified,
        "verdict": verdict,
        "witness": serde_json::to_value(&res).ok().and_then(|v| v.get("witness").cloned()),
    });
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
        write_file(&dir.join("channel.json"), &io::to_json(&res.channel))?;
        write_file(&dir.join("povm.json"), &io::to_json(&res.povm))?;
        write_file(&dir.join("verdict.json"), &io::to_json(&summary))?;
    }
    let mut text = String::new();
    let _ = writeln!(
        text,
        "channel: {} -> {}, {} Kraus operators, Choi rank {}",
        res.channel.dim_in(),
        res.channel.dim_out(),
        res.channel.kraus().len(),
        res.channel.choi_rank(&tol)
    );
    let _ = writeln!(
        text,
        "observables: {} rank-one of {} POVM elements",
        res.povm.rank_one_count,
        res.povm.elements.len()
    );
    let _ = writeln!(text, "claimed: {}, verified: {verified}", name(&res.claimed_status));
    verdict_text(&mut text, &verdict);
    emit(common.output, text, summary);
    if verified {
        Ok(0)
    } else {
        Err(Failure::Unverified(format!("claimed {} did not verify", name(&res.claimed_status))))
    }
}

fn run_frame(path: &Path, common: &Common) -> Result<u8, Failure> {
    let tol = common.tolerance()?;
    let cfg = common.oracle()?;
    let f: Frame = read_json(path)?;
    let rep: FrameReport = frame::is_phase_retrievable_frame(&f, &cfg, &tol);
    let mut text = String::new();
    let _ = writeln!(text, "frame: {} (bounds {:.6}, {:.6}), parseval: {}", rep.is_frame, rep.lower_bound, rep.upper_bound, rep.is_parseval);
    match rep.complement_property {
        Some(b) => {
            let _ = writeln!(text, "complement property: {b}");
        }
        None => text.push_str("complement property: not checked\n"),
    }
    let _ = writeln!(text, "phase retrievable: {}", name(&rep.phase_retrievable));
    if let Some((x, y)) = &rep.witness {
        let _ = writeln!(text, "  x = {}\n  y = {}", fmt_vec(x), fmt_vec(y));
    }
    let code = match rep.phase_retrievable {
        PrStatus::Yes => 0,
        PrStatus::No => 1,
        PrStatus::LikelyYes => 2,
    };
    emit(common.output, text, serde_json::to_value(&rep).expect("report serializes"));
    Ok(code)
}

fn lex(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    let key = |v: &[Complex64]| v.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<f64>>();
    key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal)
}

fn run_spectrum(path: &Path, j: usize, tol: Option<f64>, output: Output) -> Result<u8, Failure> {
    let d = Tolerance::default();
    let tol = match tol {
        None => d,
        Some(t) => Tolerance::new(d.rank_rel, t, d.root_cluster)?,
    };
    let ch: QuantumChannel = read_json(path)?;
    let k = ch.kraus().len();
    if j == 0 || j > k {
        return Err(Failure::Input(format!("--j must be between 1 and {k}")));
    }
    let mut text = String::new();
    let mut points = match decide::scalar_relative_spectrum(&ch, j - 1, &tol)? {
        ScalarSpectrum::NotFinite => {
            text.push_str("spectrum: not finite\n");
            emit(output, text, json!({ "j": j, "finite": false }));
            return Ok(2);
        }
        ScalarSpectrum::Finite(p) => p,
    };
    points.sort_by(|a, b| lex(&a.lambda, &b.lambda));
    let _ = writeln!(text, "spectrum of A_{j}: {} points", points.len());
    for p in &points {
        let _ = writeln!(text, "  {}  (residual {:.3e})", fmt_v(&p.lambda), p.residual);
    }
    let mut pairs = Vec::new();
    let mut flagged = false;
    for (a, p) in points.iter().enumerate() {
        for (b, q) in points.iter().enumerate().skip(a) {
            let value = Complex64::new(1.0, 0.0)
                + p.lambda.iter().zip(&q.lambda).map(|(x, y)| x * y.conj()).sum::<Complex64>();
            let zero = value.norm() <= tol.residual_abs;
            flagged |= zero;
            let _ = writeln!(
                text,
                "  1 + <p{}, p{}> = {}{}",
                a + 1,
                b + 1,
                fmt_c(value),
                if zero { "  [zero: not phase retrievable]" } else { "" }
            );
            pairs.push(json!({ "i": a + 1, "k": b + 1, "value": [value.re, value.im], "zero": zero }));
        }
    }
    emit(output, text, json!({ "j": j, "finite": true, "points": points, "pairs": pairs }));
    Ok(if flagged { 1 } else { 2 })
}

fn run_fixtures(out: &Path) -> Result<u8, Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::Input(format!("cannot create {}: {e}", out.display())))?;
    for name in FIXTURE_NAMES {
        let ch = construct::fixture(name)?;
        write_file(&out.join(format!("{name}.json")), &io::to_json(&ch))?;
    }
    let tol = Tolerance::default();
    let frames = [
        ("f3_real", construct::three_vector_frame(Field::Real)),
        ("f3_complex", construct::three_vector_frame(Field::Complex)),
        ("parseval3", frame::parseval_normalize(&construct::three_vector_frame(Field::Real), &tol)?),
    ];
    for (name, f) in frames {
        write_file(&out.join(format!("{name}.json")), &io::to_json(&f))?;
    }
    println!("wrote {} files to {}", FIXTURE_NAMES.len() + 3, out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { path, method, common } => run_check(path, *method, common),
        Command::Construct { recipe, n, r, dims, frame, field, out, common } => {
            run_construct(*recipe, *n, *r, dims, frame.as_deref(), (*field).into(), out.as_deref(), common)
        }
        Command::Frame { path, common } => run_frame(path, common),
        Command::Spectrum { path, j, tol, output } => run_spectrum(path, *j, *tol, *output),
        Command::Fixtures { out } => run_fixtures(out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Unverified(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}
