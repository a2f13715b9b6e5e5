//! Command-line front end for the factorization library.
//!
//! Reads a JSON problem description, runs one of the modes `factor`,
//! `verify`, `lift`, `eval`, or `cnp-check`, and writes a JSON report to
//! stdout or a file. Output is byte-deterministic for a given input:
//! floats are rounded to 12 significant digits, object keys are sorted,
//! and all sampling is seeded.
//!
//! Exit codes: 0 on success, 1 when a requested check fails (a
//! verification out of tolerance, a kernel that is not positive
//! semidefinite, a vanishing denominator), 2 on unusable input.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fock_smirnov::{
    canonical_pair, commutative_smirnov, restrict_smirnov, verify_pair, CnpSample, Complex64,
    FreeSeries, MatrixTuple, MultiIndexSeries,
};
use nalgebra::DMatrix;
use serde::Deserialize;
use serde_json::{json, Value};

/// Canonical factorizations of truncated free holomorphic functions, with
/// commuting-variable and sampled-kernel pushdowns.
#[derive(Parser)]
#[command(name = "fock-smirnov", version)]
struct Args {
    /// Path to the JSON problem description.
    #[arg(long)]
    input: PathBuf,

    /// Mode: factor, verify, lift, eval, or cnp-check. Overrides the
    /// "mode" field of the input file.
    #[arg(long)]
    mode: Option<String>,

    /// Truncation degree. Overrides the "degree" field (default 30).
    #[arg(long)]
    degree: Option<usize>,

    /// Verification tolerance. Overrides "tolerance" (default 1e-8).
    #[arg(long)]
    tol: Option<f64>,

    /// Sampling seed. Overrides "seed" (default 7).
    #[arg(long)]
    seed: Option<u64>,

    /// Output destination: a file path, or "stdout".
    #[arg(long, default_value = "stdout")]
    output: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSpec {
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    d: Option<usize>,
    #[serde(default)]
    degree: Option<usize>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    seed: Option<u64>,
    /// Free polynomials to factor.
    #[serde(default)]
    h_free: Option<Vec<FreeSeries>>,
    /// Commuting-variable polynomials to factor or lift.
    #[serde(default)]
    h_commutative: Option<Vec<MultiIndexSeries>>,
    /// A free series to evaluate.
    #[serde(default)]
    series: Option<FreeSeries>,
    /// A matrix tuple to evaluate at.
    #[serde(default)]
    point: Option<PointDto>,
    /// A point sample of the unit ball.
    #[serde(default)]
    sample: Option<CnpSample>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDto {
    /// One matrix per letter, row-major, entries as [re, im].
    matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(args: &Args) -> Result<ExitCode, String> {
    validate_thread_env()?;
    let text = fs::read_to_string(&args.input)
        .map_err(|e| format!("cannot read {}: {e}", args.input.display()))?;
    let spec: ProblemSpec =
        serde_json::from_str(&text).map_err(|e| format!("invalid problem description: {e}"))?;

    let mode = args
        .mode
        .clone()
        .or_else(|| spec.mode.clone())
        .ok_or("no mode given: pass --mode or set the \"mode\" field")?;
    let degree = args.degree.or(spec.degree).unwrap_or(30);
    let tol = args.tol.or(spec.tolerance).unwrap_or(1e-8);
    let seed = args.seed.or(spec.seed).unwrap_or(7);

    let (value, code) = match mode.as_str() {
        "factor" => mode_factor(&spec, degree, tol, seed)?,
        "verify" => mode_verify(&spec, degree, tol, seed)?,
        "lift" => mode_lift(&spec)?,
        "eval" => mode_eval(&spec)?,
        "cnp-check" => mode_cnp_check(&spec, degree, tol, seed)?,
        other => {
            return Err(format!(
                "unknown mode {other:?}: expected factor, verify, lift, eval, or cnp-check"
            ))
        }
    };
    emit(&args.output, &render(value))?;
    Ok(code)
}

/// The computation is single-threaded and deterministic; the variable is
/// still validated so that configuration mistakes surface as usage errors.
fn validate_thread_env() -> Result<(), String> {
    match std::env::var("FOCK_SMIRNOV_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(format!("FOCK_SMIRNOV_THREADS is unreadable: {e}")),
        Ok(raw) => match raw.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(()),
            _ => Err(format!(
                "FOCK_SMIRNOV_THREADS must be a positive integer, got {raw:?}"
            )),
        },
    }
}

fn core_err(e: fock_smirnov::Error) -> String {
    e.to_string()
}

/// Reconciles an explicit "d" field with the dimension implied by the
/// series entries, requiring at least one of the two.
fn resolve_d(explicit: Option<usize>, implied: Option<usize>) -> Result<usize, String> {
    match (explicit, implied) {
        (Some(d), Some(i)) if d != i => Err(format!(
            "field \"d\" = {d} contradicts the dimension {i} of the entries"
        )),
        (Some(d), _) => Ok(d),
        (None, Some(i)) => Ok(i),
        (None, None) => Err("cannot infer the ambient dimension: set field \"d\"".into()),
    }
}

fn mode_factor(
    spec: &ProblemSpec,
    degree: usize,
    tol: f64,
    seed: u64,
) -> Result<(Value, ExitCode), String> {
    match (&spec.h_free, &spec.h_commutative) {
        (Some(_), Some(_)) => Err("give h_free or h_commutative, not both".into()),
        (Some(h), None) => {
            let d = resolve_d(spec.d, h.first().map(FreeSeries::dimension))?;
            let pair = canonical_pair(d, h, degree).map_err(core_err)?;
            let report = verify_pair(h, &pair, tol, seed).map_err(core_err)?;
            Ok((
                json!({ "kind": "free", "pair": pair, "report": report }),
                ExitCode::SUCCESS,
            ))
        }
        (None, Some(h)) => {
            let d = resolve_d(spec.d, h.first().map(MultiIndexSeries::dimension))?;
            let pair = commutative_smirnov(d, h, degree, tol, seed).map_err(core_err)?;
            Ok((
                json!({ "kind": "commutative", "pair": pair }),
                ExitCode::SUCCESS,
            ))
        }
        (None, None) => Err("factor mode needs h_free or h_commutative".into()),
    }
}

fn mode_verify(
    spec: &ProblemSpec,
    degree: usize,
    tol: f64,
    seed: u64,
) -> Result<(Value, ExitCode), String> {
    match (&spec.h_free, &spec.h_commutative) {
        (Some(_), Some(_)) => Err("give h_free or h_commutative, not both".into()),
        (Some(h), None) => {
            let d = resolve_d(spec.d, h.first().map(FreeSeries::dimension))?;
            let pair = canonical_pair(d, h, degree).map_err(core_err)?;
            let report = verify_pair(h, &pair, tol, seed).map_err(core_err)?;
            let code = exit_when(report.passed);
            Ok((json!({ "kind": "free", "report": report }), code))
        }
        (None, Some(h)) => {
            let d = resolve_d(spec.d, h.first().map(MultiIndexSeries::dimension))?;
            let pair = commutative_smirnov(d, h, degree, tol, seed).map_err(core_err)?;
            let code = exit_when(pair.report().passed);
            Ok((
                json!({
                    "kind": "commutative",
                    "report": pair.report(),
                    "da_norm_sq_a_inverse": pair.da_norm_sq_a_inverse(),
                    "da_norm_sq_budget": pair.da_norm_sq_budget(),
                }),
                code,
            ))
        }
        (None, None) => Err("verify mode needs h_free or h_commutative".into()),
    }
}

fn mode_lift(spec: &ProblemSpec) -> Result<(Value, ExitCode), String> {
    let h_list = spec
        .h_commutative
        .as_ref()
        .ok_or("lift mode needs h_commutative")?;
    let d = resolve_d(spec.d, h_list.first().map(MultiIndexSeries::dimension))?;
    let mut lifts = Vec::with_capacity(h_list.len());
    for h in h_list {
        if h.dimension() != d {
            return Err(format!(
                "entry dimension {} contradicts the ambient dimension {d}",
                h.dimension()
            ));
        }
        let lifted = h.free_lift().map_err(core_err)?;
        lifts.push(json!({
            "input": h,
            "lifted": lifted,
            "da_norm_sq": h.da_norm_sq(),
            "fock_norm_sq": lifted.fock_norm_sq(),
        }));
    }
    Ok((json!({ "kind": "lift", "lifts": lifts }), ExitCode::SUCCESS))
}

fn mode_eval(spec: &ProblemSpec) -> Result<(Value, ExitCode), String> {
    let series = spec
        .series
        .as_ref()
        .ok_or("eval mode needs field \"series\"")?;
    let point = spec
        .point
        .as_ref()
        .ok_or("eval mode needs field \"point\"")?;
    let matrices = point
        .matrices
        .iter()
        .map(|raw| parse_matrix(raw))
        .collect::<Result<Vec<_>, String>>()?;
    let tuple = MatrixTuple::new(matrices).map_err(core_err)?;
    let value = series.eval(&tuple).map_err(core_err)?;
    let (inside, margin) = tuple.ball_margin();
    Ok((
        json!({
            "kind": "eval",
            "value": matrix_rows(&value),
            "inside_ball": inside,
            "ball_margin": margin,
        }),
        ExitCode::SUCCESS,
    ))
}

fn mode_cnp_check(
    spec: &ProblemSpec,
    degree: usize,
    tol: f64,
    seed: u64,
) -> Result<(Value, ExitCode), String> {
    let sample = spec
        .sample
        .as_ref()
        .ok_or("cnp-check mode needs field \"sample\"")?;
    let d = resolve_d(spec.d, Some(sample.dimension()))?;
    let kernel = sample.kernel_matrix();
    let min_eig = sample.min_kernel_eigenvalue();
    let psd = min_eig >= -1e-10;
    let mut ok = psd;
    let restriction = match &spec.h_commutative {
        Some(h) => {
            let report = restrict_smirnov(d, h, sample, degree, tol, seed).map_err(core_err)?;
            ok = ok && report.denominator_nonvanishing && report.max_factorization_residual <= tol;
            serde_json::to_value(&report).map_err(|e| e.to_string())?
        }
        None => Value::Null,
    };
    Ok((
        json!({
            "kind": "cnp-check",
            "kernel": matrix_rows(&kernel),
            "min_kernel_eigenvalue": min_eig,
            "positive_semidefinite": psd,
            "restriction": restriction,
        }),
        exit_when(ok),
    ))
}

fn exit_when(passed: bool) -> ExitCode {
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn parse_matrix(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<Complex64>, String> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err("point matrices must be non-empty rectangles of [re, im] pairs".into());
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

fn matrix_rows(m: &DMatrix<Complex64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Rounds every float in the document to 12 significant digits and
/// pretty-prints it. Combined with sorted object keys this makes the
/// output byte-deterministic across runs and platforms.
fn render(value: Value) -> String {
    let mut text = serde_json::to_string_pretty(&round_floats(value))
        .expect("reports contain no non-serializable values");
    text.push('\n');
    text
}

fn round_floats(value: Value) -> Value {
    match value {
        Value::Number(n) => {
            if n.is_u64() || n.is_i64() {
                return Value::Number(n);
            }
            let f = n.as_f64().expect("JSON numbers are representable");
            match serde_json::Number::from_f64(round_significant(f)) {
                Some(rounded) => Value::Number(rounded),
                None => Value::Number(n),
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        // Normalizes -0.0 to 0.0.
        return x + 0.0;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(11 - magnitude);
    (x * factor).round() / factor
}

fn emit(target: &str, rendered: &str) -> Result<(), String> {
    if target == "stdout" {
        print!("{rendered}");
        return Ok(());
    }
    fs::write(target, rendered).map_err(|e| format!("cannot write {target}: {e}"))
}
