//! File-driven command line for `realdec`.
//!
//! Exit codes: 0 success, 1 suite failure / not decomposable / property
//! fails, 2 input error, 3 solver indeterminate.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use realdec::cpmap::{is_cp_with, CpStatus};
use realdec::decnorm::{cb_norm_with, dec_norm_with, DecValue};
use realdec::opsys::{build_system, LinearMap, MatrixSystem, SystemKind};
use realdec::sdp::SolverOptions;
use realdec::suite::{run_suite_with, SuiteOptions, SuiteReport};
use realdec::{Error, RealMatrix};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INDETERMINATE: i32 = 3;

/// Environment variable holding the default `--tol` of `norm` and `check`.
pub const TOL_ENV: &str = "REALDEC_TOL";

#[derive(Parser, Debug)]
#[command(
    name = "realdec",
    version,
    about = "Decomposable and completely bounded norms of maps between real operator systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute ‖u‖_dec or ‖u‖_cb of the map in a document.
    Norm {
        #[arg(long, value_enum)]
        kind: NormKind,
        #[arg(long)]
        map: PathBuf,
        /// Solver tolerance (default 1e-9).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Test complete positivity, skewness or selfadjointness.
    Check {
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long)]
        map: PathBuf,
        /// Relative tolerance of the test (default 1e-8).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run a named verification suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: usize,
        /// Overrides the suite's comparison tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
        /// Also write the report as JSON to this file.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Run trials one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Render a saved JSON suite report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NormKind {
    Dec,
    Cb,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Property {
    Cp,
    Skew,
    Selfadjoint,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Md,
    Csv,
    Json,
}

/// A system as written in a document: the kind record plus an optional label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemRecord {
    #[serde(flatten)]
    pub kind: SystemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// `{domain, codomain, images}`, one image per domain basis element.
///
/// Basis orders: `full_real` uses `E_ij` row-major, `ell_inf` uses
/// `e_1 … e_n`, `quaternion` uses `(1, i, j, k)`, `complex_full` uses the
/// realified `E_ij` followed by `J E_ij`, `span` uses the listed basis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapDocument {
    pub domain: SystemRecord,
    pub codomain: SystemRecord,
    pub images: Vec<RealMatrix>,
}

/// Input problem with the path of the offending field.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn build(record: &SystemRecord, path: &str) -> Result<Arc<MatrixSystem>, InputError> {
    let sys = build_system(&record.kind).map_err(|e| InputError(format!("{path}: {e}")))?;
    Ok(Arc::new(match &record.label {
        Some(l) => sys.with_label(l.clone()),
        None => sys,
    }))
}

impl MapDocument {
    pub fn parse(text: &str) -> Result<Self, InputError> {
        parse_json(text)
    }

    pub fn to_map(&self) -> Result<LinearMap, InputError> {
        let domain = build(&self.domain, "domain")?;
        let codomain = build(&self.codomain, "codomain")?;
        if self.images.len() != domain.dim() {
            return Err(InputError(format!(
                "images: expected {} matrices (one per basis element of `{}`), found {}",
                domain.dim(),
                domain.label(),
                self.images.len()
            )));
        }
        let m = codomain.ambient();
        for (k, img) in self.images.iter().enumerate() {
            if img.shape() != (m, m) {
                return Err(InputError(format!(
                    "images[{k}]: expected {m}x{m}, found {}x{}",
                    img.rows(),
                    img.cols()
                )));
            }
            if !codomain.contains(img) {
                return Err(InputError(format!(
                    "images[{k}]: not an element of `{}` (residual {:.3e})",
                    codomain.label(),
                    codomain.membership_residual(img)
                )));
            }
        }
        LinearMap::new(&domain, &codomain, self.images.clone())
            .map_err(|e| InputError(format!("images: {e}")))
    }

    pub fn from_map(u: &LinearMap) -> Self {
        let record = |s: &MatrixSystem| SystemRecord {
            kind: s.kind().clone(),
            label: Some(s.label().to_string()),
        };
        Self {
            domain: record(u.domain()),
            codomain: record(u.codomain()),
            images: u.images().to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            InputError(e.into_inner().to_string())
        } else {
            InputError(format!("{path}: {}", e.into_inner()))
        }
    })
}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_map(path: &Path) -> Result<LinearMap, InputError> {
    let text = read(path)?;
    let doc =
        MapDocument::parse(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    doc.to_map()
        .map_err(|e| InputError(format!("{}: {e}", path.display())))
}

/// Rounds every number in `v` to 12 significant digits.
pub fn round_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => {
                let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
                serde_json::Number::from_f64(r)
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            }
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(round_numbers).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_numbers(v))).collect())
        }
        other => other,
    }
}

fn default_tol(flag: Option<f64>, fallback: f64) -> Result<f64, InputError> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var(TOL_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| InputError(format!("{TOL_ENV}: `{s}` is not a number"))),
        Err(_) => Ok(fallback),
    }
}

enum Failure {
    Input(String),
    Indeterminate(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Indeterminate(_) => Failure::Indeterminate(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_command<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Indeterminate(msg)) => {
            let _ = writeln!(err, "indeterminate: {msg}");
            EXIT_INDETERMINATE
        }
    }
}

fn emit(out: &mut dyn Write, v: Value) {
    let _ = writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&round_numbers(v)).expect("json")
    );
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Norm { kind, map, tol } => {
            let tol = default_tol(tol, 1e-9)?;
            let u = load_map(&map)?;
            let opts = SolverOptions::with_tol(tol);
            match kind {
                NormKind::Dec => {
                    let r = dec_norm_with(&u, &opts)?;
                    let witnesses = match (&r.s1, &r.s2) {
                        (Some(s1), Some(s2)) => json!({
                            "s1": s1.images(),
                            "s2": s2.images(),
                            "witness_norm": r.witness_norm,
                        }),
                        _ => Value::Null,
                    };
                    let (status, value, code) = match r.value {
                        DecValue::Finite(v) => ("finite", json!(v), EXIT_OK),
                        DecValue::NotDecomposable => ("not_decomposable", Value::Null, EXIT_FAIL),
                    };
                    emit(
                        out,
                        json!({
                            "kind": "dec",
                            "status": status,
                            "value": value,
                            "lower_bound": r.lower_bound,
                            "witnesses": witnesses,
                            "residuals": r.residuals,
                        }),
                    );
                    Ok(code)
                }
                NormKind::Cb => {
                    let r = cb_norm_with(&u, &opts)?;
                    emit(
                        out,
                        json!({
                            "kind": "cb",
                            "status": "finite",
                            "value": r.value,
                            "lower_bound": r.lower_bound,
                            "residuals": r.residuals,
                        }),
                    );
                    Ok(EXIT_OK)
                }
            }
        }
        Command::Check { property, map, tol } => {
            let tol = default_tol(tol, 1e-8)?;
            let u = load_map(&map)?;
            let scale = u.size().max(1.0);
            let (record, code) = match property {
                Property::Cp => {
                    let v = is_cp_with(&u, tol, &SolverOptions::with_tol(1e-10))?;
                    let code = match v.status {
                        CpStatus::Cp => EXIT_OK,
                        CpStatus::NotCp => EXIT_FAIL,
                        CpStatus::Indeterminate => EXIT_INDETERMINATE,
                    };
                    (
                        json!({
                            "property": "cp",
                            "holds": v.status == CpStatus::Cp,
                            "status": v.status,
                            "margin": v.margin,
                            "star_defect": v.star_defect,
                            "solver_iterations": v.solver_iterations,
                        }),
                        code,
                    )
                }
                Property::Skew | Property::Selfadjoint => {
                    let star = u.involute();
                    let (name, defect) = if matches!(property, Property::Skew) {
                        ("skew", star.combine(1.0, &u, 1.0)?.size())
                    } else {
                        ("selfadjoint", star.combine(1.0, &u, -1.0)?.size())
                    };
                    let holds = defect <= tol * scale;
                    (
                        json!({
                            "property": name,
                            "holds": holds,
                            "defect": defect,
                            "tolerance": tol * scale,
                        }),
                        if holds { EXIT_OK } else { EXIT_FAIL },
                    )
                }
            };
            emit(out, record);
            Ok(code)
        }
        Command::Verify {
            suite,
            seed,
            trials,
            tol,
            format,
            output,
            sequential,
        } => {
            let mut opts = SuiteOptions::new(seed, trials);
            opts.tol = tol;
            if sequential {
                opts.execution = realdec::par::Execution::Sequential;
            }
            let report = run_suite_with(&suite, &opts)?;
            if let Some(path) = output {
                std::fs::write(&path, report.to_json())
                    .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            }
            render(&report, format, out);
            Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Report { input, format } => {
            let text = read(&input)?;
            let report: SuiteReport =
                parse_json(&text).map_err(|e| InputError(format!("{}: {e}", input.display())))?;
            render(&report, format, out);
            Ok(if report.pass { EXIT_OK } else { EXIT_FAIL })
        }
    }
}

fn render(report: &SuiteReport, format: Format, out: &mut dyn Write) {
    let text = match format {
        Format::Md => report.to_markdown(),
        Format::Csv => report.to_csv(),
        Format::Json => {
            let v = serde_json::to_value(report).expect("json");
            let mut s = serde_json::to_string_pretty(&round_numbers(v)).expect("json");
            s.push('\n');
            s
        }
    };
    let _ = write!(out, "{text}");
}
