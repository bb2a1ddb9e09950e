//! Command-line front end.

mod parse;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::sync::LazyLock;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::Error;
use crate::model::{Model, ModelObject, Mutation};
use crate::numoracle::{numcheck, GridSpec, OracleParams};
use crate::verify::{find_claim, run_many, Claim, CLAIMS, EXPLORATORY};

pub use parse::{parse_at, parse_expression, parse_with, Contexts};
pub use report::{emit_numeric, emit_report, exit_code, Format};

static STANDARD: LazyLock<Model> = LazyLock::new(Model::standard);

pub(crate) fn standard_model() -> &'static Model {
    &STANDARD
}

/// Exit codes.
pub const OK: i32 = 0;
pub const FAILED: i32 = 1;
pub const USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "reclink",
    version,
    about = "Exact and numeric checks of Lax pair, change-of-variables and Hamiltonian identities for a 3-component integrable system"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Worker threads for run and numcheck.
    #[arg(long, default_value_t = 1, global = true)]
    pub parallel: usize,
    /// Perturb one coefficient of the model (see `reclink list`).
    #[arg(long, global = true)]
    pub mutate: Option<String>,
    /// First numeric seed.
    #[arg(long, default_value_t = 1, global = true)]
    pub seed: u64,
    /// Number of numeric seeds.
    #[arg(long, default_value_t = 10, global = true)]
    pub seeds: u64,
    /// Highest wavenumber of the sampled fields.
    #[arg(long, default_value_t = 3, global = true)]
    pub kmax: u32,
    /// Mode amplitude bound of the sampled fields.
    #[arg(long, default_value_t = 0.05, global = true)]
    pub amplitude: f64,
    /// Relative tolerance of the numeric check.
    #[arg(long, default_value_t = 1e-8, global = true)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List claims, exploratory checks, mutations and exportable objects.
    List,
    /// Verify claims symbolically (`all` for C1..C8).
    Run { ids: Vec<String> },
    /// Cross-check claims numerically (`all` for C1..C8).
    Numcheck { ids: Vec<String> },
    /// Print a model object.
    Export { key: String },
    /// Parse each line of a file; `lhs == rhs` lines are checked for equality.
    ParseCheck { file: PathBuf },
}

/// A run of the tool: parsed arguments plus the output sinks.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

struct Failure(i32, String);

fn usage(e: impl ToString) -> Failure {
    Failure(USAGE, e.to_string())
}

fn with_model<R>(cli: &Cli, f: impl FnOnce(&Model) -> Result<R, Failure>) -> Result<R, Failure> {
    match &cli.mutate {
        None => f(standard_model()),
        Some(name) => {
            let mu = Mutation::parse(name).map_err(usage)?;
            let model = Model::build(Some(mu)).map_err(|e| Failure(FAILED, e.to_string()))?;
            f(&model)
        }
    }
}

fn resolve(ids: &[String]) -> Result<Vec<&'static Claim>, Failure> {
    if ids.iter().any(|i| i.eq_ignore_ascii_case("all")) {
        return Ok(CLAIMS.iter().collect());
    }
    ids.iter().map(|i| find_claim(i).map_err(usage)).collect()
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| Failure(FAILED, e.to_string());
    match &cli.command {
        Command::List => {
            write!(out, "{}", listing(cli.format)).map_err(io)?;
            Ok(OK)
        }
        Command::Run { ids } => {
            let claims = resolve(ids)?;
            let reports = with_model(cli, |m| Ok(run_many(&claims, m, cli.parallel)))?;
            write!(out, "{}", emit_report(&reports, cli.format)).map_err(io)?;
            Ok(exit_code(reports.iter().map(|r| &r.status)))
        }
        Command::Numcheck { ids } => {
            let claims = resolve(ids)?;
            let numeric: Vec<&str> = claims.iter().map(|c| c.id).collect();
            if let Some(x) = numeric.iter().find(|id| id.starts_with('X')) {
                return Err(usage(format!("`{x}` has no numeric check")));
            }
            let params = OracleParams {
                seed: cli.seed,
                seeds: cli.seeds,
                kmax: cli.kmax,
                amplitude: cli.amplitude,
                tol: cli.tol,
                grid: GridSpec::default(),
                ..OracleParams::default()
            };
            let reports = with_model(cli, |m| numcheck(&numeric, m, &params, cli.parallel).map_err(usage))?;
            write!(out, "{}", emit_numeric(&reports, cli.format)).map_err(io)?;
            Ok(exit_code(reports.iter().map(|r| &r.status)))
        }
        Command::Export { key } => {
            let obj = with_model(cli, |m| {
                m.object(key).map_err(|e| match e {
                    Error::UnknownObject(_) => usage(e),
                    other => Failure(FAILED, other.to_string()),
                })
            })?;
            write!(out, "{}", export_text(key, &obj, cli.format)).map_err(io)?;
            Ok(OK)
        }
        Command::ParseCheck { file } => {
            let text = std::fs::read_to_string(file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            with_model(cli, |m| {
                parse_check(&text, &file.display().to_string(), m, cli.format, out)
            })
        }
    }
}

#[derive(Serialize)]
struct ListEntry {
    kind: &'static str,
    id: String,
    description: String,
}

fn listing(format: Format) -> String {
    let mut entries: Vec<ListEntry> = CLAIMS
        .iter()
        .map(|c| ListEntry {
            kind: "claim",
            id: c.id.into(),
            description: c.description.into(),
        })
        .chain(EXPLORATORY.iter().map(|c| ListEntry {
            kind: "exploratory",
            id: c.id.into(),
            description: c.description.into(),
        }))
        .collect();
    entries.extend(Mutation::ALL.iter().map(|m| ListEntry {
        kind: "mutation",
        id: m.name().into(),
        description: String::new(),
    }));
    entries.extend(Model::OBJECT_KEYS.iter().map(|k| ListEntry {
        kind: "object",
        id: (*k).into(),
        description: String::new(),
    }));
    match format {
        Format::Json => serde_json::to_string_pretty(&entries).expect("listing serialises") + "\n",
        Format::Text => {
            let mut s = String::new();
            for e in entries {
                if e.description.is_empty() {
                    s += &format!("{:<12} {}\n", e.kind, e.id);
                } else {
                    s += &format!("{:<12} {:<4} {}\n", e.kind, e.id, e.description);
                }
            }
            s
        }
    }
}

#[derive(Serialize)]
struct Exported<'a> {
    key: &'a str,
    entries: Vec<String>,
}

fn export_text(key: &str, obj: &ModelObject, format: Format) -> String {
    let entries = obj.lines();
    match format {
        Format::Json => serde_json::to_string_pretty(&Exported { key, entries }).expect("export serialises") + "\n",
        Format::Text => entries.into_iter().map(|l| l + "\n").collect(),
    }
}

#[derive(Serialize)]
struct CheckedLine {
    line: usize,
    canonical: String,
    /// Present for `lhs == rhs` lines.
    #[serde(skip_serializing_if = "Option::is_none")]
    equal: Option<bool>,
}

/// Lines that are empty or start with `#` are skipped.
fn parse_check(text: &str, name: &str, model: &Model, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let ctx = Contexts::of(model);
    let located = |e: Error| match &e {
        Error::Syntax { line, column, message } => usage(format!("{name}:{line}:{column}: {message}")),
        _ => usage(format!("{name}: {e}")),
    };
    let mut checked = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = match raw.split_once("==") {
            Some((lhs, rhs)) => {
                let l = parse_at(lhs, line, 1, &ctx).map_err(located)?;
                let r = parse_at(rhs, line, lhs.chars().count() + 3, &ctx).map_err(located)?;
                let d = l.try_sub(&r).map_err(|e| {
                    located(Error::Syntax {
                        line,
                        column: lhs.chars().count() + 1,
                        message: e.to_string(),
                    })
                })?;
                CheckedLine {
                    line,
                    equal: Some(d.is_zero()),
                    canonical: d.to_string(),
                }
            }
            None => {
                let e = parse_at(raw, line, 1, &ctx).map_err(located)?;
                CheckedLine {
                    line,
                    equal: None,
                    canonical: e.to_string(),
                }
            }
        };
        checked.push(row);
    }
    let io = |e: std::io::Error| Failure(FAILED, e.to_string());
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&checked).expect("serialises")).map_err(io)?,
        Format::Text => {
            for c in &checked {
                match c.equal {
                    Some(true) => writeln!(out, "{}: equal", c.line),
                    Some(false) => writeln!(out, "{}: NOT equal, lhs - rhs = {}", c.line, c.canonical),
                    None => writeln!(out, "{}: {}", c.line, c.canonical),
                }
                .map_err(io)?;
            }
        }
    }
    Ok(if checked.iter().all(|c| c.equal != Some(false)) {
        OK
    } else {
        FAILED
    })
}
