//! The `advdiff` command line: `solve`, `sweep`, `stencil` and `verify`.
//!
//! Every flag may also be given in a `--config` file of `key = value` lines
//! (keys are the flag names without dashes, `#` starts a comment). Flags on
//! the command line take precedence over the file.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage or validation error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::assembly::{assemble, assemble_equilibrated, assemble_symmetric_scaled, discretize, Formulation};
use crate::mesh::build_uniform;
use crate::problem::{BoundaryCondition, BoundaryConditions, Interval, Problem, ProblemSpec};
use crate::solve::{condition_estimate, solve};
use crate::stencils::{coth, exact_solution, kbar, stencil_for};
use crate::verify::suite::{self, CheckResult, DEFAULT_SEED};
use crate::verify::{l2_error, model_problem, nodal_exactness};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "advdiff", version, about = "Steady 1D advection-diffusion with linear finite elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Nodal solution on a uniform mesh of the unit interval.
    Solve(Flags),
    /// Error, asymmetry and conditioning over a list of v/k ratios (v = 1, k = 1/ratio).
    Sweep(Flags),
    /// Interior difference stencils, closed-form and assembled.
    Stencil(Flags),
    /// Run the acceptance checks.
    Verify(Flags),
}

#[derive(Args, Debug, Default, Clone)]
struct Flags {
    /// Advection velocity.
    #[arg(long, allow_hyphen_values = true)]
    v: Option<String>,
    /// Diffusivity (positive).
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Source term [default: 1].
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    /// Number of elements [default: 10].
    #[arg(long)]
    n: Option<String>,
    /// galerkin, artificial, weighted or all [default: all].
    #[arg(long)]
    formulation: Option<String>,
    /// Comma-separated v/k ratios for `sweep`.
    #[arg(long, allow_hyphen_values = true)]
    ratios: Option<String>,
    /// Left boundary condition, `dirichlet:<u>` or `neumann:<flux>` [default: dirichlet:0].
    #[arg(long, allow_hyphen_values = true)]
    left: Option<String>,
    /// Right boundary condition [default: dirichlet:0].
    #[arg(long, allow_hyphen_values = true)]
    right: Option<String>,
    /// Output file [default: standard output].
    #[arg(long)]
    output: Option<String>,
    /// csv or json [default: json for `verify`, csv otherwise].
    #[arg(long)]
    format: Option<String>,
    /// Seed for the randomized checks of `verify`.
    #[arg(long)]
    seed: Option<String>,
    /// File of `key = value` lines supplying defaults for the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

const CONFIG_KEYS: [&str; 11] = ["v", "k", "f", "n", "formulation", "ratios", "left", "right", "output", "format", "seed"];

impl Flags {
    fn slot(&mut self, key: &str) -> Option<&mut Option<String>> {
        Some(match key {
            "v" => &mut self.v,
            "k" => &mut self.k,
            "f" => &mut self.f,
            "n" => &mut self.n,
            "formulation" => &mut self.formulation,
            "ratios" => &mut self.ratios,
            "left" => &mut self.left,
            "right" => &mut self.right,
            "output" => &mut self.output,
            "format" => &mut self.format,
            "seed" => &mut self.seed,
            _ => return None,
        })
    }

    /// Fills unset flags from `key = value` text.
    fn merge_config(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let slot = self
                .slot(key)
                .ok_or_else(|| {
                    CliError::Usage(format!(
                        "config line {}: unknown key `{key}` (expected one of {})",
                        lineno + 1,
                        CONFIG_KEYS.join(", ")
                    ))
                })?;
            if slot.is_none() {
                *slot = Some(value.trim().to_string());
            }
        }
        Ok(())
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Problem(Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Problem(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Problem(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Solve,
    Sweep,
    Stencil,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A fully resolved invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    pub f: f64,
    pub n: usize,
    pub formulations: Vec<Formulation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ratios: Vec<f64>,
    pub left: String,
    pub right: String,
    #[serde(skip)]
    pub bcs: BoundaryConditions,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn parse_real(flag: &str, s: &str) -> Result<f64, CliError> {
    let x: f64 = s.trim().parse().map_err(|_| CliError::Usage(format!("--{flag}: `{s}` is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::Usage(format!("--{flag}: `{s}` is not finite")));
    }
    Ok(x)
}

fn required_real(flag: &str, value: &Option<String>) -> Result<f64, CliError> {
    match value {
        Some(s) => parse_real(flag, s),
        None => Err(CliError::Usage(format!("missing required flag --{flag}"))),
    }
}

fn parse_bc(flag: &str, s: &str) -> Result<BoundaryCondition, CliError> {
    let bad = || CliError::Usage(format!("--{flag}: expected `dirichlet:<value>` or `neumann:<flux>`, got `{s}`"));
    let (kind, value) = s.split_once(':').ok_or_else(bad)?;
    let value = parse_real(flag, value)?;
    match kind.trim().to_ascii_lowercase().as_str() {
        "dirichlet" => Ok(BoundaryCondition::dirichlet(value)),
        "neumann" => Ok(BoundaryCondition::neumann(value)),
        _ => Err(bad()),
    }
}

fn parse_formulations(s: &str) -> Result<Vec<Formulation>, CliError> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Formulation::ALL.to_vec());
    }
    let mut out: Vec<Formulation> = Vec::new();
    for part in s.split(',') {
        let f: Formulation = part
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--formulation: unknown formulation `{}`", part.trim())))?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out.sort();
    Ok(out)
}

impl RunConfig {
    fn resolve(command: CommandKind, mut flags: Flags) -> Result<Self, CliError> {
        if let Some(path) = flags.config.clone() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Usage(format!("--config {}: {e}", path.display())))?;
            flags.merge_config(&text)?;
        }
        let needs_coefficients = matches!(command, CommandKind::Solve | CommandKind::Stencil);
        let (v, k) = if needs_coefficients {
            (Some(required_real("v", &flags.v)?), Some(required_real("k", &flags.k)?))
        } else {
            (None, None)
        };
        let f = flags.f.as_deref().map(|s| parse_real("f", s)).transpose()?.unwrap_or(1.0);
        let n = match flags.n.as_deref() {
            Some(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("--n: `{s}` is not an element count")))?,
            None => 10,
        };
        let formulations = parse_formulations(flags.formulation.as_deref().unwrap_or("all"))?;
        let ratios = if command == CommandKind::Sweep {
            let text = flags.ratios.as_deref().ok_or_else(|| CliError::Usage("missing required flag --ratios".into()))?;
            let ratios = text
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse_real("ratios", s))
                .collect::<Result<Vec<_>, _>>()?;
            if ratios.is_empty() {
                return Err(CliError::Usage("--ratios: the ratio list is empty".into()));
            }
            ratios
        } else {
            Vec::new()
        };
        let left = flags.left.unwrap_or_else(|| "dirichlet:0".into());
        let right = flags.right.unwrap_or_else(|| "dirichlet:0".into());
        let bcs = BoundaryConditions::new(parse_bc("left", &left)?, parse_bc("right", &right)?);
        let format = match flags.format.as_deref().map(|s| s.trim().to_ascii_lowercase()) {
            None if command == CommandKind::Verify => Format::Json,
            None => Format::Csv,
            Some(s) if s == "csv" => Format::Csv,
            Some(s) if s == "json" => Format::Json,
            Some(s) => return Err(CliError::Usage(format!("--format: expected csv or json, got `{s}`"))),
        };
        let seed = match (command, flags.seed.as_deref()) {
            (CommandKind::Verify, Some(s)) => {
                Some(s.trim().parse().map_err(|_| CliError::Usage(format!("--seed: `{s}` is not an integer")))?)
            }
            (CommandKind::Verify, None) => Some(DEFAULT_SEED),
            _ => None,
        };
        Ok(RunConfig {
            command,
            v,
            k,
            f,
            n,
            formulations,
            ratios,
            left,
            right,
            bcs,
            output: flags.output.map(PathBuf::from),
            format,
            seed,
        })
    }

    fn problem(&self) -> Result<Problem, CliError> {
        let spec = ProblemSpec::constant(self.v.unwrap_or(0.0), self.k.unwrap_or(1.0), self.f);
        Ok(crate::problem::validate(spec, self.bcs)?)
    }
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

fn csv_line(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

/// Command output and whether the run counts as a verification failure.
pub struct Outcome {
    pub text: String,
    pub failed: bool,
}

fn json_text(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("json values serialize");
    s.push('\n');
    s
}

fn envelope(config: &RunConfig, body: (&str, serde_json::Value)) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    map.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    map.insert(body.0.into(), body.1);
    serde_json::Value::Object(map)
}

pub fn cmd_solve(config: &RunConfig) -> Result<Outcome, CliError> {
    let problem = config.problem()?;
    let mesh = build_uniform(Interval::UNIT, config.n)?;
    let mut columns: BTreeMap<Formulation, Vec<f64>> = BTreeMap::new();
    for &f in &config.formulations {
        columns.insert(f, solve(&problem, &mesh, f)?.values);
    }
    let exact: Option<Vec<f64>> = crate::verify::exact_oracle(&problem)
        .ok()
        .map(|(v, k, f)| mesh.nodes().iter().map(|&x| exact_solution(v, k, f, x)).collect());

    let text = match config.format {
        Format::Csv => {
            let mut out = String::new();
            let mut header = vec!["x".to_string()];
            header.extend(columns.keys().map(|f| format!("u_{f}")));
            if exact.is_some() {
                header.push("u_exact".into());
                header.extend(columns.keys().map(|f| format!("err_{f}")));
            }
            csv_line(&mut out, &header);
            for (j, &x) in mesh.nodes().iter().enumerate() {
                let mut row = vec![fmt_real(x)];
                row.extend(columns.values().map(|u| fmt_real(u[j])));
                if let Some(ex) = &exact {
                    row.push(fmt_real(ex[j]));
                    row.extend(columns.values().map(|u| fmt_real(u[j] - ex[j])));
                }
                csv_line(&mut out, &row);
            }
            out
        }
        Format::Json => {
            let mut body = serde_json::Map::new();
            body.insert("x".into(), json!(mesh.nodes()));
            for (f, u) in &columns {
                body.insert(format!("u_{f}"), json!(u));
            }
            if let Some(ex) = &exact {
                body.insert("u_exact".into(), json!(ex));
                for (f, u) in &columns {
                    let err: Vec<f64> = u.iter().zip(ex).map(|(a, b)| a - b).collect();
                    body.insert(format!("err_{f}"), json!(err));
                }
            }
            json_text(envelope(config, ("solution", serde_json::Value::Object(body))))
        }
    };
    Ok(Outcome { text, failed: false })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub peclet: f64,
    pub formulation: Formulation,
    pub max_nodal_error: f64,
    pub l2_error: f64,
    pub asymmetry: f64,
    pub condition: f64,
}

/// One row per `(ratio, formulation)` in input order of ratios and the
/// fixed formulation order.
pub fn sweep_rows(ratios: &[f64], n: usize, formulations: &[Formulation]) -> Result<Vec<SweepRow>, CliError> {
    let mesh = build_uniform(Interval::UNIT, n)?;
    let mut rows = Vec::new();
    for &ratio in ratios {
        let problem = model_problem(ratio)?;
        for &f in formulations {
            let e = nodal_exactness(&problem, &mesh, f)?;
            let sol = solve(&problem, &mesh, f)?;
            // Raw weights can leave the floating-point range; the symmetric
            // scaling preserves symmetry and is always representable.
            let asymmetry = match assemble(&problem, &mesh, f) {
                Ok(sys) => sys.relative_asymmetry(),
                Err(Error::WeightUnderflow { .. }) => assemble_symmetric_scaled(&problem, &mesh, f)?.relative_asymmetry(),
                Err(e) => return Err(e.into()),
            };
            rows.push(SweepRow {
                ratio,
                peclet: e.peclet,
                formulation: f,
                max_nodal_error: e.max_error,
                l2_error: l2_error(&problem, &mesh, &sol.values)?,
                asymmetry,
                condition: condition_estimate(&discretize(&problem, &mesh, f)?)?,
            });
        }
    }
    Ok(rows)
}

pub fn cmd_sweep(config: &RunConfig) -> Result<Outcome, CliError> {
    let rows = sweep_rows(&config.ratios, config.n, &config.formulations)?;
    let text = match config.format {
        Format::Csv => {
            let mut out = String::new();
            let header = ["ratio", "peclet", "formulation", "max_nodal_error", "l2_error", "asymmetry", "condition"];
            csv_line(&mut out, &header.map(String::from));
            for r in &rows {
                csv_line(
                    &mut out,
                    &[
                        fmt_real(r.ratio),
                        fmt_real(r.peclet),
                        r.formulation.to_string(),
                        fmt_real(r.max_nodal_error),
                        fmt_real(r.l2_error),
                        fmt_real(r.asymmetry),
                        fmt_real(r.condition),
                    ],
                );
            }
            out
        }
        Format::Json => json_text(envelope(config, ("rows", json!(rows)))),
    };
    Ok(Outcome { text, failed: false })
}

#[derive(Debug, Clone, Serialize)]
pub struct StencilRow {
    pub formulation: Formulation,
    /// `closed_form` or `assembled`
    pub source: &'static str,
    pub left: f64,
    pub center: f64,
    pub right: f64,
    pub kbar: f64,
    pub coth_pe: f64,
}

/// Closed-form and assembled interior rows for each formulation. The
/// assembled row is the middle interior row of the row-equilibrated system.
pub fn stencil_rows(v: f64, k: f64, n: usize, formulations: &[Formulation]) -> Result<Vec<StencilRow>, CliError> {
    let problem = Problem::model(v, k, 1.0)?;
    let mesh = build_uniform(Interval::UNIT, n)?;
    let h = 1.0 / n as f64;
    let pe = v * h / (2.0 * k);
    let (kb, cpe) = (kbar(v, k, h), coth(pe));
    let mut rows = Vec::new();
    for &f in formulations {
        let closed = stencil_for(f, v, k, h);
        rows.push(StencilRow {
            formulation: f,
            source: "closed_form",
            left: closed.left,
            center: closed.center,
            right: closed.right,
            kbar: kb,
            coth_pe: cpe,
        });
        let [left, center, right] = assemble_equilibrated(&problem, &mesh, f)?.row(n / 2);
        rows.push(StencilRow { formulation: f, source: "assembled", left, center, right, kbar: kb, coth_pe: cpe });
    }
    Ok(rows)
}

pub fn cmd_stencil(config: &RunConfig) -> Result<Outcome, CliError> {
    let (v, k) = (config.v.unwrap_or(0.0), config.k.unwrap_or(1.0));
    let rows = stencil_rows(v, k, config.n, &config.formulations)?;
    let text = match config.format {
        Format::Csv => {
            let mut out = String::new();
            let header = ["formulation", "source", "left", "center", "right", "kbar", "coth_pe"];
            csv_line(&mut out, &header.map(String::from));
            for r in &rows {
                csv_line(
                    &mut out,
                    &[
                        r.formulation.to_string(),
                        r.source.to_string(),
                        fmt_real(r.left),
                        fmt_real(r.center),
                        fmt_real(r.right),
                        fmt_real(r.kbar),
                        fmt_real(r.coth_pe),
                    ],
                );
            }
            out
        }
        Format::Json => json_text(envelope(config, ("rows", json!(rows)))),
    };
    Ok(Outcome { text, failed: false })
}

pub fn cmd_verify(config: &RunConfig) -> Result<Outcome, CliError> {
    let reports = suite::run_all(config.seed.unwrap_or(DEFAULT_SEED));
    let checks: Vec<&CheckResult> = reports.iter().flat_map(|r| r.checks.iter()).collect();
    let failed = checks.iter().any(|c| !c.pass);
    let text = match config.format {
        Format::Csv => {
            let mut out = String::new();
            csv_line(&mut out, &["check", "value", "tolerance", "relation", "pass"].map(String::from));
            for c in &checks {
                let relation = match c.relation {
                    suite::Relation::AtMost => "at_most",
                    suite::Relation::AtLeast => "at_least",
                    suite::Relation::Report => "report",
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    c.check,
                    fmt_real(c.value),
                    fmt_real(c.tolerance),
                    relation,
                    c.pass
                );
            }
            out
        }
        Format::Json => json_text(envelope(config, ("checks", json!(checks)))),
    };
    Ok(Outcome { text, failed })
}

pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.command {
        CommandKind::Solve => cmd_solve(config),
        CommandKind::Sweep => cmd_sweep(config),
        CommandKind::Stencil => cmd_stencil(config),
        CommandKind::Verify => cmd_verify(config),
    }
}

/// Parses `args` (including the program name) and resolves the configuration.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let (kind, flags) = match cli.command {
        Command::Solve(f) => (CommandKind::Solve, f),
        Command::Sweep(f) => (CommandKind::Sweep, f),
        Command::Stencil(f) => (CommandKind::Stencil, f),
        Command::Verify(f) => (CommandKind::Verify, f),
    };
    RunConfig::resolve(kind, flags).map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n")))
}

/// Runs the program with explicit streams; returns the exit code.
pub fn run_with_io<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_config(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let outcome = match execute(&config) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &config.output {
        Some(path) => std::fs::write(path, &outcome.text),
        None => stdout.write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {}", CliError::Io(e));
        return EXIT_USAGE;
    }
    if outcome.failed {
        let _ = writeln!(stderr, "verification failed");
        EXIT_VERIFY_FAILED
    } else {
        EXIT_OK
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(args, &mut stdout.lock(), &mut stderr.lock())
}
