//! Command-line front end: job parsing, pipelines and JSON reports.
//!
//! ```text
//! padic-dm --field gauss:p=5:vars=x --cmd radii --op "T^2 - (1/5)*T + x"
//! padic-dm --field gauss:p=5:vars=x,y --cmd multi-decompose \
//!          --mat "1/5,0;0,0" --mat "0,0;0,1/5"
//! ```
//!
//! Exit codes: 0 when every certificate passes, 1 for malformed input and
//! other errors, 2 for certificate failures, 3 for budget or precision aborts.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use num_traits::ToPrimitive;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::diffmod::DiffModule;
use crate::error::{Error, Result};
use crate::factorize::{self, Decomposition, PrecisionCtx};
use crate::matrix::Matrix;
use crate::radii::{self, RadiusProfile};
use crate::scalarfield::{fmt_q, FieldSpec};
use crate::text;
use crate::twisted::TwistedPoly;
use crate::Q;

/// Report schema version.
pub const SCHEMA: u64 = 1;

/// Environment variable overriding the Hensel step budget.
pub const MAX_ITER_ENV: &str = "PADIC_DM_MAX_ITER";

/// Window end of the brute-force estimate run by `verify`.
pub const VERIFY_KMAX: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Radii,
    Decompose,
    MultiDecompose,
    Dual,
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Radii => "radii",
            Command::Decompose => "decompose",
            Command::MultiDecompose => "multi-decompose",
            Command::Dual => "dual",
            Command::Verify => "verify",
        }
    }
}

#[derive(Parser, Debug, Default)]
#[command(name = "padic-dm", version, about = "Radii of convergence and radius decompositions of differential modules")]
pub struct Args {
    /// `gauss:p=5:vars=x[,y]` or `laurent:z`.
    #[arg(long)]
    pub field: Option<String>,
    /// Operator in `T`, one per derivation.
    #[arg(long)]
    pub op: Vec<String>,
    /// Matrix `a,b;c,d`, one per derivation.
    #[arg(long)]
    pub mat: Vec<String>,
    /// `N=10,d=512,max_iter=100`; omitted keys keep their defaults.
    #[arg(long)]
    pub precision: Option<String>,
    #[arg(long, value_enum)]
    pub cmd: Option<Command>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with the same keys; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    field: Option<String>,
    #[serde(default)]
    op: Vec<String>,
    #[serde(default)]
    mat: Vec<String>,
    precision: Option<String>,
    cmd: Option<Command>,
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Operators(Vec<TwistedPoly>),
    Matrices(Vec<Matrix>),
}

/// A validated job: one operator or matrix per field variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobSpec {
    pub field: FieldSpec,
    pub input: Input,
    pub command: Command,
    pub precision: PrecisionCtx,
    pub out: Option<PathBuf>,
}

fn parse_err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

fn with_context(e: Error, what: &str) -> Error {
    match e {
        Error::Parse { pos, msg } => Error::Parse { pos, msg: format!("{what}: {msg}") },
        other => other,
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_') && cs.all(|c| c.is_alphanumeric() || c == '_')
}

/// Parses `gauss:p=5:vars=x[,y]` or `laurent:z`.
pub fn parse_field(text: &str) -> Result<FieldSpec> {
    let mut parts = text.split(':');
    let kind = parts.next().unwrap_or("");
    let mut pos = kind.len() + 1;
    match kind {
        "gauss" => {
            let mut p = None;
            let mut vars = vec!["x".to_string()];
            for part in parts {
                let (key, val) = part.split_once('=').ok_or_else(|| parse_err(pos, "expected key=value"))?;
                match key {
                    "p" => p = Some(val.parse::<u64>().map_err(|_| parse_err(pos + 2, "p must be a positive integer"))?),
                    "vars" => {
                        vars = val.split(',').map(str::to_string).collect();
                        if let Some(bad) = vars.iter().find(|v| !is_ident(v) || v.as_str() == "T") {
                            return Err(parse_err(pos + 5, format!("invalid variable name {bad:?}")));
                        }
                    }
                    _ => return Err(parse_err(pos, format!("unknown key {key:?}"))),
                }
                pos += part.len() + 1;
            }
            let p = p.ok_or_else(|| parse_err(text.len(), "missing p="))?;
            FieldSpec::gauss_named(p, vars).map_err(|e| parse_err(0, e.to_string()))
        }
        "laurent" => {
            let var = parts.next().unwrap_or("z");
            if !is_ident(var) || var == "T" {
                return Err(parse_err(pos, format!("invalid variable name {var:?}")));
            }
            if parts.next().is_some() {
                return Err(parse_err(pos + var.len(), "trailing input"));
            }
            Ok(FieldSpec::laurent_named(var))
        }
        _ => Err(parse_err(0, format!("unknown field kind {kind:?}; expected gauss or laurent"))),
    }
}

/// Applies `N=…,d=…,max_iter=…` on top of `base`.
pub fn parse_precision(text: &str, base: &PrecisionCtx) -> Result<PrecisionCtx> {
    let mut ctx = base.clone();
    let mut pos = 0;
    for part in text.split(',') {
        let (key, val) = part.split_once('=').ok_or_else(|| parse_err(pos, "expected key=value"))?;
        let at = pos + key.len() + 1;
        match key.trim() {
            "N" | "n" => ctx.n = val.trim().parse::<Q>().map_err(|_| parse_err(at, "N must be a rational"))?,
            "d" => ctx.d = val.trim().parse().map_err(|_| parse_err(at, "d must be a non-negative integer"))?,
            "max_iter" => {
                ctx.max_iter = val.trim().parse().map_err(|_| parse_err(at, "max_iter must be a non-negative integer"))?
            }
            k => return Err(parse_err(pos, format!("unknown precision key {k:?}"))),
        }
        pos += part.len() + 1;
    }
    PrecisionCtx::new(ctx.n, ctx.d, ctx.max_iter)
}

/// Parses argv (program name first), reading `PADIC_DM_MAX_ITER` from the
/// environment.
pub fn parse_job<I, S>(argv: I) -> Result<JobSpec>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| parse_err(0, e.to_string()))?;
    job_from_args(args, std::env::var(MAX_ITER_ENV).ok().as_deref())
}

/// Validates parsed flags; `max_iter_env` overrides the step budget.
pub fn job_from_args(args: Args, max_iter_env: Option<&str>) -> Result<JobSpec> {
    let cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<ConfigFile>(&text).map_err(|e| parse_err(e.column(), format!("config: {e}")))?
        }
        None => ConfigFile::default(),
    };
    let field_text = args.field.or(cfg.field).ok_or_else(|| parse_err(0, "missing --field"))?;
    let field = parse_field(&field_text).map_err(|e| with_context(e, "--field"))?;
    let command = args.cmd.or(cfg.cmd).ok_or_else(|| parse_err(0, "missing --cmd"))?;
    let ops = if args.op.is_empty() { cfg.op } else { args.op };
    let mats = if args.mat.is_empty() { cfg.mat } else { args.mat };
    let mut precision = PrecisionCtx::default();
    if let Some(p) = args.precision.or(cfg.precision) {
        precision = parse_precision(&p, &precision).map_err(|e| with_context(e, "--precision"))?;
    }
    if let Some(v) = max_iter_env {
        precision.max_iter =
            v.trim().parse().map_err(|_| Error::InvalidInput(format!("{MAX_ITER_ENV} must be a non-negative integer")))?;
    }
    let n = field.nvars();
    let input = match (ops.is_empty(), mats.is_empty()) {
        (true, true) => return Err(parse_err(0, "one of --op or --mat is required")),
        (false, false) => return Err(parse_err(0, "--op and --mat are mutually exclusive")),
        (false, true) => {
            if ops.len() != n {
                return Err(parse_err(0, format!("expected {n} --op (one per derivation), got {}", ops.len())));
            }
            let ops = ops
                .iter()
                .enumerate()
                .map(|(j, t)| text::parse_operator(&field, t, j).map_err(|e| with_context(e, &format!("--op #{}", j + 1))))
                .collect::<Result<Vec<_>>>()?;
            Input::Operators(ops)
        }
        (true, false) => {
            if mats.len() != n {
                return Err(parse_err(0, format!("expected {n} --mat (one per derivation), got {}", mats.len())));
            }
            let mats = mats
                .iter()
                .enumerate()
                .map(|(j, t)| text::parse_matrix(&field, t).map_err(|e| with_context(e, &format!("--mat #{}", j + 1))))
                .collect::<Result<Vec<_>>>()?;
            DiffModule::new(field.clone(), mats.clone())?;
            Input::Matrices(mats)
        }
    };
    Ok(JobSpec { field, input, command, precision, out: args.out.or(cfg.out) })
}

/// A finished report and its exit code.
#[derive(Clone, Debug)]
pub struct Report {
    pub value: Value,
    pub exit_code: i32,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CertificateFailure(_) => 2,
        Error::IterationBudget(_) | Error::PrecisionLoss(_) | Error::StabilityFailure(_) | Error::SearchExhausted(_) => 3,
        _ => 1,
    }
}

fn error_json(e: &Error) -> Value {
    json!({"code": e.code(), "message": e.to_string()})
}

/// Error report for a job that could not be parsed.
pub fn parse_failure(e: &Error) -> Report {
    Report { value: json!({"schema": SCHEMA, "error": error_json(e)}), exit_code: exit_code(e).max(1) }
}

fn q_display(q: &Q) -> Value {
    q.to_f64().map_or(Value::Null, |f| json!(format!("{f:.6}")))
}

/// Profile JSON with a non-authoritative decimal `display` per entry.
fn profile_json(field: &FieldSpec, j: usize, p: &RadiusProfile) -> Value {
    let mut v = p.to_json(&field.vars[j]);
    if let Some(entries) = v["entries"].as_array_mut() {
        for (e, (lv, _)) in entries.iter_mut().zip(p.entries()) {
            e["display"] = q_display(lv);
        }
    }
    v
}

fn inputs_json(job: &JobSpec) -> Value {
    let f = &job.field;
    let (kind, texts): (&str, Vec<String>) = match &job.input {
        Input::Operators(ops) => ("op", ops.iter().map(|p| p.fmt_with(f)).collect()),
        Input::Matrices(ms) => ("mat", ms.iter().map(|m| text::fmt_matrix(f, m)).collect()),
    };
    json!({
        "field": f.describe(),
        kind: texts,
        "precision": {"N": fmt_q(&job.precision.n), "d": job.precision.d, "max_iter": job.precision.max_iter},
    })
}

fn module(job: &JobSpec) -> Result<DiffModule> {
    match &job.input {
        Input::Matrices(ms) => DiffModule::new(job.field.clone(), ms.clone()),
        Input::Operators(ops) if ops.len() == 1 => DiffModule::from_operator(&job.field, &ops[0]),
        Input::Operators(_) => Err(Error::InvalidInput(format!(
            "command {} needs a module; give --mat for fields with several variables",
            job.command.name()
        ))),
    }
}

/// Profiles and rationality advisories, one per derivation.
fn profiles(job: &JobSpec) -> Result<(Vec<RadiusProfile>, Vec<usize>)> {
    let f = &job.field;
    match &job.input {
        Input::Operators(ops) => {
            let monic = ops.iter().map(|p| p.monicize()).collect::<Result<Vec<_>>>()?;
            let prs = monic.iter().map(|p| radii::polygon_radii(f, p)).collect::<Result<Vec<_>>>()?;
            Ok((prs.iter().map(|r| r.profile.clone()).collect(), prs.iter().map(|r| r.boundary_hits).collect()))
        }
        Input::Matrices(_) => {
            let m = module(job)?;
            let mut out = Vec::new();
            let mut hits = Vec::new();
            for j in 0..f.nvars() {
                let p = m.cyclic_vector(j)?;
                let r = radii::polygon_radii(f, &p)?;
                out.push(r.profile);
                hits.push(r.boundary_hits);
            }
            Ok((out, hits))
        }
    }
}

fn profiles_section(f: &FieldSpec, profs: &[RadiusProfile], hits: &[usize]) -> (Value, Value, bool) {
    let mut rationality = Vec::new();
    let mut pass = true;
    for (j, p) in profs.iter().enumerate() {
        let r = radii::check_rationality(f, j, p);
        pass &= r.pass();
        rationality.push(r.to_json());
    }
    let profiles: Vec<Value> = profs
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let mut v = profile_json(f, j, p);
            v["boundary_hits"] = json!(hits[j]);
            v
        })
        .collect();
    (Value::Array(profiles), Value::Array(rationality), pass)
}

fn decomposition_section(f: &FieldSpec, d: &Decomposition) -> Value {
    let mut v = d.to_json(f);
    let names: Vec<&str> = d.derivations.iter().map(|&j| f.vars[j].as_str()).collect();
    v["keys"] = d.keys().to_json(&names);
    v
}

/// Runs the pipeline for `job`, returning the payload and whether every
/// certificate passed.
fn execute(job: &JobSpec) -> Result<(Value, bool)> {
    let f = &job.field;
    let ctx = &job.precision;
    match job.command {
        Command::Radii => {
            let (profs, hits) = profiles(job)?;
            let mut ok = true;
            for (j, p) in profs.iter().enumerate() {
                ok &= p.check_invariants(&f.lv_rk(j)).is_ok();
            }
            let (profiles, rationality, _) = profiles_section(f, &profs, &hits);
            Ok((json!({"profiles": profiles, "rationality": rationality}), ok))
        }
        Command::Decompose => {
            let m = module(job)?;
            let d = factorize::decompose_unchecked(&m, 0, ctx)?;
            let prof = radii::profile(&m, 0)?;
            let rationality = radii::check_rationality(f, 0, &prof);
            let ok = d.certificate.pass();
            Ok((
                json!({
                    "profiles": [profile_json(f, 0, &prof)],
                    "decomposition": decomposition_section(f, &d),
                    "rationality": [rationality.to_json()],
                }),
                ok,
            ))
        }
        Command::MultiDecompose => {
            let m = module(job)?;
            let d = factorize::multi_decompose_unchecked(&m, ctx)?;
            let (profs, hits) = profiles(job)?;
            let (profiles, rationality, _) = profiles_section(f, &profs, &hits);
            let ok = d.certificate.pass();
            Ok((
                json!({"profiles": profiles, "decomposition": decomposition_section(f, &d), "rationality": rationality}),
                ok,
            ))
        }
        Command::Dual => {
            let m = module(job)?;
            let dual = m.dual();
            let mut ok = dual.dual() == m;
            let mut rows = Vec::new();
            for j in 0..f.nvars() {
                let (a, b) = (radii::profile(&m, j)?, radii::profile(&dual, j)?);
                ok &= a == b;
                rows.push(json!({"module": profile_json(f, j, &a), "dual": profile_json(f, j, &b), "match": a == b}));
            }
            let mats: Vec<String> = dual.mats().iter().map(|g| text::fmt_matrix(f, g)).collect();
            Ok((
                json!({"dual": {"mat": mats}, "profiles": rows, "biduality": dual.dual() == m, "pass": ok}),
                ok,
            ))
        }
        Command::Verify => {
            let m = module(job)?;
            let mut ok = true;
            let mut checks = Vec::new();
            for j in 0..f.nvars() {
                let oracle = radii::cross_validate(&m, j, VERIFY_KMAX)?;
                let rationality = radii::check_rationality(f, j, &oracle.profile);
                let invariants = oracle.profile.check_invariants(&f.lv_rk(j)).is_ok();
                ok &= oracle.agrees && rationality.pass() && invariants;
                checks.push(json!({
                    "derivation": f.vars[j],
                    "profile": profile_json(f, j, &oracle.profile),
                    "oracle": oracle.to_json(),
                    "rationality": rationality.to_json(),
                    "invariants": invariants,
                }));
            }
            Ok((json!({"checks": checks, "kmax": VERIFY_KMAX, "pass": ok}), ok))
        }
    }
}

/// Runs a job. The report is deterministic apart from `timing`.
pub fn run(job: &JobSpec) -> Report {
    let start = Instant::now();
    let outcome = execute(job);
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let mut value = json!({
        "schema": SCHEMA,
        "command": job.command.name(),
        "inputs": inputs_json(job),
        "parallel": crate::batch::is_parallel(),
    });
    let exit_code = match outcome {
        Ok((payload, ok)) => {
            value["result"] = payload;
            value["certificates_pass"] = json!(ok);
            if ok {
                0
            } else {
                2
            }
        }
        Err(e) => {
            value["error"] = error_json(&e);
            exit_code(&e)
        }
    };
    value["timing"] = json!({"elapsed_ms": (elapsed * 1e3).round() / 1e3});
    Report { value, exit_code }
}

/// Full invocation: parse, run, write the report. Returns the exit code.
pub fn main_with<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let (report, out) = match Args::try_parse_from(&argv) {
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return 0;
        }
        Err(e) => (parse_failure(&parse_err(0, e.to_string())), None),
        Ok(args) => match job_from_args(args, std::env::var(MAX_ITER_ENV).ok().as_deref()) {
            Ok(job) => (run(&job), job.out.clone()),
            Err(e) => (parse_failure(&e), None),
        },
    };
    let text = serde_json::to_string_pretty(&report.value).expect("report serializes");
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, text + "\n") {
                eprintln!("cannot write {}: {e}", path.display());
                return 1;
            }
        }
        None => {
            use std::io::Write;
            let _ = writeln!(std::io::stdout(), "{text}");
        }
    }
    report.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(args: &[&str]) -> Result<JobSpec> {
        let argv = std::iter::once("padic-dm").chain(args.iter().copied());
        job_from_args(Args::try_parse_from(argv).unwrap(), None)
    }

    #[test]
    fn field_grammar() {
        let f = parse_field("gauss:p=5:vars=x,y").unwrap();
        assert_eq!(f, FieldSpec::gauss_named(5, vec!["x".into(), "y".into()]).unwrap());
        assert_eq!(parse_field("laurent:z").unwrap(), FieldSpec::laurent_named("z"));
        assert!(matches!(parse_field("gauss:p=4"), Err(Error::Parse { .. })));
        assert!(matches!(parse_field("gauss:q=5"), Err(Error::Parse { pos: 6, .. })));
        assert!(matches!(parse_field("gauss:p=5:vars=x,1y"), Err(Error::Parse { .. })));
        assert!(matches!(parse_field("padic:5"), Err(Error::Parse { pos: 0, .. })));
    }

    #[test]
    fn precision_grammar() {
        let base = PrecisionCtx::default();
        let c = parse_precision("N=10,d=64", &base).unwrap();
        assert_eq!((c.n, c.d, c.max_iter), (Q::from_integer(10.into()), 64, base.max_iter));
        assert_eq!(parse_precision("max_iter=0", &base).unwrap().max_iter, 0);
        assert!(matches!(parse_precision("N=10,e=3", &base), Err(Error::Parse { pos: 5, .. })));
        assert!(parse_precision("N=0", &base).is_err());
    }

    #[test]
    fn job_examples() {
        let j = job(&["--field", "gauss:p=5:vars=x", "--cmd", "radii", "--op", "T^2 - (1/5)*T + x"]).unwrap();
        assert_eq!(j.field, FieldSpec::gauss(5, 1).unwrap());
        assert_eq!(j.command, Command::Radii);
        assert!(matches!(job(&["--field", "gauss:p=5:vars=x", "--cmd", "radii"]), Err(Error::Parse { .. })));
        let two = job(&[
            "--field",
            "gauss:p=5:vars=x,y",
            "--cmd",
            "multi-decompose",
            "--mat",
            "1/5,0;0,0",
            "--mat",
            "0,0;0,1/5",
        ])
        .unwrap();
        assert!(matches!(two.input, Input::Matrices(ref m) if m.len() == 2));
        let bad = job(&["--field", "gauss:p=5:vars=x,y", "--cmd", "radii", "--mat", "0,y;0,0", "--mat", "0,0;0,0"]);
        assert_eq!(bad.unwrap_err().code(), "IntegrabilityError");
        let one = job(&["--field", "gauss:p=5:vars=x,y", "--cmd", "radii", "--mat", "1"]);
        assert!(matches!(one, Err(Error::Parse { .. })));
    }

    #[test]
    fn env_overrides_budget() {
        let argv = ["padic-dm", "--field", "laurent:z", "--cmd", "radii", "--op", "T", "--precision", "max_iter=9"];
        let j = job_from_args(Args::try_parse_from(argv).unwrap(), Some("4")).unwrap();
        assert_eq!(j.precision.max_iter, 4);
        assert!(job_from_args(Args::try_parse_from(argv).unwrap(), Some("x")).is_err());
    }

    #[test]
    fn radii_report() {
        let j = job(&["--field", "gauss:p=5:vars=x", "--cmd", "radii", "--op", "T^2 - (1/5)*T + x"]).unwrap();
        let r = run(&j);
        assert_eq!(r.exit_code, 0);
        let entries = &r.value["result"]["profiles"][0]["entries"];
        assert_eq!(entries[0]["lv"], "5/4");
        assert_eq!(entries[0]["mult"], 1);
        assert_eq!(entries[1]["lv"], "1/4");
        assert_eq!(entries[1]["mult"], 1);
        assert_eq!(r.value["schema"], 1);
    }
}
