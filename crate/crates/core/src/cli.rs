//! Command-line requests and the JSON they produce.
//!
//! The same argument grammar serves the binary and the command lines inside a
//! program, so `symbol A --stratum X1 --M 32` means the same thing in both.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::algebra::{GeneratorType, MorMatrix};
use crate::dsl::{parse_dsl, print_dsl, Command, DslProgram};
use crate::error::{MorError, Result};
use crate::geometry::{ConfigTriple, StratumId};
use crate::symbol_calculus::{morphism_symbol, EvalMode, SymbolPoint};
use crate::verification::localization::{localization_report, ProbeSettings};
use crate::verification::oracle::{fuse_discrepancy_report, trace_oracle_word};
use crate::verification::rlambda::{special_case_report, unitarity_report, Calibration, SpecialCase};
use crate::verification::symbols::{homomorphism_report, random_pairs, trace_symbol_report};
use crate::verification::Report;

#[derive(Debug, Parser)]
#[command(name = "morcalc", version, about = "Classify, normalize, symbolize and verify morphisms of the (co)boundary operator algebra")]
pub struct Cli {
    #[command(subcommand)]
    pub request: Request,
    /// Also write the output to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// A command line inside a program.
#[derive(Debug, Parser)]
#[command(no_binary_name = true)]
struct Line {
    #[command(subcommand)]
    request: Request,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Request {
    /// Generator type and localization stratum of every summand.
    Classify {
        name: String,
        /// Program file; standard input when absent.
        input: Option<PathBuf>,
    },
    /// The 3×3 matrix of a morphism with its generator slots.
    Normalize { name: String, input: Option<PathBuf> },
    /// Operator-valued symbol at one point of a stratum.
    Symbol(SymbolArgs),
    /// Numerical verification suites.
    Verify(VerifyArgs),
    /// Runs the commands listed in a program.
    Run { input: Option<PathBuf> },
    /// Prints a program in canonical form.
    Print { input: Option<PathBuf> },
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SymbolArgs {
    pub name: String,
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "X0")]
    pub stratum: StratumId,
    /// Base point, one coordinate per tangential axis; zero by default.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub z: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub zeta: Vec<f64>,
    /// Lattice points per normal axis.
    #[arg(long = "M", default_value_t = 16)]
    pub m: usize,
    /// Evaluate homogeneous principal parts only.
    #[arg(long)]
    pub principal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Compose,
    Trace,
    Rlambda,
    Localization,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct VerifyArgs {
    pub suite: Suite,
    /// Program whose configuration (and, for `compose`, morphisms) is used.
    pub input: Option<PathBuf>,
    /// A fixture file, or a directory holding `compose.mor` and `rlambda_calibration.json`.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Symbol resolutions, comma separated.
    #[arg(long = "M", value_delimiter = ',')]
    pub m: Vec<usize>,
    /// Operator grid resolutions, comma separated.
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Scaling schedule, comma separated.
    #[arg(long = "lambda", value_delimiter = ',')]
    pub lambda: Vec<f64>,
    /// Random pairs for `compose` when no morphisms are given.
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    /// Symbol points per stratum for `compose`.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Random inputs for the operator oracle of `trace`.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
}

/// Pinned tolerances of the verification suites.
pub mod tolerance {
    pub const COMPOSE: f64 = 1e-10;
    pub const TRACE_SYMBOL: f64 = 0.05;
    pub const TRACE_ORACLE: f64 = 0.05;
    pub const UNITARITY: f64 = 1e-6;
}

/// The JSON output of one request and whether every check in it passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub value: Value,
    pub pass: bool,
}

impl Outcome {
    fn info(value: Value) -> Self {
        Self { value, pass: true }
    }

    fn from_reports(suite: &str, reports: Vec<Report>) -> Self {
        let pass = reports.iter().all(|r| r.pass);
        let value = json!({
            "suite": suite,
            "pass": pass,
            "reports": reports.iter().map(Report::to_value).collect::<Vec<_>>(),
        });
        Self { value, pass }
    }
}

/// Exit status for an error: 2 for input mistakes, 1 for failed computations.
pub fn exit_code(e: &MorError) -> i32 {
    match e {
        MorError::Parse { .. }
        | MorError::Validation { .. }
        | MorError::UnknownCommand(_)
        | MorError::Usage(_)
        | MorError::InvalidConfig(_)
        | MorError::AxisMismatch(_) => 2,
        _ => 1,
    }
}

pub fn default_config() -> ConfigTriple {
    ConfigTriple::new(3, [1, 2], [1, 3], true).expect("the default configuration is valid")
}

pub fn read_program(path: &Path) -> Result<DslProgram> {
    let text = std::fs::read_to_string(path).map_err(|e| MorError::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_dsl(&text)
}

/// Parses one command line of a program.
pub fn parse_command(cmd: &Command) -> Result<Request> {
    let words = std::iter::once(cmd.name.as_str()).chain(cmd.args.iter().map(String::as_str));
    let line = Line::try_parse_from(words).map_err(|e| match e.kind() {
        clap::error::ErrorKind::InvalidSubcommand => MorError::UnknownCommand(cmd.name.clone()),
        _ => MorError::Usage(e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string()),
    })?;
    if line.request.input().is_some() {
        return Err(MorError::Usage(format!("`{}` inside a program takes no input file", cmd.name)));
    }
    if matches!(line.request, Request::Run { .. }) {
        return Err(MorError::Usage("`run` cannot appear inside a program".into()));
    }
    Ok(line.request)
}

/// Runs a command of `program` against it.
pub fn run_command(cmd: &Command, program: &DslProgram) -> Result<Outcome> {
    run_request(&parse_command(cmd)?, Some(program))
}

/// Every command of a program, in order.
pub fn run_program(program: &DslProgram) -> Result<Outcome> {
    let mut results = Vec::new();
    let mut pass = true;
    for cmd in &program.commands {
        let o = run_command(cmd, program)?;
        pass &= o.pass;
        let line = std::iter::once(cmd.name.clone()).chain(cmd.args.iter().cloned()).collect::<Vec<_>>().join(" ");
        results.push(json!({"command": line, "output": o.value, "pass": o.pass}));
    }
    Ok(Outcome { value: json!({"results": results, "pass": pass}), pass })
}

impl Request {
    pub fn input(&self) -> Option<&Path> {
        match self {
            Request::Classify { input, .. }
            | Request::Normalize { input, .. }
            | Request::Run { input }
            | Request::Print { input } => input.as_deref(),
            Request::Symbol(a) => a.input.as_deref(),
            Request::Verify(a) => a.input.as_deref(),
        }
    }
}

fn need(program: Option<&DslProgram>) -> Result<&DslProgram> {
    program.ok_or_else(|| MorError::Usage("this command needs a program".into()))
}

/// Executes a request. `program` is the already parsed input, if any.
pub fn run_request(req: &Request, program: Option<&DslProgram>) -> Result<Outcome> {
    match req {
        Request::Classify { name, .. } => classify(need(program)?, name).map(Outcome::info),
        Request::Normalize { name, .. } => normalize(need(program)?, name).map(Outcome::info),
        Request::Symbol(a) => symbol(need(program)?, a).map(Outcome::info),
        Request::Verify(a) => verify(a, program),
        Request::Run { .. } => run_program(need(program)?),
        Request::Print { .. } => Ok(Outcome::info(json!({"program": print_dsl(need(program)?)}))),
    }
}

fn classify(p: &DslProgram, name: &str) -> Result<Value> {
    let words = p.words(name)?;
    let cfg = &p.config;
    let rows = words
        .iter()
        .map(|w| {
            let t = GeneratorType::of_word(w)?;
            let (k, l) = t.cell();
            Ok(json!({
                "word": w.to_string(),
                "type": t.label(),
                "stratum": t.localization().to_string(),
                "cell": [k, l],
                "domain_order": w.domain_order.to_string(),
                "order": w.order(cfg).to_string(),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({"morphism": name, "words": rows}))
}

fn order_list(v: &[Option<crate::Order>; 3]) -> Vec<Value> {
    v.iter().map(|o| o.map_or(Value::Null, |s| json!(s.to_string()))).collect()
}

pub fn matrix_json(m: &MorMatrix) -> Value {
    let rows: Vec<Value> = (0..3)
        .map(|k| {
            let cells: Vec<Value> = (0..3)
                .map(|l| {
                    let slots: Vec<&str> = GeneratorType::allowed_in(k, l).into_iter().map(GeneratorType::label).collect();
                    let entries: Vec<Value> = m.cells[k][l]
                        .iter()
                        .map(|e| json!({"type": e.kind.label(), "word": e.word.to_string()}))
                        .collect();
                    json!({"slots": slots, "entries": entries})
                })
                .collect();
            Value::Array(cells)
        })
        .collect();
    json!({
        "matrix": rows,
        "domain_orders": order_list(&m.domain_orders),
        "codomain_orders": order_list(&m.codomain_orders),
    })
}

fn normalize(p: &DslProgram, name: &str) -> Result<Value> {
    let mut v = matrix_json(&p.morphism(name)?);
    v["morphism"] = json!(name);
    Ok(v)
}

fn symbol(p: &DslProgram, a: &SymbolArgs) -> Result<Value> {
    let cfg = &p.config;
    let m = p.morphism(&a.name)?;
    let d = cfg.axes(a.stratum).len();
    let or_zero = |v: &Vec<f64>| if v.is_empty() { vec![0.0; d] } else { v.clone() };
    let mut pt = SymbolPoint::new(a.stratum, or_zero(&a.z), or_zero(&a.zeta), a.m, cfg)
        .map_err(|e| MorError::Usage(e.to_string()))?;
    if a.principal {
        pt = pt.with_mode(EvalMode::Principal);
    }
    let mut v = morphism_symbol(&m, &pt, cfg).export();
    v["morphism"] = json!(a.name);
    v["point"] = json!({"z": pt.z, "zeta": pt.zeta, "M": a.m, "principal": a.principal});
    Ok(v)
}

/// `dir/name` when `path` is a directory, else `path` itself.
fn fixture(path: &Path, name: &str) -> PathBuf {
    if path.is_dir() {
        path.join(name)
    } else {
        path.to_path_buf()
    }
}

/// Ordered pairs of nonzero definitions whose block product exists.
pub fn composable_pairs(p: &DslProgram) -> Result<Vec<(MorMatrix, MorMatrix)>> {
    let mats = p.definitions.iter().map(|d| p.morphism(&d.name)).collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for a in mats.iter().filter(|m| !m.is_zero()) {
        for b in mats.iter().filter(|m| !m.is_zero()) {
            if a.compose(b, &p.config).is_ok_and(|c| !c.is_zero()) {
                pairs.push((a.clone(), b.clone()));
            }
        }
    }
    Ok(pairs)
}

fn or_default<T: Clone>(v: &[T], d: &[T]) -> Vec<T> {
    if v.is_empty() {
        d.to_vec()
    } else {
        v.to_vec()
    }
}

fn verify(a: &VerifyArgs, program: Option<&DslProgram>) -> Result<Outcome> {
    let cfg = program.map_or_else(default_config, |p| p.config.clone());
    match a.suite {
        Suite::Compose => {
            let fixture_program = a.fixtures.as_ref().map(|f| read_program(&fixture(f, "compose.mor"))).transpose()?;
            let pairs = match fixture_program.as_ref().or(program) {
                Some(p) => {
                    let pairs = composable_pairs(p)?;
                    if pairs.is_empty() {
                        return Err(MorError::Usage("no composable pair of morphisms in the program".into()));
                    }
                    pairs
                }
                None => random_pairs(&cfg, a.pairs, a.seed)?,
            };
            let cfg = fixture_program.map_or(cfg, |p| p.config);
            let m = *or_default(&a.m, &[16]).last().expect("nonempty");
            let r = homomorphism_report(&cfg, &pairs, a.points, m, a.seed, tolerance::COMPOSE)?;
            Ok(Outcome::from_reports("compose", vec![r]))
        }
        Suite::Trace => {
            let mut reports = Vec::new();
            for k in [1, 2].into_iter().filter(|&k| cfg.nu(k) == 1) {
                reports.push(trace_symbol_report(&cfg, k, &or_default(&a.m, &[16, 32, 64]), tolerance::TRACE_SYMBOL)?);
                let w = trace_oracle_word(&cfg, k)?;
                let n = or_default(&a.n, &[16, 32, 64]);
                reports.push(fuse_discrepancy_report(&w, &cfg, &n, a.samples, a.seed, tolerance::TRACE_ORACLE)?);
            }
            if reports.is_empty() {
                return Err(MorError::Unsupported("the trace rewrite needs a submanifold of codimension one".into()));
            }
            Ok(Outcome::from_reports("trace", reports))
        }
        Suite::Rlambda => {
            cfg.require_transversal()?;
            let cal = match &a.fixtures {
                Some(f) => Calibration::load(&fixture(f, "rlambda_calibration.json"))?,
                None => Calibration { lambdas: vec![4.0, 16.0, 64.0], final_threshold: 0.1, observed: Default::default() },
            };
            let lambdas = or_default(&a.lambda, &cal.lambdas);
            let mut reports = SpecialCase::all()
                .into_iter()
                .map(|c| special_case_report(c, &cfg, &lambdas, cal.final_threshold))
                .collect::<Result<Vec<_>>>()?;
            reports.push(unitarity_report(&cfg, StratumId::X1, &lambdas, tolerance::UNITARITY)?);
            Ok(Outcome::from_reports("rlambda", reports))
        }
        Suite::Localization => {
            let d = ProbeSettings::default();
            let s = ProbeSettings { n: *or_default(&a.n, &[d.n]).last().expect("nonempty"), lambdas: or_default(&a.lambda, &d.lambdas), ..d };
            Ok(Outcome::from_reports("localization", vec![localization_report(&cfg, &s)?]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verification::report::render;

    const SRC: &str = "config { n = 3; S1 = {1,2}; S2 = {1,3} }\n\
                       M = Op[X1]{1,0} ; bd1 ; Op[X0]{(1+xi3^2)^(-2), -2}\n\
                       Z = 0\n\
                       classify M\n\
                       normalize Z\n\
                       symbol M --stratum X12 --z 0.5 --zeta -1 --M 8\n";

    #[test]
    fn classify_the_boundary_example() {
        let p = parse_dsl(SRC).unwrap();
        let o = run_command(&p.commands[0], &p).unwrap();
        assert_eq!(o.value["words"][0]["type"], "B1");
        assert_eq!(o.value["words"][0]["stratum"], "X1");
    }

    #[test]
    fn empty_sum_normalizes_to_empty_cells() {
        let p = parse_dsl(SRC).unwrap();
        let o = run_command(&p.commands[1], &p).unwrap();
        let cells = o.value["matrix"].as_array().unwrap();
        assert_eq!(cells.len(), 3);
        for row in cells {
            for c in row.as_array().unwrap() {
                assert!(c["entries"].as_array().unwrap().is_empty());
            }
        }
        // all 18 slots are listed once
        let n: usize = cells.iter().flat_map(|r| r.as_array().unwrap()).map(|c| c["slots"].as_array().unwrap().len()).sum();
        assert_eq!(n, 18);
    }

    #[test]
    fn symbol_command_is_deterministic() {
        let p = parse_dsl(SRC).unwrap();
        let a = render(&run_program(&p).unwrap().value);
        let b = render(&run_program(&parse_dsl(SRC).unwrap()).unwrap().value);
        assert_eq!(a, b);
        assert!(a.contains("\"stratum\": \"X12\""));
    }

    #[test]
    fn command_errors() {
        let p = parse_dsl(SRC).unwrap();
        let bad = |name: &str, args: &[&str]| {
            run_command(&Command { name: name.into(), args: args.iter().map(|s| s.to_string()).collect() }, &p).unwrap_err()
        };
        assert!(matches!(bad("verify", &["everything"]), MorError::Usage(_)));
        assert!(matches!(bad("classify", &["Q"]), MorError::Usage(_)));
        assert!(matches!(bad("classify", &["M", "other.mor"]), MorError::Usage(_)));
        assert!(matches!(bad("symbol", &["M", "--stratum", "X1", "--z", "1,2,3"]), MorError::Usage(_)));
        assert!(matches!(bad("frobnicate", &[]), MorError::UnknownCommand(_)));
        assert_eq!(exit_code(&bad("frobnicate", &[])), 2);
    }
}
