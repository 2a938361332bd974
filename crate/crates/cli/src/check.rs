use std::path::PathBuf;
use std::time::Instant;

use assurekit::chain::{build_chain, BuildOptions, Chain, Policy};
use assurekit::model::{parse_model, set_constants, ConstantSet};
use assurekit::prop::{check_with, parse_property_file, Mode, PropertyQuery, Solver, SolverOptions};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, Exit};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Gauss–Seidel value iteration.
    Vi,
    /// Direct elimination.
    Exact,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Property file, one query per line.
    #[arg(long)]
    pub prop: PathBuf,
    /// Override a declared constant, NAME=VALUE. Repeatable.
    #[arg(long = "const", value_name = "NAME=VALUE")]
    pub consts: Vec<String>,
    /// JSON constants file; names the model does not declare are ignored.
    #[arg(long)]
    pub constants: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Vi)]
    pub method: Method,
    /// Resolve nondeterminism by a uniform choice instead of rejecting it.
    #[arg(long)]
    pub uniform_scheduler: bool,
    /// Include build and check times (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct PropertyRecord {
    pub name: Option<String>,
    pub property: String,
    pub probability: f64,
    pub verdict: Option<bool>,
    pub solver: Solver,
    pub residual: f64,
    pub states: usize,
    pub transitions: usize,
    pub product_states: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub build_time_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_time_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct CheckReport {
    model: String,
    model_hash: String,
    constants: ConstantSet,
    states: usize,
    transitions: usize,
    results: Vec<PropertyRecord>,
}

/// A model with its constants resolved and its chain built.
pub struct Loaded {
    pub text: String,
    pub constants: ConstantSet,
    pub chain: Chain,
    pub build_ms: f64,
}

impl Loaded {
    /// Hash of the model text and the applied constants.
    pub fn hash(&self) -> String {
        let consts = serde_json::to_string(&self.constants).expect("constants serialize");
        io::sha256_hex(format!("{}\n{consts}", self.text).as_bytes())
    }
}

pub fn load(
    model: &std::path::Path,
    constants: Option<&std::path::Path>,
    consts: &[String],
    uniform: bool,
) -> Result<Loaded, CliError> {
    let text = io::read(model)?;
    let parsed = parse_model(&text).map_err(|e| CliError::from(e).context(&model.display().to_string()))?;
    let overrides = io::resolve_constants(&parsed, constants, consts)?;
    let bound = set_constants(&parsed, &overrides)?;
    let policy = if uniform { Policy::Uniform } else { Policy::Reject };
    let start = Instant::now();
    let chain = build_chain(&bound, BuildOptions::default().with_policy(policy))?;
    Ok(Loaded {
        text,
        constants: overrides,
        chain,
        build_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn load_properties(path: &std::path::Path) -> Result<Vec<PropertyQuery>, CliError> {
    let text = io::read(path)?;
    let queries = parse_property_file(&text).map_err(|e| CliError::from(e).context(&path.display().to_string()))?;
    if queries.is_empty() {
        return Err(CliError::input(format!("{}: no properties", path.display())));
    }
    Ok(queries)
}

pub fn solver_options(method: Method) -> SolverOptions {
    match method {
        Method::Vi => SolverOptions::default(),
        Method::Exact => SolverOptions::exact(),
    }
}

pub fn check_one(loaded: &Loaded, q: &PropertyQuery, opts: SolverOptions, timings: bool) -> Result<PropertyRecord, CliError> {
    let start = Instant::now();
    let r = check_with(&loaded.chain, q, opts)
        .map_err(|e| CliError::from(e).context(&q.to_string()))?;
    Ok(PropertyRecord {
        name: q.name.clone(),
        property: q.to_string(),
        probability: r.probability,
        verdict: r.verdict,
        solver: r.solver,
        residual: r.residual,
        states: r.states,
        transitions: r.transitions,
        product_states: r.product_states,
        build_time_ms: timings.then_some(loaded.build_ms),
        check_time_ms: timings.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

pub fn run(args: CheckArgs) -> Result<Exit, CliError> {
    let loaded = load(&args.model, args.constants.as_deref(), &args.consts, args.uniform_scheduler)?;
    let queries = load_properties(&args.prop)?;
    let opts = solver_options(args.method);
    let results = queries
        .iter()
        .map(|q| check_one(&loaded, q, opts, args.timings))
        .collect::<Result<Vec<_>, _>>()?;

    let violated = queries
        .iter()
        .zip(&results)
        .any(|(q, r)| matches!(q.mode, Mode::Bound(..)) && r.verdict == Some(false));
    let stats = loaded.chain.stats();
    let report = CheckReport {
        model: args.model.display().to_string(),
        model_hash: loaded.hash(),
        constants: loaded.constants.clone(),
        states: stats.states,
        transitions: stats.transitions,
        results,
    };
    io::emit(args.out.as_deref(), &io::to_json(&report))?;
    if args.out.is_some() {
        for r in &report.results {
            let verdict = r.verdict.map(|v| format!("  {v}")).unwrap_or_default();
            println!("{}  {}{verdict}", r.property, r.probability);
        }
    }
    Ok(if violated { Exit::BoundViolated } else { Exit::Ok })
}
