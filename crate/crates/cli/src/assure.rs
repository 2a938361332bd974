use std::collections::BTreeMap;
use std::path::PathBuf;

use assurekit::assure::{compare, interval, AgreementReport, Assurance, Kind, Ledger, Provenance, DEFAULT_TOLERANCE};
use assurekit::prop::{Mode, PropertyQuery};
use assurekit::scenario::{load_calibration, requirement_library, CalibrationDataset, RequirementSpec, Technique};
use assurekit::simtest::CampaignReport;
use clap::Args;
use serde::Serialize;

use crate::check::{self, Loaded};
use crate::error::{CliError, Exit};
use crate::{io, simulate};

const CONSTRAINTS: &str = "typical use case";

#[derive(Debug, Args)]
pub struct AssureArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Property file; queries named `req<id>` are matched to requirements.
    #[arg(long)]
    pub prop: PathBuf,
    #[arg(long = "const", value_name = "NAME=VALUE")]
    pub consts: Vec<String>,
    /// Calibrated constants, applied to the model and the simulator.
    #[arg(long)]
    pub constants: Option<PathBuf>,
    /// Campaign config (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest pairwise difference counted as agreement.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Experiment dataset (JSON).
    #[arg(long)]
    pub experiments: Option<PathBuf>,
    /// Append every assurance to this JSON-lines ledger.
    #[arg(long)]
    pub ledger: Option<PathBuf>,
    /// Restrict to these requirement ids. Repeatable.
    #[arg(long = "requirement", value_name = "ID")]
    pub requirements: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Skipped {
    requirement: String,
    technique: Technique,
    reason: String,
}

#[derive(Debug, Serialize)]
struct AssureOutput {
    model: String,
    model_hash: String,
    tolerance: f64,
    campaign: CampaignSummary,
    assurances: Vec<Assurance>,
    reports: Vec<AgreementReport>,
    skipped: Vec<Skipped>,
    all_agree: bool,
}

#[derive(Debug, Serialize)]
struct CampaignSummary {
    n_tests: usize,
    seed: u64,
    successes: usize,
    success_rate: f64,
    config_hash: String,
}

struct Sources<'a> {
    loaded: &'a Loaded,
    queries: BTreeMap<String, PropertyQuery>,
    campaign: &'a CampaignReport,
    config_hash: String,
    experiments: Option<(&'a CalibrationDataset, String)>,
}

fn with_ci(a: Assurance, k: u64, n: u64) -> Result<Assurance, CliError> {
    Ok(a.with_interval(interval(k, n, 0.95)?))
}

/// Success-rate requirements are measured by whole-test outcomes.
fn is_success_rate(r: &RequirementSpec) -> bool {
    r.id.starts_with('1')
}

fn formal(s: &Sources, r: &RequirementSpec, skipped: &mut Vec<Skipped>) -> Result<Option<Assurance>, CliError> {
    let skip = |skipped: &mut Vec<Skipped>, reason: String| {
        skipped.push(Skipped {
            requirement: r.id.to_string(),
            technique: Technique::Formal,
            reason,
        });
        Ok(None)
    };
    let Some(q) = s.queries.get(&format!("req{}", r.id)) else {
        return skip(skipped, format!("no query named req{} in the property file", r.id));
    };
    let record = match check::check_one(s.loaded, q, Default::default(), false) {
        Ok(rec) => rec,
        Err(e) if e.exit == Exit::Input => return skip(skipped, format!("not checkable on this model: {e}")),
        Err(e) => return Err(e),
    };
    let mut constraints = CONSTRAINTS.to_string();
    if let (Mode::Bound(cmp, b), Some(v)) = (q.mode, record.verdict) {
        let met = if v { "met" } else { "not met" };
        constraints.push_str(&format!("; bound P{}{b} {met}", cmp.symbol()));
    }
    let a = Assurance::new(&format!("{}/formal", r.id), r.id, Technique::Formal, Kind::Probability, record.probability)
        .with_constraints(&constraints)
        .with_provenance(Provenance {
            hash: Some(s.loaded.hash()),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            ..Provenance::default()
        });
    Ok(Some(a))
}

fn simulation(s: &Sources, r: &RequirementSpec, skipped: &mut Vec<Skipped>) -> Result<Option<Assurance>, CliError> {
    let c = s.campaign;
    let (k, n) = if is_success_rate(r) {
        (c.successes as u64, c.n_tests as u64)
    } else {
        let m = r.monitor.and_then(|id| c.monitor(id));
        match m {
            Some(m) if m.passed + m.failed > 0 => (m.passed as u64, (m.passed + m.failed) as u64),
            _ => {
                skipped.push(Skipped {
                    requirement: r.id.to_string(),
                    technique: Technique::Simulation,
                    reason: "coverage hole: monitor never reached a verdict".into(),
                });
                return Ok(None);
            }
        }
    };
    let a = Assurance::new(&format!("{}/simulation", r.id), r.id, Technique::Simulation, Kind::Rate, k as f64 / n as f64)
        .with_constraints(CONSTRAINTS)
        .with_provenance(Provenance {
            hash: Some(s.config_hash.clone()),
            seed: Some(c.master_seed),
            n: Some(n),
            tool_version: env!("CARGO_PKG_VERSION").into(),
        });
    with_ci(a, k, n).map(Some)
}

fn experiment(s: &Sources, r: &RequirementSpec, skipped: &mut Vec<Skipped>) -> Result<Option<Assurance>, CliError> {
    let reason = match &s.experiments {
        Some((data, hash)) if is_success_rate(r) => {
            let a = Assurance::new(&format!("{}/experiment", r.id), r.id, Technique::Experiment, Kind::Rate, data.successes as f64 / data.tests as f64)
                .with_constraints(CONSTRAINTS)
                .with_provenance(Provenance {
                    hash: Some(hash.clone()),
                    n: Some(data.tests),
                    tool_version: env!("CARGO_PKG_VERSION").into(),
                    ..Provenance::default()
                });
            return with_ci(a, data.successes, data.tests).map(Some);
        }
        Some(_) => "dataset records no per-requirement outcome",
        None => "no experiment dataset given",
    };
    skipped.push(Skipped {
        requirement: r.id.to_string(),
        technique: Technique::Experiment,
        reason: reason.into(),
    });
    Ok(None)
}

pub fn run(args: AssureArgs) -> Result<Exit, CliError> {
    let loaded = check::load(&args.model, args.constants.as_deref(), &args.consts, false)?;
    let queries = check::load_properties(&args.prop)?
        .into_iter()
        .filter_map(|q| q.name.clone().map(|n| (n, q)))
        .collect();
    if args.tolerance.is_nan() || args.tolerance < 0.0 {
        return Err(CliError::input("--tolerance must be non-negative"));
    }
    let cfg = simulate::campaign_config(args.config.as_deref(), args.runs, args.seed, args.constants.as_deref())?;
    let (campaign, _) = simulate::run_campaign(&cfg)?;
    let data = match &args.experiments {
        Some(path) => {
            let bytes = io::read(path)?;
            Some((load_calibration(path)?, io::sha256_hex(bytes.as_bytes())))
        }
        None => None,
    };
    let sources = Sources {
        loaded: &loaded,
        queries,
        campaign: &campaign,
        config_hash: io::sha256_hex(serde_json::to_string(&cfg).expect("config serializes").as_bytes()),
        experiments: data.as_ref().map(|(d, h)| (d, h.clone())),
    };

    let library = requirement_library();
    for id in &args.requirements {
        if !library.iter().any(|r| r.id == id) {
            return Err(CliError::input(format!("unknown requirement `{id}`")));
        }
    }
    let mut assurances = Vec::new();
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for r in library.iter().filter(|r| args.requirements.is_empty() || args.requirements.iter().any(|id| id == r.id)) {
        let mut mine = Vec::new();
        for t in &r.checkable_by {
            let a = match t {
                Technique::Formal => formal(&sources, r, &mut skipped)?,
                Technique::Simulation => simulation(&sources, r, &mut skipped)?,
                Technique::Experiment => experiment(&sources, r, &mut skipped)?,
            };
            mine.extend(a);
        }
        if mine.len() >= 2 {
            reports.push(compare(&mine, args.tolerance)?);
        }
        assurances.extend(mine);
    }

    if let Some(path) = &args.ledger {
        assurances = Ledger::open(path).append(&assurances)?;
    }
    let all_agree = reports.iter().all(|r| r.agrees());
    let output = AssureOutput {
        model: args.model.display().to_string(),
        model_hash: loaded.hash(),
        tolerance: args.tolerance,
        campaign: CampaignSummary {
            n_tests: campaign.n_tests,
            seed: campaign.master_seed,
            successes: campaign.successes,
            success_rate: campaign.success_rate,
            config_hash: sources.config_hash.clone(),
        },
        assurances,
        reports,
        skipped,
        all_agree,
    };
    io::emit(args.out.as_deref(), &io::to_json(&output))?;
    if args.out.is_some() {
        for r in &output.reports {
            let consensus = r.consensus.as_ref().map(|c| format!(", {c}")).unwrap_or_default();
            let verdict = if r.agrees() { "agree" } else { "disagree" };
            println!("Req {}: {verdict}{consensus}", r.requirement);
        }
    }
    Ok(if all_agree { Exit::Ok } else { Exit::Disagree })
}

