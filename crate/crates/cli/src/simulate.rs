use std::path::{Path, PathBuf};

use assurekit::simtest::{run_campaign_detailed, trace_csv, CampaignConfig, CampaignReport, TestRun};
use clap::Args;

use crate::error::{CliError, Exit};
use crate::io;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Campaign config (JSON); missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of tests; overrides the config.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Master seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Calibrated constants applied to the simulator parameters.
    #[arg(long)]
    pub constants: Option<PathBuf>,
    /// Campaign report JSON; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Coverage table CSV. Defaults to the report path with a
    /// `.coverage.csv` extension when `--out` is given.
    #[arg(long)]
    pub coverage: Option<PathBuf>,
    /// Directory for one trace CSV per test.
    #[arg(long)]
    pub traces: Option<PathBuf>,
}

/// Config file plus command-line overrides.
pub fn campaign_config(
    config: Option<&Path>,
    runs: Option<usize>,
    seed: Option<u64>,
    constants: Option<&Path>,
) -> Result<CampaignConfig, CliError> {
    let mut cfg = match config {
        Some(path) => serde_json::from_str::<CampaignConfig>(&io::read(path)?)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?,
        None => CampaignConfig::default(),
    };
    if let Some(n) = runs {
        cfg.n = n;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(path) = constants {
        cfg.params = cfg.params.with_constants(&io::load_constants(path)?)?;
    }
    Ok(cfg)
}

pub fn write_traces(dir: &Path, runs: &[TestRun]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::internal(format!("cannot create {}: {e}", dir.display())))?;
    for run in runs {
        let path = dir.join(format!("test_{:05}.csv", run.index));
        io::write_atomic(&path, trace_csv(&run.trace).as_bytes())?;
    }
    Ok(())
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<(CampaignReport, Vec<TestRun>), CliError> {
    Ok(run_campaign_detailed(cfg)?)
}

pub fn run(args: SimulateArgs) -> Result<Exit, CliError> {
    let cfg = campaign_config(args.config.as_deref(), args.runs, args.seed, args.constants.as_deref())?;
    let (report, runs) = run_campaign(&cfg)?;

    io::emit(args.out.as_deref(), &io::to_json(&report))?;
    let coverage = args
        .coverage
        .clone()
        .or_else(|| args.out.as_ref().map(|p| p.with_extension("coverage.csv")));
    if let Some(path) = &coverage {
        io::write_atomic(path, report.coverage().to_csv().as_bytes())?;
    }
    if let Some(dir) = &args.traces {
        write_traces(dir, &runs)?;
    }
    if args.out.is_some() {
        println!(
            "{} tests, {} successes ({:.4})",
            report.n_tests, report.successes, report.success_rate
        );
    }
    Ok(Exit::Ok)
}
