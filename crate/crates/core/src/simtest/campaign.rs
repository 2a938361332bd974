use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::monitors::{AssertionVerdict, Verdict, MONITOR_IDS};
use super::run::{event, run_test, Outcome, TestTrace};
use super::{concretize, generate_abstract_tests, ConcreteTest, GazeCue, LocationCue, PressureCue};
use super::{ScenarioParams, SimError, Strategy};

/// Missing fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub strategy: Strategy,
    pub n: usize,
    pub seed: u64,
    pub params: ScenarioParams,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            strategy: Strategy::Typical,
            n: 500,
            seed: 7,
            params: ScenarioParams::default(),
        }
    }
}

/// Seed of test `index` in a campaign, independent of execution order.
pub fn test_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(1 + index as u64);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorCounts {
    pub monitor: String,
    pub covered: usize,
    pub passed: usize,
    pub failed: usize,
    pub unresolved: usize,
    /// passed / (passed + failed); unresolved verdicts are excluded.
    pub pass_rate: Option<f64>,
}

impl MonitorCounts {
    fn new(monitor: &str) -> Self {
        MonitorCounts {
            monitor: monitor.to_string(),
            covered: 0,
            passed: 0,
            failed: 0,
            unresolved: 0,
            pass_rate: None,
        }
    }

    fn add(&mut self, v: &AssertionVerdict) {
        if !v.triggered {
            return;
        }
        self.covered += 1;
        match v.result {
            Verdict::Pass => self.passed += 1,
            Verdict::Fail => self.failed += 1,
            Verdict::Unresolved => self.unresolved += 1,
        }
        let resolved = self.passed + self.failed;
        self.pass_rate = (resolved > 0).then(|| self.passed as f64 / resolved as f64);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateCounts {
    pub occ: usize,
    pub opp: usize,
    pub rate: Option<f64>,
}

impl RateCounts {
    fn tally(&mut self, opportunity: bool, occurred: bool) {
        if opportunity {
            self.opp += 1;
            self.occ += occurred as usize;
            self.rate = Some(self.occ as f64 / self.opp as f64);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignReport {
    pub n_tests: usize,
    pub master_seed: u64,
    pub strategy: Strategy,
    pub outcomes: BTreeMap<&'static str, usize>,
    pub successes: usize,
    pub success_rate: f64,
    pub monitors: Vec<MonitorCounts>,
    pub failure_modes: BTreeMap<&'static str, RateCounts>,
    pub test_seeds: Vec<u64>,
}

/// One executed test of a campaign.
#[derive(Debug, Clone)]
pub struct TestRun {
    pub index: usize,
    pub test: ConcreteTest,
    pub trace: TestTrace,
    pub verdicts: Vec<AssertionVerdict>,
}

/// Run every test and keep the traces.
pub fn run_campaign_detailed(config: &CampaignConfig) -> Result<(CampaignReport, Vec<TestRun>), SimError> {
    config.params.validate()?;
    let abstracts = generate_abstract_tests(&config.strategy, config.n, config.seed)?;
    let tests = abstracts
        .iter()
        .enumerate()
        .map(|(i, a)| concretize(a, &config.params, test_seed(config.seed, i)))
        .collect::<Result<Vec<_>, _>>()?;
    // collect keeps index order, so aggregation below is order-independent
    let runs: Vec<TestRun> = tests
        .into_par_iter()
        .enumerate()
        .map(|(index, test)| {
            let (trace, verdicts) = run_test(&test, &config.params);
            TestRun {
                index,
                test,
                trace,
                verdicts,
            }
        })
        .collect();
    Ok((aggregate(config, &runs), runs))
}

pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport, SimError> {
    run_campaign_detailed(config).map(|(report, _)| report)
}

fn aggregate(config: &CampaignConfig, runs: &[TestRun]) -> CampaignReport {
    let mut outcomes: BTreeMap<&'static str, usize> = Outcome::ALL.iter().map(|o| (o.as_str(), 0)).collect();
    let mut monitors: Vec<MonitorCounts> = MONITOR_IDS.iter().map(|id| MonitorCounts::new(id)).collect();
    let empty = RateCounts {
        occ: 0,
        opp: 0,
        rate: None,
    };
    let mut modes: BTreeMap<&'static str, RateCounts> = crate::scenario::FAILURE_MODES
        .iter()
        .map(|&m| (m, empty))
        .collect();

    for run in runs {
        *outcomes.get_mut(run.trace.outcome.as_str()).expect("all outcomes listed") += 1;
        for (counts, v) in monitors.iter_mut().zip(&run.verdicts) {
            debug_assert_eq!(counts.monitor, v.monitor);
            counts.add(v);
        }

        let crashed = run.trace.outcome == Outcome::RuntimeError;
        modes.get_mut("runtime_error").unwrap().tally(true, crashed);
        modes
            .get_mut("grip")
            .unwrap()
            .tally(!crashed, run.trace.outcome == Outcome::GripFailure);

        // sensing rates are conditioned on reaching the window with the cue correct
        let window = run.trace.find_event(event::WINDOW_START).map(|s| &run.trace.records[s]);
        if let (Some(rec), Some((gaze, pressure, location))) = (window, run.test.abstract_test.gpl()) {
            modes
                .get_mut("gaze_fn")
                .unwrap()
                .tally(gaze == GazeCue::Ok, !rec.gaze_ok);
            modes
                .get_mut("pressure_fn")
                .unwrap()
                .tally(pressure == PressureCue::Pull, rec.pressure_force_n < config.params.pressure_threshold_n);
            modes
                .get_mut("location_fn")
                .unwrap()
                .tally(location == LocationCue::OnObject, !rec.location_tracked);
        }
    }

    let successes = outcomes[Outcome::Success.as_str()];
    CampaignReport {
        n_tests: runs.len(),
        master_seed: config.seed,
        strategy: config.strategy,
        outcomes,
        successes,
        success_rate: successes as f64 / runs.len() as f64,
        monitors,
        failure_modes: modes,
        test_seeds: runs.iter().map(|r| r.test.rng_seed).collect(),
    }
}

/// Requirement a monitor checks, as labelled in coverage tables.
fn requirement_of(monitor: &str) -> &'static str {
    match monitor {
        "M1" => "1",
        "Mgrip" => "grip",
        "M2" => "2",
        "M3" => "3",
        "M4" => "4",
        "M5" => "5",
        "M6" => "6",
        "M7" => "7",
        "M8" => "8",
        _ => "?",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    pub requirement: &'static str,
    #[serde(flatten)]
    pub counts: MonitorCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageTable {
    pub rows: Vec<CoverageRow>,
}

impl CoverageTable {
    pub fn row(&self, requirement: &str) -> Option<&CoverageRow> {
        self.rows.iter().find(|r| r.requirement == requirement)
    }

    /// Columns: Req, Covered, Passed, Failed, Pass rate.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["Req", "Covered", "Passed", "Failed", "Pass rate"])
            .expect("in-memory csv write");
        for r in &self.rows {
            let c = &r.counts;
            let rate = c.pass_rate.map(|p| format!("{p:.4}")).unwrap_or_default();
            w.write_record([
                r.requirement.to_string(),
                c.covered.to_string(),
                c.passed.to_string(),
                c.failed.to_string(),
                rate,
            ])
            .expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }
}

/// Tally verdicts from any number of tests into one row per monitor.
pub fn coverage_report(verdicts: &[AssertionVerdict]) -> CoverageTable {
    let rows = MONITOR_IDS
        .iter()
        .map(|&id| {
            let mut counts = MonitorCounts::new(id);
            verdicts.iter().filter(|v| v.monitor == id).for_each(|v| counts.add(v));
            CoverageRow {
                requirement: requirement_of(id),
                counts,
            }
        })
        .collect();
    CoverageTable { rows }
}

impl CampaignReport {
    pub fn coverage(&self) -> CoverageTable {
        CoverageTable {
            rows: self
                .monitors
                .iter()
                .map(|m| CoverageRow {
                    requirement: requirement_of(&m.monitor),
                    counts: m.clone(),
                })
                .collect(),
        }
    }

    pub fn monitor(&self, id: &str) -> Option<&MonitorCounts> {
        self.monitors.iter().find(|m| m.monitor == id)
    }
}
