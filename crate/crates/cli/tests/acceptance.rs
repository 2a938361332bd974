//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints one PASS/FAIL line; exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use assurekit::assure::{calibrate, clopper_pearson, compare, Assurance, Kind};
use assurekit::chain::{build_chain, BuildOptions, Chain, VarInfo};
use assurekit::model::{parse_model, set_constants, ConstantSet, Kind as VarKind};
use assurekit::prop::{
    brute_force_prob, check, parse_property, parse_property_file, reachability_prob, SolverOptions,
    DEFAULT_PATH_CAP,
};
use assurekit::scenario::{build_variant, load_calibration, ScenarioVariant, Technique};
use assurekit::simtest::{run_campaign, CampaignConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const EQ7: f64 = 0.9001457729154516;
const EQ8: f64 = 0.8821428574571426;
const EQ9: f64 = 0.8803785717422283;
const SUCCESS: &str = "P=? [ F robotState=handoverSuccessful ]";

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn prob(chain: &Chain, text: &str) -> Result<f64, String> {
    let q = parse_property(text).map_err(|e| e.to_string())?;
    check(chain, &q).map(|r| r.probability).map_err(|e| e.to_string())
}

fn model_chain(file: &str) -> Result<Chain, String> {
    let text = std::fs::read_to_string(repo(file)).map_err(|e| e.to_string())?;
    let model = parse_model(&text).map_err(|e| e.to_string())?;
    build_chain(&model, BuildOptions::default()).map_err(|e| e.to_string())
}

fn refinement_chain() -> Outcome {
    let mut worst = Duration::ZERO;
    for (file, expected) in [
        ("models/refined_sensors.gcm", EQ7),
        ("models/refined_gripper.gcm", EQ8),
        ("models/refined.gcm", EQ9),
    ] {
        let start = Instant::now();
        let p = prob(&model_chain(file)?, SUCCESS)?;
        let took = start.elapsed();
        worst = worst.max(took);
        ensure((p - expected).abs() < 1e-9, || format!("{file}: {p} vs {expected}"))?;
        ensure(took < Duration::from_secs(5), || format!("{file}: {took:?}"))?;
    }
    Ok(format!("three values within 1e-9, slowest {worst:.2?}"))
}

fn requirement_properties() -> Outcome {
    let chain = model_chain("models/refined.gcm")?;
    let text = std::fs::read_to_string(repo("props/reqs.qry")).map_err(|e| e.to_string())?;
    let queries = parse_property_file(&text).map_err(|e| e.to_string())?;
    let result = |name: &str| {
        let q = queries.iter().find(|q| q.name.as_deref() == Some(name)).ok_or(format!("no {name}"))?;
        check(&chain, q).map_err(|e| e.to_string())
    };
    let p = |name: &str| result(name).map(|r| r.probability);
    ensure(p("req2")? == 1.0, || "req2 not exactly 1".into())?;
    ensure((p("req3")? - EQ9).abs() < 1e-9, || "req3".into())?;
    ensure(p("req4")? >= 1.0 - 1e-9, || "req4".into())?;
    ensure((p("req5")? - 0.998).abs() < 1e-9, || "req5".into())?;
    ensure(p("req5b")? >= 1.0 - 1e-9, || "req5b".into())?;
    ensure(result("req1a")?.verdict == Some(false), || "req1a verdict".into())?;
    ensure(result("req1b")?.verdict == Some(true), || "req1b verdict".into())?;
    Ok("req2..5b values and req1a/1b verdicts as expected".into())
}

fn baseline_behaviour() -> Outcome {
    let miss: f64 = 1.0 - 0.857375;
    let success = prob(&model_chain("models/baseline.gcm")?, SUCCESS)?;
    ensure(success >= 0.9999, || format!("P(success) {success}"))?;
    for rounds in 1..=6u32 {
        let v = ScenarioVariant {
            sensing_rounds: rounds,
            ..ScenarioVariant::baseline()
        };
        let model = build_variant(&v).map_err(|e| e.to_string())?;
        let chain = build_chain(&model, BuildOptions::default()).map_err(|e| e.to_string())?;
        let timeout = prob(&chain, "P=? [ F robotState=timedOut ]")?;
        let expected = miss.powi(rounds as i32);
        ensure((timeout - expected).abs() < 1e-9, || format!("R={rounds}: {timeout} vs {expected}"))?;
    }
    Ok(format!("P(success) = {success:.10}, timeout geometric for R = 1..6"))
}

fn line_chain(rows: Vec<Vec<(usize, f64)>>) -> Result<Chain, String> {
    let vars = vec![VarInfo {
        name: "s".into(),
        kind: VarKind::Int,
        lo: 0,
        hi: 63,
    }];
    let states = (0..rows.len() as i64).map(|i| vec![i]).collect();
    Chain::from_parts(vars, ConstantSet::new(), states, 0, rows).map_err(|e| e.to_string())
}

fn weights(rng: &mut ChaCha8Rng, edges: Vec<usize>) -> Vec<(usize, f64)> {
    let w: Vec<u32> = edges.iter().map(|_| rng.gen_range(1..10)).collect();
    let total: u32 = w.iter().sum();
    edges.into_iter().zip(w).map(|(t, w)| (t, w as f64 / total as f64)).collect()
}

/// Forward-only chain over at most 8 states with 1..=3 absorbing states.
fn random_dag(rng: &mut ChaCha8Rng) -> Result<Chain, String> {
    let n = rng.gen_range(2..=8usize);
    let transient = n - rng.gen_range(1..n.min(4));
    let mut edges = vec![Vec::new(); n];
    for j in 1..n {
        edges[rng.gen_range(0..j.min(transient))].push(j);
    }
    for (i, out) in edges.iter_mut().enumerate().take(transient) {
        for _ in 0..rng.gen_range(0..3) {
            let j = rng.gen_range(i + 1..n);
            if !out.contains(&j) {
                out.push(j);
            }
        }
    }
    let rows = (0..n)
        .map(|i| {
            if i >= transient || edges[i].is_empty() {
                vec![(i, 1.0)]
            } else {
                weights(rng, std::mem::take(&mut edges[i]))
            }
        })
        .collect();
    line_chain(rows)
}

fn random_atom(rng: &mut ChaCha8Rng, n: usize) -> String {
    let picked: Vec<String> = (0..n).filter(|_| rng.gen_bool(0.4)).map(|k| format!("s={k}")).collect();
    if picked.is_empty() {
        "false".into()
    } else {
        format!("({})", picked.join("|"))
    }
}

fn six_patterns(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    let mut a = || random_atom(rng, n);
    let (p, q, r, s, t, u, v, w, x) = (a(), a(), a(), a(), a(), a(), a(), a(), a());
    vec![
        format!("P=? [ F {p} ]"),
        format!("P=? [ G {q} ]"),
        format!("P=? [ G ({r} => F {s}) ]"),
        format!("P=? [ G ({t} => !X {u}) ]"),
        format!("P=? [ {v} U {w} ]"),
        format!("P=? [ G (F {x} | F ({p} U {q})) ]"),
    ]
}

/// Chain over 50 states with back edges; a forward spine keeps it terminating.
fn random_cyclic(rng: &mut ChaCha8Rng) -> Result<Chain, String> {
    let (n, absorbing) = (50, 3);
    let transient = n - absorbing;
    let rows = (0..n)
        .map(|i| {
            if i >= transient {
                return vec![(i, 1.0)];
            }
            let mut e = vec![i + 1, transient + i % absorbing];
            let back = rng.gen_range(0..n);
            if !e.contains(&back) {
                e.push(back);
            }
            weights(rng, e)
        })
        .collect();
    line_chain(rows)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let chain = random_dag(&mut rng)?;
        for text in six_patterns(&mut rng, chain.num_states()) {
            let q = parse_property(&text).map_err(|e| format!("{text}: {e}"))?;
            let p = check(&chain, &q).map_err(|e| e.to_string())?.probability;
            let oracle = brute_force_prob(&chain, &q, DEFAULT_PATH_CAP).map_err(|e| e.to_string())?;
            worst = worst.max((p - oracle).abs());
            ensure((p - oracle).abs() < 1e-12, || format!("case {case} {text}: {p} vs {oracle}"))?;
        }
    }
    let mut worst_vi: f64 = 0.0;
    for case in 0..50 {
        let chain = random_cyclic(&mut rng)?;
        let targets = [47, 48 + case % 2];
        let vi = reachability_prob(&chain, &targets, SolverOptions::default()).map_err(|e| e.to_string())?;
        let ge = reachability_prob(&chain, &targets, SolverOptions::exact()).map_err(|e| e.to_string())?;
        for (a, b) in vi.values.iter().zip(&ge.values) {
            worst_vi = worst_vi.max((a - b).abs());
        }
        ensure(worst_vi < 1e-10, || format!("cyclic case {case}: {worst_vi:e}"))?;
    }
    let took = start.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!(
        "1200 checks max diff {worst:.1e}, vi vs exact max diff {worst_vi:.1e}, {took:.2?}"
    ))
}

fn simulation_statistics() -> Outcome {
    let start = Instant::now();
    let cfg = CampaignConfig::default();
    let report = run_campaign(&cfg).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(report.n_tests == 500, || "not 500 tests".into())?;
    let rate = report.success_rate;
    ensure((0.84..=0.92).contains(&rate), || format!("success rate {rate}"))?;
    let p = &cfg.params;
    let pressure = (p.pressure_threshold_n - p.force_lo_n) / (p.force_hi_n - p.force_lo_n);
    for (mode, configured) in [
        ("grip", p.p_grip_failure),
        ("runtime_error", p.p_motion_error),
        ("gaze_fn", p.p_gaze_fn),
        ("pressure_fn", pressure),
        ("location_fn", p.p_track_loss),
    ] {
        let rc = report.failure_modes.get(mode).ok_or(format!("no mode {mode}"))?;
        let ci = clopper_pearson(rc.occ as u64, rc.opp as u64, 0.99).map_err(|e| e.to_string())?;
        ensure(ci.contains(configured), || format!("{mode}: {}/{} vs {configured}", rc.occ, rc.opp))?;
    }
    let m8 = report.monitor("M8").ok_or("no M8")?;
    ensure(m8.covered == 0, || format!("Req 8 covered {}", m8.covered))?;
    let m7 = report.monitor("M7").and_then(|m| m.pass_rate).ok_or("no Req 7 rate")?;
    ensure((0.80..=0.93).contains(&m7), || format!("Req 7 pass rate {m7}"))?;
    ensure(took < Duration::from_secs(120), || format!("took {took:?}"))?;
    Ok(format!("success {rate:.3}, Req 7 {m7:.3}, Req 8 uncovered, {took:.2?}"))
}

fn calibration_fidelity() -> Outcome {
    let data = load_calibration(&repo("data/experiments.json")).map_err(|e| e.to_string())?;
    let c = calibrate(&data);
    for (mode, occ, opp) in [
        ("grip", 2, 100),
        ("gaze_fn", 0, 98),
        ("pressure_fn", 7, 98),
        ("location_fn", 3, 98),
        ("runtime_error", 0, 100),
    ] {
        let r = c.rates.get(mode).ok_or(format!("no {mode}"))?;
        ensure((r.occ, r.opp) == (occ, opp), || format!("{mode}: {}/{}", r.occ, r.opp))?;
    }
    let uncalibrated = ScenarioVariant {
        overrides: Default::default(),
        ..ScenarioVariant::refined()
    };
    let model = build_variant(&uncalibrated).map_err(|e| e.to_string())?;
    let model = set_constants(&model, &c.constants).map_err(|e| e.to_string())?;
    let chain = build_chain(&model, BuildOptions::default()).map_err(|e| e.to_string())?;
    let p = prob(&chain, SUCCESS)?;
    ensure((p - EQ9).abs() < 1e-9, || format!("pipeline {p}"))?;
    Ok(format!("counts exact, pipeline P = {p}"))
}

fn cli(args: &[&str]) -> Result<Output, String> {
    Command::new(env!("CARGO_BIN_EXE_assurekit"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())
}

fn assure_run(model: &str) -> Result<(i32, Value), String> {
    let (model, prop, data) = (repo(model), repo("props/reqs.qry"), repo("data/experiments.json"));
    let out = cli(&[
        "assure",
        "--model",
        model.to_str().unwrap(),
        "--prop",
        prop.to_str().unwrap(),
        "--experiments",
        data.to_str().unwrap(),
        "--requirement",
        "1a",
        "--tolerance",
        "0.03",
    ])?;
    let json = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), json))
}

fn reconciliation() -> Outcome {
    let (code, out) = assure_run("models/refined.gcm")?;
    let report = &out["reports"][0];
    let values: Vec<f64> = out["assurances"]
        .as_array()
        .ok_or("no assurances")?
        .iter()
        .filter_map(|a| a["value"].as_f64())
        .collect();
    ensure(values.len() == 3, || format!("{} assurances", values.len()))?;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(code == 0 && report["verdict"] == "agree", || format!("refined: exit {code}, {report}"))?;
    ensure(
        report["consensus"]["direction"] == "at least" && report["consensus"]["value"].as_f64() == Some(min),
        || format!("consensus {}", report["consensus"]),
    )?;

    let (code, out) = assure_run("models/baseline.gcm")?;
    ensure(code == 4 && out["reports"][0]["verdict"] == "disagree", || format!("baseline: exit {code}"))?;

    let worked: Vec<Assurance> = [("a", 0.92), ("b", 0.98), ("c", 0.93)]
        .into_iter()
        .map(|(id, v)| Assurance::new(id, "1a", Technique::Experiment, Kind::Rate, v))
        .collect();
    let r = compare(&worked, 0.1).map_err(|e| e.to_string())?;
    let consensus = r.consensus.ok_or("no consensus")?;
    ensure(consensus.value == 0.92, || consensus.to_string())?;
    Ok(format!("refined agrees at least {min}, baseline exits 4, worked example {consensus}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (model, prop, data) = (repo("models/refined.gcm"), repo("props/reqs.qry"), repo("data/experiments.json"));
    let (model, prop, data) = (model.to_str().unwrap(), prop.to_str().unwrap(), data.to_str().unwrap());
    let mut compared = 0;
    let mut outputs = Vec::new();
    for round in 0..2 {
        let sub = dir.path().join(round.to_string());
        let p = |name: &str| sub.join(name).to_str().unwrap().to_string();
        std::fs::create_dir(&sub).map_err(|e| e.to_string())?;
        let runs: [Vec<String>; 4] = [
            vec!["check".into(), "--model".into(), model.into(), "--prop".into(), prop.into(), "--out".into(), p("check.json")],
            vec!["simulate".into(), "--runs".into(), "200".into(), "--seed".into(), "11".into(), "--out".into(), p("sim.json"), "--traces".into(), p("traces")],
            vec!["calibrate".into(), "--experiments".into(), data.into(), "--out".into(), p("cal.json")],
            vec![
                "assure".into(), "--model".into(), model.into(), "--prop".into(), prop.into(), "--experiments".into(), data.into(),
                "--constants".into(), p("cal.json"), "--ledger".into(), p("ledger.jsonl"), "--out".into(), p("assure.json"),
            ],
        ];
        for args in &runs {
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            cli(&args)?;
        }
        let mut files: Vec<PathBuf> = ["check.json", "sim.json", "sim.coverage.csv", "cal.json", "assure.json", "ledger.jsonl"]
            .iter()
            .map(|f| sub.join(f))
            .collect();
        let mut traces: Vec<PathBuf> = std::fs::read_dir(sub.join("traces"))
            .map_err(|e| e.to_string())?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        traces.sort();
        files.extend(traces);
        let bytes = files
            .iter()
            .map(|f| std::fs::read(f).map_err(|e| format!("{}: {e}", f.display())))
            .collect::<Result<Vec<_>, _>>()?;
        compared = bytes.len();
        outputs.push(bytes);
    }
    ensure(outputs[0] == outputs[1], || "outputs differ between runs".into())?;
    Ok(format!("{compared} output files byte-identical across two runs"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("refinement chain exactness", refinement_chain),
        ("requirement properties", requirement_properties),
        ("baseline behaviour", baseline_behaviour),
        ("oracle equivalence", oracle_equivalence),
        ("simulation statistics", simulation_statistics),
        ("calibration fidelity", calibration_fidelity),
        ("reconciliation", reconciliation),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
