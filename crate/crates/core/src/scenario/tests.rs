use std::path::PathBuf;

use proptest::prelude::*;

use super::*;
use crate::chain::{build_chain, classify_terminal, BuildOptions, Chain};
use crate::prop::{brute_force_prob, check, check_with, parse_property, SolverOptions};

fn repo(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn chain_for(v: &ScenarioVariant) -> Chain {
    build_chain(&build_variant(v).unwrap(), BuildOptions::default()).unwrap()
}

fn prob(chain: &Chain, text: &str) -> f64 {
    check(chain, &parse_property(text).unwrap()).unwrap().probability
}

const F_SUCCESS: &str = "P=? [ F robotState=handoverSuccessful ]";
const F_TIMEOUT: &str = "P=? [ F robotState=timedOut ]";

fn req(id: &str) -> RequirementSpec {
    requirement_library().into_iter().find(|r| r.id == id).unwrap()
}

#[test]
fn refinement_chain_values() {
    let cases = [
        (ScenarioVariant::refined_sensors(), 0.9001457729154516),
        (ScenarioVariant::refined_gripper(), 0.8821428574571426),
        (ScenarioVariant::refined(), 0.8803785717422283),
    ];
    for (v, expected) in cases {
        let chain = chain_for(&v);
        let p = prob(&chain, F_SUCCESS);
        assert!((p - expected).abs() < 1e-9, "{p} vs {expected}");
    }
}

#[test]
fn eq9_without_proximity_module() {
    let v = ScenarioVariant {
        proximity_module: false,
        ..ScenarioVariant::refined()
    };
    let p = prob(&chain_for(&v), F_SUCCESS);
    assert!((p - 0.8803785717422283).abs() < 1e-9);
}

#[test]
fn one_shot_variant_matches_brute_force() {
    let chain = chain_for(&ScenarioVariant::refined_sensors());
    let q = parse_property(F_SUCCESS).unwrap();
    let brute = brute_force_prob(&chain, &q, 1_000_000).unwrap();
    assert!((brute - 0.9001457729154516).abs() < 1e-9);
    assert!((brute - check(&chain, &q).unwrap().probability).abs() < 1e-12);
}

#[test]
fn refined_chain_structure() {
    let chain = chain_for(&ScenarioVariant::refined());
    assert!(classify_terminal(&chain).terminating);
    let robot = chain.vars().iter().position(|v| v.name == "robotState").unwrap();
    let mut outcomes: Vec<i64> = chain.absorbing().iter().map(|&s| chain.state(s)[robot]).collect();
    outcomes.sort();
    outcomes.dedup();
    // handoverSuccessful, handoverUnsuccessful, timedOut, motionError
    assert_eq!(outcomes, vec![1107, 1108, 1109, 1110]);
}

#[test]
fn refined_model_has_ten_modules() {
    let model = build_variant(&ScenarioVariant::refined()).unwrap();
    let names: Vec<&str> = model.modules.iter().map(|m| m.name.as_str()).collect();
    assert_eq!(
        names,
        [
            "human",
            "gaze",
            "pressure",
            "location",
            "proximity",
            "robot",
            "gazeSensor",
            "pressureSensor",
            "locationSensor",
            "timekeeper"
        ]
    );
}

#[test]
fn requirement_values_on_refined_chain() {
    let chain = chain_for(&ScenarioVariant::refined());
    let value = |id: &str| check(&chain, req(id).property.as_ref().unwrap()).unwrap();
    assert_eq!(value("2").probability, 1.0);
    assert!((value("3").probability - 0.8803785717422283).abs() < 1e-9);
    assert!(value("4").probability >= 1.0 - 1e-9);
    assert!((value("5").probability - 0.998).abs() < 1e-9);
    assert!(value("5b").probability >= 1.0 - 1e-9);
    assert_eq!(value("1a").verdict, Some(false));
    assert_eq!(value("1b").verdict, Some(true));
    // the robot grasps regardless of proximity, so every close approach
    // that survives motion planning violates Req 6
    let close_grasp = (1.0 - 0.002) * 0.075;
    assert!((value("6").probability - (1.0 - close_grasp)).abs() < 1e-12);
}

#[test]
fn baseline_timeout_is_geometric_in_rounds() {
    let miss = 1.0 - 0.95f64.powi(3);
    for rounds in 1..=6 {
        let v = ScenarioVariant {
            sensing_rounds: rounds,
            ..ScenarioVariant::baseline()
        };
        let chain = chain_for(&v);
        let timeout = prob(&chain, F_TIMEOUT);
        assert!((timeout - miss.powi(rounds as i32)).abs() < 1e-12, "R={rounds}");
        let success = prob(&chain, F_SUCCESS);
        assert!((success + timeout - 1.0).abs() < 1e-12);
        if rounds <= 3 {
            let q = parse_property(F_TIMEOUT).unwrap();
            let brute = brute_force_prob(&chain, &q, 1_000_000).unwrap();
            assert!((brute - timeout).abs() < 1e-12, "R={rounds}");
        }
    }
    let p = prob(&chain_for(&ScenarioVariant::baseline()), F_SUCCESS);
    assert!(p >= 0.9999);
}

#[test]
fn variant_ordering() {
    let values: Vec<f64> = ScenarioVariant::PRESETS
        .iter()
        .map(|n| prob(&chain_for(&ScenarioVariant::preset(n).unwrap()), F_SUCCESS))
        .collect();
    for w in values.windows(2) {
        assert!(w[0] >= w[1], "{values:?}");
    }
}

#[test]
fn shipped_files_match_generator() {
    for name in ScenarioVariant::PRESETS {
        let text = ScenarioVariant::preset(name).unwrap().render().unwrap();
        let shipped = std::fs::read_to_string(repo(&format!("models/{name}.gcm"))).unwrap();
        assert_eq!(shipped, text, "models/{name}.gcm is stale");
    }
    let shipped = std::fs::read_to_string(repo("props/reqs.qry")).unwrap();
    assert_eq!(shipped, requirements_query_text());
}

#[test]
fn shipped_models_round_trip() {
    for name in ScenarioVariant::PRESETS {
        let model = build_variant(&ScenarioVariant::preset(name).unwrap()).unwrap();
        let again = crate::model::parse_model(&model.to_string()).unwrap();
        assert_eq!(model, again);
    }
}

#[test]
fn shipped_property_file_parses() {
    let text = std::fs::read_to_string(repo("props/reqs.qry")).unwrap();
    let qs = crate::prop::parse_property_file(&text).unwrap();
    assert_eq!(qs.len(), 8);
}

#[test]
fn library_shape() {
    let lib = requirement_library();
    let ids: Vec<&str> = lib.iter().map(|r| r.id).collect();
    assert_eq!(ids, ["1a", "1b", "2", "3", "4", "5", "5b", "6", "7", "8"]);
    for r in &lib {
        assert!(!r.checkable_by.is_empty());
        assert_eq!(r.property.is_some(), r.checkable_by.contains(&Technique::Formal));
    }
    assert!(req("7").property.is_none() && req("8").property.is_none());
}

#[test]
fn unknown_override_is_rejected() {
    let v = ScenarioVariant {
        overrides: ConstantSet::new().with("pGripperFailure", Value::Double(0.1)),
        ..ScenarioVariant::baseline()
    };
    assert!(matches!(build_variant(&v), Err(ModelError::UnknownConstant(_))));
}

#[test]
fn flags_select_distinct_texts() {
    let mut texts = std::collections::HashSet::new();
    for bits in 0..16u8 {
        let v = ScenarioVariant {
            one_shot_sensors: bits & 1 != 0,
            gripper_failure: bits & 2 != 0,
            motion_failure: bits & 4 != 0,
            proximity_module: bits & 8 != 0,
            ..ScenarioVariant::default()
        };
        assert!(texts.insert(v.render().unwrap()));
    }
}

#[test]
fn shipped_calibration_dataset() {
    let data = load_calibration(&repo("data/experiments.json")).unwrap();
    assert_eq!((data.tests, data.successes), (100, 88));
    let pressure = data.mode("pressure_fn").unwrap();
    assert_eq!((pressure.occ, pressure.opp), (7, 98));
    assert_eq!(format!("{:.9}", pressure.rate().unwrap()), "0.071428571");
}

#[test]
fn calibration_validation() {
    let zero = r#"{"tests":10,"successes":0,"modes":{"grip":{"occ":0,"opp":10}}}"#;
    assert_eq!(parse_calibration(zero).unwrap().mode("grip").unwrap().rate(), Some(0.0));
    let grip = r#"{"tests":100,"successes":97,"modes":{"grip":{"occ":3,"opp":100}}}"#;
    assert_eq!(parse_calibration(grip).unwrap().mode("grip").unwrap().rate(), Some(0.03));
    for bad in [
        r#"{"tests":10,"successes":11,"modes":{}}"#,
        r#"{"tests":10,"successes":1,"modes":{"grip":{"occ":3,"opp":2}}}"#,
        r#"{"tests":10,"successes":1,"modes":{"grip":{"occ":1,"opp":20}}}"#,
    ] {
        assert!(matches!(parse_calibration(bad), Err(CalibrationError::CountInconsistency(_))), "{bad}");
    }
    for bad in ["", "{}", r#"{"tests":1,"successes":1,"modes":{"wings":{"occ":0,"opp":1}}}"#] {
        assert!(matches!(parse_calibration(bad), Err(CalibrationError::Schema(_))), "{bad}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn refined_success_has_closed_form(
        fn_g in 0.0..0.3f64, fn_p in 0.0..0.3f64, fn_l in 0.0..0.3f64,
        grip in 0.0..0.2f64, motion in 0.0..0.05f64,
    ) {
        let overrides = ConstantSet::new()
            .with("pGazeFN", Value::Double(fn_g))
            .with("pPressureFN", Value::Double(fn_p))
            .with("pLocationFN", Value::Double(fn_l))
            .with("pGripperFailure", Value::Double(grip))
            .with("pMotionFailure", Value::Double(motion));
        let v = ScenarioVariant::refined().with_overrides(&overrides);
        let chain = chain_for(&v);
        let p = check_with(&chain, &parse_property(F_SUCCESS).unwrap(), SolverOptions::default())
            .unwrap()
            .probability;
        let expected = (1.0 - motion) * (1.0 - grip) * (1.0 - fn_g) * (1.0 - fn_p) * (1.0 - fn_l);
        prop_assert!((p - expected).abs() < 1e-12, "{} vs {}", p, expected);
    }

    #[test]
    fn success_is_monotone_in_gripper_failure(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let at = |g: f64| {
            let v = ScenarioVariant::refined_gripper()
                .with_overrides(&ConstantSet::new().with("pGripperFailure", Value::Double(g)));
            prob(&chain_for(&v), F_SUCCESS)
        };
        prop_assert!(at(lo) >= at(hi) - 1e-12);
    }
}
