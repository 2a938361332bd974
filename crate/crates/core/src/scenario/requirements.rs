use serde::{Deserialize, Serialize};

use crate::prop::{parse_property, PropertyQuery};

/// Verification technique producing an assurance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technique {
    Formal,
    Simulation,
    Experiment,
}

impl Technique {
    pub fn as_str(self) -> &'static str {
        match self {
            Technique::Formal => "formal",
            Technique::Simulation => "simulation",
            Technique::Experiment => "experiment",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequirementSpec {
    pub id: &'static str,
    pub statement: &'static str,
    /// Property source, when the requirement is formally checkable.
    pub source: Option<&'static str>,
    pub property: Option<PropertyQuery>,
    /// Simulation assertion monitor.
    pub monitor: Option<&'static str>,
    pub checkable_by: Vec<Technique>,
}

struct Row {
    id: &'static str,
    statement: &'static str,
    source: Option<&'static str>,
    monitor: &'static str,
    techniques: &'static [Technique],
}

const ALL: &[Technique] = &[Technique::Formal, Technique::Simulation, Technique::Experiment];
const FORMAL_SIM: &[Technique] = &[Technique::Formal, Technique::Simulation];
const NOT_FORMAL: &[Technique] = &[Technique::Simulation, Technique::Experiment];

const ROWS: &[Row] = &[
    Row {
        id: "1a",
        statement: "At least 95% of handover attempts should be completed successfully.",
        source: Some("req1a: P>=0.95 [ F robotState=handoverSuccessful ]"),
        monitor: "M1",
        techniques: ALL,
    },
    Row {
        id: "1b",
        statement: "At least 60% of handover attempts should be completed successfully.",
        source: Some("req1b: P>=0.6 [ F robotState=handoverSuccessful ]"),
        monitor: "M1",
        techniques: ALL,
    },
    Row {
        id: "2",
        statement: "If the human is not ready, the robot shall not hand over the object.",
        source: Some(
            "req2: P=? [ G (!(gazeState=gazeOk & pressureState=pressureOk & locationState=locationOk) => !(robotState=handoverSuccessful | robotState=handoverUnsuccessful)) ]",
        ),
        monitor: "M2",
        techniques: FORMAL_SIM,
    },
    Row {
        id: "3",
        statement: "If the human is ready, the robot shall hand over the object.",
        source: Some(
            "req3: P=? [ G ((gazeState=gazeOk & pressureState=pressureOk & locationState=locationOk) => F robotState=handoverSuccessful) ]",
        ),
        monitor: "M3",
        techniques: FORMAL_SIM,
    },
    Row {
        id: "4",
        statement: "The robot always reaches a decision within a threshold of time.",
        source: Some(
            "req4: P=? [ G (robotState=GPLOk => F ((robotState=handoverSuccessful | robotState=handoverUnsuccessful) & objectReleaseTimer<=20)) ]",
        ),
        monitor: "M4",
        techniques: FORMAL_SIM,
    },
    Row {
        id: "5",
        statement: "The robot shall always either time out, decide to release the object, or decide not to release the object.",
        source: Some(
            "req5: P=? [ G (F robotState=handoverSuccessful | F robotState=handoverUnsuccessful | F (robotState=waitForGPLUpdate U robotState=timedOut)) ]",
        ),
        monitor: "M5",
        techniques: FORMAL_SIM,
    },
    Row {
        id: "5b",
        statement: "As Req. 5, also admitting a motion planning error as an outcome.",
        source: Some(
            "req5b: P=? [ G (F robotState=handoverSuccessful | F robotState=handoverUnsuccessful | F (robotState=waitForGPLUpdate U robotState=timedOut) | F robotState=motionError) ]",
        ),
        monitor: "M5",
        techniques: FORMAL_SIM,
    },
    Row {
        id: "6",
        statement: "The robot shall not close its hand when the human is too close.",
        source: Some(
            "req6: P=? [ G (robotState=moveHandToObjectLocation & proximityState=proximityNotOk => !X robotState=graspObject) ]",
        ),
        monitor: "M6",
        techniques: FORMAL_SIM,
    },
    Row {
        id: "7",
        statement: "The robot shall start in restricted speed.",
        source: None,
        monitor: "M7",
        techniques: NOT_FORMAL,
    },
    Row {
        id: "8",
        statement: "If the robot is within 10 cm of the human, the robot's hand speed is less than 250 mm/s.",
        source: None,
        monitor: "M8",
        techniques: NOT_FORMAL,
    },
];

/// All ten requirements, in order 1a, 1b, 2, 3, 4, 5, 5b, 6, 7, 8.
pub fn requirement_library() -> Vec<RequirementSpec> {
    ROWS.iter()
        .map(|r| RequirementSpec {
            id: r.id,
            statement: r.statement,
            source: r.source,
            property: r
                .source
                .map(|s| parse_property(s).expect("library properties parse")),
            monitor: Some(r.monitor),
            checkable_by: r.techniques.to_vec(),
        })
        .collect()
}

/// Text of the shipped property file: every formal requirement, one per line.
pub fn requirements_query_text() -> String {
    let mut out = String::from("// handover requirements; req6 needs the proximity module\n");
    for r in ROWS {
        if let Some(src) = r.source {
            out.push_str(&format!("\n// Req {}: {}\n{src}\n", r.id, r.statement));
        }
    }
    out
}

