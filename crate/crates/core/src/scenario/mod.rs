//! The handover scenario: a generated model family, the requirement
//! library, and the experiment calibration dataset.
//!
//! Each [`ScenarioVariant`] renders to exactly one model text. The four
//! presets follow the refinement stages of the handover model:
//!
//! | preset | sensors | gripper failure | motion failure | proximity |
//! |---|---|---|---|---|
//! | [`ScenarioVariant::baseline`] | resampled each round | no | no | no |
//! | [`ScenarioVariant::refined_sensors`] | set once | no | no | no |
//! | [`ScenarioVariant::refined_gripper`] | set once | yes | no | no |
//! | [`ScenarioVariant::refined`] | set once | yes | yes | yes |
//!
//! The refined presets carry the experiment-calibrated constants.
//!
//! ```
//! use assurekit::chain::{build_chain, BuildOptions};
//! use assurekit::prop::{check, parse_property};
//! use assurekit::scenario::{build_variant, ScenarioVariant};
//!
//! let model = build_variant(&ScenarioVariant::refined_gripper()).unwrap();
//! let chain = build_chain(&model, BuildOptions::default()).unwrap();
//! let query = parse_property("P=? [ F robotState=handoverSuccessful ]").unwrap();
//! let p = check(&chain, &query).unwrap().probability;
//! assert!((p - 0.8821428574571426).abs() < 1e-9);
//! ```

mod calibration;
mod requirements;

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::model::{parse_model, ConstantSet, Model, ModelError, Value};

pub use calibration::{
    load_calibration, parse_calibration, CalibrationDataset, CalibrationError, ModeCounts,
    FAILURE_MODES,
};
pub use requirements::{requirement_library, requirements_query_text, RequirementSpec, Technique};

/// Flags and parameters selecting one member of the model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioVariant {
    pub one_shot_sensors: bool,
    pub gripper_failure: bool,
    pub motion_failure: bool,
    pub proximity_module: bool,
    /// Sensing rounds that fit in the timeout budget.
    pub sensing_rounds: u32,
    /// Timeout budget in 0.1 s ticks.
    pub timeout_ticks: u32,
    /// Replace the default value of declared constants.
    pub overrides: ConstantSet,
}

impl Default for ScenarioVariant {
    fn default() -> Self {
        ScenarioVariant {
            one_shot_sensors: false,
            gripper_failure: false,
            motion_failure: false,
            proximity_module: false,
            sensing_rounds: 6,
            timeout_ticks: 1000,
            overrides: ConstantSet::new(),
        }
    }
}

/// Release decision is reached 20 ticks (2.0 s) after the sensors agree.
pub const RELEASE_TICKS: u32 = 20;

/// Experiment-calibrated constants, as literal decimals. False-positive
/// rates were not observable and are taken as zero.
pub fn calibrated_constants() -> ConstantSet {
    let mut set = ConstantSet::new();
    for (name, v) in [
        ("pGazeFN", 0.0),
        ("pGazeFP", 0.0),
        ("pPressureFN", 0.071428571),
        ("pPressureFP", 0.0),
        ("pLocationFN", 0.030612245),
        ("pLocationFP", 0.0),
        ("pGripperFailure", 0.02),
        ("pMotionFailure", 0.002),
    ] {
        set.insert(name, Value::Double(v));
    }
    set
}

impl ScenarioVariant {
    /// Resampling sensors, no hardware faults, default constants.
    pub fn baseline() -> Self {
        Self::default()
    }

    /// One-shot sensors with calibrated rates.
    pub fn refined_sensors() -> Self {
        ScenarioVariant {
            one_shot_sensors: true,
            ..Self::default()
        }
        .calibrated()
    }

    /// [`Self::refined_sensors`] plus gripper failure.
    pub fn refined_gripper() -> Self {
        ScenarioVariant {
            one_shot_sensors: true,
            gripper_failure: true,
            ..Self::default()
        }
        .calibrated()
    }

    /// Every refinement, including the proximity module.
    pub fn refined() -> Self {
        ScenarioVariant {
            one_shot_sensors: true,
            gripper_failure: true,
            motion_failure: true,
            proximity_module: true,
            ..Self::default()
        }
        .calibrated()
    }

    /// Preset by name: `baseline`, `refined_sensors`, `refined_gripper`, `refined`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "baseline" => Some(Self::baseline()),
            "refined_sensors" => Some(Self::refined_sensors()),
            "refined_gripper" => Some(Self::refined_gripper()),
            "refined" => Some(Self::refined()),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 4] =
        ["baseline", "refined_sensors", "refined_gripper", "refined"];

    /// Apply [`calibrated_constants`], restricted to constants this
    /// variant declares.
    pub fn calibrated(self) -> Self {
        self.with_overrides(&calibrated_constants())
    }

    /// Add overrides for the names this variant declares; others are skipped.
    pub fn with_overrides(mut self, set: &ConstantSet) -> Self {
        let declared = self.constant_names();
        for (name, v) in set.iter() {
            if declared.iter().any(|d| d == name) {
                self.overrides.insert(name, v);
            }
        }
        self
    }

    /// Names of all constants in the generated text.
    pub fn constant_names(&self) -> Vec<String> {
        self.constants().into_iter().map(|c| c.name).collect()
    }

    fn round_ticks(&self) -> u32 {
        self.timeout_ticks / self.sensing_rounds.max(1)
    }

    fn constants(&self) -> Vec<ConstDecl> {
        let mut out = Vec::new();
        let int = |name: &str, v: i64| ConstDecl::new("int", name, v.to_string());
        let double = |name: &str, e: &str| ConstDecl::new("double", name, e.to_string());

        for (i, s) in ["start", "activatedRobot", "responding", "setGPL", "offTask"]
            .iter()
            .enumerate()
        {
            let c = int(s, i as i64);
            out.push(if i == 0 { c.group("human states") } else { c });
        }
        out.push(int("null", 0).group("sensed conditions"));
        for (i, s) in SENSORS.iter().enumerate() {
            out.push(int(&format!("{}Ok", s.var), 2 * i as i64 + 1));
            out.push(int(&format!("{}NotOk", s.var), 2 * i as i64 + 2));
        }
        for (i, s) in ROBOT_STATES.iter().enumerate() {
            let c = int(s, 1100 + i as i64);
            out.push(if i == 0 { c.group("robot states") } else { c });
        }
        out.push(int("nothing", 0).group("hand contents"));
        out.push(int("leg", 1));
        if self.proximity_module {
            out.push(int("proximityUnknown", 0).group("proximity"));
            out.push(int("proximityOk", 1));
            out.push(int("proximityNotOk", 2));
        }

        out.push(int("timeoutTicks", self.timeout_ticks as i64).group("timing, in 0.1 s ticks"));
        out.push(int("roundTicks", self.round_ticks() as i64));
        out.push(int("releaseTicks", RELEASE_TICKS as i64));

        out.push(double("pDisengages", "0.0").group("human engagement"));
        out.push(double("pStaysOnTask", "1-pDisengages"));
        for s in SENSORS {
            let cap = s.cap;
            out.push(double(&format!("p{cap}FN"), "0.05").group(&format!("{} sensor", s.var)));
            out.push(double(&format!("p{cap}TP"), &format!("1-p{cap}FN")));
            out.push(double(&format!("p{cap}FP"), "0.05"));
            out.push(double(&format!("p{cap}TN"), &format!("1-p{cap}FP")));
        }
        if self.gripper_failure {
            out.push(double("pGripperFailure", "0.02").group("gripper"));
            out.push(double("pGripperOk", "1-pGripperFailure"));
        }
        if self.motion_failure {
            out.push(double("pMotionFailure", "0.002").group("motion planning"));
            out.push(double("pMotionOk", "1-pMotionFailure"));
        }
        if self.proximity_module {
            out.push(double("pClose", "0.075").group("proximity"));
            out.push(double("pFar", "1-pClose"));
        }
        out
    }

    /// Model source text for this variant.
    pub fn render(&self) -> Result<String, ModelError> {
        let mut consts = self.constants();
        for (name, v) in self.overrides.iter() {
            let c = consts
                .iter_mut()
                .find(|c| c.name == name)
                .ok_or_else(|| ModelError::UnknownConstant(name.to_string()))?;
            c.expr = v.to_string();
        }
        let mut t = String::new();
        t.push_str("dtmc\n\n");
        let _ = writeln!(t, "// handover: {}", self.describe());
        for c in &consts {
            if let Some(g) = &c.group {
                let _ = write!(t, "\n// {g}\n");
            }
            let _ = writeln!(t, "const {} {} = {};", c.kind, c.name, c.expr);
        }
        self.human(&mut t);
        for s in SENSORS {
            let _ = write!(
                t,
                "\nmodule {v}\n  {v}State : [0..{hi}] init {v}Ok;\nendmodule\n",
                v = s.var,
                hi = SENSORS.len() * 2
            );
        }
        if self.proximity_module {
            t.push_str(
                "\nmodule proximity\n  \
                 proximityState : [0..2] init proximityUnknown;\n  \
                 [activateRobot] proximityState=proximityUnknown -> pClose : (proximityState'=proximityNotOk) + pFar : (proximityState'=proximityOk);\n\
                 endmodule\n",
            );
        }
        self.robot(&mut t);
        for s in &SENSORS {
            self.sensor(&mut t, s);
        }
        self.timekeeper(&mut t);
        Ok(t)
    }

    fn describe(&self) -> String {
        let sensors = if self.one_shot_sensors {
            "one-shot sensors"
        } else {
            "resampling sensors"
        };
        let mut parts = vec![sensors.to_string()];
        if self.gripper_failure {
            parts.push("gripper failure".into());
        }
        if self.motion_failure {
            parts.push("motion failure".into());
        }
        if self.proximity_module {
            parts.push("proximity".into());
        }
        parts.push(format!("{} sensing rounds", self.sensing_rounds));
        parts.join(", ")
    }

    fn human(&self, t: &mut String) {
        t.push_str(
            "\nmodule human\n  \
             humanState : [0..99] init start;\n  \
             [activateRobot] humanState=start -> (humanState'=activatedRobot);\n  \
             [tick] humanState=activatedRobot -> (humanState'=activatedRobot);\n  \
             [informHumanOfHandoverStart] humanState=activatedRobot -> (humanState'=responding);\n  \
             [humanIsReady] humanState=responding -> (humanState'=setGPL);\n  \
             [tick] humanState=setGPL -> pDisengages : (humanState'=offTask) + pStaysOnTask : (humanState'=setGPL);\n  \
             [tick] humanState=offTask -> true;\n\
             endmodule\n",
        );
    }

    fn robot(&self, t: &mut String) {
        let all_ok = SENSORS
            .iter()
            .map(|s| format!("{v}SensorState={v}Ok", v = s.var))
            .collect::<Vec<_>>()
            .join(" & ");
        let activate = if self.motion_failure {
            "pMotionOk : (robotState'=moveHandToObjectLocation) + pMotionFailure : (robotState'=motionError)"
        } else {
            "(robotState'=moveHandToObjectLocation)"
        };
        let release = if self.gripper_failure {
            "pGripperOk : (robotState'=handoverSuccessful) & (handContents'=nothing) + pGripperFailure : (robotState'=handoverUnsuccessful) & (handContents'=nothing)"
        } else {
            "(robotState'=handoverSuccessful) & (handContents'=nothing)"
        };
        let waiting = "robotState=waitForGPLUpdate & sensingDone";
        let _ = write!(
            t,
            "\nmodule robot
  robotState : [1100..1199] init waiting;
  handContents : [0..1] init nothing;
  sensingDone : bool init false;
  GPLWasOk : bool init false;
  [activateRobot] robotState=waiting -> {activate};
  [movingHand] robotState=moveHandToObjectLocation -> (robotState'=graspObject) & (handContents'=leg);
  [graspingObject] robotState=graspObject -> (robotState'=moveHandToHandoverLocation);
  [informHumanOfHandoverStart] robotState=moveHandToHandoverLocation -> (robotState'=informedHumanOfHandoverStart);
  [humanIsReady] robotState=informedHumanOfHandoverStart -> (robotState'=waitForGPLUpdate);
  [sense] robotState=waitForGPLUpdate & !sensingDone -> (sensingDone'=true);
  [GPLOkSet] {waiting} & humanState=setGPL & {all_ok} -> (robotState'=GPLOk) & (GPLWasOk'=true);
  // another sensing round if one still fits in the budget
  [tick] {waiting} & humanState=setGPL & !({all_ok}) & elapsed+2*roundTicks<=timeoutTicks -> (sensingDone'=false);
  [timeout] {waiting} & humanState=setGPL & !({all_ok}) & elapsed+2*roundTicks>timeoutTicks -> (robotState'=timedOut);
  [] {waiting} & humanState=offTask -> (robotState'=interactionDone);
  [tick] robotState=GPLOk & objectReleaseTimer<releaseTicks -> true;
  [] robotState=GPLOk & objectReleaseTimer=releaseTicks -> {release};
endmodule
"
        );
    }

    fn sensor(&self, t: &mut String, s: &Sensor) {
        let v = s.var;
        let cap = s.cap;
        let _ = write!(t, "\nmodule {v}Sensor\n  {v}SensorState : [0..{}] init null;\n", SENSORS.len() * 2);
        let (latch_guard, latch_set) = if self.one_shot_sensors {
            let _ = writeln!(t, "  {v}SensorSet : bool init false;");
            (format!(" & !{v}SensorSet"), format!(" & ({v}SensorSet'=true)"))
        } else {
            (String::new(), String::new())
        };
        for (truth, wrong, right) in [("Ok", "FN", "TP"), ("NotOk", "TN", "FP")] {
            // `wrong`/`right` name the branch leading to NotOk/Ok respectively
            let _ = writeln!(
                t,
                "  [sense] robotState=waitForGPLUpdate & {v}State={v}{truth}{latch_guard} -> p{cap}{wrong} : ({v}SensorState'={v}NotOk){latch_set} + p{cap}{right} : ({v}SensorState'={v}Ok){latch_set};"
            );
        }
        if self.one_shot_sensors {
            let _ = writeln!(t, "  [sense] robotState=waitForGPLUpdate & {v}SensorSet -> true;");
        }
        t.push_str("endmodule\n");
    }

    fn timekeeper(&self, t: &mut String) {
        t.push_str(
            "\nmodule timekeeper\n  \
             elapsed : [0..timeoutTicks] init 0;\n  \
             objectReleaseTimer : [0..releaseTicks] init 0;\n  \
             [tick] robotState=waitForGPLUpdate -> (elapsed'=elapsed+roundTicks);\n  \
             [tick] robotState=GPLOk & objectReleaseTimer<releaseTicks -> (objectReleaseTimer'=objectReleaseTimer+1);\n  \
             [GPLOkSet] true -> (objectReleaseTimer'=0);\n  \
             [timeout] true -> (elapsed'=timeoutTicks);\n\
             endmodule\n",
        );
    }
}

struct Sensor {
    var: &'static str,
    cap: &'static str,
}

const SENSORS: [Sensor; 3] = [
    Sensor { var: "gaze", cap: "Gaze" },
    Sensor { var: "pressure", cap: "Pressure" },
    Sensor { var: "location", cap: "Location" },
];

const ROBOT_STATES: [&str; 12] = [
    "waiting",
    "moveHandToObjectLocation",
    "graspObject",
    "moveHandToHandoverLocation",
    "informedHumanOfHandoverStart",
    "waitForGPLUpdate",
    "GPLOk",
    "handoverSuccessful",
    "handoverUnsuccessful",
    "timedOut",
    "motionError",
    "interactionDone",
];

struct ConstDecl {
    kind: &'static str,
    name: String,
    expr: String,
    group: Option<String>,
}

impl ConstDecl {
    fn new(kind: &'static str, name: &str, expr: String) -> Self {
        ConstDecl {
            kind,
            name: name.to_string(),
            expr,
            group: None,
        }
    }

    fn group(mut self, g: &str) -> Self {
        self.group = Some(g.to_string());
        self
    }
}

/// Generate and parse the model for `variant`.
///
/// Fails only when an override names a constant the variant does not declare.
pub fn build_variant(variant: &ScenarioVariant) -> Result<Model, ModelError> {
    let model = parse_model(&variant.render()?)?;
    // render substitutes the literal; set_constants adds kind and range checks
    crate::model::set_constants(&model, &variant.overrides)
}

#[cfg(test)]
mod tests;
