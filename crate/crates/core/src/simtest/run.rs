use serde::{Deserialize, Serialize};

use super::monitors::{AssertionVerdict, Bank};
use super::{ConcreteTest, HumanAction, LocationCue, ScenarioParams};

/// Steps per simulated second.
pub(crate) const STEPS_PER_S: f64 = 10.0;

const RESET_STEPS: usize = 10;
const REACH_STEPS: usize = 10;
const GRASP_STEPS: usize = 5;
const CARRY_STEPS: usize = 20;
const ANNOUNCE_STEPS: usize = 10;
const SENSE_STEPS: usize = 10;
/// Opening the gripper takes 2.0 s.
const RELEASE_STEPS: usize = 20;

const RESET_SPEED: f64 = 100.0;
const MOVE_SPEED: f64 = 200.0;

pub(crate) mod event {
    pub const TEST_START: &str = "test_start";
    pub const ACTIVATE: &str = "activate";
    pub const GRASP: &str = "grasp";
    pub const RUNTIME_ERROR: &str = "runtime_error";
    pub const OBJECT_DROPPED: &str = "object_dropped";
    pub const ANNOUNCE: &str = "announce";
    pub const READY: &str = "ready";
    pub const GPL_APPLIED: &str = "gpl_applied";
    pub const WINDOW_START: &str = "window_start";
    pub const SENSORS_OK: &str = "sensors_ok";
    pub const SENSORS_NOT_OK: &str = "sensors_not_ok";
    pub const RELEASED: &str = "released";
    pub const NOT_RELEASED: &str = "not_released";
    pub const TIMEOUT: &str = "timeout";
    pub const DISENGAGED: &str = "disengaged";
}

/// Robot state while the gripper closes on the object.
pub(crate) const HAND_CLOSING: &str = "graspObject";
pub(crate) const RESETTING: &str = "reset";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    NotReleased,
    Timeout,
    GripFailure,
    RuntimeError,
    Disengaged,
}

impl Outcome {
    pub const ALL: [Outcome; 6] = [
        Outcome::Success,
        Outcome::NotReleased,
        Outcome::Timeout,
        Outcome::GripFailure,
        Outcome::RuntimeError,
        Outcome::Disengaged,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::NotReleased => "not_released",
            Outcome::Timeout => "timeout",
            Outcome::GripFailure => "grip_failure",
            Outcome::RuntimeError => "runtime_error",
            Outcome::Disengaged => "disengaged",
        }
    }
}

/// One 0.1 s step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub time_s: f64,
    pub human_action: Option<&'static str>,
    pub robot_state: &'static str,
    pub gaze_ok: bool,
    pub pressure_force_n: f64,
    pub location_tracked: bool,
    pub hand_speed_mm_s: f64,
    pub human_robot_distance_mm: f64,
    pub event: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestTrace {
    pub records: Vec<StepRecord>,
    pub outcome: Outcome,
}

impl TestTrace {
    /// Step of the first record tagged `tag`.
    pub fn find_event(&self, tag: &str) -> Option<usize> {
        self.records.iter().position(|r| r.event == Some(tag))
    }
}

/// Trace as CSV, one row per step.
pub fn trace_csv(trace: &TestTrace) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &trace.records {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
}

#[derive(Clone, Copy, Default)]
struct Readings {
    gaze_ok: bool,
    force: f64,
    tracked: bool,
}

struct Sim<'a> {
    test: &'a ConcreteTest,
    params: &'a ScenarioParams,
    records: Vec<StepRecord>,
    bank: Bank,
    /// Next human action not yet performed.
    next: usize,
}

impl<'a> Sim<'a> {
    fn push(
        &mut self,
        robot_state: &'static str,
        speed: f64,
        distance: f64,
        readings: Readings,
        human_action: Option<&'static str>,
        event: Option<&'static str>,
    ) {
        let step = self.records.len();
        let rec = StepRecord {
            step,
            time_s: step as f64 / STEPS_PER_S,
            human_action,
            robot_state,
            gaze_ok: readings.gaze_ok,
            pressure_force_n: readings.force,
            location_tracked: readings.tracked,
            hand_speed_mm_s: speed,
            human_robot_distance_mm: distance,
            event,
        };
        self.bank.observe(&rec);
        self.records.push(rec);
    }

    fn peek(&self) -> Option<HumanAction> {
        self.test.abstract_test.actions().get(self.next).copied()
    }

    fn timeout_steps(&self) -> usize {
        (self.params.timeout_s * STEPS_PER_S).round() as usize
    }

    /// Idle in `robot_state` until the timeout budget is spent.
    fn wait_out(&mut self, robot_state: &'static str, distance: f64) -> Outcome {
        while self.records.len() < self.timeout_steps() {
            self.push(robot_state, 0.0, distance, Readings::default(), None, None);
        }
        self.push("timedOut", 0.0, distance, Readings::default(), None, Some(event::TIMEOUT));
        Outcome::Timeout
    }

    fn disengage(&mut self, distance: f64) -> Outcome {
        self.next += 1;
        self.push(
            "interactionDone",
            0.0,
            distance,
            Readings::default(),
            Some("disengage"),
            Some(event::DISENGAGED),
        );
        Outcome::Disengaged
    }

    fn run(&mut self) -> Outcome {
        let p = self.params;
        let t = self.test;
        let far = p.grasp_distance_mm;
        let near = t.approach_min_distance_mm;

        let overspeed_steps = (p.overspeed_duration_s * STEPS_PER_S).round() as usize;
        for k in 0..RESET_STEPS {
            let speed = if t.reset_overspeed && k < overspeed_steps {
                p.overspeed_mm_s
            } else {
                RESET_SPEED
            };
            let ev = (k == 0).then_some(event::TEST_START);
            self.push(RESETTING, speed, far, Readings::default(), None, ev);
        }

        self.next = 1;
        self.push("waiting", 0.0, far, Readings::default(), Some("activate_robot"), Some(event::ACTIVATE));
        for _ in 0..REACH_STEPS {
            self.push("moveHandToObjectLocation", MOVE_SPEED, far, Readings::default(), None, None);
        }
        for k in 0..GRASP_STEPS {
            let ev = (k == 0).then_some(event::GRASP);
            self.push(HAND_CLOSING, 0.0, far, Readings::default(), None, ev);
        }

        // the carry move is the planner call that can fail
        if t.motion_error {
            self.push("motionError", 0.0, far, Readings::default(), None, Some(event::RUNTIME_ERROR));
            return Outcome::RuntimeError;
        }
        for k in 0..CARRY_STEPS {
            let frac = (k + 1) as f64 / CARRY_STEPS as f64;
            let d = far + (near - far) * frac;
            if t.grip_fails && k == CARRY_STEPS / 2 {
                self.push("gripFailure", 0.0, d, Readings::default(), None, Some(event::OBJECT_DROPPED));
                return Outcome::GripFailure;
            }
            self.push("moveHandToHandoverLocation", MOVE_SPEED, d, Readings::default(), None, None);
        }

        let mut action = None;
        match self.peek() {
            Some(HumanAction::Disengage { .. }) => {
                return self.disengage(near)
            }
            Some(HumanAction::WaitForHandoverAnnounce) => {
                self.next += 1;
                action = Some("wait_for_announce");
            }
            _ => {}
        }
        for k in 0..ANNOUNCE_STEPS {
            let (a, ev) = if k == 0 {
                (action, Some(event::ANNOUNCE))
            } else {
                (None, None)
            };
            self.push("informedHumanOfHandoverStart", 0.0, near, Readings::default(), a, ev);
        }

        match self.peek() {
            Some(HumanAction::SignalReady) => {
                self.next += 1;
                self.push("waitForGPLUpdate", 0.0, near, Readings::default(), Some("signal_ready"), Some(event::READY));
            }
            Some(HumanAction::Disengage { .. }) => {
                return self.disengage(near)
            }
            _ => return self.wait_out("informedHumanOfHandoverStart", near),
        }

        let on_object = match self.peek() {
            Some(HumanAction::ApplyGpl { location, .. }) => {
                self.next += 1;
                self.push("waitForGPLUpdate", 0.0, near, Readings::default(), Some("apply_gpl"), Some(event::GPL_APPLIED));
                location == LocationCue::OnObject
            }
            Some(HumanAction::Disengage { .. }) => return self.disengage(near),
            _ => return self.wait_out("waitForGPLUpdate", near),
        };

        let readings = Readings {
            gaze_ok: t.head_angle_deg <= p.gaze_cone_deg,
            force: t.pull_force_n,
            tracked: on_object && !t.track_loss,
        };
        for k in 0..SENSE_STEPS {
            let ev = (k == 0).then_some(event::WINDOW_START);
            self.push("waitForGPLUpdate", 0.0, near, readings, None, ev);
        }
        let ok = readings.gaze_ok && readings.force >= p.pressure_threshold_n && readings.tracked;
        if !ok {
            self.push("waitForGPLUpdate", 0.0, near, readings, None, Some(event::SENSORS_NOT_OK));
            self.push("noRelease", 0.0, near, readings, None, Some(event::NOT_RELEASED));
            return Outcome::NotReleased;
        }
        self.push("GPLOk", 0.0, near, readings, None, Some(event::SENSORS_OK));
        for _ in 1..RELEASE_STEPS {
            self.push("GPLOk", 0.0, near, readings, None, None);
        }
        self.push("handoverSuccessful", 0.0, near, readings, None, Some(event::RELEASED));
        Outcome::Success
    }
}

/// Simulate one test. Monitors observe every step as it is produced.
pub fn run_test(test: &ConcreteTest, params: &ScenarioParams) -> (TestTrace, Vec<AssertionVerdict>) {
    let mut sim = Sim {
        test,
        params,
        records: Vec::new(),
        bank: Bank::new(params),
        next: 0,
    };
    let outcome = sim.run();
    let verdicts = sim.bank.finish();
    (
        TestTrace {
            records: sim.records,
            outcome,
        },
        verdicts,
    )
}
