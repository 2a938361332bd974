//! Assertion monitors. [`Bank`] runs them online as steps are produced;
//! [`replay`] recomputes the same verdicts offline from a finished trace.

use serde::Serialize;

use super::run::{event, StepRecord, TestTrace, HAND_CLOSING, RESETTING, STEPS_PER_S};
use super::ScenarioParams;

/// Monitor ids in report order.
pub const MONITOR_IDS: [&str; 9] = ["M1", "Mgrip", "M2", "M3", "M4", "M5", "M6", "M7", "M8"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssertionVerdict {
    pub monitor: &'static str,
    pub triggered: bool,
    /// Untriggered monitors pass vacuously.
    pub result: Verdict,
    pub trigger_step: Option<usize>,
    pub detail: String,
}

impl AssertionVerdict {
    pub fn is_failure(&self) -> bool {
        self.triggered && self.result == Verdict::Fail
    }

    fn idle(monitor: &'static str) -> Self {
        AssertionVerdict {
            monitor,
            triggered: false,
            result: Verdict::Pass,
            trigger_step: None,
            detail: "not triggered".into(),
        }
    }

    fn resolved(monitor: &'static str, trigger: usize, result: Verdict, detail: &str) -> Self {
        AssertionVerdict {
            monitor,
            triggered: true,
            result,
            trigger_step: Some(trigger),
            detail: detail.to_string(),
        }
    }
}

mod detail {
    pub const RELEASED: &str = "object released";
    pub const DROPPED: &str = "object left the hand before sensing completed";
    pub const NOT_OK: &str = "sensors did not agree the human was ready";
    pub const NO_SENSING: &str = "sensing never completed";
    pub const NOT_RELEASED: &str = "robot decided not to release";
    pub const HELD: &str = "object held until the handover ended";
    pub const ABORTED: &str = "test aborted before resolution";
    pub const CRASHED: &str = "control code aborted before a decision";
    pub const ON_TIME: &str = "decision reached within the limit";
    pub const LATE: &str = "release later than the limit";
    pub const DECIDED: &str = "robot reached a decision";
    pub const CLOSED_NEAR: &str = "hand closed while the human was close";
    pub const OPEN_NEAR: &str = "hand stayed open while the human was close";
    pub const OVERSPEED: &str = "speed above the limit";
    pub const WITHIN_LIMIT: &str = "speed within the limit";
}

/// Online state of one monitor.
#[derive(Debug, Clone)]
enum Machine {
    Idle,
    /// Triggered at the given step; `mark` carries monitor-specific state.
    Open { trigger: usize, mark: Option<usize> },
    Done(AssertionVerdict),
}

/// All monitors, fed one step at a time.
pub(crate) struct Bank {
    machines: Vec<(&'static str, Machine)>,
    close_mm: f64,
    near_mm: f64,
    speed_limit: f64,
    decision_steps: usize,
}

impl Bank {
    pub(crate) fn new(params: &ScenarioParams) -> Self {
        Bank {
            machines: MONITOR_IDS.iter().map(|&id| (id, Machine::Idle)).collect(),
            close_mm: params.close_threshold_mm,
            near_mm: params.near_threshold_mm,
            speed_limit: params.speed_limit_mm_s,
            decision_steps: (params.decision_limit_s * STEPS_PER_S).round() as usize,
        }
    }

    pub(crate) fn observe(&mut self, r: &StepRecord) {
        let ev = r.event.unwrap_or("");
        let cfg = (self.close_mm, self.near_mm, self.speed_limit, self.decision_steps);
        for (id, m) in self.machines.iter_mut() {
            if let Machine::Done(_) = m {
                continue;
            }
            *m = step(id, std::mem::replace(m, Machine::Idle), r, ev, cfg);
        }
    }

    pub(crate) fn finish(self) -> Vec<AssertionVerdict> {
        self.machines
            .into_iter()
            .map(|(id, m)| match m {
                Machine::Idle => AssertionVerdict::idle(id),
                Machine::Done(v) => v,
                Machine::Open { trigger, .. } => match id {
                    // invariant monitors hold if nothing went wrong by the end
                    "M6" => AssertionVerdict::resolved(id, trigger, Verdict::Pass, detail::OPEN_NEAR),
                    "M8" => AssertionVerdict::resolved(id, trigger, Verdict::Pass, detail::WITHIN_LIMIT),
                    _ => AssertionVerdict::resolved(id, trigger, Verdict::Unresolved, detail::ABORTED),
                },
            })
            .collect()
    }
}

fn step(
    id: &'static str,
    m: Machine,
    r: &StepRecord,
    ev: &str,
    (close_mm, near_mm, limit, decision_steps): (f64, f64, f64, usize),
) -> Machine {
    use Verdict::*;
    let done = |t: usize, v: Verdict, d: &str| Machine::Done(AssertionVerdict::resolved(id, t, v, d));
    let open = |t: usize| Machine::Open { trigger: t, mark: None };
    let s = r.step;

    // triggers
    let m = match m {
        Machine::Idle => {
            let fires = match id {
                "M1" | "Mgrip" | "M4" => ev == event::GRASP,
                "M2" => ev == event::SENSORS_NOT_OK,
                "M3" => ev == event::SENSORS_OK,
                "M5" | "M7" => ev == event::TEST_START,
                "M6" => r.human_robot_distance_mm < close_mm,
                "M8" => r.human_robot_distance_mm < near_mm,
                _ => false,
            };
            if !fires {
                return Machine::Idle;
            }
            open(s)
        }
        other => other,
    };
    let Machine::Open { trigger: t, mark } = m else {
        return m;
    };

    // postconditions, checked from the trigger step on
    match id {
        "M1" => match ev {
            event::OBJECT_DROPPED => done(t, Fail, detail::DROPPED),
            event::SENSORS_NOT_OK => done(t, Fail, detail::NOT_OK),
            event::TIMEOUT | event::DISENGAGED => done(t, Fail, detail::NO_SENSING),
            event::RELEASED => done(t, Pass, detail::RELEASED),
            _ => m,
        },
        "Mgrip" => match ev {
            event::OBJECT_DROPPED => done(t, Fail, detail::DROPPED),
            event::RELEASED | event::NOT_RELEASED | event::TIMEOUT | event::DISENGAGED => {
                done(t, Pass, detail::HELD)
            }
            _ => m,
        },
        "M2" => match ev {
            event::RELEASED => done(t, Fail, detail::RELEASED),
            event::NOT_RELEASED => done(t, Pass, detail::NOT_RELEASED),
            _ => m,
        },
        "M3" => match ev {
            event::RELEASED => done(t, Pass, detail::RELEASED),
            event::NOT_RELEASED => done(t, Fail, detail::NOT_RELEASED),
            _ => m,
        },
        "M4" => match ev {
            event::RUNTIME_ERROR => done(t, Fail, detail::CRASHED),
            event::SENSORS_OK => Machine::Open { trigger: t, mark: Some(s) },
            event::RELEASED => match mark {
                Some(ok) if s - ok > decision_steps => done(t, Fail, detail::LATE),
                _ => done(t, Pass, detail::ON_TIME),
            },
            event::NOT_RELEASED | event::TIMEOUT | event::DISENGAGED | event::OBJECT_DROPPED => {
                done(t, Pass, detail::ON_TIME)
            }
            _ => m,
        },
        "M5" => match ev {
            event::RUNTIME_ERROR => done(t, Fail, detail::CRASHED),
            event::RELEASED | event::NOT_RELEASED | event::TIMEOUT | event::DISENGAGED | event::OBJECT_DROPPED => {
                done(t, Pass, detail::DECIDED)
            }
            _ => m,
        },
        "M6" => {
            if r.human_robot_distance_mm < close_mm && r.robot_state == HAND_CLOSING {
                done(t, Fail, detail::CLOSED_NEAR)
            } else {
                m
            }
        }
        "M7" => {
            if r.robot_state != RESETTING {
                done(t, Pass, detail::WITHIN_LIMIT)
            } else if r.hand_speed_mm_s > limit {
                done(t, Fail, detail::OVERSPEED)
            } else {
                m
            }
        }
        "M8" => {
            if r.human_robot_distance_mm < near_mm && r.hand_speed_mm_s >= limit {
                done(t, Fail, detail::OVERSPEED)
            } else {
                m
            }
        }
        _ => m,
    }
}

/// Recompute every monitor's verdict from a complete trace.
pub fn replay(trace: &TestTrace, params: &ScenarioParams) -> Vec<AssertionVerdict> {
    let recs = &trace.records;
    let at = |tag: &str| trace.find_event(tag);
    let first_of = |tags: &[&str]| {
        recs.iter()
            .find(|r| r.event.is_some_and(|e| tags.contains(&e)))
            .map(|r| (r.step, r.event.unwrap_or("")))
    };
    // a terminal event other than a runtime error, plus any extra tags
    let ended = |extra: &[&str]| {
        recs.iter().any(|r| {
            r.event.is_some_and(|e| {
                [event::RELEASED, event::NOT_RELEASED, event::TIMEOUT, event::DISENGAGED].contains(&e)
                    || extra.contains(&e)
            })
        })
    };
    let decision_steps = (params.decision_limit_s * STEPS_PER_S).round() as usize;
    let limit = params.speed_limit_mm_s;
    use Verdict::*;

    MONITOR_IDS
        .iter()
        .map(|&id| {
            let verdict = |t: usize, v: Verdict, d: &str| AssertionVerdict::resolved(id, t, v, d);
            let unresolved = |t: usize| verdict(t, Unresolved, detail::ABORTED);
            match id {
                "M1" => match at(event::GRASP) {
                    None => AssertionVerdict::idle(id),
                    Some(t) => match first_of(&[
                        event::OBJECT_DROPPED,
                        event::SENSORS_NOT_OK,
                        event::TIMEOUT,
                        event::DISENGAGED,
                        event::RELEASED,
                    ]) {
                        Some((_, event::OBJECT_DROPPED)) => verdict(t, Fail, detail::DROPPED),
                        Some((_, event::SENSORS_NOT_OK)) => verdict(t, Fail, detail::NOT_OK),
                        Some((_, event::RELEASED)) => verdict(t, Pass, detail::RELEASED),
                        Some(_) => verdict(t, Fail, detail::NO_SENSING),
                        None => unresolved(t),
                    },
                },
                "Mgrip" => match at(event::GRASP) {
                    None => AssertionVerdict::idle(id),
                    Some(t) if at(event::OBJECT_DROPPED).is_some() => verdict(t, Fail, detail::DROPPED),
                    Some(t) if at(event::RUNTIME_ERROR).is_some() => unresolved(t),
                    Some(t) => verdict(t, Pass, detail::HELD),
                },
                "M2" => match at(event::SENSORS_NOT_OK) {
                    None => AssertionVerdict::idle(id),
                    Some(t) if at(event::RELEASED).is_some() => verdict(t, Fail, detail::RELEASED),
                    Some(t) if at(event::NOT_RELEASED).is_some() => verdict(t, Pass, detail::NOT_RELEASED),
                    Some(t) => unresolved(t),
                },
                "M3" => match at(event::SENSORS_OK) {
                    None => AssertionVerdict::idle(id),
                    Some(t) if at(event::RELEASED).is_some() => verdict(t, Pass, detail::RELEASED),
                    Some(t) if at(event::NOT_RELEASED).is_some() => verdict(t, Fail, detail::NOT_RELEASED),
                    Some(t) => unresolved(t),
                },
                "M4" => match at(event::GRASP) {
                    None => AssertionVerdict::idle(id),
                    Some(t) if at(event::RUNTIME_ERROR).is_some() => verdict(t, Fail, detail::CRASHED),
                    Some(t) => match (at(event::SENSORS_OK), at(event::RELEASED)) {
                        (Some(ok), Some(rel)) if rel - ok > decision_steps => verdict(t, Fail, detail::LATE),
                        _ if ended(&[event::OBJECT_DROPPED]) => verdict(t, Pass, detail::ON_TIME),
                        _ => unresolved(t),
                    },
                },
                "M5" => match at(event::TEST_START) {
                    None => AssertionVerdict::idle(id),
                    Some(t) if at(event::RUNTIME_ERROR).is_some() => verdict(t, Fail, detail::CRASHED),
                    Some(t) if ended(&[event::OBJECT_DROPPED]) => verdict(t, Pass, detail::DECIDED),
                    Some(t) => unresolved(t),
                },
                "M6" => {
                    let close = |r: &&StepRecord| r.human_robot_distance_mm < params.close_threshold_mm;
                    match recs.iter().find(close) {
                        None => AssertionVerdict::idle(id),
                        Some(first) if recs.iter().filter(close).any(|r| r.robot_state == HAND_CLOSING) => {
                            verdict(first.step, Fail, detail::CLOSED_NEAR)
                        }
                        Some(first) => verdict(first.step, Pass, detail::OPEN_NEAR),
                    }
                }
                "M7" => match at(event::TEST_START) {
                    None => AssertionVerdict::idle(id),
                    Some(t) => {
                        let reset = recs.iter().take_while(|r| r.robot_state == RESETTING);
                        if reset.clone().any(|r| r.hand_speed_mm_s > limit) {
                            verdict(t, Fail, detail::OVERSPEED)
                        } else if recs.iter().all(|r| r.robot_state == RESETTING) {
                            unresolved(t)
                        } else {
                            verdict(t, Pass, detail::WITHIN_LIMIT)
                        }
                    }
                },
                "M8" => {
                    let near = |r: &&StepRecord| r.human_robot_distance_mm < params.near_threshold_mm;
                    match recs.iter().find(near) {
                        None => AssertionVerdict::idle(id),
                        Some(first) if recs.iter().filter(near).any(|r| r.hand_speed_mm_s >= limit) => {
                            verdict(first.step, Fail, detail::OVERSPEED)
                        }
                        Some(first) => verdict(first.step, Pass, detail::WITHIN_LIMIT),
                    }
                }
                _ => unreachable!("unknown monitor {id}"),
            }
        })
        .collect()
}
