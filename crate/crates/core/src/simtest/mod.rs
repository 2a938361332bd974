//! Seeded desk-scale simulator of the handover, with two-tiered test
//! generation, online assertion monitors and a coverage collector.
//!
//! Tests are generated first as sequences of abstract human actions, then
//! concretized by sampling low-level parameters (pull force, head angle,
//! injected faults) from a generator seeded per test. [`run_test`] steps
//! the scenario at 0.1 s and returns the trace with one verdict per monitor.
//!
//! ```
//! use assurekit::simtest::{concretize, generate_abstract_tests, run_test, Outcome, ScenarioParams, Strategy};
//!
//! let params = ScenarioParams::fault_free();
//! let abstract_test = generate_abstract_tests(&Strategy::Typical, 1, 7).unwrap().remove(0);
//! let test = concretize(&abstract_test, &params, 11).unwrap();
//! let (trace, verdicts) = run_test(&test, &params);
//! assert_eq!(trace.outcome, Outcome::Success);
//! assert!(verdicts.iter().all(|v| !v.is_failure()));
//! ```

mod campaign;
mod monitors;
mod run;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::ConstantSet;

pub use campaign::{
    coverage_report, run_campaign, run_campaign_detailed, test_seed, CampaignConfig,
    CampaignReport, CoverageRow, CoverageTable, MonitorCounts, RateCounts, TestRun,
};
pub use monitors::{replay, AssertionVerdict, Verdict, MONITOR_IDS};
pub use run::{run_test, trace_csv, Outcome, StepRecord, TestTrace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("strategy weights must be non-negative and sum to 1, got {0:?}")]
    InvalidWeights(Weights),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("malformed abstract test: {0}")]
    MalformedTest(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GazeCue {
    Ok,
    Away,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureCue {
    Pull,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocationCue {
    OnObject,
    Off,
}

/// High-level human action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HumanAction {
    ActivateRobot,
    WaitForHandoverAnnounce,
    SignalReady,
    ApplyGpl {
        gaze: GazeCue,
        pressure: PressureCue,
        location: LocationCue,
    },
    /// The human walks away; `at_step` is the action index it replaces.
    Disengage { at_step: usize },
}

impl HumanAction {
    pub const READY_GPL: HumanAction = HumanAction::ApplyGpl {
        gaze: GazeCue::Ok,
        pressure: PressureCue::Pull,
        location: LocationCue::OnObject,
    };

    pub fn name(&self) -> &'static str {
        match self {
            HumanAction::ActivateRobot => "activate_robot",
            HumanAction::WaitForHandoverAnnounce => "wait_for_announce",
            HumanAction::SignalReady => "signal_ready",
            HumanAction::ApplyGpl { .. } => "apply_gpl",
            HumanAction::Disengage { .. } => "disengage",
        }
    }
}

/// Ordered human actions. Starts with `ActivateRobot`; at most one `Disengage`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<HumanAction>", into = "Vec<HumanAction>")]
pub struct AbstractTest {
    actions: Vec<HumanAction>,
}

impl AbstractTest {
    pub fn new(actions: Vec<HumanAction>) -> Result<Self, SimError> {
        if actions.first() != Some(&HumanAction::ActivateRobot) {
            return Err(SimError::MalformedTest("must start with activate_robot".into()));
        }
        let disengages = actions
            .iter()
            .filter(|a| matches!(a, HumanAction::Disengage { .. }))
            .count();
        if disengages > 1 {
            return Err(SimError::MalformedTest("more than one disengage".into()));
        }
        Ok(AbstractTest { actions })
    }

    /// The fully cooperative sequence.
    pub fn typical() -> Self {
        AbstractTest {
            actions: vec![
                HumanAction::ActivateRobot,
                HumanAction::WaitForHandoverAnnounce,
                HumanAction::SignalReady,
                HumanAction::READY_GPL,
            ],
        }
    }

    pub fn actions(&self) -> &[HumanAction] {
        &self.actions
    }

    /// The GPL cues applied, if the sequence reaches that action.
    pub fn gpl(&self) -> Option<(GazeCue, PressureCue, LocationCue)> {
        self.actions.iter().find_map(|a| match *a {
            HumanAction::ApplyGpl {
                gaze,
                pressure,
                location,
            } => Some((gaze, pressure, location)),
            _ => None,
        })
    }
}

impl TryFrom<Vec<HumanAction>> for AbstractTest {
    type Error = SimError;
    fn try_from(v: Vec<HumanAction>) -> Result<Self, SimError> {
        AbstractTest::new(v)
    }
}

impl From<AbstractTest> for Vec<HumanAction> {
    fn from(t: AbstractTest) -> Self {
        t.actions
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub typical: f64,
    pub not_ready: f64,
    pub disengage: f64,
}

/// How abstract tests are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Typical,
    NotReady,
    Disengage,
    Mixed(Weights),
}

impl Strategy {
    fn validate(&self) -> Result<(), SimError> {
        if let Strategy::Mixed(w) = self {
            let parts = [w.typical, w.not_ready, w.disengage];
            let ok = parts.iter().all(|p| p.is_finite() && *p >= 0.0)
                && (parts.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
            if !ok {
                return Err(SimError::InvalidWeights(*w));
            }
        }
        Ok(())
    }
}

/// Generate `n` abstract tests, deterministically in `(strategy, n, seed)`.
pub fn generate_abstract_tests(
    strategy: &Strategy,
    n: usize,
    seed: u64,
) -> Result<Vec<AbstractTest>, SimError> {
    strategy.validate()?;
    if n == 0 {
        return Err(SimError::InvalidParams("at least one test is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| draw_abstract(strategy, &mut rng)).collect())
}

fn draw_abstract(strategy: &Strategy, rng: &mut ChaCha8Rng) -> AbstractTest {
    match strategy {
        Strategy::Typical => AbstractTest::typical(),
        Strategy::NotReady => {
            // corrupt a non-empty subset of the three cues
            let mask: u8 = rng.gen_range(1..8);
            let mut t = AbstractTest::typical();
            t.actions[3] = HumanAction::ApplyGpl {
                gaze: if mask & 1 != 0 { GazeCue::Away } else { GazeCue::Ok },
                pressure: if mask & 2 != 0 { PressureCue::None } else { PressureCue::Pull },
                location: if mask & 4 != 0 { LocationCue::Off } else { LocationCue::OnObject },
            };
            t
        }
        Strategy::Disengage => {
            let at_step: usize = rng.gen_range(1..=3);
            let mut actions = AbstractTest::typical().actions;
            actions.truncate(at_step);
            actions.push(HumanAction::Disengage { at_step });
            AbstractTest { actions }
        }
        Strategy::Mixed(w) => {
            let u: f64 = rng.gen();
            let pick = if u < w.typical {
                Strategy::Typical
            } else if u < w.typical + w.not_ready {
                Strategy::NotReady
            } else {
                Strategy::Disengage
            };
            draw_abstract(&pick, rng)
        }
    }
}

/// Rates, thresholds and geometry of the simulated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub force_lo_n: f64,
    pub force_hi_n: f64,
    /// Pull force the pressure sensor needs to register.
    pub pressure_threshold_n: f64,
    /// Gaze cone half-angle.
    pub gaze_cone_deg: f64,
    /// Chance a correct gaze still falls outside the cone.
    pub p_gaze_fn: f64,
    pub p_track_loss: f64,
    pub p_grip_failure: f64,
    pub p_motion_error: f64,
    pub p_reset_overspeed: f64,
    pub approach_min_distance_mm: f64,
    /// Human distance from the hand while it closes on the object.
    pub grasp_distance_mm: f64,
    /// Req 6 proximity threshold.
    pub close_threshold_mm: f64,
    /// Req 8 proximity threshold.
    pub near_threshold_mm: f64,
    pub speed_limit_mm_s: f64,
    pub overspeed_mm_s: f64,
    pub overspeed_duration_s: f64,
    /// Sensors agreeing must lead to release within this time.
    pub decision_limit_s: f64,
    pub timeout_s: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            force_lo_n: 1.0,
            force_hi_n: 15.0,
            pressure_threshold_n: 2.0,
            gaze_cone_deg: 30.0,
            p_gaze_fn: 0.0,
            p_track_loss: 0.030612245,
            p_grip_failure: 0.02,
            p_motion_error: 0.002,
            p_reset_overspeed: 0.126,
            approach_min_distance_mm: 150.0,
            grasp_distance_mm: 600.0,
            close_threshold_mm: 200.0,
            near_threshold_mm: 100.0,
            speed_limit_mm_s: 250.0,
            overspeed_mm_s: 300.0,
            overspeed_duration_s: 0.5,
            decision_limit_s: 2.0,
            timeout_s: 100.0,
        }
    }
}

impl ScenarioParams {
    /// Defaults with every injected fault disabled and a force range
    /// entirely above the pressure threshold.
    pub fn fault_free() -> Self {
        ScenarioParams {
            force_lo_n: 2.0,
            p_gaze_fn: 0.0,
            p_track_loss: 0.0,
            p_grip_failure: 0.0,
            p_motion_error: 0.0,
            p_reset_overspeed: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let probs = [
            ("p_gaze_fn", self.p_gaze_fn),
            ("p_track_loss", self.p_track_loss),
            ("p_grip_failure", self.p_grip_failure),
            ("p_motion_error", self.p_motion_error),
            ("p_reset_overspeed", self.p_reset_overspeed),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::InvalidParams(format!("{name} = {p} is not a probability")));
            }
        }
        if self.p_gaze_fn >= 1.0 {
            return Err(SimError::InvalidParams("p_gaze_fn must be below 1".into()));
        }
        if !(self.force_lo_n >= 0.0 && self.force_lo_n < self.force_hi_n) {
            return Err(SimError::InvalidParams(format!(
                "force bounds need 0 <= lo < hi, got [{}, {}]",
                self.force_lo_n, self.force_hi_n
            )));
        }
        let positive = [
            ("approach_min_distance_mm", self.approach_min_distance_mm),
            ("grasp_distance_mm", self.grasp_distance_mm),
            ("gaze_cone_deg", self.gaze_cone_deg),
            ("decision_limit_s", self.decision_limit_s),
            ("timeout_s", self.timeout_s),
            ("speed_limit_mm_s", self.speed_limit_mm_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.overspeed_duration_s >= 0.0 && self.pressure_threshold_n >= 0.0) {
            return Err(SimError::InvalidParams("negative duration or threshold".into()));
        }
        Ok(())
    }

    /// Adopt calibrated model constants. Failure, motion and location
    /// rates map directly; a gaze miss widens the head-angle range; a
    /// pressure miss moves the low end of the force range so that the
    /// share of pulls below the threshold equals the rate. Other names
    /// are ignored.
    pub fn with_constants(mut self, constants: &ConstantSet) -> Result<Self, SimError> {
        let get = |name: &str| constants.get_f64(name);
        if let Some(p) = get("pGripperFailure") {
            self.p_grip_failure = p;
        }
        if let Some(p) = get("pMotionFailure") {
            self.p_motion_error = p;
        }
        if let Some(p) = get("pLocationFN") {
            self.p_track_loss = p;
        }
        if let Some(p) = get("pGazeFN") {
            self.p_gaze_fn = p;
        }
        if let Some(r) = get("pPressureFN") {
            let (t, hi) = (self.pressure_threshold_n, self.force_hi_n);
            if !(0.0..1.0).contains(&r) {
                return Err(SimError::InvalidParams(format!("pPressureFN = {r} cannot be realised")));
            }
            let lo = (t - r * hi) / (1.0 - r);
            if lo < 0.0 {
                return Err(SimError::InvalidParams(format!(
                    "pPressureFN = {r} needs a negative minimum force"
                )));
            }
            self.force_lo_n = lo;
        }
        self.validate()?;
        Ok(self)
    }
}

/// An abstract test with its low-level parameters sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteTest {
    #[serde(rename = "abstract")]
    pub abstract_test: AbstractTest,
    pub pull_force_n: f64,
    pub head_angle_deg: f64,
    pub track_loss: bool,
    pub approach_min_distance_mm: f64,
    pub reset_overspeed: bool,
    pub grip_fails: bool,
    pub motion_error: bool,
    pub rng_seed: u64,
}

/// Sample low-level parameters. Every draw is made in a fixed order
/// whether or not the abstract test uses it.
pub fn concretize(
    abstract_test: &AbstractTest,
    params: &ScenarioParams,
    seed: u64,
) -> Result<ConcreteTest, SimError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let force: f64 = rng.gen_range(params.force_lo_n..params.force_hi_n);
    let angle_ok: f64 = rng.gen_range(0.0..params.gaze_cone_deg / (1.0 - params.p_gaze_fn));
    let angle_away: f64 = rng.gen_range(params.gaze_cone_deg * 1.5..90.0f64.max(params.gaze_cone_deg * 2.0));
    let track_loss = rng.gen_bool(params.p_track_loss);
    let grip_fails = rng.gen_bool(params.p_grip_failure);
    let motion_error = rng.gen_bool(params.p_motion_error);
    let reset_overspeed = rng.gen_bool(params.p_reset_overspeed);

    let (gaze, pressure) = match abstract_test.gpl() {
        Some((g, p, _)) => (g, p),
        None => (GazeCue::Ok, PressureCue::Pull),
    };
    Ok(ConcreteTest {
        abstract_test: abstract_test.clone(),
        pull_force_n: match pressure {
            PressureCue::Pull => force,
            PressureCue::None => 0.0,
        },
        head_angle_deg: match gaze {
            GazeCue::Ok => angle_ok,
            GazeCue::Away => angle_away,
        },
        track_loss,
        approach_min_distance_mm: params.approach_min_distance_mm,
        reset_overspeed,
        grip_fails,
        motion_error,
        rng_seed: seed,
    })
}
