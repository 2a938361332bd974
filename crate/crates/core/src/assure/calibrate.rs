use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{ConstantSet, Value};
use crate::scenario::{CalibrationDataset, ModeCounts, FAILURE_MODES};

/// Model constant each failure mode calibrates, with its complement.
const BINDINGS: [(&str, &str, &str); 5] = [
    ("grip", "pGripperFailure", "pGripperOk"),
    ("gaze_fn", "pGazeFN", "pGazeTP"),
    ("pressure_fn", "pPressureFN", "pPressureTP"),
    ("location_fn", "pLocationFN", "pLocationTP"),
    ("runtime_error", "pMotionFailure", "pMotionOk"),
];

/// False-positive modes: a sensor reporting a cue the human did not give.
/// The experiments never present that situation, so they cannot be counted.
const UNOBSERVED: [(&str, &str, &str); 3] = [
    ("gaze_fp", "pGazeFP", "pGazeTN"),
    ("pressure_fp", "pPressureFP", "pPressureTN"),
    ("location_fp", "pLocationFP", "pLocationTN"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateSource {
    Experiment,
    /// Experiments saw no occurrence but simulation did.
    Simulation,
    /// No opportunities; the constant keeps its model default.
    NotObservable,
    /// Never observable; taken as zero.
    Assumed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRate {
    pub occ: u64,
    pub opp: u64,
    /// occ / opp from the experiments.
    pub rate: Option<f64>,
    pub constant: &'static str,
    /// Value bound to `constant`, rounded to nine decimals.
    pub adopted: Option<f64>,
    pub source: RateSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRates {
    pub modes: BTreeMap<String, ModeRate>,
}

impl FailureRates {
    pub fn get(&self, mode: &str) -> Option<&ModeRate> {
        self.modes.get(mode)
    }
}

/// A mode whose rate could not be measured.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationFlag {
    pub mode: String,
    pub constant: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub rates: FailureRates,
    pub constants: ConstantSet,
    pub not_observable: Vec<CalibrationFlag>,
}

fn literal(p: f64) -> f64 {
    (p * 1e9).round() / 1e9
}

/// Failure rates and the model constants they imply. Experiment counts are
/// used directly unless a mode never occurred there but did occur in the
/// attached simulation counts, in which case the simulation rate is the
/// conservative choice.
pub fn calibrate(data: &CalibrationDataset) -> Calibration {
    let mut modes = BTreeMap::new();
    let mut constants = ConstantSet::new();
    let mut flags = Vec::new();
    let bind = |constants: &mut ConstantSet, name: &str, complement: &str, p: f64| {
        constants.insert(name, Value::Double(p));
        constants.insert(complement, Value::Double(1.0 - p));
    };

    for (mode, constant, complement) in BINDINGS {
        debug_assert!(FAILURE_MODES.contains(&mode));
        let exp = data.mode(mode).unwrap_or(ModeCounts { occ: 0, opp: 0 });
        let sim = data.simulation.as_ref().and_then(|s| s.mode(mode));
        let (adopted, source) = match (exp.rate(), sim) {
            (Some(_), Some(s)) if exp.occ == 0 && s.occ > 0 => (s.rate(), RateSource::Simulation),
            (Some(r), _) => (Some(r), RateSource::Experiment),
            (None, _) => (None, RateSource::NotObservable),
        };
        let adopted = adopted.map(literal);
        match adopted {
            Some(p) => bind(&mut constants, constant, complement, p),
            None => flags.push(CalibrationFlag {
                mode: mode.to_string(),
                constant: constant.to_string(),
                note: "not observable: no opportunities recorded; model default kept".into(),
            }),
        }
        modes.insert(
            mode.to_string(),
            ModeRate {
                occ: exp.occ,
                opp: exp.opp,
                rate: exp.rate(),
                constant,
                adopted,
                source,
            },
        );
    }

    for (mode, constant, complement) in UNOBSERVED {
        bind(&mut constants, constant, complement, 0.0);
        flags.push(CalibrationFlag {
            mode: mode.to_string(),
            constant: constant.to_string(),
            note: "not observable: false positives are never presented; assumed 0".into(),
        });
        modes.insert(
            mode.to_string(),
            ModeRate {
                occ: 0,
                opp: 0,
                rate: None,
                constant,
                adopted: Some(0.0),
                source: RateSource::Assumed,
            },
        );
    }

    Calibration {
        rates: FailureRates { modes },
        constants,
        not_observable: flags,
    }
}
