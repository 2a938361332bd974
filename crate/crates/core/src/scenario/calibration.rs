use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Failure modes recorded per handover attempt, in table order.
pub const FAILURE_MODES: [&str; 5] = ["grip", "gaze_fn", "pressure_fn", "location_fn", "runtime_error"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeCounts {
    pub occ: u64,
    pub opp: u64,
}

impl ModeCounts {
    pub fn rate(self) -> Option<f64> {
        (self.opp > 0).then(|| self.occ as f64 / self.opp as f64)
    }
}

/// Observed test outcomes and per-mode failure counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationDataset {
    pub tests: u64,
    pub successes: u64,
    pub modes: BTreeMap<String, ModeCounts>,
    /// Counts from a simulation campaign, used where the experiments saw
    /// no occurrence of a mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<Box<CalibrationDataset>>,
}

#[derive(Debug, thiserror::Error)]
pub enum CalibrationError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("calibration schema error: {0}")]
    Schema(String),
    #[error("inconsistent counts: {0}")]
    CountInconsistency(String),
}

impl CalibrationDataset {
    /// Counts for `mode`, if present.
    pub fn mode(&self, mode: &str) -> Option<ModeCounts> {
        self.modes.get(mode).copied()
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.tests == 0 {
            return Err(CalibrationError::CountInconsistency("no tests recorded".into()));
        }
        if self.successes > self.tests {
            return Err(CalibrationError::CountInconsistency(format!(
                "{} successes out of {} tests",
                self.successes, self.tests
            )));
        }
        for (name, c) in &self.modes {
            if !FAILURE_MODES.contains(&name.as_str()) {
                return Err(CalibrationError::Schema(format!(
                    "unknown failure mode `{name}`, expected one of {}",
                    FAILURE_MODES.join(", ")
                )));
            }
            if c.occ > c.opp {
                return Err(CalibrationError::CountInconsistency(format!(
                    "mode `{name}`: {} occurrences exceed {} opportunities",
                    c.occ, c.opp
                )));
            }
            if c.opp > self.tests {
                return Err(CalibrationError::CountInconsistency(format!(
                    "mode `{name}`: {} opportunities exceed {} tests",
                    c.opp, self.tests
                )));
            }
        }
        if let Some(sim) = &self.simulation {
            if sim.simulation.is_some() {
                return Err(CalibrationError::Schema("nested simulation block".into()));
            }
            sim.validate()?;
        }
        Ok(())
    }
}

/// Parse and validate calibration JSON.
pub fn parse_calibration(text: &str) -> Result<CalibrationDataset, CalibrationError> {
    let data: CalibrationDataset =
        serde_json::from_str(text).map_err(|e| CalibrationError::Schema(e.to_string()))?;
    data.validate()?;
    Ok(data)
}

pub fn load_calibration(path: &Path) -> Result<CalibrationDataset, CalibrationError> {
    let text = std::fs::read_to_string(path).map_err(|source| CalibrationError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_calibration(&text)
}
