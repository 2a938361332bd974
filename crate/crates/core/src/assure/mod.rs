//! Assurances from formal checking, simulation and experiments, and the
//! machinery to reconcile them: binomial intervals, cross-technique
//! comparison with range-based consensus, calibration of model constants
//! from observed failure counts, and an append-only ledger.
//!
//! ```
//! use assurekit::assure::{compare, interval};
//!
//! let (lo, hi) = interval(88, 100, 0.95).unwrap().bounds();
//! assert!(lo < 0.88 && 0.88 < hi);
//!
//! # use assurekit::assure::{Assurance, Kind};
//! # use assurekit::scenario::Technique;
//! let a = |id: &str, t, v| Assurance::new(id, "1", t, Kind::Probability, v);
//! let report = compare(
//!     &[
//!         a("A1", Technique::Formal, 0.92),
//!         a("A2", Technique::Simulation, 0.98),
//!         a("A3", Technique::Experiment, 0.93),
//!     ],
//!     0.01,
//! )
//! .unwrap();
//! assert!(!report.agrees());
//! assert_eq!(report.consensus.unwrap().to_string(), "at least 0.92");
//! ```

mod calibrate;
mod compare;
mod interval;
mod ledger;

use serde::{Deserialize, Serialize};

use crate::scenario::Technique;

pub use calibrate::{calibrate, Calibration, CalibrationFlag, FailureRates, ModeRate, RateSource};
pub use compare::{compare, Agreement, AgreementReport, Consensus, PairDiff, CAUSES, DEFAULT_TOLERANCE};
pub use interval::{clopper_pearson, interval, wilson, Interval};
pub use ledger::Ledger;

#[derive(Debug, thiserror::Error)]
pub enum AssureError {
    #[error("invalid counts: {0}")]
    InvalidCounts(String),
    #[error("cannot compare probability-like and verdict assurances")]
    MixedKinds,
    #[error("assurances concern different requirements: {0} and {1}")]
    MixedRequirements(String, String),
    #[error("need at least two assurances to compare, got {0}")]
    TooFew(usize),
    #[error("invalid assurance {id}: {reason}")]
    InvalidAssurance { id: String, reason: String },
    #[error("corrupt ledger at line {line}: {message}")]
    CorruptLedger { line: usize, message: String },
    #[error("ledger i/o on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Probability,
    /// A bound check; `value` is 1 for true and 0 for false.
    Verdict,
    /// An observed proportion.
    Rate,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Probability => "probability",
            Kind::Verdict => "verdict",
            Kind::Rate => "rate",
        }
    }

    pub fn is_numeric(self) -> bool {
        self != Kind::Verdict
    }
}

/// Where an assurance came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    /// Hash of the model, config or dataset that produced the value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    pub tool_version: String,
}

/// One technique's claim about one requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assurance {
    pub id: String,
    pub requirement: String,
    pub technique: Technique,
    pub kind: Kind,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
    /// Conditions the claim holds under, e.g. "typical use case".
    #[serde(default)]
    pub constraints: String,
    pub provenance: Provenance,
    /// Ledger sequence number; assigned on append.
    #[serde(default)]
    pub created_at: u64,
}

impl Assurance {
    pub fn new(id: &str, requirement: &str, technique: Technique, kind: Kind, value: f64) -> Self {
        Assurance {
            id: id.to_string(),
            requirement: requirement.to_string(),
            technique,
            kind,
            value,
            interval: None,
            constraints: String::new(),
            provenance: Provenance {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                ..Provenance::default()
            },
            created_at: 0,
        }
    }

    pub fn with_interval(mut self, interval: Interval) -> Self {
        self.interval = Some(interval);
        self
    }

    pub fn with_constraints(mut self, constraints: &str) -> Self {
        self.constraints = constraints.to_string();
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn validate(&self) -> Result<(), AssureError> {
        let bad = |reason: String| {
            Err(AssureError::InvalidAssurance {
                id: self.id.clone(),
                reason,
            })
        };
        if !(0.0..=1.0).contains(&self.value) {
            return bad(format!("value {} outside [0, 1]", self.value));
        }
        if self.kind == Kind::Verdict && self.value != 0.0 && self.value != 1.0 {
            return bad(format!("verdict value must be 0 or 1, got {}", self.value));
        }
        if let Some(i) = &self.interval {
            if !(i.lo <= self.value && self.value <= i.hi) {
                return bad(format!("value {} outside its interval [{}, {}]", self.value, i.lo, i.hi));
            }
        }
        Ok(())
    }
}
