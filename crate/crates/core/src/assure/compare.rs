use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Assurance, AssureError};

/// Default tolerance for probability comparisons.
pub const DEFAULT_TOLERANCE: f64 = 0.03;

/// Possible causes of a disagreement, listed for a human to investigate.
pub const CAUSES: [&str; 3] = ["system-model", "requirement-model", "tool"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agreement {
    Agree,
    Disagree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDiff {
    pub a: String,
    pub b: String,
    pub diff: f64,
}

/// The strongest lower bound every compared assurance supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Consensus {
    pub direction: String,
    pub value: f64,
}

impl Consensus {
    fn at_least(value: f64) -> Self {
        Consensus {
            direction: "at least".into(),
            value,
        }
    }
}

impl fmt::Display for Consensus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.direction, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub requirement: String,
    /// Ids of the compared assurances, sorted.
    pub compared: Vec<String>,
    pub pairwise: Vec<PairDiff>,
    pub verdict: Agreement,
    pub tolerance: f64,
    /// Present for probability and rate kinds, whatever the verdict.
    pub consensus: Option<Consensus>,
    /// Empty on agreement.
    pub suspected_causes: Vec<String>,
}

impl AgreementReport {
    pub fn agrees(&self) -> bool {
        self.verdict == Agreement::Agree
    }
}

/// Compare assurances for one requirement. Probabilities and rates agree
/// when every pairwise difference is within `tolerance`; verdicts agree
/// when all are equal.
pub fn compare(assurances: &[Assurance], tolerance: f64) -> Result<AgreementReport, AssureError> {
    if assurances.len() < 2 {
        return Err(AssureError::TooFew(assurances.len()));
    }
    for a in assurances {
        a.validate()?;
    }
    let first = &assurances[0];
    if let Some(other) = assurances.iter().find(|a| a.requirement != first.requirement) {
        return Err(AssureError::MixedRequirements(
            first.requirement.clone(),
            other.requirement.clone(),
        ));
    }
    let numeric = first.kind.is_numeric();
    if assurances.iter().any(|a| a.kind.is_numeric() != numeric) {
        return Err(AssureError::MixedKinds);
    }

    let mut sorted: Vec<&Assurance> = assurances.iter().collect();
    sorted.sort_by(|x, y| {
        (&x.id, x.technique)
            .cmp(&(&y.id, y.technique))
            .then(x.value.total_cmp(&y.value))
    });

    let mut pairwise = Vec::new();
    for (i, x) in sorted.iter().enumerate() {
        for y in &sorted[i + 1..] {
            pairwise.push(PairDiff {
                a: x.id.clone(),
                b: y.id.clone(),
                diff: (x.value - y.value).abs(),
            });
        }
    }
    let agree = if numeric {
        pairwise.iter().all(|p| p.diff <= tolerance)
    } else {
        sorted.iter().all(|a| a.value == sorted[0].value)
    };
    let consensus = numeric.then(|| {
        Consensus::at_least(sorted.iter().map(|a| a.value).fold(f64::INFINITY, f64::min))
    });
    Ok(AgreementReport {
        requirement: first.requirement.clone(),
        compared: sorted.iter().map(|a| a.id.clone()).collect(),
        pairwise,
        verdict: if agree { Agreement::Agree } else { Agreement::Disagree },
        tolerance,
        consensus,
        suspected_causes: if agree {
            Vec::new()
        } else {
            CAUSES.iter().map(|c| c.to_string()).collect()
        },
    })
}
