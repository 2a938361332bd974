use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use super::AssureError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub confidence: f64,
}

impl Interval {
    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }
}

fn check_counts(k: u64, n: u64, confidence: f64) -> Result<(), AssureError> {
    if n == 0 || k > n {
        return Err(AssureError::InvalidCounts(format!("{k} successes out of {n}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(AssureError::InvalidCounts(format!("confidence {confidence} not in (0, 1)")));
    }
    Ok(())
}

fn z_for(confidence: f64) -> f64 {
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    std.inverse_cdf(1.0 - (1.0 - confidence) / 2.0)
}

/// Agresti–Coull (adjusted Wald) interval for `k` successes in `n` trials,
/// clipped to [0, 1]. At 95% the usual "add two successes and two
/// failures" form is used with z = 1.96.
pub fn interval(k: u64, n: u64, confidence: f64) -> Result<Interval, AssureError> {
    check_counts(k, n, confidence)?;
    let (z, n_adj, p_adj) = if confidence == 0.95 {
        (1.96, n as f64 + 4.0, (k as f64 + 2.0) / (n as f64 + 4.0))
    } else {
        let z = z_for(confidence);
        let n_adj = n as f64 + z * z;
        (z, n_adj, (k as f64 + z * z / 2.0) / n_adj)
    };
    let half = z * (p_adj * (1.0 - p_adj) / n_adj).sqrt();
    Ok(Interval {
        lo: (p_adj - half).max(0.0),
        hi: (p_adj + half).min(1.0),
        confidence,
    })
}

/// Wilson score interval.
pub fn wilson(k: u64, n: u64, confidence: f64) -> Result<Interval, AssureError> {
    check_counts(k, n, confidence)?;
    let z = z_for(confidence);
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(Interval {
        lo: (centre - half).max(0.0),
        hi: (centre + half).min(1.0),
        confidence,
    })
}

/// Exact (Clopper–Pearson) interval from beta quantiles.
pub fn clopper_pearson(k: u64, n: u64, confidence: f64) -> Result<Interval, AssureError> {
    check_counts(k, n, confidence)?;
    let tail = (1.0 - confidence) / 2.0;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 {
        0.0
    } else {
        Beta::new(kf, nf - kf + 1.0).expect("positive shape").inverse_cdf(tail)
    };
    let hi = if k == n {
        1.0
    } else {
        Beta::new(kf + 1.0, nf - kf).expect("positive shape").inverse_cdf(1.0 - tail)
    };
    Ok(Interval { lo, hi, confidence })
}
