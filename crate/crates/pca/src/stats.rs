//! Binomial interval estimates for the Monte-Carlo experiments.

use crate::error::{Error, Result};

/// Normal quantile for two-sided 95% coverage.
pub const WILSON_Z: f64 = 1.959964;

/// Confidence level the intervals are computed at.
pub const WILSON_CONFIDENCE: f64 = 0.95;

/// Wilson score interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilsonInterval {
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub confidence: f64,
}

impl WilsonInterval {
    pub fn contains(&self, p: f64) -> bool {
        self.low <= p && p <= self.high
    }

    pub fn overlaps(&self, other: &WilsonInterval) -> bool {
        self.low <= other.high && other.low <= self.high
    }

    pub fn halfwidth(&self) -> f64 {
        (self.high - self.low) / 2.0
    }
}

/// The score interval: center `(p̂ + z²/2n) / (1 + z²/n)`, halfwidth
/// `z·sqrt(p̂(1−p̂)/n + z²/4n²) / (1 + z²/n)`, `z = 1.959964`.
pub fn wilson_interval(successes: u64, trials: u64) -> Result<WilsonInterval> {
    if trials == 0 {
        return Err(Error::ParamRange {
            param: "trials",
            value: 0.0,
            expected: "at least 1",
        });
    }
    if successes > trials {
        return Err(Error::ParamRange {
            param: "successes",
            value: successes as f64,
            expected: "at most the number of trials",
        });
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At the extremes the score interval is pinned to the boundary exactly
    // (center equals the halfwidth); snap past the rounding error.
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Ok(WilsonInterval { estimate: p, low, high, confidence: WILSON_CONFIDENCE })
}
