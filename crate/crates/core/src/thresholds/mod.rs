//! Per-resource stopping-threshold schedules.
//!
//! A schedule holds, for every slot `k`, a lower belief below which a resource is
//! discarded and an upper belief above which it is utilized. Between the two the
//! resource keeps being sensed.

mod algorithm;
mod bounds;
mod sensing_time;

pub use algorithm::{algorithm1_bounds, algorithm1_schedule, ThresholdBounds};
pub use bounds::{lemma5_lower_bound, lemma5_upper_bound, marketing_upper_bound};
pub use sensing_time::{expected_sensing_time_bound, SensingTimeBound, SensingTimeModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ResourceSpec, UtilityParams};

/// Lower and upper decision thresholds for every slot of the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSchedule {
    pub resource: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub center: f64,
}

impl ThresholdSchedule {
    /// A schedule with no continuation region at any slot.
    pub fn collapsed(spec: &ResourceSpec, params: &UtilityParams) -> Self {
        let center = spec.decision_boundary();
        ThresholdSchedule {
            resource: spec.id,
            lower: vec![center; params.horizon],
            upper: vec![center; params.horizon],
            center,
        }
    }

    pub fn horizon(&self) -> usize {
        self.lower.len()
    }

    pub fn band(&self, k: usize) -> (f64, f64) {
        (self.lower[k], self.upper[k])
    }

    /// True when a resource at belief `omega` must be decided at slot `k`. Beliefs on a
    /// threshold are decided, so a collapsed band never senses.
    pub fn should_decide(&self, k: usize, omega: f64) -> bool {
        k + 1 >= self.horizon() || omega <= self.lower[k] || omega >= self.upper[k]
    }

    /// Checks ordering around the center, terminal collapse and monotone contraction.
    pub fn validate(&self) -> Result<()> {
        let n = self.horizon();
        if n == 0 || self.upper.len() != n {
            return Err(Error::contract("schedule arrays must be nonempty and of equal length"));
        }
        for k in 0..n {
            let (lo, hi) = self.band(k);
            if !(lo <= self.center && self.center <= hi) {
                return Err(Error::contract(format!(
                    "resource {}: band ({lo}, {hi}) at slot {k} does not contain {}",
                    self.resource, self.center
                )));
            }
            if k + 1 < n && (self.lower[k] > self.lower[k + 1] || self.upper[k] < self.upper[k + 1]) {
                return Err(Error::contract(format!(
                    "resource {}: band widens between slots {k} and {}",
                    self.resource,
                    k + 1
                )));
            }
        }
        if self.lower[n - 1] != self.center || self.upper[n - 1] != self.center {
            return Err(Error::contract(format!(
                "resource {}: final slot must be collapsed",
                self.resource
            )));
        }
        Ok(())
    }
}

/// Thresholds obtained by intersecting the chord bound on the continuation value with
/// the immediate-decision value.
pub fn easy_bounds(spec: &ResourceSpec, params: &UtilityParams, k: usize) -> (f64, f64) {
    let center = spec.decision_boundary();
    let l = params.horizon;
    if k + 1 >= l {
        return (center, center);
    }
    let (r, rho, c) = (spec.reward, spec.penalty, params.sense_cost);
    let lower = (c / ((l - k - 1) as f64 * r)).min(center);
    let left = (l - k) as f64;
    let upper = ((left * rho - c) / (left * rho + r)).max(center);
    (lower, upper)
}

/// Schedule of [`easy_bounds`] at every slot.
pub fn easy_schedule(spec: &ResourceSpec, params: &UtilityParams) -> ThresholdSchedule {
    let (lower, upper) = (0..params.horizon).map(|k| easy_bounds(spec, params, k)).unzip();
    ThresholdSchedule { resource: spec.id, lower, upper, center: spec.decision_boundary() }
}

/// The slot-zero easy bounds held fixed until the final slot.
pub fn constant_thresholds(spec: &ResourceSpec, params: &UtilityParams) -> ThresholdSchedule {
    let center = spec.decision_boundary();
    let (lo, hi) = easy_bounds(spec, params, 0);
    let l = params.horizon;
    let mut lower = vec![lo; l];
    let mut upper = vec![hi; l];
    lower[l - 1] = center;
    upper[l - 1] = center;
    ThresholdSchedule { resource: spec.id, lower, upper, center }
}
