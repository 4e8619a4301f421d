use crate::error::{Error, Result};
use crate::model::{ResourceSpec, UtilityParams};
use crate::observation::{sigma_log_odds, Divergences, SensingModel};

use super::ThresholdSchedule;

/// Upper bound on the remaining sensing time of one resource.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensingTimeBound {
    pub resource: usize,
    pub time: usize,
    pub belief: f64,
    pub value: f64,
}

/// Divergences of one resource, cached for repeated sensing-time evaluations.
#[derive(Clone, Copy, Debug)]
pub struct SensingTimeModel {
    divergences: Divergences,
}

impl SensingTimeModel {
    pub fn new(spec: &ResourceSpec) -> Result<Self> {
        Ok(SensingTimeModel { divergences: spec.model.divergences()? })
    }

    /// Expected slots until `omega` leaves `(lower, upper)`, by Wald-style drift
    /// arguments with overshoot corrections, capped at `remaining`.
    pub fn bound(&self, omega: f64, lower: f64, upper: f64, remaining: usize) -> f64 {
        if omega <= 0.0 || omega >= 1.0 || remaining == 0 {
            return 0.0;
        }
        let d = &self.divergences;
        let to_upper = sigma_log_odds(clamp_open(upper), omega).unwrap_or(0.0);
        let to_lower = sigma_log_odds(omega, clamp_open(lower)).unwrap_or(0.0);
        let good = (to_upper + d.truncated_good_bad) / d.good_bad;
        let bad = (to_lower + d.truncated_bad_good) / d.bad_good;
        (omega * good + (1.0 - omega) * bad).clamp(0.0, remaining as f64)
    }
}

fn clamp_open(v: f64) -> f64 {
    crate::observation::clamp_belief(v)
}

/// Bound on `E[τ − k]` for a resource at belief `omega` in slot `k` under `schedule`.
pub fn expected_sensing_time_bound(
    omega: f64,
    k: usize,
    schedule: &ThresholdSchedule,
    spec: &ResourceSpec,
    params: &UtilityParams,
) -> Result<SensingTimeBound> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::domain(format!("belief {omega} outside [0, 1]")));
    }
    if k >= params.horizon || schedule.horizon() != params.horizon {
        return Err(Error::contract(format!(
            "slot {k} not covered by a schedule of horizon {}",
            schedule.horizon()
        )));
    }
    let (lower, upper) = schedule.band(k);
    let value = SensingTimeModel::new(spec)?.bound(omega, lower, upper, params.horizon - k - 1);
    Ok(SensingTimeBound { resource: spec.id, time: k, belief: omega, value })
}
