//! Domain types of the sensing problem and the pure functions every policy shares:
//! the Bayesian belief update, per-slot rewards, terminal decisions and episode
//! utility accounting.
//!
//! Beliefs are probabilities that a resource is in the *good* state. A resource that
//! is utilized earns `reward` per remaining slot when good and loses `penalty` per
//! remaining slot when bad; a discarded resource earns nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observation::{ObservationModel, SensingModel};

/// Hidden binary state of a resource.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceState {
    /// `s = 0`: utilizing the resource pays the reward.
    Good,
    /// `s = 1`: utilizing the resource costs the penalty.
    Bad,
}

impl ResourceState {
    pub fn as_bit(self) -> u8 {
        match self {
            ResourceState::Good => 0,
            ResourceState::Bad => 1,
        }
    }
}

/// Final decision taken on a resource when it leaves the active set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    /// `δ = 0`
    Utilize,
    /// `δ = 1`
    Discard,
}

impl Decision {
    pub fn as_bit(self) -> u8 {
        match self {
            Decision::Utilize => 0,
            Decision::Discard => 1,
        }
    }
}

/// One resource: its prior, its utility rates and how it can be observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceSpec {
    pub id: usize,
    /// Prior probability of the good state.
    pub prior: f64,
    /// Utility per remaining slot when a good resource is utilized.
    pub reward: f64,
    /// Utility lost per remaining slot when a bad resource is utilized.
    pub penalty: f64,
    pub model: ObservationModel,
}

impl ResourceSpec {
    pub fn new(id: usize, prior: f64, reward: f64, penalty: f64, model: ObservationModel) -> Result<Self> {
        let spec = ResourceSpec { id, prior, reward, penalty, model };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.prior) {
            return Err(Error::validation(format!(
                "resource {}: prior {} outside [0, 1]",
                self.id, self.prior
            )));
        }
        if !(self.reward > 0.0 && self.reward.is_finite()) {
            return Err(Error::validation(format!(
                "resource {}: reward must be positive, got {}",
                self.id, self.reward
            )));
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(Error::validation(format!(
                "resource {}: penalty must be positive, got {}",
                self.id, self.penalty
            )));
        }
        self.model.validate()
    }

    /// Belief `ρ/(ρ+r)` at which utilizing and discarding have equal expected value.
    pub fn decision_boundary(&self) -> f64 {
        self.penalty / (self.penalty + self.reward)
    }
}

/// Horizon, sensing cost and the penalty multiplier of a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UtilityParams {
    pub horizon: usize,
    pub sense_cost: f64,
    /// Multiplier applied to every penalty when a scenario is loaded.
    pub penalty_scale: f64,
}

impl UtilityParams {
    pub fn new(horizon: usize, sense_cost: f64) -> Self {
        UtilityParams { horizon, sense_cost, penalty_scale: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::validation("horizon must be at least 1"));
        }
        if !(self.sense_cost >= 0.0 && self.sense_cost.is_finite()) {
            return Err(Error::validation(format!("sense_cost must be >= 0, got {}", self.sense_cost)));
        }
        if !(self.penalty_scale >= 0.0 && self.penalty_scale.is_finite()) {
            return Err(Error::validation(format!(
                "penalty_scale must be >= 0, got {}",
                self.penalty_scale
            )));
        }
        Ok(())
    }
}

/// Decision-maker state at the start of a slot.
///
/// `beliefs` is indexed by resource position and keeps an entry for every resource,
/// including those already decided (their beliefs simply stop moving).
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefState {
    pub time: usize,
    /// Positions of undecided resources, ascending.
    pub active: Vec<usize>,
    pub beliefs: Vec<f64>,
}

impl BeliefState {
    pub fn initial(specs: &[ResourceSpec]) -> Self {
        BeliefState {
            time: 0,
            active: (0..specs.len()).collect(),
            beliefs: specs.iter().map(|s| s.prior).collect(),
        }
    }

    pub fn is_active(&self, pos: usize) -> bool {
        self.active.binary_search(&pos).is_ok()
    }
}

/// What a policy does in one slot: decide a set of resources, then sense at most one
/// of the remaining ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Action {
    pub decide: Vec<(usize, Decision)>,
    pub sense: Option<usize>,
}

impl Action {
    /// Checks the action against the active set it is applied to.
    pub fn validate(&self, state: &BeliefState) -> Result<()> {
        let mut seen = Vec::with_capacity(self.decide.len());
        for &(pos, _) in &self.decide {
            if !state.is_active(pos) {
                return Err(Error::contract(format!("decision on inactive resource {pos}")));
            }
            if seen.contains(&pos) {
                return Err(Error::contract(format!("resource {pos} decided twice")));
            }
            seen.push(pos);
        }
        let remaining = state.active.len() - self.decide.len();
        match self.sense {
            Some(pos) => {
                if !state.is_active(pos) || seen.contains(&pos) {
                    return Err(Error::contract(format!("sensing resource {pos} that is not pending")));
                }
            }
            None if remaining > 0 => {
                return Err(Error::contract(format!(
                    "{remaining} resources left pending without sensing"
                )));
            }
            None => {}
        }
        Ok(())
    }
}

/// Per-resource realization used to settle an episode's utility.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Hidden binary states (spectrum access).
    Radio { states: Vec<ResourceState> },
    /// Number of successful sales over the slots a product was stocked (marketing).
    Marketing { sales: Vec<u64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub outcome: Outcome,
    pub stop_times: Vec<usize>,
    pub decisions: Vec<Decision>,
    pub total_sense_time: usize,
    pub utility: f64,
}

impl EpisodeResult {
    /// Recomputes the utility from the recorded fields.
    pub fn recompute_utility(&self, params: &UtilityParams, specs: &[ResourceSpec]) -> Result<f64> {
        match &self.outcome {
            Outcome::Radio { states } => episode_utility(states, &self.stop_times, &self.decisions, params, specs),
            Outcome::Marketing { sales } => {
                marketing_episode_utility(sales, &self.stop_times, &self.decisions, params, specs)
            }
        }
    }
}

/// Posterior probability of the good state after observing `o`.
pub fn belief_update(omega: f64, o: f64, model: &ObservationModel) -> Result<f64> {
    let l0 = model.log_pdf(ResourceState::Good, o);
    let l1 = model.log_pdf(ResourceState::Bad, o);
    if l0 == f64::NEG_INFINITY && l1 == f64::NEG_INFINITY {
        return Err(Error::domain(format!("both densities vanish at observation {o}")));
    }
    Ok(posterior_from_log_ratio(omega, l1 - l0))
}

/// `ω / (ω + (1-ω)·exp(log f1/f0))`, exact at the absorbing beliefs 0 and 1.
pub(crate) fn posterior_from_log_ratio(omega: f64, log_ratio_10: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    if omega >= 1.0 {
        return 1.0;
    }
    let odds_term = (1.0 - omega) / omega * log_ratio_10.exp();
    (1.0 / (1.0 + odds_term)).clamp(0.0, 1.0)
}

/// Utility rate earned per slot for state `s` under decision `d`.
pub fn per_slot_reward(s: ResourceState, d: Decision, spec: &ResourceSpec) -> f64 {
    match (d, s) {
        (Decision::Utilize, ResourceState::Good) => spec.reward,
        (Decision::Utilize, ResourceState::Bad) => -spec.penalty,
        (Decision::Discard, _) => 0.0,
    }
}

/// Optimal final decision at belief `omega`. Ties at the boundary utilize.
pub fn terminal_decision(omega: f64, spec: &ResourceSpec) -> Decision {
    if omega < spec.decision_boundary() {
        Decision::Discard
    } else {
        Decision::Utilize
    }
}

/// Expected per-slot value of deciding now: `max{(r+ρ)ω − ρ, 0}`.
pub fn value_decide(omega: f64, spec: &ResourceSpec) -> f64 {
    ((spec.reward + spec.penalty) * omega - spec.penalty).max(0.0)
}

/// Realized utility `−c·max τ + Σ (L−τ_i)·R(s_i, δ_i)`.
pub fn episode_utility(
    states: &[ResourceState],
    stop_times: &[usize],
    decisions: &[Decision],
    params: &UtilityParams,
    specs: &[ResourceSpec],
) -> Result<f64> {
    check_lengths(states.len(), stop_times, decisions, specs)?;
    let total = check_stop_times(stop_times, params)?;
    let mut utility = -params.sense_cost * total as f64;
    for (i, spec) in specs.iter().enumerate() {
        let remaining = (params.horizon - stop_times[i]) as f64;
        utility += remaining * per_slot_reward(states[i], decisions[i], spec);
    }
    Ok(utility)
}

/// Marketing settlement: a stocked product earns `r` per sale and loses `ρ` per unsold slot.
pub fn marketing_episode_utility(
    sales: &[u64],
    stop_times: &[usize],
    decisions: &[Decision],
    params: &UtilityParams,
    specs: &[ResourceSpec],
) -> Result<f64> {
    check_lengths(sales.len(), stop_times, decisions, specs)?;
    let total = check_stop_times(stop_times, params)?;
    let mut utility = -params.sense_cost * total as f64;
    for (i, spec) in specs.iter().enumerate() {
        if decisions[i] == Decision::Discard {
            continue;
        }
        let remaining = (params.horizon - stop_times[i]) as u64;
        if sales[i] > remaining {
            return Err(Error::contract(format!(
                "resource {}: {} sales exceed {} stocked slots",
                spec.id, sales[i], remaining
            )));
        }
        utility += sales[i] as f64 * spec.reward - (remaining - sales[i]) as f64 * spec.penalty;
    }
    Ok(utility)
}

fn check_lengths(n: usize, stop_times: &[usize], decisions: &[Decision], specs: &[ResourceSpec]) -> Result<()> {
    if n != specs.len() || stop_times.len() != specs.len() || decisions.len() != specs.len() {
        return Err(Error::contract(format!(
            "episode fields disagree in length: outcome {n}, stop times {}, decisions {}, resources {}",
            stop_times.len(),
            decisions.len(),
            specs.len()
        )));
    }
    Ok(())
}

fn check_stop_times(stop_times: &[usize], params: &UtilityParams) -> Result<usize> {
    if let Some((i, &t)) = stop_times.iter().enumerate().find(|&(_, &t)| t >= params.horizon) {
        return Err(Error::contract(format!(
            "resource position {i} stops at {t}, horizon is {}",
            params.horizon
        )));
    }
    Ok(stop_times.iter().copied().max().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::ExponentialSensingModel;

    fn spec(r: f64, rho: f64) -> ResourceSpec {
        ResourceSpec::new(1, 0.5, r, rho, ExponentialSensingModel::new(1.0, 3.0).unwrap().into()).unwrap()
    }

    #[test]
    fn belief_update_examples() {
        let m: ObservationModel = ExponentialSensingModel::new(1.0, 0.0).unwrap().into();
        assert_eq!(belief_update(0.5, 0.7, &m).unwrap(), 0.5);
        let m: ObservationModel = ExponentialSensingModel::new(1.0, 3.0).unwrap().into();
        assert_eq!(belief_update(1.0, 2.3, &m).unwrap(), 1.0);
        assert_eq!(belief_update(0.0, 0.1, &m).unwrap(), 0.0);
        // f0(0) = 1, f1(0) = 1/4
        assert!((belief_update(0.5, 0.0, &m).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn belief_update_rejects_out_of_support() {
        let m: ObservationModel = ExponentialSensingModel::new(1.0, 3.0).unwrap().into();
        let err = belief_update(0.5, -1.0, &m).unwrap_err();
        assert!(err.to_string().contains("-1"));
    }

    #[test]
    fn per_slot_rewards() {
        let s = spec(2.0, 2.0);
        assert_eq!(per_slot_reward(ResourceState::Good, Decision::Utilize, &s), 2.0);
        assert_eq!(per_slot_reward(ResourceState::Bad, Decision::Utilize, &s), -2.0);
        assert_eq!(per_slot_reward(ResourceState::Bad, Decision::Discard, &s), 0.0);
        assert_eq!(per_slot_reward(ResourceState::Good, Decision::Discard, &s), 0.0);
    }

    #[test]
    fn terminal_decision_examples() {
        let s = spec(2.0, 2.0);
        assert_eq!(terminal_decision(0.6, &s), Decision::Utilize);
        assert_eq!(terminal_decision(0.0, &s), Decision::Discard);
        assert_eq!(terminal_decision(0.5, &s), Decision::Utilize);
    }

    #[test]
    fn terminal_decision_maximizes_expected_rate() {
        let s = spec(2.0, 3.0);
        for j in 0..=100 {
            let w = j as f64 / 100.0;
            let utilize = w * s.reward - (1.0 - w) * s.penalty;
            let best = if utilize >= 0.0 { Decision::Utilize } else { Decision::Discard };
            // exact ties are resolved toward utilize on both sides
            if (utilize).abs() > 1e-12 {
                assert_eq!(terminal_decision(w, &s), best, "omega {w}");
            }
        }
    }

    #[test]
    fn value_decide_examples() {
        let s = spec(2.0, 2.0);
        assert!((value_decide(0.75, &s) - 1.0).abs() < 1e-15);
        assert_eq!(value_decide(s.decision_boundary(), &s), 0.0);
        assert_eq!(value_decide(1.0, &s), 2.0);
    }

    #[test]
    fn value_decide_is_convex() {
        let s = spec(2.0, 3.0);
        let v: Vec<f64> = (0..=1000).map(|j| value_decide(j as f64 / 1000.0, &s)).collect();
        for w in v.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-12);
        }
    }

    #[test]
    fn episode_utility_examples() {
        let p = UtilityParams::new(10, 1.0);
        let one = [spec(2.0, 2.0)];
        let u = episode_utility(&[ResourceState::Good], &[3], &[Decision::Utilize], &p, &one).unwrap();
        assert_eq!(u, 11.0);
        let u = episode_utility(&[ResourceState::Bad], &[0], &[Decision::Discard], &p, &one).unwrap();
        assert_eq!(u, 0.0);

        let two = [spec(2.0, 2.0), spec(2.0, 2.0)];
        let u = episode_utility(
            &[ResourceState::Good, ResourceState::Bad],
            &[2, 5],
            &[Decision::Utilize, Decision::Discard],
            &p,
            &two,
        )
        .unwrap();
        assert_eq!(u, 11.0);
    }

    #[test]
    fn episode_utility_rejects_late_stops() {
        let p = UtilityParams::new(10, 1.0);
        let err = episode_utility(&[ResourceState::Good], &[10], &[Decision::Utilize], &p, &[spec(2.0, 2.0)]);
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn action_validation() {
        let state = BeliefState { time: 0, active: vec![0, 2], beliefs: vec![0.5; 3] };
        let ok = Action { decide: vec![(0, Decision::Discard)], sense: Some(2) };
        assert!(ok.validate(&state).is_ok());
        let sensing_decided = Action { decide: vec![(2, Decision::Discard)], sense: Some(2) };
        assert!(sensing_decided.validate(&state).is_err());
        let idle = Action { decide: vec![(0, Decision::Discard)], sense: None };
        assert!(idle.validate(&state).is_err());
        let inactive = Action { decide: vec![(1, Decision::Discard)], sense: Some(0) };
        assert!(inactive.validate(&state).is_err());
    }
}
