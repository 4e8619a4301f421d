//! One Monte Carlo episode.
//!
//! Randomness is keyed by `(master seed, episode, resource)`: every resource owns a
//! disjoint window of one ChaCha stream per episode. A resource therefore sees the
//! same state and the same observation sequence under every policy, however the
//! policy interleaves sensing, which makes policy comparisons paired.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::model::{
    belief_update, episode_utility, marketing_episode_utility, terminal_decision, BeliefState, Decision,
    EpisodeResult, Outcome, ResourceState,
};
use crate::observation::SensingModel;
use crate::policies::Strategy;

use super::config::{Application, ScenarioConfig};

/// Random stream of resource position `pos` in episode `episode`.
pub fn resource_rng(seed: u64, episode: u64, pos: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode);
    rng.set_word_pos((pos as u128 + 1) << 64);
    rng
}

/// Plays episode `episode` of `cfg` under `strategy`.
pub fn run_episode(cfg: &ScenarioConfig, strategy: &Strategy, episode: u64) -> Result<EpisodeResult> {
    let specs = &cfg.resources;
    let l = cfg.params.horizon;
    let n = specs.len();
    let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|p| resource_rng(cfg.seed, episode, p)).collect();
    let states: Vec<ResourceState> = match cfg.application {
        Application::Radio => specs
            .iter()
            .zip(rngs.iter_mut())
            .map(|(s, rng)| {
                if rng.random::<f64>() < s.prior {
                    ResourceState::Good
                } else {
                    ResourceState::Bad
                }
            })
            .collect(),
        Application::Marketing => Vec::new(),
    };

    let mut state = BeliefState::initial(specs);
    let mut stop_times = vec![0; n];
    let mut decisions = vec![Decision::Discard; n];
    let mut sensed = 0;
    for k in 0..l {
        if state.active.is_empty() {
            break;
        }
        state.time = k;
        let action = if k + 1 == l {
            let decide = state
                .active
                .iter()
                .map(|&p| (p, terminal_decision(state.beliefs[p], &specs[p])))
                .collect();
            crate::model::Action { decide, sense: None }
        } else {
            strategy.act(&state)?
        };
        action.validate(&state)?;
        for &(p, d) in &action.decide {
            stop_times[p] = k;
            decisions[p] = d;
        }
        state.active.retain(|p| !action.decide.iter().any(|&(q, _)| q == *p));
        if let Some(p) = action.sense {
            let model = &specs[p].model;
            let o = match cfg.application {
                Application::Radio => model.sample(states[p], &mut rngs[p]),
                Application::Marketing => model.sample_mixture(state.beliefs[p], &mut rngs[p]),
            };
            state.beliefs[p] = belief_update(state.beliefs[p], o, model)?;
            sensed += 1;
        }
    }
    if !state.active.is_empty() {
        return Err(Error::contract("resources left undecided at the end of the horizon"));
    }

    let (outcome, utility) = match cfg.application {
        Application::Radio => {
            let u = episode_utility(&states, &stop_times, &decisions, &cfg.params, specs)?;
            (Outcome::Radio { states }, u)
        }
        Application::Marketing => {
            let mut sales = vec![0u64; n];
            for p in 0..n {
                if decisions[p] == Decision::Utilize {
                    let slots = (l - stop_times[p]) as u64;
                    let prob = state.beliefs[p].clamp(0.0, 1.0);
                    let dist = Binomial::new(slots, prob)
                        .map_err(|e| Error::numeric(format!("sales distribution: {e}")))?;
                    sales[p] = dist.sample(&mut rngs[p]);
                }
            }
            let u = marketing_episode_utility(&sales, &stop_times, &decisions, &cfg.params, specs)?;
            (Outcome::Marketing { sales }, u)
        }
    };
    Ok(EpisodeResult { outcome, stop_times, decisions, total_sense_time: sensed, utility })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ResourceSpec, UtilityParams};
    use crate::observation::{ExponentialSensingModel, GaussianMixtureMarketModel};
    use crate::policies::PolicyKind;

    fn cfg(priors: &[f64], l: usize, app: Application) -> ScenarioConfig {
        let resources = priors
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let model = match app {
                    Application::Radio => ExponentialSensingModel::new(1.0, 3.0).unwrap().into(),
                    Application::Marketing => GaussianMixtureMarketModel::new(0.0, 1.0, 0.75, 1.0).unwrap().into(),
                };
                ResourceSpec::new(i + 1, p, 2.0, 2.0, model).unwrap()
            })
            .collect();
        ScenarioConfig::new(UtilityParams::new(l, 1.0), resources, vec![PolicyKind::Alg2], 10, 5, app).unwrap()
    }

    #[test]
    fn known_good_resources_pay_full_horizon() {
        let c = cfg(&[1.0, 1.0], 10, Application::Radio);
        let s = Strategy::build(PolicyKind::Alg2, &c.resources, &c.params).unwrap();
        let r = run_episode(&c, &s, 0).unwrap();
        assert_eq!(r.utility, 40.0);
        assert_eq!(r.total_sense_time, 0);
        assert_eq!(r.stop_times, vec![0, 0]);
    }

    #[test]
    fn known_bad_resources_pay_nothing() {
        let c = cfg(&[0.0, 0.0], 10, Application::Radio);
        let s = Strategy::build(PolicyKind::Ns, &c.resources, &c.params).unwrap();
        let r = run_episode(&c, &s, 3).unwrap();
        assert_eq!(r.utility, 0.0);
        assert_eq!(r.total_sense_time, 0);
    }

    #[test]
    fn episodes_are_reproducible_and_conserve_utility() {
        for app in [Application::Radio, Application::Marketing] {
            let c = cfg(&[0.5, 0.4, 0.6], 12, app);
            let s = Strategy::build(PolicyKind::Alg2, &c.resources, &c.params).unwrap();
            for e in 0..50 {
                let a = run_episode(&c, &s, e).unwrap();
                assert_eq!(a, run_episode(&c, &s, e).unwrap());
                assert_eq!(a.recompute_utility(&c.params, &c.resources).unwrap(), a.utility);
                assert_eq!(a.total_sense_time, *a.stop_times.iter().max().unwrap());
            }
        }
    }

    #[test]
    fn states_do_not_depend_on_policy() {
        let c = cfg(&[0.5, 0.5, 0.5], 12, Application::Radio);
        let a = Strategy::build(PolicyKind::Alg2, &c.resources, &c.params).unwrap();
        let b = Strategy::build(PolicyKind::Ctns, &c.resources, &c.params).unwrap();
        for e in 0..20 {
            assert_eq!(run_episode(&c, &a, e).unwrap().outcome, run_episode(&c, &b, e).unwrap().outcome);
        }
    }

    #[test]
    fn streams_are_distinct() {
        let mut a = resource_rng(1, 0, 0);
        let mut b = resource_rng(1, 0, 1);
        let mut c = resource_rng(1, 1, 0);
        let x: u64 = a.random();
        assert_ne!(x, b.random::<u64>());
        assert_ne!(x, c.random::<u64>());
    }

    #[test]
    fn single_slot_horizon_decides_immediately() {
        let c = cfg(&[0.7], 1, Application::Radio);
        let s = Strategy::build(PolicyKind::Alg2, &c.resources, &c.params).unwrap();
        let r = run_episode(&c, &s, 0).unwrap();
        assert_eq!(r.decisions, vec![Decision::Utilize]);
        assert_eq!(r.stop_times, vec![0]);
    }
}
