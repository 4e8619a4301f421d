//! Batches of episodes and their summaries.

use serde::Serialize;
use sha2::{Digest, Sha256};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Decision, EpisodeResult, Outcome, ResourceState};
use crate::policies::{PolicyKind, Strategy};

use super::config::ScenarioConfig;
use super::engine::run_episode;

/// Environment variable overriding the worker count; `0` or unset means automatic.
pub const THREADS_ENV: &str = "SEQSENSE_THREADS";

/// Aggregate of one policy over one batch of episodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub policy: PolicyKind,
    pub horizon: usize,
    pub episodes: u64,
    pub mean_utility: f64,
    /// Sample standard deviation over `√episodes`; zero for a single episode.
    pub stderr: f64,
    /// Mean number of sensing slots per episode.
    pub mean_tau: f64,
    /// Per resource, the fraction of episodes whose decision matched the hidden state.
    /// Empty for marketing scenarios, which have no hidden state.
    pub accuracy: Vec<f64>,
    /// `L·Σ ω_i[0]·r_i`.
    pub genie: f64,
    /// `genie − mean_utility`.
    pub regret: f64,
    /// Mean over episodes of the realized genie utility minus the realized utility.
    /// Same expectation as `regret`, far smaller variance.
    pub paired_regret: f64,
    pub paired_stderr: f64,
    pub regret_over_ln_l: f64,
    /// SHA-256 of the scenario and policy, hex encoded.
    pub digest: String,
}

/// Per-episode values, in episode order.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeTrace {
    pub utilities: Vec<f64>,
    pub realized_genie: Vec<f64>,
    pub sense_times: Vec<f64>,
    pub results: Vec<EpisodeResult>,
}

/// Sum by recursive halving, fixed by the input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Mean and standard error (zero for fewer than two samples).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Worker count from [`THREADS_ENV`]; `None` means let the pool decide.
pub fn configured_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::validation(format!("{THREADS_ENV} must be a nonnegative integer, got `{v}`"))),
        },
    }
}

fn realized_genie(cfg: &ScenarioConfig, result: &EpisodeResult) -> f64 {
    let l = cfg.params.horizon as f64;
    match &result.outcome {
        Outcome::Radio { states } => cfg
            .resources
            .iter()
            .zip(states)
            .filter(|(_, &s)| s == ResourceState::Good)
            .map(|(r, _)| l * r.reward)
            .sum(),
        Outcome::Marketing { .. } => cfg.genie_value(),
    }
}

/// Plays every episode of `cfg` under `strategy`, in parallel when enabled.
pub fn run_episodes(cfg: &ScenarioConfig, strategy: &Strategy) -> Result<Vec<EpisodeResult>> {
    let threads = configured_threads()?;
    let play = |e: u64| run_episode(cfg, strategy, e);
    #[cfg(feature = "parallel")]
    {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::validation(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..cfg.episodes).into_par_iter().map(play).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        (0..cfg.episodes).map(play).collect()
    }
}

/// Plays the batch and keeps per-episode values.
pub fn trace_batch(cfg: &ScenarioConfig, strategy: &Strategy) -> Result<EpisodeTrace> {
    let results = run_episodes(cfg, strategy)?;
    Ok(EpisodeTrace {
        utilities: results.iter().map(|r| r.utility).collect(),
        realized_genie: results.iter().map(|r| realized_genie(cfg, r)).collect(),
        sense_times: results.iter().map(|r| r.total_sense_time as f64).collect(),
        results,
    })
}

/// Hex SHA-256 of the scenario with `policy` as its only policy.
pub fn config_digest(cfg: &ScenarioConfig, policy: PolicyKind) -> String {
    let scoped = cfg.with_policies(vec![policy]);
    let text = serde_json::to_string(&scoped).expect("scenario serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Summary of `trace` for `policy`.
pub fn summarize(cfg: &ScenarioConfig, policy: PolicyKind, trace: &EpisodeTrace) -> RunSummary {
    let (mean_utility, stderr) = mean_stderr(&trace.utilities);
    let (mean_tau, _) = mean_stderr(&trace.sense_times);
    let losses: Vec<f64> = trace.realized_genie.iter().zip(&trace.utilities).map(|(g, u)| g - u).collect();
    let (paired_regret, paired_stderr) = mean_stderr(&losses);
    let n = trace.results.len() as f64;
    let accuracy = match trace.results.first().map(|r| &r.outcome) {
        Some(Outcome::Radio { .. }) => (0..cfg.resources.len())
            .map(|p| {
                let hits: Vec<f64> = trace
                    .results
                    .iter()
                    .map(|r| match &r.outcome {
                        Outcome::Radio { states } => {
                            let right = (states[p] == ResourceState::Good) == (r.decisions[p] == Decision::Utilize);
                            f64::from(u8::from(right))
                        }
                        Outcome::Marketing { .. } => 0.0,
                    })
                    .collect();
                pairwise_sum(&hits) / n
            })
            .collect(),
        _ => Vec::new(),
    };
    let genie = cfg.genie_value();
    let regret = genie - mean_utility;
    RunSummary {
        policy,
        horizon: cfg.params.horizon,
        episodes: cfg.episodes,
        mean_utility,
        stderr,
        mean_tau,
        accuracy,
        genie,
        regret,
        paired_regret,
        paired_stderr,
        regret_over_ln_l: paired_regret / (cfg.params.horizon as f64).ln(),
        digest: config_digest(cfg, policy),
    }
}

/// Builds `policy` for `cfg` and summarizes a full batch.
pub fn run_batch(cfg: &ScenarioConfig, policy: PolicyKind) -> Result<RunSummary> {
    let strategy = Strategy::build(policy, &cfg.resources, &cfg.params)?;
    let trace = trace_batch(cfg, &strategy)?;
    Ok(summarize(cfg, policy, &trace))
}

/// One summary per policy listed in `cfg`.
pub fn run_all(cfg: &ScenarioConfig) -> Result<Vec<RunSummary>> {
    cfg.policies.iter().map(|&p| run_batch(cfg, p)).collect()
}

/// One summary per (policy, horizon), policies outermost.
pub fn sweep_horizon(cfg: &ScenarioConfig, horizons: &[usize]) -> Result<Vec<RunSummary>> {
    if horizons.is_empty() {
        return Err(Error::validation("horizon sweep needs at least one horizon"));
    }
    if cfg.policies.is_empty() {
        return Err(Error::validation("scenario lists no policy"));
    }
    let mut out = Vec::with_capacity(horizons.len() * cfg.policies.len());
    for &p in &cfg.policies {
        for &l in horizons {
            let scoped = cfg.with_horizon(l);
            scoped.params.validate()?;
            out.push(run_batch(&scoped, p)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ResourceSpec, UtilityParams};
    use crate::observation::ExponentialSensingModel;
    use crate::sim::config::Application;
    use approx::assert_abs_diff_eq;

    fn cfg(episodes: u64) -> ScenarioConfig {
        let r = ResourceSpec::new(1, 0.5, 2.0, 2.0, ExponentialSensingModel::new(1.0, 3.0).unwrap().into()).unwrap();
        ScenarioConfig::new(UtilityParams::new(10, 2.0), vec![r], vec![PolicyKind::Alg2], episodes, 11, Application::Radio)
            .unwrap()
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn single_episode_has_zero_stderr() {
        let s = run_batch(&cfg(1), PolicyKind::Alg2).unwrap();
        assert_eq!(s.stderr, 0.0);
        assert_eq!(s.episodes, 1);
    }

    #[test]
    fn genie_and_regret_identity() {
        let s = run_batch(&cfg(200), PolicyKind::Alg2).unwrap();
        assert_eq!(s.genie, 10.0);
        assert_abs_diff_eq!(s.regret, s.genie - s.mean_utility, epsilon = 1e-9);
        assert!(s.paired_stderr < s.stderr);
        assert_eq!(s.accuracy.len(), 1);
        assert_eq!(s.digest.len(), 64);
    }

    #[test]
    fn doubling_episodes_keeps_prefix() {
        let small = cfg(50);
        let big = cfg(100);
        let st = Strategy::build(PolicyKind::Alg2, &small.resources, &small.params).unwrap();
        let a = trace_batch(&small, &st).unwrap();
        let b = trace_batch(&big, &st).unwrap();
        assert_eq!(a.utilities[..], b.utilities[..50]);
    }

    #[test]
    fn digest_tracks_policy_and_seed() {
        let c = cfg(10);
        assert_ne!(config_digest(&c, PolicyKind::Alg2), config_digest(&c, PolicyKind::Ct));
        assert_ne!(config_digest(&c, PolicyKind::Alg2), config_digest(&c.with_seed(12), PolicyKind::Alg2));
    }

    #[test]
    fn empty_sweep_is_rejected() {
        assert!(sweep_horizon(&cfg(10), &[]).is_err());
        assert_eq!(sweep_horizon(&cfg(10), &[5, 10, 15, 20]).unwrap().len(), 4);
    }
}
