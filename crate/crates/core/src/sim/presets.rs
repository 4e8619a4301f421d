//! Ready-made scenarios at desk scale.

use crate::error::Result;
use crate::model::{ResourceSpec, UtilityParams};
use crate::observation::radio::{generate_topology, TopologyConfig};
use crate::observation::{ExponentialSensingModel, GaussianMixtureMarketModel};
use crate::policies::PolicyKind;

use super::config::{Application, ScenarioConfig};

pub const PRESET_SEED: u64 = 20_240_601;
pub const TOPOLOGY_SEED: u64 = 1;
/// Episode count used when a preset is run without an explicit count.
pub const PRESET_EPISODES: u64 = 10_000;
pub const TOPOLOGY_CHANNELS: usize = 20;

fn params(horizon: usize, sense_cost: f64, penalty_scale: f64) -> UtilityParams {
    UtilityParams { horizon, sense_cost, penalty_scale }
}

/// The single exponential resource: prior 0.5, `r = ρ = 2`, SNR 3.
pub fn single_resource() -> ResourceSpec {
    ResourceSpec::new(1, 0.5, 2.0, 2.0, ExponentialSensingModel::new(1.0, 3.0).expect("valid model").into())
        .expect("valid resource")
}

/// One resource under the recursive, grid-DP, constant and easy thresholds.
pub fn single_resource_scenario(horizon: usize, sense_cost: f64, penalty_scale: f64, episodes: u64) -> Result<ScenarioConfig> {
    ScenarioConfig::new(
        params(horizon, sense_cost, penalty_scale),
        vec![single_resource()],
        vec![PolicyKind::Alg2, PolicyKind::SingleOpt, PolicyKind::Ct, PolicyKind::Easy],
        episodes,
        PRESET_SEED,
        Application::Radio,
    )
}

/// Cheap sensing: `c = 2`, unscaled penalty.
pub fn cheap_single(horizon: usize, episodes: u64) -> Result<ScenarioConfig> {
    single_resource_scenario(horizon, 2.0, 1.0, episodes)
}

/// Sensing too costly to ever pay off: `c = 10`, doubled penalty.
pub fn costly_single(horizon: usize, episodes: u64) -> Result<ScenarioConfig> {
    single_resource_scenario(horizon, 10.0, 2.0, episodes)
}

/// Channels of the default four-primary cell.
pub fn topology_resources() -> Result<Vec<ResourceSpec>> {
    let cfg = TopologyConfig { num_channels: TOPOLOGY_CHANNELS, seed: TOPOLOGY_SEED, ..TopologyConfig::default() };
    Ok(generate_topology(&cfg)?.into_iter().map(|c| c.resource).collect())
}

/// Twenty generated channels under the sorted and unsorted strategies.
pub fn topology_scenario(horizon: usize, sense_cost: f64, penalty_scale: f64, episodes: u64) -> Result<ScenarioConfig> {
    ScenarioConfig::new(
        params(horizon, sense_cost, penalty_scale),
        topology_resources()?,
        vec![PolicyKind::Alg2, PolicyKind::Ct, PolicyKind::Ns, PolicyKind::Ctns],
        episodes,
        PRESET_SEED,
        Application::Radio,
    )
}

/// Moderate horizons, `ϱ = 2`.
pub fn moderate_horizon(horizon: usize, sense_cost: f64, episodes: u64) -> Result<ScenarioConfig> {
    topology_scenario(horizon, sense_cost, 2.0, episodes)
}

/// Short horizons with additional removal: `c = 1`, `ϱ = 1`, `ε = 0.5`.
pub fn short_horizon(horizon: usize, episodes: u64) -> Result<ScenarioConfig> {
    let cfg = topology_scenario(horizon, 1.0, 1.0, episodes)?;
    Ok(cfg.with_policies(vec![
        PolicyKind::Alg2,
        PolicyKind::Alg2Ar { epsilon: 0.5 },
        PolicyKind::Ct,
        PolicyKind::Ns,
        PolicyKind::Ctns,
    ]))
}

/// Long horizons for regret growth: `c = 2`, `ϱ = 2`.
pub fn long_horizon(horizon: usize, episodes: u64) -> Result<ScenarioConfig> {
    Ok(topology_scenario(horizon, 2.0, 2.0, episodes)?.with_policies(vec![PolicyKind::Alg2]))
}

/// One product with latent gaussian demand: `c = 0.3`, `r = ρ = 1`, prior 0.5.
pub fn marketing(horizon: usize, episodes: u64) -> Result<ScenarioConfig> {
    let model = GaussianMixtureMarketModel::new(0.0, 1.0, 0.75, 1.0)?;
    ScenarioConfig::new(
        params(horizon, 0.3, 1.0),
        vec![ResourceSpec::new(1, 0.5, 1.0, 1.0, model.into())?],
        vec![PolicyKind::Alg2, PolicyKind::Easy],
        episodes,
        PRESET_SEED,
        Application::Marketing,
    )
}

/// Preset names accepted by [`by_name`].
pub const NAMES: [&str; 7] =
    ["cheap-single", "costly-single", "moderate-c1", "moderate-c10", "short", "long", "marketing"];

/// Looks up a preset by name.
pub fn by_name(name: &str, horizon: usize, episodes: u64) -> Result<ScenarioConfig> {
    match name {
        "cheap-single" => cheap_single(horizon, episodes),
        "costly-single" => costly_single(horizon, episodes),
        "moderate-c1" => moderate_horizon(horizon, 1.0, episodes),
        "moderate-c10" => moderate_horizon(horizon, 10.0, episodes),
        "short" => short_horizon(horizon, episodes),
        "long" => long_horizon(horizon, episodes),
        "marketing" => marketing(horizon, episodes),
        _ => Err(crate::Error::Validation(format!(
            "unknown preset `{name}`; expected one of {}",
            NAMES.join(", ")
        ))),
    }
}
