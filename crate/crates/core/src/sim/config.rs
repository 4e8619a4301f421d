//! Scenario files.
//!
//! A scenario is one JSON document:
//!
//! ```json
//! {
//!   "spec_version": 1,
//!   "horizon": 10,
//!   "sense_cost": 2.0,
//!   "penalty_scale": 1.0,
//!   "resources": [
//!     {"id": 1, "prior": 0.5, "reward": 2.0, "penalty": 2.0,
//!      "model": {"kind": "exponential", "theta0": 1.0, "snr": 3.0}}
//!   ],
//!   "policy": ["ALG2", "CT"],
//!   "episodes": 20000,
//!   "seed": 7,
//!   "application": "radio"
//! }
//! ```
//!
//! `resources` may also be `{"topology": {...}}` to generate channels, or
//! `{"file": "path"}` naming a JSON list of resources relative to the scenario file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ResourceSpec, UtilityParams};
use crate::observation::radio::{generate_topology, TopologyConfig};
use crate::policies::{PolicyKind, DEFAULT_EPSILON, DEFAULT_KAPPA};

pub const SPEC_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Application {
    /// Hidden binary states observed through the sensing model.
    #[default]
    Radio,
    /// Latent belief dynamics; committed products sell with the frozen probability.
    Marketing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ResourceSource {
    Inline(Vec<ResourceSpec>),
    Topology { topology: TopologyConfig },
    File { file: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicyField {
    One(String),
    Many(Vec<String>),
}

fn default_scale() -> f64 {
    1.0
}
fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}
fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

/// On-disk scenario, before resources are resolved and penalties scaled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub spec_version: u32,
    pub horizon: usize,
    pub sense_cost: f64,
    #[serde(default = "default_scale")]
    pub penalty_scale: f64,
    pub resources: ResourceSource,
    pub policy: PolicyField,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    pub episodes: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub application: Application,
}

/// A validated scenario. Penalties in `resources` already include `penalty_scale`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub params: UtilityParams,
    pub resources: Vec<ResourceSpec>,
    pub policies: Vec<PolicyKind>,
    pub episodes: u64,
    pub seed: u64,
    pub application: Application,
}

impl ScenarioConfig {
    /// Validates the pieces and multiplies every penalty by `params.penalty_scale`.
    pub fn new(
        params: UtilityParams,
        resources: Vec<ResourceSpec>,
        policies: Vec<PolicyKind>,
        episodes: u64,
        seed: u64,
        application: Application,
    ) -> Result<Self> {
        params.validate()?;
        if params.penalty_scale <= 0.0 {
            return Err(Error::validation("penalty_scale must be positive"));
        }
        if resources.is_empty() {
            return Err(Error::validation("scenario has no resources"));
        }
        if policies.is_empty() {
            return Err(Error::validation("scenario lists no policy"));
        }
        if episodes < 1 {
            return Err(Error::validation("episodes must be at least 1"));
        }
        let mut ids: Vec<usize> = resources.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::validation(format!("duplicate resource id {}", w[0])));
        }
        let resources = resources
            .into_iter()
            .map(|mut r| {
                r.penalty *= params.penalty_scale;
                r.validate().map(|_| r)
            })
            .collect::<Result<Vec<_>>>()?;
        policies.iter().try_for_each(PolicyKind::validate)?;
        Ok(ScenarioConfig { params, resources, policies, episodes, seed, application })
    }

    /// Same scenario with another horizon.
    pub fn with_horizon(&self, horizon: usize) -> Self {
        ScenarioConfig { params: UtilityParams { horizon, ..self.params }, ..self.clone() }
    }

    pub fn with_policies(&self, policies: Vec<PolicyKind>) -> Self {
        ScenarioConfig { policies, ..self.clone() }
    }

    pub fn with_episodes(&self, episodes: u64) -> Self {
        ScenarioConfig { episodes, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        ScenarioConfig { seed, ..self.clone() }
    }

    /// Expected utility with every state known in advance: `L·Σ ω_i[0]·r_i`.
    pub fn genie_value(&self) -> f64 {
        self.params.horizon as f64 * self.resources.iter().map(|r| r.prior * r.reward).sum::<f64>()
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|source| Error::Parse { path: origin.display().to_string(), source })
    }

    /// Resolves resources relative to `base_dir` and validates.
    pub fn resolve(self, base_dir: &Path) -> Result<ScenarioConfig> {
        if self.spec_version != SPEC_VERSION {
            return Err(Error::validation(format!(
                "unsupported spec_version {}, expected {SPEC_VERSION}",
                self.spec_version
            )));
        }
        let resources = match self.resources {
            ResourceSource::Inline(list) => list,
            ResourceSource::Topology { topology } => {
                generate_topology(&topology)?.into_iter().map(|c| c.resource).collect()
            }
            ResourceSource::File { file } => load_resources(&base_dir.join(file))?,
        };
        let tags = match self.policy {
            PolicyField::One(t) => vec![t],
            PolicyField::Many(ts) => ts,
        };
        let policies = tags
            .iter()
            .map(|t| PolicyKind::parse_with(t, self.epsilon, self.kappa))
            .collect::<Result<Vec<_>>>()?;
        let params = UtilityParams {
            horizon: self.horizon,
            sense_cost: self.sense_cost,
            penalty_scale: self.penalty_scale,
        };
        ScenarioConfig::new(params, resources, policies, self.episodes, self.seed, self.application)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Reads and resolves a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = read(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    ScenarioFile::from_json(&text, path)?.resolve(base)
}

/// Reads a JSON list of resources.
pub fn load_resources(path: &Path) -> Result<Vec<ResourceSpec>> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Parse { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    const INLINE: &str = r#"{
        "spec_version": 1, "horizon": 10, "sense_cost": 2.0, "penalty_scale": 2.0,
        "resources": [{"id": 1, "prior": 0.5, "reward": 2.0, "penalty": 2.0,
                       "model": {"kind": "exponential", "theta0": 1.0, "snr": 3.0}}],
        "policy": "ALG2_AR", "epsilon": 0.25, "episodes": 100, "seed": 3
    }"#;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioFile::from_json(text, Path::new("inline.json"))?.resolve(Path::new("."))
    }

    #[test]
    fn inline_scenario_scales_penalties() {
        let cfg = parse(INLINE).unwrap();
        assert_eq!(cfg.resources[0].penalty, 4.0);
        assert_eq!(cfg.policies, vec![PolicyKind::Alg2Ar { epsilon: 0.25 }]);
        assert_eq!(cfg.application, Application::Radio);
        assert_eq!(cfg.genie_value(), 10.0);
    }

    #[test]
    fn topology_source_generates_channels() {
        let text = r#"{"spec_version": 1, "horizon": 20, "sense_cost": 1.0,
            "resources": {"topology": {"num_channels": 6, "seed": 4}},
            "policy": ["ALG2", "NS"], "episodes": 10}"#;
        let cfg = parse(text).unwrap();
        assert_eq!(cfg.resources.len(), 6);
        assert_eq!(cfg.policies.len(), 2);
    }

    #[test]
    fn rejects_bad_documents() {
        let bad_version = INLINE.replace("\"spec_version\": 1", "\"spec_version\": 2");
        assert!(matches!(parse(&bad_version), Err(Error::Validation(_))));
        let unknown = INLINE.replace("\"seed\": 3", "\"seed\": 3, \"extra\": 1");
        assert!(matches!(parse(&unknown), Err(Error::Parse { .. })));
        let no_policy = INLINE.replace("\"ALG2_AR\"", "[]");
        assert!(matches!(parse(&no_policy), Err(Error::Validation(_))));
        let zero = INLINE.replace("\"episodes\": 100", "\"episodes\": 0");
        assert!(parse(&zero).is_err());
        let comment = format!("// note\n{INLINE}");
        assert!(parse(&comment).is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_config(Path::new("/nonexistent/scenario.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/scenario.json"));
    }
}
