//! Scenario files, the seeded episode engine, batch aggregation and presets.

pub mod batch;
pub mod config;
pub mod csv;
pub mod engine;
pub mod presets;

pub use batch::{run_all, run_batch, run_episodes, summarize, sweep_horizon, trace_batch, EpisodeTrace, RunSummary};
pub use config::{load_config, load_resources, Application, ScenarioConfig, ScenarioFile};
pub use engine::run_episode;
