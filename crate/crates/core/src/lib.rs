//! Finite-horizon sequential sensing over binary-state resources.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: resources, beliefs, actions and utility accounting.
//! * [`observation`]: the exponential energy-detector and gaussian latent-signal models.
//! * [`thresholds`]: stopping-threshold schedules and value-function bounds.
//! * [`policies`]: index heuristics, baselines and dynamic-programming solvers.
//! * [`sim`]: scenario files, the seeded Monte Carlo engine and experiment presets.

pub mod error;
pub mod model;
pub mod observation;
pub mod policies;
pub mod sim;
pub mod thresholds;

pub use error::{Error, Result};
