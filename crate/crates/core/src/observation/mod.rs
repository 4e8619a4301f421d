//! Observation models: densities, sampling, belief-crossing probabilities and
//! divergences behind one interface, plus the radio link and topology helpers that
//! turn geometry into rewards and penalties.

mod exponential;
mod gaussian;
pub mod radio;
pub mod special;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use exponential::ExponentialSensingModel;
pub use gaussian::{market_latent_step, GaussianMixtureMarketModel};
pub use special::{clamp_belief, erlang_cdf, sigma_log_odds};

use crate::error::Result;
use crate::model::ResourceState;

/// Which law generates the observations in a crossing probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conditioning {
    State(ResourceState),
    /// The prior-predictive mixture weighted by the starting belief.
    Mixture,
}

impl Conditioning {
    pub const GOOD: Conditioning = Conditioning::State(ResourceState::Good);
    pub const BAD: Conditioning = Conditioning::State(ResourceState::Bad);
}

/// KL divergences and their truncated counterparts, in nats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Divergences {
    /// `D(f0‖f1)`
    pub good_bad: f64,
    /// `D(f1‖f0)`
    pub bad_good: f64,
    /// `E[ln f0/f1 | good, ln f0/f1 ≥ 0]`
    pub truncated_good_bad: f64,
    /// `E[ln f1/f0 | bad, ln f1/f0 ≥ 0]`
    pub truncated_bad_good: f64,
}

/// Probability masses of one observation cell under each state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellMass {
    pub good: f64,
    pub bad: f64,
}

/// Capabilities every observation model offers.
pub trait SensingModel {
    /// Log-density under `state`; `-inf` outside the support.
    fn log_pdf(&self, state: ResourceState, o: f64) -> f64;

    fn pdf(&self, state: ResourceState, o: f64) -> f64 {
        self.log_pdf(state, o).exp()
    }

    fn sample<R: Rng + ?Sized>(&self, state: ResourceState, rng: &mut R) -> f64;

    /// Draws from `ω f0 + (1−ω) f1`.
    fn sample_mixture<R: Rng + ?Sized>(&self, omega: f64, rng: &mut R) -> f64 {
        let state = if rng.random::<f64>() < omega {
            ResourceState::Good
        } else {
            ResourceState::Bad
        };
        self.sample(state, rng)
    }

    /// Probability that the belief is at least `target` after `steps` observations,
    /// starting from `start`.
    fn belief_ccdf(&self, steps: usize, target: f64, start: f64, cond: Conditioning) -> Result<f64>;

    fn divergences(&self) -> Result<Divergences>;

    /// Partition of the observation space into about `cells` pieces with exact masses
    /// under both states.
    fn cells(&self, cells: usize) -> Vec<CellMass>;
}

/// A concrete observation model, tagged by `kind` in scenario files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservationModel {
    Exponential(ExponentialSensingModel),
    Gaussian(GaussianMixtureMarketModel),
}

impl ObservationModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            ObservationModel::Exponential(m) => m.validate(),
            ObservationModel::Gaussian(m) => m.validate(),
        }
    }
}

impl From<ExponentialSensingModel> for ObservationModel {
    fn from(m: ExponentialSensingModel) -> Self {
        ObservationModel::Exponential(m)
    }
}

impl From<GaussianMixtureMarketModel> for ObservationModel {
    fn from(m: GaussianMixtureMarketModel) -> Self {
        ObservationModel::Gaussian(m)
    }
}

impl SensingModel for ObservationModel {
    fn log_pdf(&self, state: ResourceState, o: f64) -> f64 {
        match self {
            ObservationModel::Exponential(m) => m.log_pdf(state, o),
            ObservationModel::Gaussian(m) => m.log_pdf(state, o),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, state: ResourceState, rng: &mut R) -> f64 {
        match self {
            ObservationModel::Exponential(m) => m.sample(state, rng),
            ObservationModel::Gaussian(m) => m.sample(state, rng),
        }
    }

    fn belief_ccdf(&self, steps: usize, target: f64, start: f64, cond: Conditioning) -> Result<f64> {
        match self {
            ObservationModel::Exponential(m) => m.belief_ccdf(steps, target, start, cond),
            ObservationModel::Gaussian(m) => m.belief_ccdf(steps, target, start, cond),
        }
    }

    fn divergences(&self) -> Result<Divergences> {
        match self {
            ObservationModel::Exponential(m) => m.divergences(),
            ObservationModel::Gaussian(m) => m.divergences(),
        }
    }

    fn cells(&self, cells: usize) -> Vec<CellMass> {
        match self {
            ObservationModel::Exponential(m) => m.cells(cells),
            ObservationModel::Gaussian(m) => m.cells(cells),
        }
    }
}

/// Mixes state-conditioned crossing probabilities by the starting belief.
pub(crate) fn mixture_ccdf(
    start: f64,
    by_state: impl Fn(ResourceState) -> Result<f64>,
) -> Result<f64> {
    let good = by_state(ResourceState::Good)?;
    let bad = by_state(ResourceState::Bad)?;
    Ok(start * good + (1.0 - start) * bad)
}

/// Cells bounded by the sorted union of per-state quantiles; `cdf` maps an edge to
/// `(F0, F1)` and `sf` to `(1−F0, 1−F1)`, so masses are differences of whichever tail is
/// smaller.
pub(crate) fn cells_from_edges(
    mut edges: Vec<f64>,
    cdf: impl Fn(f64) -> (f64, f64),
    sf: impl Fn(f64) -> (f64, f64),
) -> Vec<CellMass> {
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut out = Vec::with_capacity(edges.len() + 1);
    let mut prev = f64::NEG_INFINITY;
    for edge in edges.into_iter().chain(std::iter::once(f64::INFINITY)) {
        let mass = |pick: fn((f64, f64)) -> f64| {
            let (a, b) = (prev, edge);
            let lower = pick(cdf(b)) - pick(cdf(a));
            let upper = pick(sf(a)) - pick(sf(b));
            if pick(cdf(b)) <= 0.5 {
                lower
            } else {
                upper
            }
            .max(0.0)
        };
        let cell = CellMass { good: mass(|p| p.0), bad: mass(|p| p.1) };
        if cell.good > 0.0 || cell.bad > 0.0 {
            out.push(cell);
        }
        prev = edge;
    }
    out
}
