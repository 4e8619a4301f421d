use rand::Rng;
use serde::{Deserialize, Serialize};

use super::special::{erlang_cdf, sigma_log_odds};
use super::{cells_from_edges, mixture_ccdf, CellMass, Conditioning, Divergences, SensingModel};
use crate::error::{Error, Result};
use crate::model::ResourceState;

/// Energy detector statistic: exponential with mean `theta0` when the channel is idle
/// and `theta0·(1+snr)` when a primary transmits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialSensingModel {
    theta0: f64,
    snr: f64,
}

impl ExponentialSensingModel {
    pub fn new(theta0: f64, snr: f64) -> Result<Self> {
        let m = ExponentialSensingModel { theta0, snr };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta0 > 0.0 && self.theta0.is_finite()) {
            return Err(Error::validation(format!("theta0 must be positive, got {}", self.theta0)));
        }
        if !(self.snr >= 0.0 && self.snr.is_finite()) {
            return Err(Error::validation(format!("snr must be >= 0, got {}", self.snr)));
        }
        Ok(())
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn theta1(&self) -> f64 {
        self.theta0 * (1.0 + self.snr)
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    fn mean(&self, state: ResourceState) -> f64 {
        match state {
            ResourceState::Good => self.theta0,
            ResourceState::Bad => self.theta1(),
        }
    }

    fn require_informative(&self) -> Result<()> {
        if self.snr <= 0.0 {
            return Err(Error::domain("zero snr: observations carry no information"));
        }
        Ok(())
    }

    fn state_ccdf(&self, steps: usize, target: f64, start: f64, state: ResourceState) -> Result<f64> {
        let z = self.snr;
        let drift = sigma_log_odds(start, target)? + steps as f64 * z.ln_1p();
        let arg = match state {
            ResourceState::Good => (1.0 + z) / z * drift,
            ResourceState::Bad => drift / z,
        };
        erlang_cdf(steps, arg)
    }
}

impl SensingModel for ExponentialSensingModel {
    fn log_pdf(&self, state: ResourceState, o: f64) -> f64 {
        if o < 0.0 {
            return f64::NEG_INFINITY;
        }
        let theta = self.mean(state);
        -theta.ln() - o / theta
    }

    fn sample<R: Rng + ?Sized>(&self, state: ResourceState, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        -self.mean(state) * (-u).ln_1p()
    }

    fn belief_ccdf(&self, steps: usize, target: f64, start: f64, cond: Conditioning) -> Result<f64> {
        if steps == 0 {
            return Err(Error::domain("crossing probability needs at least one step"));
        }
        self.require_informative()?;
        match cond {
            Conditioning::State(s) => self.state_ccdf(steps, target, start, s),
            Conditioning::Mixture => mixture_ccdf(start, |s| self.state_ccdf(steps, target, start, s)),
        }
    }

    fn divergences(&self) -> Result<Divergences> {
        divergences_exponential(self.snr)
    }

    fn cells(&self, cells: usize) -> Vec<CellMass> {
        let half = (cells / 2).max(1);
        let mut edges = Vec::with_capacity(2 * half);
        for theta in [self.theta0, self.theta1()] {
            for j in 1..half {
                edges.push(-theta * (-(j as f64) / half as f64).ln_1p());
            }
        }
        edges.push(0.0);
        let (t0, t1) = (self.theta0, self.theta1());
        let sf = |x: f64| {
            if x <= 0.0 {
                (1.0, 1.0)
            } else {
                ((-x / t0).exp(), (-x / t1).exp())
            }
        };
        let cdf = |x: f64| {
            if x <= 0.0 {
                (0.0, 0.0)
            } else {
                (-(-x / t0).exp_m1(), -(-x / t1).exp_m1())
            }
        };
        cells_from_edges(edges, cdf, sf)
    }
}

/// KL and truncated divergences of the exponential pair with `θ1/θ0 = 1+snr`.
pub fn divergences_exponential(snr: f64) -> Result<Divergences> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::domain(format!("divergences need snr > 0, got {snr}")));
    }
    let ln1z = snr.ln_1p();
    let ratio = 1.0 + snr;
    let truncated_good_bad = ln1z / -(-(ratio.ln() * ratio / snr)).exp_m1() - snr / ratio;
    Ok(Divergences {
        good_bad: ln1z + 1.0 / ratio - 1.0,
        bad_good: snr - ln1z,
        truncated_good_bad,
        truncated_bad_good: snr,
    })
}
