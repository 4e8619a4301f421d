//! Probabilistic upper and lower bounds on the single-resource continuation value.
//!
//! Both bounds follow one template: the value of deciding at the next slot, plus the
//! probability of staying inside the band times the continuation from there on. The
//! upper bound places every not-yet-stopped belief at its most favorable threshold, the
//! lower bound at its least favorable one. Continuation sums are accumulated backwards
//! so that one evaluation costs O(1) once the tail for slot `k` is known.

use crate::error::{Error, Result};
use crate::model::{value_decide, ResourceSpec, UtilityParams};
use crate::observation::{clamp_belief, Conditioning, SensingModel};

use super::ThresholdBounds;

/// Threshold arrays the bounds read; entries at or before the slot being evaluated
/// may be unset (NaN).
#[derive(Clone, Copy)]
pub(crate) struct Arrays<'a> {
    pub lo: &'a [f64],
    pub hi: &'a [f64],
    pub ilo: &'a [f64],
    pub ihi: &'a [f64],
}

/// Continuation sums conditioned on each state (marketing uses only `good`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Tail {
    pub good: f64,
    pub bad: f64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Flavor {
    Radio,
    Market,
}

pub(crate) struct Curves<'a> {
    pub spec: &'a ResourceSpec,
    pub params: &'a UtilityParams,
    pub arrays: Arrays<'a>,
    pub flavor: Flavor,
}

impl Curves<'_> {
    fn horizon(&self) -> usize {
        self.params.horizon
    }

    fn ccdf(&self, target: f64, start: f64, cond: Conditioning) -> Result<f64> {
        self.spec
            .model
            .belief_ccdf(1, clamp_belief(target), clamp_belief(start), cond)
    }

    fn left(&self, l: usize) -> f64 {
        (self.horizon() - l - 1) as f64
    }

    /// Upper bound on the probability of staying in the band from slot `m−1` to `m`.
    fn mu_upper(&self, m: usize, cond: Conditioning) -> Result<f64> {
        let a = &self.arrays;
        self.mu_upper_from(a.hi[m - 1], a.lo[m - 1], m, cond)
    }

    fn mu_upper_from(&self, high_start: f64, low_start: f64, m: usize, cond: Conditioning) -> Result<f64> {
        let a = &self.arrays;
        Ok((self.ccdf(a.lo[m], high_start, cond)? - self.ccdf(a.hi[m], low_start, cond)?).max(0.0))
    }

    fn mu_lower(&self, m: usize, cond: Conditioning) -> Result<f64> {
        let a = &self.arrays;
        self.mu_lower_from(a.lo[m - 1], a.hi[m - 1], m, cond)
    }

    fn mu_lower_from(&self, low_start: f64, high_start: f64, m: usize, cond: Conditioning) -> Result<f64> {
        let a = &self.arrays;
        Ok((self.ccdf(a.ilo[m], low_start, cond)? - self.ccdf(a.ihi[m], high_start, cond)?).max(0.0))
    }

    /// Bracketed next-slot decision value for the upper bound, with the slot-`l`
    /// thresholds replaced by `(high, low)`.
    fn decision_upper(&self, high: f64, low: f64, l: usize) -> Result<f64> {
        let a = &self.arrays;
        let (r, rho) = (self.spec.reward, self.spec.penalty);
        let inner = match self.flavor {
            Flavor::Radio => {
                high * r * self.ccdf(a.ihi[l + 1], high, Conditioning::GOOD)?
                    - (1.0 - high) * rho * self.ccdf(a.hi[l + 1], low, Conditioning::BAD)?
            }
            Flavor::Market => {
                let utilize = high * (r + rho) - rho * self.ccdf(a.hi[l + 1], high, Conditioning::Mixture)?;
                let cap = r * self.ccdf(a.ihi[l + 1], high, Conditioning::Mixture)?;
                utilize.min(cap)
            }
        };
        Ok(self.left(l) * inner)
    }

    fn decision_lower(&self, low: f64, high: f64, l: usize) -> Result<f64> {
        let a = &self.arrays;
        let (r, rho) = (self.spec.reward, self.spec.penalty);
        let inner = low * r * self.ccdf(a.hi[l + 1], low, Conditioning::GOOD)?
            - (1.0 - low) * rho * self.ccdf(a.ihi[l + 1], high, Conditioning::BAD)?;
        Ok(self.left(l) * inner)
    }

    fn upper_term(&self, l: usize) -> Result<f64> {
        let a = &self.arrays;
        Ok((self.decision_upper(a.hi[l], a.lo[l], l)? - self.params.sense_cost).max(0.0))
    }

    fn lower_term(&self, l: usize) -> Result<f64> {
        let a = &self.arrays;
        Ok((self.decision_lower(a.lo[l], a.hi[l], l)? - self.params.sense_cost).max(0.0))
    }

    fn conditions(&self) -> [Conditioning; 2] {
        match self.flavor {
            Flavor::Radio => [Conditioning::GOOD, Conditioning::BAD],
            Flavor::Market => [Conditioning::Mixture, Conditioning::Mixture],
        }
    }

    /// Tail for slot `k` from the tail for slot `k+1`.
    pub fn step_upper_tail(&self, k: usize, next: Tail) -> Result<Tail> {
        if k + 2 >= self.horizon() {
            return Ok(Tail::default());
        }
        let term = self.upper_term(k + 1)?;
        let [g, b] = self.conditions();
        Ok(Tail {
            good: term + self.mu_upper(k + 2, g)? * next.good,
            bad: term + self.mu_upper(k + 2, b)? * next.bad,
        })
    }

    pub fn step_lower_tail(&self, k: usize, next: Tail) -> Result<Tail> {
        if k + 2 >= self.horizon() {
            return Ok(Tail::default());
        }
        let term = self.lower_term(k + 1)?;
        Ok(Tail {
            good: term + self.mu_lower(k + 2, Conditioning::GOOD)? * next.good,
            bad: term + self.mu_lower(k + 2, Conditioning::BAD)? * next.bad,
        })
    }

    pub fn tail_upper(&self, k: usize) -> Result<Tail> {
        let mut tail = Tail::default();
        for j in (k..self.horizon().saturating_sub(1)).rev() {
            tail = self.step_upper_tail(j, tail)?;
        }
        Ok(tail)
    }

    pub fn tail_lower(&self, k: usize) -> Result<Tail> {
        let mut tail = Tail::default();
        for j in (k..self.horizon().saturating_sub(1)).rev() {
            tail = self.step_lower_tail(j, tail)?;
        }
        Ok(tail)
    }

    pub fn upper(&self, omega: f64, k: usize, tail: Tail) -> Result<f64> {
        let c = self.params.sense_cost;
        if k + 1 >= self.horizon() {
            return Ok(-c);
        }
        let chord = self.left(k) * self.spec.reward * omega;
        let now = self.decision_upper(omega, omega, k)?.max(0.0);
        let later = match self.flavor {
            Flavor::Radio => {
                omega * self.mu_upper_from(omega, omega, k + 1, Conditioning::GOOD)? * tail.good
                    + (1.0 - omega) * self.mu_upper_from(omega, omega, k + 1, Conditioning::BAD)? * tail.bad
            }
            Flavor::Market => self.mu_upper_from(omega, omega, k + 1, Conditioning::Mixture)? * tail.good,
        };
        Ok(-c + (now + later).min(chord))
    }

    pub fn lower(&self, omega: f64, k: usize, tail: Tail) -> Result<f64> {
        let c = self.params.sense_cost;
        if k + 1 >= self.horizon() {
            return Ok(-c);
        }
        let now = self.decision_lower(omega, omega, k)?.max(0.0);
        let later = omega * self.mu_lower_from(omega, omega, k + 1, Conditioning::GOOD)? * tail.good
            + (1.0 - omega) * self.mu_lower_from(omega, omega, k + 1, Conditioning::BAD)? * tail.bad;
        Ok(-c + now + later)
    }

    /// Continuation bound minus the value of deciding immediately.
    pub fn gap(&self, value: f64, omega: f64, k: usize) -> f64 {
        value - (self.horizon() - k) as f64 * value_decide(omega, self.spec)
    }
}

fn checked_curves<'a>(
    omega: f64,
    k: usize,
    spec: &'a ResourceSpec,
    params: &'a UtilityParams,
    bounds: &'a ThresholdBounds,
    flavor: Flavor,
) -> Result<Curves<'a>> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::domain(format!("belief {omega} outside [0, 1]")));
    }
    let l = params.horizon;
    if k >= l {
        return Err(Error::contract(format!("slot {k} outside horizon {l}")));
    }
    let all = [&bounds.outer.lower, &bounds.outer.upper, &bounds.inner.lower, &bounds.inner.upper];
    if all.iter().any(|a| a.len() != l) {
        return Err(Error::contract("threshold bounds do not cover the horizon"));
    }
    if let Some(m) = (k + 1..l).find(|&m| all.iter().any(|a| !a[m].is_finite())) {
        return Err(Error::contract(format!(
            "threshold bounds for slot {m} are needed before slot {k} can be bounded"
        )));
    }
    Ok(Curves {
        spec,
        params,
        arrays: Arrays {
            lo: &bounds.outer.lower,
            hi: &bounds.outer.upper,
            ilo: &bounds.inner.lower,
            ihi: &bounds.inner.upper,
        },
        flavor,
    })
}

/// Upper bound on the continuation value at `(omega, k)` given the bounds already
/// computed for the later slots.
pub fn lemma5_upper_bound(
    omega: f64,
    k: usize,
    spec: &ResourceSpec,
    params: &UtilityParams,
    bounds: &ThresholdBounds,
) -> Result<f64> {
    let curves = checked_curves(omega, k, spec, params, bounds, Flavor::Radio)?;
    curves.upper(omega, k, curves.tail_upper(k)?)
}

/// Lower bound on the continuation value, the pessimistic mirror of
/// [`lemma5_upper_bound`].
pub fn lemma5_lower_bound(
    omega: f64,
    k: usize,
    spec: &ResourceSpec,
    params: &UtilityParams,
    bounds: &ThresholdBounds,
) -> Result<f64> {
    let curves = checked_curves(omega, k, spec, params, bounds, Flavor::Radio)?;
    curves.lower(omega, k, curves.tail_lower(k)?)
}

/// Upper bound for the latent-mixture model, where crossing probabilities are taken
/// under the predictive mixture instead of a hidden state.
pub fn marketing_upper_bound(
    omega: f64,
    k: usize,
    spec: &ResourceSpec,
    params: &UtilityParams,
    bounds: &ThresholdBounds,
) -> Result<f64> {
    let curves = checked_curves(omega, k, spec, params, bounds, Flavor::Market)?;
    curves.upper(omega, k, curves.tail_upper(k)?)
}
