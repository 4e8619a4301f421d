use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::special::{sigma_log_odds, std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};
use super::{cells_from_edges, mixture_ccdf, CellMass, Conditioning, Divergences, SensingModel};
use crate::error::{Error, Result};
use crate::model::{posterior_from_log_ratio, ResourceState};

/// Latent purchase-intent signal: normal with `(mu0, sigma0)` for a product that
/// sells and `(mu1, sigma1)` for one that does not.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureMarketModel {
    pub mu0: f64,
    pub sigma0: f64,
    pub mu1: f64,
    pub sigma1: f64,
}

impl GaussianMixtureMarketModel {
    pub fn new(mu0: f64, sigma0: f64, mu1: f64, sigma1: f64) -> Result<Self> {
        let m = GaussianMixtureMarketModel { mu0, sigma0, mu1, sigma1 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma0", self.sigma0), ("sigma1", self.sigma1)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.mu0.is_finite() && self.mu1.is_finite()) {
            return Err(Error::validation("gaussian means must be finite"));
        }
        Ok(())
    }

    fn params(&self, state: ResourceState) -> (f64, f64) {
        match state {
            ResourceState::Good => (self.mu0, self.sigma0),
            ResourceState::Bad => (self.mu1, self.sigma1),
        }
    }

    fn equal_scales(&self) -> bool {
        self.sigma0 == self.sigma1
    }

    /// Separation `|mu0 − mu1|/σ` for equal scales.
    fn separation(&self) -> f64 {
        (self.mu0 - self.mu1).abs() / self.sigma0
    }

    /// Probability under `state` that one observation has `ln f0/f1 ≥ threshold`.
    fn llr_at_least(&self, threshold: f64, state: ResourceState) -> f64 {
        let (mu, sd) = self.params(state);
        let prob_between = |lo: f64, hi: f64| {
            let (a, b) = ((lo - mu) / sd, (hi - mu) / sd);
            if a > 0.0 {
                std_normal_sf(a) - std_normal_sf(b)
            } else {
                std_normal_cdf(b) - std_normal_cdf(a)
            }
            .max(0.0)
        };
        // ln f0/f1 = a·o² + b·o + c
        let (v0, v1) = (self.sigma0 * self.sigma0, self.sigma1 * self.sigma1);
        let a = 0.5 / v1 - 0.5 / v0;
        let b = self.mu0 / v0 - self.mu1 / v1;
        let c = (self.sigma1 / self.sigma0).ln() - 0.5 * self.mu0 * self.mu0 / v0 + 0.5 * self.mu1 * self.mu1 / v1
            - threshold;
        if a == 0.0 {
            if b == 0.0 {
                return if c >= 0.0 { 1.0 } else { 0.0 };
            }
            let root = -c / b;
            return if b > 0.0 {
                prob_between(root, f64::INFINITY)
            } else {
                prob_between(f64::NEG_INFINITY, root)
            };
        }
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            return if a > 0.0 { 1.0 } else { 0.0 };
        }
        let sq = disc.sqrt();
        let (r1, r2) = {
            let x1 = (-b - sq) / (2.0 * a);
            let x2 = (-b + sq) / (2.0 * a);
            (x1.min(x2), x1.max(x2))
        };
        if a > 0.0 {
            1.0 - prob_between(r1, r2)
        } else {
            prob_between(r1, r2)
        }
    }

    fn state_ccdf(&self, steps: usize, target: f64, start: f64, state: ResourceState) -> Result<f64> {
        let sigma = sigma_log_odds(start, target)?;
        if self.equal_scales() {
            let d = self.separation();
            if d == 0.0 {
                return Err(Error::domain("identical densities: observations carry no information"));
            }
            let drift = match state {
                ResourceState::Good => 0.5 * d * d,
                ResourceState::Bad => -0.5 * d * d,
            };
            let n = steps as f64;
            return Ok(std_normal_cdf((sigma + n * drift) / (n.sqrt() * d)));
        }
        if steps != 1 {
            return Err(Error::domain(
                "multi-step crossing probabilities need equal gaussian scales",
            ));
        }
        Ok(self.llr_at_least(-sigma, state))
    }
}

impl SensingModel for GaussianMixtureMarketModel {
    fn log_pdf(&self, state: ResourceState, o: f64) -> f64 {
        let (mu, sd) = self.params(state);
        let z = (o - mu) / sd;
        -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    }

    fn sample<R: Rng + ?Sized>(&self, state: ResourceState, rng: &mut R) -> f64 {
        let (mu, sd) = self.params(state);
        let z: f64 = StandardNormal.sample(rng);
        mu + sd * z
    }

    fn belief_ccdf(&self, steps: usize, target: f64, start: f64, cond: Conditioning) -> Result<f64> {
        if steps == 0 {
            return Err(Error::domain("crossing probability needs at least one step"));
        }
        match cond {
            Conditioning::State(s) => self.state_ccdf(steps, target, start, s),
            Conditioning::Mixture => mixture_ccdf(start, |s| self.state_ccdf(steps, target, start, s)),
        }
    }

    fn divergences(&self) -> Result<Divergences> {
        if !self.equal_scales() {
            return Err(Error::domain("divergences are implemented for equal gaussian scales only"));
        }
        let d = self.separation();
        if d == 0.0 {
            return Err(Error::domain("identical densities have zero divergence"));
        }
        let kl = 0.5 * d * d;
        // ln f0/f1 under the good state is N(d²/2, d²); truncate at zero.
        let ratio = 0.5 * d;
        let truncated = kl + d * std_normal_pdf(ratio) / std_normal_cdf(ratio);
        Ok(Divergences {
            good_bad: kl,
            bad_good: kl,
            truncated_good_bad: truncated,
            truncated_bad_good: truncated,
        })
    }

    fn cells(&self, cells: usize) -> Vec<CellMass> {
        let half = (cells / 2).max(1);
        let mut edges = Vec::with_capacity(2 * half);
        for (mu, sd) in [(self.mu0, self.sigma0), (self.mu1, self.sigma1)] {
            for j in 1..half {
                edges.push(mu + sd * std_normal_quantile(j as f64 / half as f64));
            }
        }
        let m = *self;
        let cdf = move |x: f64| {
            (
                std_normal_cdf((x - m.mu0) / m.sigma0),
                std_normal_cdf((x - m.mu1) / m.sigma1),
            )
        };
        let sf = move |x: f64| {
            (
                std_normal_sf((x - m.mu0) / m.sigma0),
                std_normal_sf((x - m.mu1) / m.sigma1),
            )
        };
        cells_from_edges(edges, cdf, sf)
    }
}

/// One step of the latent belief process: observe a draw from the predictive mixture
/// and update.
pub fn market_latent_step<R: Rng + ?Sized>(omega: f64, model: &GaussianMixtureMarketModel, rng: &mut R) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    if omega >= 1.0 {
        return 1.0;
    }
    let o = model.sample_mixture(omega, rng);
    let log_ratio = model.log_pdf(ResourceState::Bad, o) - model.log_pdf(ResourceState::Good, o);
    posterior_from_log_ratio(omega, log_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn market() -> GaussianMixtureMarketModel {
        GaussianMixtureMarketModel::new(0.0, 1.0, 0.75, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_scales() {
        assert!(GaussianMixtureMarketModel::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(GaussianMixtureMarketModel::new(0.0, 1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        let m = GaussianMixtureMarketModel::new(0.0, 1.0, 0.75, 2.0).unwrap();
        for s in [ResourceState::Good, ResourceState::Bad] {
            let h = 1e-3;
            let total: f64 = (-30_000..30_000).map(|i| m.pdf(s, (i as f64 + 0.5) * h)).sum::<f64>() * h;
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn latent_step_fixed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(market_latent_step(0.0, &market(), &mut rng), 0.0);
        assert_eq!(market_latent_step(1.0, &market(), &mut rng), 1.0);
    }

    #[test]
    fn latent_step_is_a_martingale() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| market_latent_step(0.5, &market(), &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 0.5).abs() <= 3.0 * (var / n as f64).sqrt());
    }

    #[test]
    fn quadratic_region_agrees_with_linear_case() {
        // Nudging one scale slightly must give nearly the closed form of the equal-scale case.
        let exact = market();
        let near = GaussianMixtureMarketModel::new(0.0, 1.0, 0.75, 1.0 + 1e-7).unwrap();
        for s in [Conditioning::GOOD, Conditioning::BAD] {
            let a = exact.belief_ccdf(1, 0.6, 0.45, s).unwrap();
            let b = near.belief_ccdf(1, 0.6, 0.45, s).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-5);
        }
    }

    #[test]
    fn unequal_scale_ccdf_matches_simulation() {
        let m = GaussianMixtureMarketModel::new(0.0, 1.0, 1.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 100_000;
        for s in [ResourceState::Good, ResourceState::Bad] {
            let want = m.belief_ccdf(1, 0.55, 0.5, Conditioning::State(s)).unwrap();
            let hits = (0..n)
                .filter(|_| {
                    let o = m.sample(s, &mut rng);
                    let lr = m.log_pdf(ResourceState::Bad, o) - m.log_pdf(ResourceState::Good, o);
                    posterior_from_log_ratio(0.5, lr) >= 0.55
                })
                .count();
            let p = hits as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((p - want).abs() <= 3.0 * se, "{s:?}: {want} vs {p}");
        }
        assert!(m.belief_ccdf(2, 0.55, 0.5, Conditioning::GOOD).is_err());
    }

    #[test]
    fn divergences_for_market_model() {
        let d = market().divergences().unwrap();
        assert_abs_diff_eq!(d.good_bad, 0.28125, epsilon = 1e-15);
        assert!(d.truncated_good_bad > d.good_bad);
        // Direct numerical truncated expectation.
        let m = market();
        let h = 1e-4;
        let (mut num, mut den) = (0.0, 0.0);
        for i in -100_000..100_000 {
            let o = (i as f64 + 0.5) * h;
            let z = m.log_pdf(ResourceState::Good, o) - m.log_pdf(ResourceState::Bad, o);
            if z >= 0.0 {
                let p = m.pdf(ResourceState::Good, o) * h;
                num += p * z;
                den += p;
            }
        }
        assert_abs_diff_eq!(d.truncated_good_bad, num / den, epsilon = 1e-6);
        let unequal = GaussianMixtureMarketModel::new(0.0, 1.0, 0.75, 2.0).unwrap();
        assert!(unequal.divergences().is_err());
    }
}
