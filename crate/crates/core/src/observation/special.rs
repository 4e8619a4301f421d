//! Scalar special functions used by the observation models.

use crate::error::{Error, Result};

/// Beliefs are kept this far away from 0 and 1 before taking log-odds.
pub const BELIEF_CLAMP: f64 = 1e-12;

pub fn clamp_belief(omega: f64) -> f64 {
    omega.clamp(BELIEF_CLAMP, 1.0 - BELIEF_CLAMP)
}

/// CDF of the sum of `ell` independent unit-mean exponentials.
pub fn erlang_cdf(ell: usize, x: f64) -> Result<f64> {
    if ell == 0 {
        return Err(Error::domain("erlang_cdf needs at least one term"));
    }
    if x.is_nan() {
        return Err(Error::domain("erlang_cdf evaluated at NaN"));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    let n = ell as f64;
    let ln_x = x.ln();
    if x < n {
        // Lower tail: e^{-x} Σ_{m≥ell} x^m/m!, a series with ratio x/(m+1) < 1.
        let mut log_term = -x + n * ln_x - ln_factorial(ell);
        let mut sum = 0.0;
        let mut m = n;
        loop {
            let term = log_term.exp();
            sum += term;
            if term <= sum * 1e-17 || term == 0.0 {
                break;
            }
            m += 1.0;
            log_term += ln_x - m.ln();
        }
        Ok(sum.min(1.0))
    } else {
        // Upper tail: e^{-x} Σ_{m<ell} x^m/m!, summed from the largest term down.
        let mut log_term = -x + (n - 1.0) * ln_x - ln_factorial(ell - 1);
        let mut tail = 0.0;
        let mut m = n - 1.0;
        loop {
            let term = log_term.exp();
            tail += term;
            if m == 0.0 || term <= tail * 1e-17 {
                break;
            }
            log_term += m.ln() - ln_x;
            m -= 1.0;
        }
        Ok((1.0 - tail).max(0.0))
    }
}

fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

/// Log-odds difference `ln(x(1−y)/((1−x)y))`.
pub fn sigma_log_odds(x: f64, y: f64) -> Result<f64> {
    for v in [x, y] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::domain(format!("log-odds need a belief strictly inside (0, 1), got {v}")));
        }
    }
    Ok(log_odds(x) - log_odds(y))
}

pub(crate) fn log_odds(omega: f64) -> f64 {
    omega.ln() - (-omega).ln_1p()
}

/// Standard normal CDF.
pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal survival function, accurate in the upper tail.
pub(crate) fn std_normal_sf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

pub(crate) fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub(crate) fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn erlang_examples() {
        assert_abs_diff_eq!(erlang_cdf(1, 2f64.ln()).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(erlang_cdf(7, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(erlang_cdf(2, 1.0).unwrap(), 1.0 - 2.0 * (-1f64).exp(), epsilon = 1e-15);
        assert!(matches!(erlang_cdf(0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn erlang_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| {
                let s: f64 = (0..2).map(|_| -(1.0 - rng.random::<f64>()).ln()).sum();
                s <= 1.0
            })
            .count();
        let p = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((p - erlang_cdf(2, 1.0).unwrap()).abs() < 4.0 * se);
    }

    #[test]
    fn erlang_matches_regularized_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let ell = rng.random_range(1..=10usize);
            let x = rng.random_range(0.0..30.0);
            let want = statrs::function::gamma::gamma_lr(ell as f64, x);
            assert_abs_diff_eq!(erlang_cdf(ell, x).unwrap(), want, epsilon = 1e-10);
        }
    }

    #[test]
    fn erlang_handles_long_sums() {
        let v = erlang_cdf(800, 800.0).unwrap();
        assert!(v > 0.49 && v < 0.51);
        assert!(erlang_cdf(800, 10.0).unwrap() < 1e-300);
        assert_abs_diff_eq!(erlang_cdf(3, 2000.0).unwrap(), 1.0);
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_log_odds(0.5, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(sigma_log_odds(9.0 / 11.0, 1.0 / 9.0).unwrap(), 36f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(sigma_log_odds(0.8182, 0.1111).unwrap(), 3.583, epsilon = 1e-3);
        assert_abs_diff_eq!(sigma_log_odds(0.1111, 0.8182).unwrap(), -3.583, epsilon = 1e-3);
        assert!(sigma_log_odds(0.0, 0.5).is_err());
        assert!(sigma_log_odds(0.5, 1.0).is_err());
    }

    #[test]
    fn normal_helpers_are_consistent() {
        for p in [1e-9, 0.01, 0.3, 0.5, 0.9, 0.999] {
            assert_abs_diff_eq!(std_normal_cdf(std_normal_quantile(p)), p, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(std_normal_sf(1.3) + std_normal_cdf(1.3), 1.0, epsilon = 1e-15);
    }
}
