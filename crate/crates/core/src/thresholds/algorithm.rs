//! Backward construction of threshold schedules from the value-function bounds.

use serde::{Deserialize, Serialize};

use super::bounds::{Arrays, Curves, Flavor, Tail};
use super::ThresholdSchedule;
use crate::error::{Error, Result};
use crate::model::{ResourceSpec, UtilityParams};
use crate::observation::special::BELIEF_CLAMP;
use crate::observation::ObservationModel;

const ROOT_TOLERANCE: f64 = 1e-10;

/// Outer thresholds bracket the optimal ones from outside; inner thresholds come from
/// the lower bound and sit inside the optimal continuation band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBounds {
    pub outer: ThresholdSchedule,
    pub inner: ThresholdSchedule,
}

/// Runs the recursive approximation and returns outer and inner threshold bounds.
///
/// Exponential models use both value bounds; the latent-mixture model uses only its
/// upper bound and keeps the inner thresholds at the center.
pub fn algorithm1_bounds(spec: &ResourceSpec, params: &UtilityParams) -> Result<ThresholdBounds> {
    spec.validate()?;
    params.validate()?;
    let flavor = match spec.model {
        ObservationModel::Exponential(_) => Flavor::Radio,
        ObservationModel::Gaussian(_) => Flavor::Market,
    };
    let l = params.horizon;
    let center = spec.decision_boundary();
    let mut lo = vec![f64::NAN; l];
    let mut hi = vec![f64::NAN; l];
    let mut ilo = vec![f64::NAN; l];
    let mut ihi = vec![f64::NAN; l];
    for a in [&mut lo, &mut hi, &mut ilo, &mut ihi] {
        a[l - 1] = center;
    }
    let mut up_tail = Tail::default();
    let mut low_tail = Tail::default();
    for k in (0..l.saturating_sub(1)).rev() {
        let curves = Curves {
            spec,
            params,
            arrays: Arrays { lo: &lo, hi: &hi, ilo: &ilo, ihi: &ihi },
            flavor,
        };
        up_tail = curves.step_upper_tail(k, up_tail)?;
        let outer = crossing_points(center, k, |w| Ok(curves.gap(curves.upper(w, k, up_tail)?, w, k)))?;
        let inner = match flavor {
            Flavor::Radio => {
                low_tail = curves.step_lower_tail(k, low_tail)?;
                crossing_points(center, k, |w| Ok(curves.gap(curves.lower(w, k, low_tail)?, w, k)))?
            }
            Flavor::Market => None,
        };
        let (r1, r2) = outer.unwrap_or((center, center));
        let (q1, q2) = inner.unwrap_or((center, center));
        lo[k] = r1.min(lo[k + 1]);
        hi[k] = r2.max(hi[k + 1]);
        ilo[k] = q1.min(ilo[k + 1]).clamp(lo[k], center);
        ihi[k] = q2.max(ihi[k + 1]).clamp(center, hi[k]);
    }
    Ok(ThresholdBounds {
        outer: ThresholdSchedule { resource: spec.id, lower: lo, upper: hi, center },
        inner: ThresholdSchedule { resource: spec.id, lower: ilo, upper: ihi, center },
    })
}

/// The outer schedule of [`algorithm1_bounds`].
pub fn algorithm1_schedule(spec: &ResourceSpec, params: &UtilityParams) -> Result<ThresholdSchedule> {
    Ok(algorithm1_bounds(spec, params)?.outer)
}

/// Beliefs on either side of `center` where `gap` changes sign, or `None` when the
/// continuation bound does not beat deciding even at the center.
fn crossing_points(
    center: f64,
    k: usize,
    gap: impl Fn(f64) -> Result<f64>,
) -> Result<Option<(f64, f64)>> {
    let eval = |w: f64| -> Result<f64> {
        let v = gap(w)?;
        if v.is_nan() {
            return Err(Error::numeric(format!("threshold search at slot {k} hit NaN at belief {w}")));
        }
        Ok(v)
    };
    if eval(center)? <= 0.0 {
        return Ok(None);
    }
    let left = bisect(BELIEF_CLAMP, center, &eval, k)?;
    let right = bisect(1.0 - BELIEF_CLAMP, center, &eval, k)?;
    Ok(Some((left.min(center), right.max(center))))
}

/// Root between `outside` (where deciding should win) and `inside` (where the gap is
/// positive). Returns the clamp edge itself when the gap is positive there too.
fn bisect(outside: f64, inside: f64, eval: &impl Fn(f64) -> Result<f64>, k: usize) -> Result<f64> {
    if eval(outside)? > 0.0 {
        return Ok(if outside < inside { 0.0 } else { 1.0 });
    }
    let (mut out, mut inn) = (outside, inside);
    for _ in 0..200 {
        if (inn - out).abs() <= ROOT_TOLERANCE {
            return Ok(0.5 * (out + inn));
        }
        let mid = 0.5 * (out + inn);
        if eval(mid)? > 0.0 {
            inn = mid;
        } else {
            out = mid;
        }
    }
    Err(Error::numeric(format!("threshold bisection at slot {k} did not converge")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::value_decide;
    use crate::observation::{Conditioning, ExponentialSensingModel, GaussianMixtureMarketModel, SensingModel};
    use crate::thresholds::{easy_schedule, lemma5_lower_bound, lemma5_upper_bound, marketing_upper_bound};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn radio(r: f64, rho: f64, snr: f64) -> ResourceSpec {
        ResourceSpec::new(1, 0.5, r, rho, ExponentialSensingModel::new(1.0, snr).unwrap().into()).unwrap()
    }

    fn market() -> ResourceSpec {
        ResourceSpec::new(1, 0.5, 1.0, 1.0, GaussianMixtureMarketModel::new(0.0, 1.0, 0.75, 1.0).unwrap().into())
            .unwrap()
    }

    #[test]
    fn schedule_is_valid_for_reference_parameters() {
        let s = radio(2.0, 2.0, 3.0);
        for l in [1, 2, 5, 10, 20, 60] {
            let b = algorithm1_bounds(&s, &UtilityParams::new(l, 2.0)).unwrap();
            b.outer.validate().unwrap();
            b.inner.validate().unwrap();
            for k in 0..l {
                assert!(b.outer.lower[k] <= b.inner.lower[k] && b.inner.upper[k] <= b.outer.upper[k]);
            }
        }
    }

    #[test]
    fn reference_band_straddles_prior() {
        let sched = algorithm1_schedule(&radio(2.0, 2.0, 3.0), &UtilityParams::new(10, 2.0)).unwrap();
        assert!(sched.lower[0] < 0.5 && sched.upper[0] > 0.5);
    }

    #[test]
    fn refines_easy_bounds() {
        let s = radio(2.0, 2.0, 3.0);
        for c in [0.5, 2.0, 5.0] {
            let p = UtilityParams::new(20, c);
            let a = algorithm1_schedule(&s, &p).unwrap();
            let e = easy_schedule(&s, &p);
            for k in 0..20 {
                assert!(a.lower[k] >= e.lower[k] - 1e-9, "c {c} k {k}");
                assert!(a.upper[k] <= e.upper[k] + 1e-9, "c {c} k {k}");
            }
        }
    }

    #[test]
    fn expensive_sensing_never_starts_from_the_prior() {
        let s = radio(2.0, 4.0, 3.0);
        for l in 1..=20 {
            let sched = algorithm1_schedule(&s, &UtilityParams::new(l, 10.0)).unwrap();
            assert!(sched.should_decide(0, 0.5), "L {l}");
            if l <= 15 {
                assert!(sched.lower.iter().chain(&sched.upper).all(|&v| v == sched.center), "L {l}");
            }
        }
    }

    #[test]
    fn penultimate_slot_bounds_are_exact() {
        // One step before the end the continuation value is
        // −c + ω r P(ω' ≥ center | good) − (1−ω) ρ P(ω' ≥ center | bad).
        let s = radio(2.0, 3.0, 3.0);
        let p = UtilityParams::new(6, 0.7);
        let b = algorithm1_bounds(&s, &p).unwrap();
        let center = s.decision_boundary();
        for j in 1..100 {
            let w = j as f64 / 100.0;
            let g = s.model.belief_ccdf(1, center, w, Conditioning::GOOD).unwrap();
            let bad = s.model.belief_ccdf(1, center, w, Conditioning::BAD).unwrap();
            let exact = -p.sense_cost + (w * s.reward * g - (1.0 - w) * s.penalty * bad).max(0.0);
            let chord = -p.sense_cost + s.reward * w;
            let up = lemma5_upper_bound(w, 4, &s, &p, &b).unwrap();
            let low = lemma5_lower_bound(w, 4, &s, &p, &b).unwrap();
            assert_abs_diff_eq!(up, exact.min(chord), epsilon = 1e-12);
            assert_abs_diff_eq!(low, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn bounds_are_ordered_and_capped() {
        let s = radio(2.0, 2.0, 3.0);
        let p = UtilityParams::new(12, 1.0);
        let b = algorithm1_bounds(&s, &p).unwrap();
        for k in 0..12 {
            for j in 0..=1000 {
                let w = j as f64 / 1000.0;
                let up = lemma5_upper_bound(w, k, &s, &p, &b).unwrap();
                let low = lemma5_lower_bound(w, k, &s, &p, &b).unwrap();
                let chord = -p.sense_cost + (11 - k.min(11)) as f64 * s.reward * w;
                assert!(low <= up + 1e-12, "k {k} w {w}: {low} > {up}");
                assert!(up <= chord + 1e-12);
                assert!(up >= -p.sense_cost);
            }
            assert_abs_diff_eq!(lemma5_upper_bound(0.0, k, &s, &p, &b).unwrap(), -p.sense_cost, epsilon = 1e-9);
        }
    }

    #[test]
    fn bounds_need_later_slots() {
        let s = radio(2.0, 2.0, 3.0);
        let p = UtilityParams::new(8, 1.0);
        let mut b = algorithm1_bounds(&s, &p).unwrap();
        b.outer.upper[5] = f64::NAN;
        assert!(matches!(lemma5_upper_bound(0.5, 3, &s, &p, &b), Err(Error::Contract(_))));
        assert!(lemma5_upper_bound(0.5, 5, &s, &p, &b).is_ok());
    }

    #[test]
    fn marketing_schedule_uses_center_inner_bounds() {
        let s = market();
        let p = UtilityParams::new(10, 0.3);
        let b = algorithm1_bounds(&s, &p).unwrap();
        b.outer.validate().unwrap();
        assert!(b.inner.lower.iter().chain(&b.inner.upper).all(|&v| v == 0.5));
        assert!(b.outer.lower[0] < 0.5 && b.outer.upper[0] > 0.5);
        assert_abs_diff_eq!(marketing_upper_bound(0.0, 0, &s, &p, &b).unwrap(), -0.3, epsilon = 1e-9);
    }

    #[test]
    fn marketing_penultimate_slot_matches_hand_expansion() {
        let s = market();
        let p = UtilityParams::new(4, 0.3);
        let b = algorithm1_bounds(&s, &p).unwrap();
        for w in [0.2, 0.5, 0.7] {
            let f = s.model.belief_ccdf(1, 0.5, w, Conditioning::Mixture).unwrap();
            let want = -0.3 + (w * 2.0 - f).min(f).max(0.0).min(w);
            assert_abs_diff_eq!(marketing_upper_bound(w, 2, &s, &p, &b).unwrap(), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn crossing_points_bracket_the_sign_change() {
        let s = radio(2.0, 2.0, 3.0);
        let p = UtilityParams::new(10, 2.0);
        let b = algorithm1_bounds(&s, &p).unwrap();
        // Just outside the outer band, deciding beats the upper bound at slot 0.
        let (lo, hi) = b.outer.band(0);
        for w in [lo - 1e-4, hi + 1e-4] {
            let v = lemma5_upper_bound(w, 0, &s, &p, &b).unwrap();
            assert!(v <= 10.0 * value_decide(w, &s) + 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn schedules_contract_for_random_parameters(
            r in 0.2f64..5.0,
            rho in 0.2f64..5.0,
            snr in 0.3f64..15.0,
            c in 0.0f64..6.0,
            l in 1usize..40,
        ) {
            let b = algorithm1_bounds(&radio(r, rho, snr), &UtilityParams::new(l, c)).unwrap();
            b.outer.validate().unwrap();
            b.inner.validate().unwrap();
        }
    }
}
