//! Backward induction for a single resource on a uniform belief grid.
//!
//! Expectations over the next observation use a finite partition of the observation
//! space with exact cell probabilities under each state. Conditioning on the cell
//! instead of the raw observation is itself a valid (slightly less informative)
//! observation model, so the discretized problem keeps the martingale property and
//! the convexity of the exact one.

use crate::error::{Error, Result};
use crate::model::{value_decide, ResourceSpec, UtilityParams};
use crate::observation::{CellMass, SensingModel};
use crate::thresholds::ThresholdSchedule;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Value tables and extracted thresholds of the single-resource problem.
#[derive(Clone, Debug)]
pub struct DPTable {
    pub grid: usize,
    /// `values[k][j]` is the optimal value at grid belief `j` and slot `k`, for
    /// `k = 0..=L`.
    pub values: Vec<Vec<f64>>,
    /// `continuation[k][j]` is the value of sensing once more, for `k = 0..L`.
    pub continuation: Vec<Vec<f64>>,
    pub schedule: ThresholdSchedule,
    cells: Vec<CellMass>,
    sense_cost: f64,
}

/// Linear interpolation of grid values at `omega`.
pub(crate) fn interpolate(values: &[f64], omega: f64) -> f64 {
    let last = values.len() - 1;
    let x = omega.clamp(0.0, 1.0) * last as f64;
    let j = (x.floor() as usize).min(last - 1);
    let t = x - j as f64;
    values[j] + t * (values[j + 1] - values[j])
}

pub(crate) fn grid_point(j: usize, grid: usize) -> f64 {
    j as f64 / (grid - 1) as f64
}

/// `−c + E[next(ω')]` where `ω'` is the posterior after one cell observation.
pub(crate) fn expected_next(omega: f64, cells: &[CellMass], sense_cost: f64, next: impl Fn(f64) -> f64) -> f64 {
    let mut total = 0.0;
    for cell in cells {
        let good = omega * cell.good;
        let weight = good + (1.0 - omega) * cell.bad;
        if weight > 0.0 {
            total += weight * next(good / weight);
        }
    }
    -sense_cost + total
}

impl DPTable {
    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, omega: f64, k: usize) -> f64 {
        interpolate(&self.values[k], omega)
    }

    /// Continuation value at an arbitrary belief, evaluated from the next slot's grid.
    pub fn continuation_at(&self, omega: f64, k: usize) -> f64 {
        let next = &self.values[k + 1];
        expected_next(omega, &self.cells, self.sense_cost, |w| interpolate(next, w))
    }
}

/// Solves the single-resource problem with a `grid`-point belief grid and about
/// `cells` observation cells.
pub fn solve_single_dp(spec: &ResourceSpec, params: &UtilityParams, grid: usize, cells: usize) -> Result<DPTable> {
    spec.validate()?;
    params.validate()?;
    if grid < 3 {
        return Err(Error::validation(format!("belief grid needs at least 3 points, got {grid}")));
    }
    let cells = spec.model.cells(cells);
    solve_with_cells(spec, params, grid, cells)
}

pub(crate) fn solve_with_cells(
    spec: &ResourceSpec,
    params: &UtilityParams,
    grid: usize,
    cells: Vec<CellMass>,
) -> Result<DPTable> {
    let l = params.horizon;
    let c = params.sense_cost;
    let mut values = vec![vec![0.0; grid]; l + 1];
    let mut continuation = vec![vec![0.0; grid]; l];
    for k in (0..l).rev() {
        let next = &values[k + 1];
        let row = |j: usize| {
            let w = grid_point(j, grid);
            expected_next(w, &cells, c, |x| interpolate(next, x))
        };
        #[cfg(feature = "parallel")]
        let cont: Vec<f64> = (0..grid).into_par_iter().map(row).collect();
        #[cfg(not(feature = "parallel"))]
        let cont: Vec<f64> = (0..grid).map(row).collect();
        let left = (l - k) as f64;
        let current: Vec<f64> = cont
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let decide = left * value_decide(grid_point(j, grid), spec);
                if k + 1 == l {
                    decide
                } else {
                    decide.max(v)
                }
            })
            .collect();
        continuation[k] = cont;
        values[k] = current;
    }
    let mut table = DPTable {
        grid,
        values,
        continuation,
        schedule: ThresholdSchedule::collapsed(spec, params),
        cells,
        sense_cost: c,
    };
    table.schedule = extract_schedule(&table, spec, params)?;
    Ok(table)
}

fn extract_schedule(table: &DPTable, spec: &ResourceSpec, params: &UtilityParams) -> Result<ThresholdSchedule> {
    let l = params.horizon;
    let center = spec.decision_boundary();
    let mut sched = ThresholdSchedule::collapsed(spec, params);
    for k in 0..l.saturating_sub(1) {
        let left = (l - k) as f64;
        let gap = |w: f64| table.continuation_at(w, k) - left * value_decide(w, spec);
        let signs: Vec<bool> = (0..table.grid)
            .map(|j| table.continuation[k][j] - left * value_decide(grid_point(j, table.grid), spec) > 0.0)
            .collect();
        let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
        if changes > 2 {
            return Err(Error::numeric(format!(
                "continuation region at slot {k} has {changes} boundaries"
            )));
        }
        let Some(first) = signs.iter().position(|&s| s) else {
            continue;
        };
        let last = signs.iter().rposition(|&s| s).unwrap_or(first);
        let lower = if first == 0 {
            0.0
        } else {
            refine(grid_point(first - 1, table.grid), grid_point(first, table.grid), &gap)
        };
        let upper = if last + 1 == table.grid {
            1.0
        } else {
            refine(grid_point(last + 1, table.grid), grid_point(last, table.grid), &gap)
        };
        sched.lower[k] = lower.min(center);
        sched.upper[k] = upper.max(center);
    }
    Ok(sched)
}

/// Bisection between a grid point where deciding wins and one where sensing wins.
fn refine(outside: f64, inside: f64, gap: &impl Fn(f64) -> f64) -> f64 {
    let (mut out, mut inn) = (outside, inside);
    for _ in 0..60 {
        let mid = 0.5 * (out + inn);
        if gap(mid) > 0.0 {
            inn = mid;
        } else {
            out = mid;
        }
    }
    0.5 * (out + inn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observation::ExponentialSensingModel;
    use approx::assert_abs_diff_eq;

    fn spec(r: f64, rho: f64) -> ResourceSpec {
        ResourceSpec::new(1, 0.5, r, rho, ExponentialSensingModel::new(1.0, 3.0).unwrap().into()).unwrap()
    }

    #[test]
    fn last_slot_is_immediate_decision() {
        let s = spec(2.0, 2.0);
        let t = solve_single_dp(&s, &UtilityParams::new(5, 1.0), 101, 200).unwrap();
        for j in 0..101 {
            let w = grid_point(j, 101);
            assert_abs_diff_eq!(t.values[4][j], value_decide(w, &s), epsilon = 1e-15);
            assert_eq!(t.values[5][j], 0.0);
        }
        assert_eq!(t.schedule.band(4), (0.5, 0.5));
    }

    #[test]
    fn prohibitive_cost_never_senses() {
        let s = spec(2.0, 2.0);
        let p = UtilityParams::new(6, 50.0);
        let t = solve_single_dp(&s, &p, 101, 200).unwrap();
        for k in 0..6 {
            for j in 0..101 {
                let w = grid_point(j, 101);
                assert_abs_diff_eq!(t.values[k][j], (6 - k) as f64 * value_decide(w, &s), epsilon = 1e-12);
            }
        }
        assert!(t.schedule.lower.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn value_is_bellman_consistent() {
        let s = spec(2.0, 2.0);
        let p = UtilityParams::new(8, 2.0);
        let t = solve_single_dp(&s, &p, 201, 400).unwrap();
        for k in 0..7 {
            for j in 0..201 {
                let w = grid_point(j, 201);
                let want = ((8 - k) as f64 * value_decide(w, &s)).max(t.continuation[k][j]);
                assert_eq!(t.values[k][j], want);
            }
        }
    }

    #[test]
    fn thresholds_straddle_center_and_contract() {
        let s = spec(2.0, 2.0);
        let t = solve_single_dp(&s, &UtilityParams::new(20, 2.0), 1001, 1000).unwrap();
        t.schedule.validate().unwrap();
        assert!(t.schedule.lower[0] < 0.5 && t.schedule.upper[0] > 0.5);
    }

    #[test]
    fn continuation_is_convex() {
        let s = spec(2.0, 2.0);
        let t = solve_single_dp(&s, &UtilityParams::new(10, 2.0), 1001, 1000).unwrap();
        for row in &t.continuation {
            for w in row.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-6);
            }
        }
    }

    #[test]
    fn interpolation_hits_nodes() {
        let v = [0.0, 1.0, 4.0];
        assert_eq!(interpolate(&v, 0.5), 1.0);
        assert_eq!(interpolate(&v, 0.75), 2.5);
        assert_eq!(interpolate(&v, 1.0), 4.0);
    }
}
