//! Exact backward induction over joint beliefs and active sets for tiny instances.
//!
//! At every slot the decision maker may decide any subset of the active resources and
//! then senses one of the others. Tables are kept for every active set: one
//! dimension per active resource on a shared uniform grid.

use crate::error::{Error, Result};
use crate::model::{terminal_decision, value_decide, Action, BeliefState, ResourceSpec, UtilityParams};
use crate::observation::{CellMass, SensingModel};

use super::dp::{expected_next, grid_point, interpolate};

pub const MAX_RESOURCES: usize = 2;
pub const MAX_HORIZON: usize = 6;
pub const MAX_GRID: usize = 51;

/// A tiny multi-resource problem small enough to solve exactly.
#[derive(Clone, Debug)]
pub struct OracleInstance {
    pub specs: Vec<ResourceSpec>,
    pub params: UtilityParams,
    pub grid: usize,
    pub cells: usize,
}

impl OracleInstance {
    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() || self.specs.len() > MAX_RESOURCES {
            return Err(Error::validation(format!(
                "oracle handles 1 to {MAX_RESOURCES} resources, got {}",
                self.specs.len()
            )));
        }
        if self.params.horizon > MAX_HORIZON {
            return Err(Error::validation(format!(
                "oracle horizon is capped at {MAX_HORIZON}, got {}",
                self.params.horizon
            )));
        }
        if self.grid < 3 || self.grid > MAX_GRID {
            return Err(Error::validation(format!(
                "oracle grid must have 3 to {MAX_GRID} points, got {}",
                self.grid
            )));
        }
        self.params.validate()?;
        self.specs.iter().try_for_each(ResourceSpec::validate)
    }
}

/// Value tables of a solved [`OracleInstance`].
#[derive(Clone, Debug)]
pub struct OracleSolution {
    pub specs: Vec<ResourceSpec>,
    pub params: UtilityParams,
    pub grid: usize,
    cells: Vec<Vec<CellMass>>,
    /// `singles[i][k][j]`: value with only resource `i` active.
    pub singles: Vec<Vec<Vec<f64>>>,
    /// `pair[k][j0 * grid + j1]`: value with both resources active.
    pub pair: Option<Vec<Vec<f64>>>,
}

/// Outcome of checking `V(ω_j,{j},k) + V(ω_i,{i},k) ≥ V(ω,{i,j},k)` on the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubmodularityReport {
    pub checked: usize,
    pub violations: usize,
    pub max_violation: f64,
}

impl SubmodularityReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

const VIOLATION_TOLERANCE: f64 = 1e-6;

pub fn solve_oracle(instance: &OracleInstance) -> Result<OracleSolution> {
    instance.validate()?;
    let g = instance.grid;
    let l = instance.params.horizon;
    let c = instance.params.sense_cost;
    let cells: Vec<Vec<CellMass>> = instance.specs.iter().map(|s| s.model.cells(instance.cells)).collect();

    let mut singles = Vec::with_capacity(instance.specs.len());
    for (spec, cell) in instance.specs.iter().zip(&cells) {
        let mut table = vec![vec![0.0; g]; l + 1];
        for k in (0..l).rev() {
            let left = (l - k) as f64;
            let row: Vec<f64> = (0..g)
                .map(|j| {
                    let w = grid_point(j, g);
                    let decide = left * value_decide(w, spec);
                    if k + 1 == l {
                        return decide;
                    }
                    let next = &table[k + 1];
                    decide.max(expected_next(w, cell, c, |x| interpolate(next, x)))
                })
                .collect();
            table[k] = row;
        }
        singles.push(table);
    }

    let pair = if instance.specs.len() == 2 {
        let mut table = vec![vec![0.0; g * g]; l + 1];
        for k in (0..l).rev() {
            let mut row = vec![0.0; g * g];
            for j0 in 0..g {
                for j1 in 0..g {
                    let w = [grid_point(j0, g), grid_point(j1, g)];
                    row[j0 * g + j1] = pair_options(instance, &cells, &singles, &table, w, k, [Some(j0), Some(j1)])
                        .iter()
                        .map(|o| o.value)
                        .fold(f64::NEG_INFINITY, f64::max);
                }
            }
            table[k] = row;
        }
        Some(table)
    } else {
        None
    };

    Ok(OracleSolution {
        specs: instance.specs.clone(),
        params: instance.params,
        grid: g,
        cells,
        singles,
        pair,
    })
}

/// One candidate action in a two-resource state and its value.
#[derive(Clone, Copy, Debug)]
struct PairOption {
    decide: [bool; 2],
    sense: Option<usize>,
    value: f64,
}

/// Every admissible action in state `(w, {0,1}, k)`. Grid indices, when known, let the
/// pair table be read without interpolating along that axis.
fn pair_options(
    instance: &OracleInstance,
    cells: &[Vec<CellMass>],
    singles: &[Vec<Vec<f64>>],
    pair: &[Vec<f64>],
    w: [f64; 2],
    k: usize,
    on_grid: [Option<usize>; 2],
) -> Vec<PairOption> {
    let g = instance.grid;
    let l = instance.params.horizon;
    let c = instance.params.sense_cost;
    let left = (l - k) as f64;
    let vd = [left * value_decide(w[0], &instance.specs[0]), left * value_decide(w[1], &instance.specs[1])];
    let mut out = vec![PairOption { decide: [true, true], sense: None, value: vd[0] + vd[1] }];
    if k + 1 == l {
        return out;
    }
    // Decide one, sense the other.
    for keep in 0..2 {
        let next = &singles[keep][k + 1];
        let cont = expected_next(w[keep], &cells[keep], c, |x| interpolate(next, x));
        let mut decide = [true, true];
        decide[keep] = false;
        out.push(PairOption { decide, sense: Some(keep), value: vd[1 - keep] + cont });
    }
    // Keep both, sense one.
    let next = &pair[k + 1];
    for sense in 0..2 {
        let other = 1 - sense;
        let cont = expected_next(w[sense], &cells[sense], c, |x| {
            let mut point = w;
            point[sense] = x;
            let mut idx = on_grid;
            idx[sense] = None;
            pair_value(next, g, point, idx, other)
        });
        out.push(PairOption { decide: [false, false], sense: Some(sense), value: cont });
    }
    out
}

/// Reads the pair table at `point`, interpolating only along off-grid axes.
fn pair_value(table: &[f64], g: usize, point: [f64; 2], idx: [Option<usize>; 2], _hint: usize) -> f64 {
    let axis = |v: f64, known: Option<usize>| -> (usize, f64) {
        if let Some(j) = known {
            return (j.min(g - 2), if j == g - 1 { 1.0 } else { 0.0 });
        }
        let x = v.clamp(0.0, 1.0) * (g - 1) as f64;
        let j = (x.floor() as usize).min(g - 2);
        (j, x - j as f64)
    };
    let (a, ta) = axis(point[0], idx[0]);
    let (b, tb) = axis(point[1], idx[1]);
    let at = |i: usize, j: usize| table[i * g + j];
    let lo = at(a, b) + tb * (at(a, b + 1) - at(a, b));
    let hi = at(a + 1, b) + tb * (at(a + 1, b + 1) - at(a + 1, b));
    lo + ta * (hi - lo)
}

impl OracleSolution {
    pub fn horizon(&self) -> usize {
        self.params.horizon
    }

    /// Optimal value from the priors at slot zero with every resource active.
    pub fn value_at_priors(&self) -> f64 {
        let w: Vec<f64> = self.specs.iter().map(|s| s.prior).collect();
        self.value(&w, 0)
    }

    /// Optimal value at beliefs `w` with every resource active.
    pub fn value(&self, w: &[f64], k: usize) -> f64 {
        match &self.pair {
            Some(pair) => pair_value(&pair[k], self.grid, [w[0], w[1]], [None, None], 0),
            None => interpolate(&self.singles[0][k], w[0]),
        }
    }

    /// Greedy action from the value tables at an arbitrary state.
    pub fn act(&self, state: &BeliefState) -> Result<Action> {
        let k = state.time;
        let l = self.horizon();
        if k >= l {
            return Err(Error::contract(format!("slot {k} outside horizon {l}")));
        }
        let decide_all = |state: &BeliefState| Action {
            decide: state
                .active
                .iter()
                .map(|&i| (i, terminal_decision(state.beliefs[i], &self.specs[i])))
                .collect(),
            sense: None,
        };
        match state.active.as_slice() {
            [] => Ok(Action::default()),
            _ if k + 1 == l => Ok(decide_all(state)),
            &[i] => {
                let w = state.beliefs[i];
                let decide = (l - k) as f64 * value_decide(w, &self.specs[i]);
                let next = &self.singles[i][k + 1];
                let cont = expected_next(w, &self.cells[i], self.params.sense_cost, |x| interpolate(next, x));
                if decide >= cont {
                    Ok(decide_all(state))
                } else {
                    Ok(Action { decide: vec![], sense: Some(i) })
                }
            }
            &[_, _] => {
                let pair = self.pair.as_ref().ok_or_else(|| Error::contract("oracle solved for one resource"))?;
                let inst = OracleInstance {
                    specs: self.specs.clone(),
                    params: self.params,
                    grid: self.grid,
                    cells: 0,
                };
                let w = [state.beliefs[0], state.beliefs[1]];
                let options = pair_options(&inst, &self.cells, &self.singles, pair, w, k, [None, None]);
                let best = best_option(&options);
                Ok(Action {
                    decide: (0..2)
                        .filter(|&i| best.decide[i])
                        .map(|i| (i, terminal_decision(w[i], &self.specs[i])))
                        .collect(),
                    sense: best.sense,
                })
            }
            _ => Err(Error::contract("oracle state has too many active resources")),
        }
    }

    /// Whether each resource stays undecided under the optimal action at grid node
    /// `(j0, j1)` with both resources active.
    pub fn pair_continues(&self, k: usize, j0: usize, j1: usize) -> Option<[bool; 2]> {
        let pair = self.pair.as_ref()?;
        let inst = OracleInstance { specs: self.specs.clone(), params: self.params, grid: self.grid, cells: 0 };
        let w = [grid_point(j0, self.grid), grid_point(j1, self.grid)];
        let options = pair_options(&inst, &self.cells, &self.singles, pair, w, k, [Some(j0), Some(j1)]);
        let best = best_option(&options);
        Some([!best.decide[0], !best.decide[1]])
    }

    /// Whether sensing beats deciding for resource `i` alone at grid node `j`.
    pub fn single_continues(&self, i: usize, k: usize, j: usize) -> bool {
        let l = self.horizon();
        if k + 1 >= l {
            return false;
        }
        let w = grid_point(j, self.grid);
        let next = &self.singles[i][k + 1];
        let cont = expected_next(w, &self.cells[i], self.params.sense_cost, |x| interpolate(next, x));
        cont > (l - k) as f64 * value_decide(w, &self.specs[i]) + 1e-12
    }

    /// A copy whose single-resource tables are read one slot late, for exercising the
    /// submodularity check.
    pub fn with_shifted_singles(&self) -> OracleSolution {
        let mut out = self.clone();
        for table in &mut out.singles {
            let l = table.len() - 1;
            for k in 0..l {
                table[k] = table[k + 1].clone();
            }
        }
        out
    }
}

/// Highest value wins; near ties prefer deciding more resources.
fn best_option(options: &[PairOption]) -> PairOption {
    let mut best = options[0];
    for o in &options[1..] {
        if o.value > best.value + 1e-12 {
            best = *o;
        }
    }
    best
}

/// Checks the diminishing-returns inequality of the value function over all grid
/// nodes and slots of a two-resource solution.
pub fn submodularity_check(solution: &OracleSolution) -> SubmodularityReport {
    let mut report = SubmodularityReport { checked: 0, violations: 0, max_violation: 0.0 };
    let Some(pair) = &solution.pair else {
        return report;
    };
    let g = solution.grid;
    for k in 0..=solution.horizon() {
        for j0 in 0..g {
            for j1 in 0..g {
                let excess = pair[k][j0 * g + j1] - solution.singles[0][k][j0] - solution.singles[1][k][j1];
                report.checked += 1;
                if excess > VIOLATION_TOLERANCE {
                    report.violations += 1;
                }
                report.max_violation = report.max_violation.max(excess);
            }
        }
    }
    report
}
