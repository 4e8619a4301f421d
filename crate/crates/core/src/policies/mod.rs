//! Decision strategies for the multi-resource sensing problem.
//!
//! Every strategy is a pure function of the current [`BeliefState`] and tables built
//! once per scenario: a threshold schedule per resource, a rule choosing which pending
//! resource to sense, and for the exact solvers the value tables themselves.

mod dp;
mod oracle;

pub use dp::{solve_single_dp, DPTable};
pub use oracle::{
    solve_oracle, submodularity_check, OracleInstance, OracleSolution, SubmodularityReport, MAX_GRID,
    MAX_HORIZON, MAX_RESOURCES,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{terminal_decision, Action, BeliefState, Decision, ResourceSpec, UtilityParams};
use crate::thresholds::{
    algorithm1_schedule, constant_thresholds, easy_schedule, SensingTimeModel, ThresholdSchedule,
};

pub const DEFAULT_EPSILON: f64 = 0.5;
pub const DEFAULT_KAPPA: f64 = 1.0;
pub const DP_GRID: usize = 1001;
pub const DP_CELLS: usize = 1000;
pub const ORACLE_GRID: usize = 51;
pub const ORACLE_CELLS: usize = 400;

/// Floor on the expected sensing time in the index denominator.
const MIN_SENSING_TIME: f64 = 1e-12;

/// Strategy selector. Parsed from tags such as `ALG2`, `ALG2_AR(0.5)` or `STATIC(2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicyKind {
    /// Recursive thresholds with index selection.
    Alg2,
    /// [`PolicyKind::Alg2`] plus force-deciding low-index resources that cannot all be
    /// sensed within `(1 + epsilon)` times the remaining horizon.
    Alg2Ar { epsilon: f64 },
    /// Constant thresholds with index selection.
    Ct,
    /// Recursive thresholds, sensing the highest pending id first.
    Ns,
    /// Constant thresholds, highest pending id first.
    Ctns,
    /// Easy (chord) thresholds with index selection.
    Easy,
    /// Senses each resource for a fixed number of slots growing with `ln L`.
    Static { kappa: f64 },
    /// Per-resource grid-DP thresholds with index selection.
    SingleOpt,
    /// Exact joint backward induction; tiny instances only.
    Oracle,
}

/// Where a strategy's stopping thresholds come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThresholdSource {
    Recursive,
    Constant,
    Easy,
    Dp,
    /// No schedule: fixed sensing blocks or joint value tables.
    None,
}

/// How a strategy picks the resource to sense among those still pending.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    Index,
    HighestId,
    FixedBlocks,
    Joint,
}

impl PolicyKind {
    pub const ALL_TAGS: [&'static str; 9] =
        ["ALG2", "ALG2_AR", "CT", "NS", "CTNS", "EASY", "STATIC", "SINGLE_OPT", "ORACLE"];

    /// Parses a tag, filling a missing `ε` or `κ` argument from the given defaults.
    pub fn parse_with(tag: &str, epsilon: f64, kappa: f64) -> Result<Self> {
        let tag = tag.trim();
        let (name, arg) = match tag.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::validation(format!("malformed policy tag `{tag}`")))?;
                let v: f64 = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::validation(format!("bad argument in policy tag `{tag}`")))?;
                (name.trim(), Some(v))
            }
            None => (tag, None),
        };
        let name = name.to_ascii_uppercase();
        let needs_none = |kind: PolicyKind| match arg {
            None => Ok(kind),
            Some(_) => Err(Error::validation(format!("policy `{name}` takes no argument"))),
        };
        let kind = match name.as_str() {
            "ALG2" | "ALG1_THRESH" => needs_none(PolicyKind::Alg2)?,
            "ALG2_AR" => PolicyKind::Alg2Ar { epsilon: arg.unwrap_or(epsilon) },
            "CT" => needs_none(PolicyKind::Ct)?,
            "NS" => needs_none(PolicyKind::Ns)?,
            "CTNS" => needs_none(PolicyKind::Ctns)?,
            "EASY" => needs_none(PolicyKind::Easy)?,
            "STATIC" => PolicyKind::Static { kappa: arg.unwrap_or(kappa) },
            "SINGLE_OPT" | "OPT" => needs_none(PolicyKind::SingleOpt)?,
            "ORACLE" => needs_none(PolicyKind::Oracle)?,
            _ => {
                return Err(Error::validation(format!(
                    "unknown policy `{tag}`; expected one of {}",
                    Self::ALL_TAGS.join(", ")
                )))
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PolicyKind::Alg2Ar { epsilon } if !(epsilon >= 0.0) => {
                Err(Error::validation(format!("epsilon must be nonnegative, got {epsilon}")))
            }
            PolicyKind::Static { kappa } if !(kappa > 0.0 && kappa.is_finite()) => {
                Err(Error::validation(format!("kappa must be positive, got {kappa}")))
            }
            _ => Ok(()),
        }
    }

    /// Tag without arguments.
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Alg2 => "ALG2",
            PolicyKind::Alg2Ar { .. } => "ALG2_AR",
            PolicyKind::Ct => "CT",
            PolicyKind::Ns => "NS",
            PolicyKind::Ctns => "CTNS",
            PolicyKind::Easy => "EASY",
            PolicyKind::Static { .. } => "STATIC",
            PolicyKind::SingleOpt => "SINGLE_OPT",
            PolicyKind::Oracle => "ORACLE",
        }
    }

    pub fn threshold_source(&self) -> ThresholdSource {
        match self {
            PolicyKind::Alg2 | PolicyKind::Alg2Ar { .. } | PolicyKind::Ns => ThresholdSource::Recursive,
            PolicyKind::Ct | PolicyKind::Ctns => ThresholdSource::Constant,
            PolicyKind::Easy => ThresholdSource::Easy,
            PolicyKind::SingleOpt => ThresholdSource::Dp,
            PolicyKind::Static { .. } | PolicyKind::Oracle => ThresholdSource::None,
        }
    }

    pub fn selection(&self) -> Selection {
        match self {
            PolicyKind::Ns | PolicyKind::Ctns => Selection::HighestId,
            PolicyKind::Static { .. } => Selection::FixedBlocks,
            PolicyKind::Oracle => Selection::Joint,
            _ => Selection::Index,
        }
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::parse_with(s, DEFAULT_EPSILON, DEFAULT_KAPPA)
    }
}

impl TryFrom<String> for PolicyKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PolicyKind> for String {
    fn from(k: PolicyKind) -> String {
        k.to_string()
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Alg2Ar { epsilon } => write!(f, "ALG2_AR({epsilon})"),
            PolicyKind::Static { kappa } => write!(f, "STATIC({kappa})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Slots each resource is sensed for under the static policy.
pub fn static_block_len(kappa: f64, horizon: usize, resources: usize) -> usize {
    if resources == 0 || horizon <= 1 {
        return 0;
    }
    let wanted = (kappa * (horizon as f64).ln()).ceil().max(0.0) as usize;
    wanted.min((horizon - 1) / resources)
}

/// A policy with its tables built for one scenario.
#[derive(Clone, Debug)]
pub struct Strategy {
    kind: PolicyKind,
    specs: Vec<ResourceSpec>,
    params: UtilityParams,
    schedules: Vec<ThresholdSchedule>,
    times: Vec<SensingTimeModel>,
    /// Positions in ascending id order.
    by_id: Vec<usize>,
    block: usize,
    oracle: Option<OracleSolution>,
}

impl Strategy {
    pub fn build(kind: PolicyKind, specs: &[ResourceSpec], params: &UtilityParams) -> Result<Self> {
        kind.validate()?;
        params.validate()?;
        if specs.is_empty() {
            return Err(Error::validation("scenario has no resources"));
        }
        specs.iter().try_for_each(ResourceSpec::validate)?;
        let schedules = specs
            .iter()
            .map(|s| match kind.threshold_source() {
                ThresholdSource::Recursive => algorithm1_schedule(s, params),
                ThresholdSource::Constant => Ok(constant_thresholds(s, params)),
                ThresholdSource::Easy => Ok(easy_schedule(s, params)),
                ThresholdSource::Dp => Ok(solve_single_dp(s, params, DP_GRID, DP_CELLS)?.schedule),
                ThresholdSource::None => Ok(ThresholdSchedule::collapsed(s, params)),
            })
            .collect::<Result<Vec<_>>>()?;
        let times = match kind.selection() {
            Selection::Index => specs.iter().map(SensingTimeModel::new).collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };
        let mut by_id: Vec<usize> = (0..specs.len()).collect();
        by_id.sort_by_key(|&p| specs[p].id);
        let block = match kind {
            PolicyKind::Static { kappa } => static_block_len(kappa, params.horizon, specs.len()),
            _ => 0,
        };
        let oracle = match kind {
            PolicyKind::Oracle => Some(solve_oracle(&OracleInstance {
                specs: specs.to_vec(),
                params: *params,
                grid: ORACLE_GRID,
                cells: ORACLE_CELLS,
            })?),
            _ => None,
        };
        Ok(Strategy {
            kind,
            specs: specs.to_vec(),
            params: *params,
            schedules,
            times,
            by_id,
            block,
            oracle,
        })
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn specs(&self) -> &[ResourceSpec] {
        &self.specs
    }

    pub fn params(&self) -> &UtilityParams {
        &self.params
    }

    pub fn schedules(&self) -> &[ThresholdSchedule] {
        &self.schedules
    }

    pub fn oracle(&self) -> Option<&OracleSolution> {
        self.oracle.as_ref()
    }

    /// Selection index `ω·r / E[τ − k]` of the resource at position `pos`.
    pub fn index(&self, state: &BeliefState, pos: usize) -> f64 {
        let k = state.time;
        let w = state.beliefs[pos];
        let (lo, hi) = self.schedules[pos].band(k);
        let remaining = self.params.horizon.saturating_sub(k + 1);
        let time = self.expected_time(pos, w, lo, hi, remaining);
        w * self.specs[pos].reward / time.max(MIN_SENSING_TIME)
    }

    fn expected_time(&self, pos: usize, w: f64, lo: f64, hi: f64, remaining: usize) -> f64 {
        match self.times.get(pos) {
            Some(m) => m.bound(w, lo, hi, remaining),
            None => remaining as f64,
        }
    }

    fn decision(&self, state: &BeliefState, pos: usize) -> (usize, Decision) {
        (pos, terminal_decision(state.beliefs[pos], &self.specs[pos]))
    }

    /// The action taken at `state`.
    pub fn act(&self, state: &BeliefState) -> Result<Action> {
        let k = state.time;
        let l = self.params.horizon;
        if k >= l {
            return Err(Error::contract(format!("slot {k} outside horizon {l}")));
        }
        if state.beliefs.len() != self.specs.len() {
            return Err(Error::contract("belief state does not match the scenario"));
        }
        if k + 1 == l {
            return Ok(Action {
                decide: state.active.iter().map(|&p| self.decision(state, p)).collect(),
                sense: None,
            });
        }
        match self.kind.selection() {
            Selection::FixedBlocks => Ok(self.act_static(state)),
            Selection::Joint => self.oracle.as_ref().expect("oracle built with strategy").act(state),
            Selection::Index | Selection::HighestId => Ok(self.act_thresholds(state)),
        }
    }

    fn act_thresholds(&self, state: &BeliefState) -> Action {
        let k = state.time;
        let (stop, mut pending): (Vec<usize>, Vec<usize>) = state
            .active
            .iter()
            .partition(|&&p| self.schedules[p].should_decide(k, state.beliefs[p]));
        let mut decide: Vec<(usize, Decision)> = stop.iter().map(|&p| self.decision(state, p)).collect();
        let sense = match self.kind.selection() {
            Selection::HighestId => pending.iter().copied().max_by_key(|&p| self.specs[p].id),
            _ => {
                let idx: Vec<f64> = pending.iter().map(|&p| self.index(state, p)).collect();
                let mut order: Vec<usize> = (0..pending.len()).collect();
                order.sort_by(|&a, &b| {
                    idx[b]
                        .total_cmp(&idx[a])
                        .then(self.specs[pending[a]].id.cmp(&self.specs[pending[b]].id))
                });
                pending = order.into_iter().map(|i| pending[i]).collect();
                if let PolicyKind::Alg2Ar { epsilon } = self.kind {
                    let kept = self.ar_prefix(state, &pending, epsilon);
                    decide.extend(pending[kept..].iter().map(|&p| self.decision(state, p)));
                    pending.truncate(kept);
                }
                pending.first().copied()
            }
        };
        decide.sort_by_key(|&(p, _)| p);
        Action { decide, sense }
    }

    /// Length of the longest index-sorted prefix whose summed sensing-time bounds stay
    /// below `(1 + ε)(L − k − 1)`.
    fn ar_prefix(&self, state: &BeliefState, sorted: &[usize], epsilon: f64) -> usize {
        let k = state.time;
        let remaining = self.params.horizon - k - 1;
        let budget = (1.0 + epsilon) * remaining as f64;
        let mut total = 0.0;
        for (n, &p) in sorted.iter().enumerate() {
            let (lo, hi) = self.schedules[p].band(k);
            total += self.expected_time(p, state.beliefs[p], lo, hi, remaining);
            if total >= budget {
                return n;
            }
        }
        sorted.len()
    }

    /// Resource `by_id[b]` is sensed during slots `[b·m, (b+1)·m)` and decided at
    /// slot `(b+1)·m`.
    fn act_static(&self, state: &BeliefState) -> Action {
        let k = state.time;
        let m = self.block;
        let block_of = |p: usize| self.by_id.iter().position(|&q| q == p).expect("position in scenario");
        let decide: Vec<(usize, Decision)> = state
            .active
            .iter()
            .filter(|&&p| m == 0 || k >= (block_of(p) + 1) * m)
            .map(|&p| self.decision(state, p))
            .collect();
        let sense = if m == 0 {
            None
        } else {
            self.by_id.get(k / m).copied().filter(|&p| state.is_active(p))
        };
        Action { decide, sense }
    }
}
