//! `seqsense` command-line front end.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use seqsense::model::{ResourceSpec, UtilityParams};
use seqsense::observation::radio::{generate_topology, TopologyConfig};
use seqsense::policies::{
    solve_oracle, solve_single_dp, submodularity_check, OracleInstance, Strategy, DP_CELLS, DP_GRID,
    ORACLE_GRID,
};
use seqsense::sim::csv::{oracle_csv, regret_csv, simulate_csv, thresholds_csv};
use seqsense::sim::{load_config, presets, run_all, sweep_horizon, ScenarioConfig};
use seqsense::{Error, Result};

#[derive(Parser)]
#[command(name = "seqsense", version, about = "Finite-horizon sequential sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate channel resources from a topology description.
    ScenarioGen {
        /// Topology JSON; defaults apply to omitted fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Threshold schedules of one policy, one row per resource and slot.
    Thresholds(Common),
    /// Monte Carlo summary of every policy in the scenario.
    Simulate(Common),
    /// Summaries over a list of horizons.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated horizons.
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<usize>,
    },
    /// Regret over long horizons.
    Regret {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [200, 400, 800])]
        horizons: Vec<usize>,
    },
    /// Exact small-instance solution beside the single-resource DP, with a
    /// submodularity report on stderr.
    Oracle {
        /// Number of resources, 1 or 2.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        l: usize,
        #[arg(long, default_value_t = 1.0)]
        cost: f64,
        #[arg(long, default_value_t = ORACLE_GRID)]
        grid: usize,
        #[arg(long, default_value_t = 400)]
        cells: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario instead of a file.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(presets::NAMES))]
    preset: Option<String>,
    /// Horizon of a preset, or an override of the file's.
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    episodes: Option<u64>,
    /// Replaces the scenario's policy list.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn scenario(&self) -> Result<ScenarioConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => load_config(path)?,
            (None, Some(name)) => presets::by_name(name, self.l.unwrap_or(10), presets::PRESET_EPISODES)?,
            (None, None) => return Err(Error::Validation("either --config or --preset is required".into())),
        };
        if let Some(l) = self.l {
            cfg = cfg.with_horizon(l);
            cfg.params.validate()?;
        }
        if let Some(seed) = self.seed {
            cfg = cfg.with_seed(seed);
        }
        if let Some(n) = self.episodes {
            if n == 0 {
                return Err(Error::Validation("--episodes must be at least 1".into()));
            }
            cfg = cfg.with_episodes(n);
        }
        if let Some(tag) = &self.policy {
            cfg = cfg.with_policies(vec![tag.parse()?]);
        }
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

fn scenario_gen(config: Option<&Path>, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let mut topo = match config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
            serde_json::from_str::<TopologyConfig>(&text)
                .map_err(|source| Error::Parse { path: path.display().to_string(), source })?
        }
        None => TopologyConfig::default(),
    };
    if let Some(seed) = seed {
        topo.seed = seed;
    }
    let resources: Vec<ResourceSpec> = generate_topology(&topo)?.into_iter().map(|c| c.resource).collect();
    let text = serde_json::to_string_pretty(&resources).expect("resources serialize");
    emit(out, &(text + "\n"))
}

fn thresholds(common: &Common) -> Result<()> {
    let cfg = common.scenario()?;
    let policy = cfg.policies[0];
    let strategy = Strategy::build(policy, &cfg.resources, &cfg.params)?;
    if strategy.schedules().is_empty() {
        return Err(Error::Validation(format!("policy {policy} has no threshold schedule")));
    }
    emit(common.out.as_deref(), &thresholds_csv(strategy.schedules()))
}

fn oracle(n: usize, l: usize, cost: f64, grid: usize, cells: usize, out: Option<&Path>) -> Result<()> {
    let first = presets::single_resource();
    let specs = match n {
        1 => vec![first],
        2 => vec![first.clone(), ResourceSpec { id: 2, prior: 0.6, ..first }],
        _ => return Err(Error::Validation(format!("--n must be 1 or 2, got {n}"))),
    };
    let params = UtilityParams::new(l, cost);
    let solution = solve_oracle(&OracleInstance { specs: specs.clone(), params, grid, cells })?;
    let tables = specs
        .iter()
        .map(|s| solve_single_dp(s, &params, DP_GRID, DP_CELLS))
        .collect::<Result<Vec<_>>>()?;
    let mut max_gap = 0.0f64;
    for (single, table) in solution.singles.iter().zip(&tables) {
        for (k, row) in single.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let w = j as f64 / (grid - 1) as f64;
                max_gap = max_gap.max((v - table.value(w, k)).abs());
            }
        }
    }
    let report = submodularity_check(&solution);
    emit(out, &oracle_csv(&solution, &tables))?;
    eprintln!("oracle value at priors: {:.9}", solution.value_at_priors());
    eprintln!("max |oracle - dp| at shared nodes: {max_gap:.3e}");
    eprintln!("submodularity checks: {}", report.checked);
    eprintln!("submodularity violations: {}", report.violations);
    eprintln!("max violation: {:.3e}", report.max_violation);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ScenarioGen { config, seed, out } => scenario_gen(config.as_deref(), seed, out.as_deref()),
        Command::Thresholds(common) => thresholds(&common),
        Command::Simulate(common) => {
            let cfg = common.scenario()?;
            emit(common.out.as_deref(), &simulate_csv(&run_all(&cfg)?))
        }
        Command::Sweep { common, horizons } => {
            let cfg = common.scenario()?;
            emit(common.out.as_deref(), &simulate_csv(&sweep_horizon(&cfg, &horizons)?))
        }
        Command::Regret { common, horizons } => {
            let cfg = common.scenario()?;
            emit(common.out.as_deref(), &regret_csv(&sweep_horizon(&cfg, &horizons)?))
        }
        Command::Oracle { n, l, cost, grid, cells, out } => oracle(n, l, cost, grid, cells, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
    }
}
