//! Experiment configs, instance generators, the command line and result files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_model::VectorGame;
use crate::geometry::{norm, CostFunction, TargetSet, TargetSpec};
use crate::moma::{run_moma, DualKind, OpponentSpec, PlannerKind, RunConfig, RunResult};
use crate::rng::SeedTree;

/// Random game with normalized uniform transition rows and uniform returns.
///
/// # Panics
///
/// Panics if any dimension is zero.
pub fn generate_random_game(
    num_states: usize,
    num_agent_actions: usize,
    num_opponent_actions: usize,
    horizon: usize,
    dim: usize,
    seed: u64,
) -> VectorGame {
    assert!(
        num_states > 0 && num_agent_actions > 0 && num_opponent_actions > 0 && horizon > 0 && dim > 0,
        "all dimensions must be positive"
    );
    let tree = SeedTree::new(seed);
    let mut prng = tree.stream("transitions", 0);
    let mut rrng = tree.stream("returns", 0);
    let cells = horizon * num_states * num_agent_actions * num_opponent_actions;
    let mut transitions = Vec::with_capacity(cells * num_states);
    for _ in 0..cells {
        let row: Vec<f64> = (0..num_states).map(|_| 1.0 - prng.random::<f64>()).collect();
        let total: f64 = row.iter().sum();
        transitions.extend(row.into_iter().map(|x| x / total));
    }
    let returns = (0..cells * dim).map(|_| rrng.random::<f64>()).collect();
    VectorGame::new(
        horizon,
        num_states,
        num_agent_actions,
        num_opponent_actions,
        dim,
        0,
        transitions,
        returns,
    )
    .expect("generated game is valid")
}

/// One-step, one-state game with the given `payoff[a][b]` vectors.
pub fn make_blackwell_game(payoff: &[Vec<Vec<f64>>]) -> Result<VectorGame> {
    let na = payoff.len();
    let nb = payoff.first().map_or(0, Vec::len);
    let dim = payoff.first().and_then(|r| r.first()).map_or(0, Vec::len);
    if na == 0 || nb == 0 || dim == 0 {
        return Err(Error::InvalidGame("payoff table must be non-empty".into()));
    }
    if payoff.iter().any(|r| r.len() != nb || r.iter().any(|v| v.len() != dim)) {
        return Err(Error::InvalidGame("ragged payoff table".into()));
    }
    let returns: Vec<f64> = payoff.iter().flatten().flatten().copied().collect();
    VectorGame::new(1, 1, na, nb, dim, 0, vec![1.0; na * nb], returns)
}

/// Where the game of an experiment comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameSource {
    Inline {
        game: VectorGame,
    },
    File {
        path: PathBuf,
    },
    Random {
        #[serde(rename = "S")]
        num_states: usize,
        #[serde(rename = "A")]
        num_agent_actions: usize,
        #[serde(rename = "B")]
        num_opponent_actions: usize,
        #[serde(rename = "H")]
        horizon: usize,
        d: usize,
        seed: u64,
    },
    Blackwell {
        payoff: Vec<Vec<Vec<f64>>>,
    },
}

impl GameSource {
    /// Relative file paths are taken relative to `base`.
    pub fn load(&self, base: &Path) -> Result<VectorGame> {
        match self {
            GameSource::Inline { game } => Ok(game.clone()),
            GameSource::File { path } => {
                let path = if path.is_relative() {
                    base.join(path)
                } else {
                    path.clone()
                };
                let text = fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read game file {}: {e}", path.display())))?;
                VectorGame::from_json(&text)
            }
            &GameSource::Random {
                num_states,
                num_agent_actions,
                num_opponent_actions,
                horizon,
                d,
                seed,
            } => {
                if [num_states, num_agent_actions, num_opponent_actions, horizon, d].contains(&0) {
                    return Err(Error::Config("random game dimensions must be positive".into()));
                }
                Ok(generate_random_game(
                    num_states,
                    num_agent_actions,
                    num_opponent_actions,
                    horizon,
                    d,
                    seed,
                ))
            }
            GameSource::Blackwell { payoff } => make_blackwell_game(payoff),
        }
    }
}

/// A full experiment as stored in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: GameSource,
    pub target: TargetSpec,
    #[serde(default = "defaults::episodes")]
    pub episodes: usize,
    #[serde(default = "defaults::planner")]
    pub planner: PlannerKind,
    #[serde(default = "defaults::algo")]
    pub algo: DualKind,
    #[serde(default = "defaults::c")]
    pub c: f64,
    #[serde(default = "defaults::p")]
    pub p: f64,
    #[serde(default)]
    pub cost: Option<CostFunction>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub gamma_min: Option<f64>,
    #[serde(default)]
    pub opponent: OpponentSpec,
    #[serde(default)]
    pub reference_value: Option<Vec<f64>>,
    #[serde(default = "defaults::seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "defaults::record_timing")]
    pub record_timing: bool,
}

mod defaults {
    use super::*;

    pub fn episodes() -> usize {
        1000
    }
    pub fn planner() -> PlannerKind {
        PlannerKind::Hoeffding
    }
    pub fn algo() -> DualKind {
        DualKind::Pdu
    }
    pub fn c() -> f64 {
        1.0
    }
    pub fn p() -> f64 {
        0.05
    }
    pub fn seeds() -> Vec<u64> {
        vec![0]
    }
    pub fn record_timing() -> bool {
        true
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn run_config(&self, seed: u64) -> RunConfig {
        RunConfig {
            episodes: self.episodes,
            planner: self.planner,
            dual: self.algo,
            c: self.c,
            p: self.p,
            cost: self.cost.clone(),
            rho: self.rho,
            gamma_min: self.gamma_min,
            seed,
            opponent: self.opponent.clone(),
            reference_value: self.reference_value.clone(),
            record_timing: self.record_timing,
        }
    }

    /// Loads the game and target and checks every run config against them.
    pub fn resolve(&self, base: &Path) -> Result<(VectorGame, TargetSet)> {
        let game = self.game.load(base)?;
        let target = self.target.resolve(game.dim(), game.horizon())?;
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Config(format!(
                "failure probability must lie in (0,1), got {}",
                self.p
            )));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::Config(format!("bonus multiplier must be >= 0, got {}", self.c)));
        }
        if let Some(g) = self.gamma_min {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::Config(format!("gamma_min must be positive, got {g}")));
            }
        }
        self.run_config(self.seeds[0]).validate(&game)?;
        Ok((game, target))
    }
}

/// CSV with one row per episode; numbers carry 17 significant digits.
pub fn records_csv(result: &RunResult) -> String {
    let dim = result.final_average.len();
    let mut out = String::from("k,dist,theta_norm");
    for j in 0..dim {
        let _ = write!(out, ",vhat_{j}");
    }
    out.push_str(",elapsed_ms\n");
    for r in &result.records {
        let _ = write!(out, "{},{:.16e},{:.16e}", r.k, r.dist, norm(&r.theta));
        for v in &r.vhat {
            let _ = write!(out, ",{v:.16e}");
        }
        let _ = writeln!(out, ",{:.16e}", r.elapsed_ms);
    }
    out
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    final_dist: f64,
    final_average: &'a [f64],
    slope_fit: Option<f64>,
    cost_regret: Option<f64>,
}

/// Writes `run_seed{seed}.csv` and `summary_seed{seed}.json` into `dir`.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, result: &RunResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(format!("run_seed{}.csv", result.seed)), records_csv(result))?;
    let summary = Summary {
        config,
        seed: result.seed,
        final_dist: result.final_distance,
        final_average: &result.final_average,
        slope_fit: result.slope_fit(),
        cost_regret: result.cost_regret,
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(dir.join(format!("summary_seed{}.json", result.seed)), text)?;
    Ok(())
}

#[derive(Debug, Parser)]
#[command(
    name = "moma",
    about = "Run the multi-objective learner on a tabular vector-valued game",
    after_help = "Settings come from the config file; any flag given on the command line overrides the matching field."
)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Episode budget K.
    #[arg(long, value_name = "K")]
    episodes: Option<usize>,
    /// Comma-separated root seeds.
    #[arg(long, value_name = "CSV", value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_parser = ["pdu", "odu", "dodu"])]
    algo: Option<String>,
    #[arg(long, value_parser = ["hoeffding", "bernstein"])]
    planner: Option<String>,
    /// Bonus multiplier.
    #[arg(long, value_name = "FLOAT")]
    c: Option<f64>,
    /// Failure probability.
    #[arg(long, value_name = "FLOAT")]
    p: Option<f64>,
    #[arg(long, value_name = "FLOAT")]
    gamma_min: Option<f64>,
    /// Parallel runs; defaults to the number of cores.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Record zero instead of wall time so files are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl Cli {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(k) = self.episodes {
            cfg.episodes = k;
        }
        if let Some(seeds) = &self.seeds {
            cfg.seeds = seeds.clone();
        }
        if let Some(a) = &self.algo {
            cfg.algo = a.parse()?;
        }
        if let Some(p) = &self.planner {
            cfg.planner = p.parse()?;
        }
        if let Some(c) = self.c {
            cfg.c = c;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(g) = self.gamma_min {
            cfg.gamma_min = Some(g);
        }
        if self.no_timing {
            cfg.record_timing = false;
        }
        Ok(())
    }
}

fn execute(cli: &Cli) -> std::result::Result<(), Failure> {
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", cli.config.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| Failure::Config(e.to_string()))?;
    cli.apply(&mut cfg).map_err(|e| Failure::Config(e.to_string()))?;
    let base = cli.config.parent().unwrap_or(Path::new("."));
    let (game, target) = cfg.resolve(base).map_err(|e| Failure::Config(e.to_string()))?;
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| Failure::Config("no output directory given (--out or `out`)".into()))?;
    let workers = match cli.workers {
        Some(0) => return Err(Failure::Config("--workers must be positive".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    let results: Vec<Result<()>> = pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let result = run_moma(&game, &target, &cfg.run_config(seed))?;
                log::info!("seed {seed}: final distance {:.6}", result.final_distance);
                write_outputs(&out, &cfg, &result)
            })
            .collect()
    });
    for r in results {
        r.map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    Ok(())
}

/// Entry point of the `moma` binary; returns the process exit code.
///
/// 0 on success, 2 on a usage or config error, 1 on a runtime failure.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}
