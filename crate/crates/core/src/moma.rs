//! The episode loop: plan, play, update the model, average, update the dual.

use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dual_updates::{default_rho, pdu, DualState, RunningAverage};
use crate::error::{Error, Result};
use crate::game_model::{simulate_episode, AgentPolicy, MarkovPolicy, OpponentPolicy, VectorGame};
use crate::geometry::{norm, CostFunction, TargetSet};
use crate::oracle::exact_best_response;
use crate::planning::{hoeffding_bonus, vi_bernstein, vi_hoeffding, BonusConfig, ModelStats, TransitionModel};
use crate::rng::SeedTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Hoeffding,
    Bernstein,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualKind {
    Pdu,
    Odu,
    Dodu,
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hoeffding" => Ok(Self::Hoeffding),
            "bernstein" => Ok(Self::Bernstein),
            _ => Err(Error::Config(format!("unknown planner `{s}`"))),
        }
    }
}

impl FromStr for DualKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pdu" => Ok(Self::Pdu),
            "odu" => Ok(Self::Odu),
            "dodu" => Ok(Self::Dodu),
            _ => Err(Error::Config(format!("unknown dual update `{s}`"))),
        }
    }
}

/// How the max-player picks its actions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OpponentSpec {
    #[default]
    Uniform,
    /// `probs[h][s][b]`.
    FixedStochastic { probs: Vec<Vec<Vec<f64>>> },
    /// Plays the opponent marginal of the planner's joint policy.
    PlannerMarginal,
    /// Exact best response on the true model to the agent's current policy.
    BestResponse,
}

#[derive(Clone, Debug, PartialEq)]
enum OpponentKind {
    Fixed(MarkovPolicy),
    PlannerMarginal,
    BestResponse,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Opponent {
    kind: OpponentKind,
}

/// Builds the opponent for `game`.
///
/// With a single opponent action every spec collapses to that action.
pub fn make_opponent(spec: &OpponentSpec, game: &VectorGame) -> Result<Opponent> {
    let (hz, ns, nb) = (game.horizon(), game.num_states(), game.num_opponent_actions());
    let kind = match spec {
        _ if nb == 1 => OpponentKind::Fixed(MarkovPolicy::uniform(hz, ns, 1)),
        OpponentSpec::Uniform => OpponentKind::Fixed(MarkovPolicy::uniform(hz, ns, nb)),
        OpponentSpec::FixedStochastic { probs } => {
            if probs.len() != hz || probs.iter().any(|layer| layer.len() != ns) {
                return Err(Error::InvalidPolicy(format!(
                    "opponent table must have shape [{hz}][{ns}][{nb}]"
                )));
            }
            let flat: Vec<f64> = probs.iter().flatten().flatten().copied().collect();
            if probs.iter().flatten().any(|row| row.len() != nb) {
                return Err(Error::InvalidPolicy(format!(
                    "opponent table must have shape [{hz}][{ns}][{nb}]"
                )));
            }
            OpponentKind::Fixed(MarkovPolicy::new(hz, ns, nb, flat)?)
        }
        OpponentSpec::PlannerMarginal => OpponentKind::PlannerMarginal,
        OpponentSpec::BestResponse => OpponentKind::BestResponse,
    };
    Ok(Opponent { kind })
}

impl Opponent {
    /// Policy for the coming episode.
    ///
    /// `planner_marginal` is the opponent marginal of the planner's joint
    /// policy, when the planner produced one.
    pub fn policy(
        &self,
        game: &VectorGame,
        theta: &[f64],
        agent: &AgentPolicy,
        planner_marginal: Option<&OpponentPolicy>,
    ) -> Result<OpponentPolicy> {
        match &self.kind {
            OpponentKind::Fixed(p) => Ok(p.clone()),
            OpponentKind::PlannerMarginal => match planner_marginal {
                Some(p) => Ok(p.clone()),
                None => Ok(MarkovPolicy::uniform(
                    game.horizon(),
                    game.num_states(),
                    game.num_opponent_actions(),
                )),
            },
            OpponentKind::BestResponse => exact_best_response(game, theta, agent),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub episodes: usize,
    pub planner: PlannerKind,
    pub dual: DualKind,
    pub c: f64,
    pub p: f64,
    #[serde(default)]
    pub cost: Option<CostFunction>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub gamma_min: Option<f64>,
    pub seed: u64,
    #[serde(default)]
    pub opponent: OpponentSpec,
    /// Value vector of a reference policy; enables the cost regret readout.
    #[serde(default)]
    pub reference_value: Option<Vec<f64>>,
    /// When false every `elapsed_ms` is recorded as zero.
    #[serde(default = "default_true")]
    pub record_timing: bool,
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn new(episodes: usize, planner: PlannerKind, dual: DualKind, seed: u64) -> Self {
        Self {
            episodes,
            planner,
            dual,
            c: 1.0,
            p: 0.05,
            cost: None,
            rho: None,
            gamma_min: None,
            seed,
            opponent: OpponentSpec::default(),
            reference_value: None,
            record_timing: true,
        }
    }

    pub fn validate(&self, game: &VectorGame) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::Config("episode budget must be positive".into()));
        }
        if self.planner == PlannerKind::Bernstein && !game.is_mdp() {
            return Err(Error::Config(
                "the Bernstein planner requires a single opponent action".into(),
            ));
        }
        if self.dual == DualKind::Dodu {
            if !game.is_mdp() {
                return Err(Error::Config(
                    "the double dual update requires a single opponent action".into(),
                ));
            }
            match &self.cost {
                Some(cost) => cost.validate(Some(game.dim()))?,
                None => return Err(Error::Config("the double dual update requires a cost function".into())),
            }
        }
        if let Some(r) = &self.reference_value {
            if r.len() != game.dim() {
                return Err(Error::Config(format!(
                    "reference value has dimension {}, game has {}",
                    r.len(),
                    game.dim()
                )));
            }
        }
        Ok(())
    }

    fn resolve_rho(&self) -> Result<f64> {
        match self.rho {
            Some(r) => Ok(r),
            None => default_rho(self.gamma_min),
        }
    }
}

/// Metrics of one episode, taken after its dual update inputs are known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub k: usize,
    /// `dist(W^k, target)`.
    pub dist: f64,
    /// Direction used to plan episode `k`.
    pub theta: Vec<f64>,
    pub vhat: Vec<f64>,
    /// `W^k`.
    pub average: Vec<f64>,
    /// Cumulative wall time since the start of the run.
    pub elapsed_ms: f64,
    /// `V_1^k(s_1)`, or `lowV_1^k(s_1)` for the Bernstein planner.
    pub planner_value: f64,
    /// `upV_1^k(s_1)` for the Bernstein planner.
    pub planner_upper: Option<f64>,
    /// Sum of Hoeffding bonuses along the played trajectory.
    pub bonus_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    pub records: Vec<EpisodeRecord>,
    pub final_average: Vec<f64>,
    pub final_distance: f64,
    /// `g(W^K) - g(reference)` for the double dual update.
    pub cost_regret: Option<f64>,
}

impl RunResult {
    /// Log-log slope of distance against episode count over the checkpoints
    /// `K, K/2, ..., K/32`.
    pub fn slope_fit(&self) -> Option<f64> {
        let k_max = self.records.len();
        let points: Vec<(f64, f64)> = (0..6)
            .map(|i| k_max >> i)
            .filter(|&k| k >= 1)
            .map(|k| (k as f64, self.records[k - 1].dist))
            .collect();
        loglog_slope(&points)
    }
}

/// Least-squares slope of `ln y` against `ln x`, ignoring non-positive points.
///
/// Needs at least three usable points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 3 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Direction handed to the planner: `theta / max(1, |theta|)`.
pub fn planning_direction(theta: &[f64]) -> Vec<f64> {
    let n = norm(theta);
    if n <= 1.0 {
        theta.to_vec()
    } else {
        theta.iter().map(|x| x / n).collect()
    }
}

struct Plan {
    agent: AgentPolicy,
    marginal: Option<OpponentPolicy>,
    value: f64,
    upper: Option<f64>,
}

fn plan(cfg: &RunConfig, theta: &[f64], game: &VectorGame, model: &ModelStats, bonus: &BonusConfig) -> Result<Plan> {
    match cfg.planner {
        PlannerKind::Hoeffding => {
            let out = vi_hoeffding(theta, game, model, bonus)?;
            let value = out.start_value();
            let (agent, marginal) = out.policy.into_parts();
            Ok(Plan {
                agent,
                marginal: Some(marginal),
                value,
                upper: None,
            })
        }
        PlannerKind::Bernstein => {
            let out = vi_bernstein(theta, game, model, bonus)?;
            let (low, up) = out.start_bounds();
            Ok(Plan {
                agent: out.policy,
                marginal: None,
                value: low,
                upper: Some(up),
            })
        }
    }
}

fn trajectory_bonus(
    game: &VectorGame,
    model: &ModelStats,
    bonus: &BonusConfig,
    states: &[usize],
    a: &[usize],
    b: &[usize],
) -> f64 {
    (0..a.len())
        .map(|h| {
            let t = model.visits(h, states[h], a[h], b[h]).max(1);
            hoeffding_bonus(t, game.dim(), game.num_states(), game.horizon(), bonus)
        })
        .sum()
}

/// Runs `cfg.episodes` episodes and records per-episode metrics.
pub fn run_moma(game: &VectorGame, target: &TargetSet, cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate(game)?;
    if target.dim() != game.dim() {
        return Err(Error::Shape(format!(
            "target has dimension {}, game has {}",
            target.dim(),
            game.dim()
        )));
    }
    let (dim, horizon) = (game.dim(), game.horizon() as f64);
    let bonus = BonusConfig::new(cfg.c, cfg.p, cfg.episodes, game)?;
    let opponent = make_opponent(&cfg.opponent, game)?;
    let mut rng = SeedTree::new(cfg.seed).stream("episodes", 0);
    let mut model = ModelStats::new(game);
    let mut avg = RunningAverage::new(dim);
    let mut duals = match cfg.dual {
        DualKind::Pdu => {
            let mut e1 = vec![0.0; dim];
            e1[0] = 1.0;
            DualState::new(e1, horizon)
        }
        DualKind::Odu => DualState::new(vec![0.0; dim], horizon),
        DualKind::Dodu => DualState::double(dim, cfg.resolve_rho()?, horizon)?,
    };
    let start = Instant::now();
    let mut records = Vec::with_capacity(cfg.episodes);
    for k in 1..=cfg.episodes {
        let theta = duals.theta.clone();
        let direction = planning_direction(&theta);
        let planned = plan(cfg, &direction, game, &model, &bonus)?;
        let nu = opponent.policy(game, &direction, &planned.agent, planned.marginal.as_ref())?;
        let trace = simulate_episode(game, &planned.agent, &nu, &mut rng)?;
        let bonus_sum = trajectory_bonus(
            game,
            &model,
            &bonus,
            &trace.states,
            &trace.agent_actions,
            &trace.opponent_actions,
        );
        model.update(&trace)?;
        avg.push(&trace.total_return);
        let dist = target.distance(avg.mean())?;
        match cfg.dual {
            DualKind::Pdu => {
                duals.theta = pdu(avg.mean(), target, &duals.theta)?;
                duals.k += 1;
            }
            DualKind::Odu => duals.odu_step(&trace.total_return, target)?,
            DualKind::Dodu => {
                let cost = cfg.cost.as_ref().expect("validated");
                duals.dodu_step(&trace.total_return, target, cost)?;
            }
        }
        let elapsed_ms = if cfg.record_timing {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        };
        records.push(EpisodeRecord {
            k,
            dist,
            theta,
            vhat: trace.total_return,
            average: avg.mean().to_vec(),
            elapsed_ms,
            planner_value: planned.value,
            planner_upper: planned.upper,
            bonus_sum,
        });
    }
    let final_average = avg.mean().to_vec();
    let final_distance = records.last().map_or(0.0, |r| r.dist);
    let cost_regret = match (cfg.dual, &cfg.cost, &cfg.reference_value) {
        (DualKind::Dodu, Some(cost), Some(reference)) => Some(cost.value(&final_average) - cost.value(reference)),
        _ => None,
    };
    Ok(RunResult {
        seed: cfg.seed,
        records,
        final_average,
        final_distance,
        cost_regret,
    })
}
