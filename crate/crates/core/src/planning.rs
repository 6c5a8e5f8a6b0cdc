//! Visit statistics and the optimistic planners.
//!
//! The agent is the min-player, so optimism means planning with values that
//! lower-bound the true scalarized values: bonuses are subtracted, and cells
//! never visited are set to the floor `-sqrt(d) H`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_model::{dot, EpisodeTrace, JointPolicy, MarkovPolicy, VectorGame};
use crate::matrix_nash::{solve_zero_sum, MatrixGame};

/// Source of transition estimates for the planners.
pub trait TransitionModel {
    /// Number of times `(h, s, a, b)` was visited.
    fn visits(&self, h: usize, s: usize, a: usize, b: usize) -> u64;
    /// Estimated next-state distribution of `(h, s, a, b)`.
    fn row(&self, h: usize, s: usize, a: usize, b: usize) -> &[f64];
}

/// Visit counts and empirical transition rows gathered across episodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelStats {
    horizon: usize,
    num_states: usize,
    num_agent_actions: usize,
    num_opponent_actions: usize,
    counts: Vec<u64>,
    next_counts: Vec<u64>,
    rows: Vec<f64>,
    episodes: u64,
}

impl ModelStats {
    /// Empty statistics; every row starts uniform.
    pub fn new(game: &VectorGame) -> Self {
        let cells = game.num_cells();
        let s = game.num_states();
        Self {
            horizon: game.horizon(),
            num_states: s,
            num_agent_actions: game.num_agent_actions(),
            num_opponent_actions: game.num_opponent_actions(),
            counts: vec![0; cells],
            next_counts: vec![0; cells * s],
            rows: vec![1.0 / s as f64; cells * s],
            episodes: 0,
        }
    }

    #[inline]
    fn cell(&self, h: usize, s: usize, a: usize, b: usize) -> usize {
        ((h * self.num_states + s) * self.num_agent_actions + a) * self.num_opponent_actions + b
    }

    /// Records every transition of `trace` and refreshes the touched rows.
    pub fn update(&mut self, trace: &EpisodeTrace) -> Result<()> {
        if trace.len() != self.horizon
            || trace.states.len() != self.horizon + 1
            || trace.opponent_actions.len() != self.horizon
        {
            return Err(Error::Shape(format!(
                "trace of length {} does not match horizon {}",
                trace.len(),
                self.horizon
            )));
        }
        for h in 0..self.horizon {
            let (s, a, b, sp) = (
                trace.states[h],
                trace.agent_actions[h],
                trace.opponent_actions[h],
                trace.states[h + 1],
            );
            if s >= self.num_states
                || sp >= self.num_states
                || a >= self.num_agent_actions
                || b >= self.num_opponent_actions
            {
                return Err(Error::Shape(format!("trace step {h} indexes outside the game")));
            }
            let c = self.cell(h, s, a, b);
            self.counts[c] += 1;
            let base = c * self.num_states;
            self.next_counts[base + sp] += 1;
            let n = self.counts[c] as f64;
            for k in 0..self.num_states {
                self.rows[base + k] = self.next_counts[base + k] as f64 / n;
            }
        }
        self.episodes += 1;
        Ok(())
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub fn next_count(&self, h: usize, s: usize, a: usize, b: usize, next: usize) -> u64 {
        self.next_counts[self.cell(h, s, a, b) * self.num_states + next]
    }

    /// Total visits at step `h` over all `(s, a, b)`.
    pub fn step_visits(&self, h: usize) -> u64 {
        let per_step = self.num_states * self.num_agent_actions * self.num_opponent_actions;
        self.counts[h * per_step..(h + 1) * per_step].iter().sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

impl TransitionModel for ModelStats {
    #[inline]
    fn visits(&self, h: usize, s: usize, a: usize, b: usize) -> u64 {
        self.counts[self.cell(h, s, a, b)]
    }

    #[inline]
    fn row(&self, h: usize, s: usize, a: usize, b: usize) -> &[f64] {
        let i = self.cell(h, s, a, b) * self.num_states;
        &self.rows[i..i + self.num_states]
    }
}

/// The true kernel presented as if every cell had been visited.
///
/// Used with a zero bonus to check the planners against exact dynamic
/// programming.
pub struct KnownModel<'a> {
    game: &'a VectorGame,
}

impl<'a> KnownModel<'a> {
    pub fn new(game: &'a VectorGame) -> Self {
        Self { game }
    }
}

impl TransitionModel for KnownModel<'_> {
    fn visits(&self, _h: usize, _s: usize, _a: usize, _b: usize) -> u64 {
        1
    }

    fn row(&self, h: usize, s: usize, a: usize, b: usize) -> &[f64] {
        self.game.transition_row(h, s, a, b)
    }
}

/// Bonus multiplier, failure probability and the log factor they induce.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BonusConfig {
    pub c: f64,
    pub p: f64,
    pub episodes: usize,
    pub iota: f64,
}

impl BonusConfig {
    /// `iota = log(S A B K H / p)`.
    ///
    /// `c = 0` is accepted and switches bonuses off.
    pub fn new(c: f64, p: f64, episodes: usize, game: &VectorGame) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::Config(format!("bonus multiplier must be >= 0, got {c}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Config(format!("failure probability must lie in (0,1), got {p}")));
        }
        if episodes == 0 {
            return Err(Error::Config("episode budget must be positive".into()));
        }
        let size = game.num_states() * game.num_agent_actions() * game.num_opponent_actions() * game.horizon();
        let iota = (size as f64 * episodes as f64 / p).ln();
        if iota <= 0.0 {
            return Err(Error::Config("log factor must be positive".into()));
        }
        Ok(Self { c, p, episodes, iota })
    }

    pub fn with_iota(c: f64, iota: f64) -> Self {
        Self {
            c,
            p: 0.05,
            episodes: 1,
            iota,
        }
    }
}

/// `c sqrt(min{d,S} H^2 d iota / t)`.
pub fn hoeffding_bonus(t: u64, dim: usize, num_states: usize, horizon: usize, cfg: &BonusConfig) -> f64 {
    debug_assert!(t >= 1);
    let m = dim.min(num_states) as f64;
    let h = horizon as f64;
    cfg.c * (m * h * h * dim as f64 * cfg.iota / t as f64).sqrt()
}

/// `c (sqrt(var min{d,S} iota / t) + gap / H + min{d,S} sqrt(d) H^2 iota / t)`.
pub fn bernstein_bonus(
    t: u64,
    dim: usize,
    num_states: usize,
    horizon: usize,
    cfg: &BonusConfig,
    var_low: f64,
    gap_mean: f64,
) -> f64 {
    debug_assert!(t >= 1);
    let m = dim.min(num_states) as f64;
    let h = horizon as f64;
    let t = t as f64;
    cfg.c
        * ((var_low.max(0.0) * m * cfg.iota / t).sqrt() + gap_mean / h + m * (dim as f64).sqrt() * h * h * cfg.iota / t)
}

/// Variance of `values` under the distribution `row`.
pub fn empirical_variance(row: &[f64], values: &[f64]) -> f64 {
    let mean = dot(row, values);
    let second: f64 = row.iter().zip(values).map(|(p, v)| p * v * v).sum();
    (second - mean * mean).max(0.0)
}

/// Output of the game planner.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanOutput {
    pub policy: JointPolicy,
    /// `Q_h(s, a, b)`, row-major.
    pub q: Vec<f64>,
    /// `V_h(s)` for `h` in `0..=H`; the last layer is zero.
    pub v: Vec<f64>,
    num_states: usize,
    initial_state: usize,
}

impl PlanOutput {
    pub fn value(&self, h: usize, s: usize) -> f64 {
        self.v[h * self.num_states + s]
    }

    /// `V_1(s_1)`.
    pub fn start_value(&self) -> f64 {
        self.value(0, self.initial_state)
    }
}

/// Output of the MDP planner: a deterministic policy with value bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanOutputBounds {
    pub policy: MarkovPolicy,
    pub actions: Vec<usize>,
    pub low_q: Vec<f64>,
    pub up_q: Vec<f64>,
    pub low_v: Vec<f64>,
    pub up_v: Vec<f64>,
    num_states: usize,
    initial_state: usize,
}

impl PlanOutputBounds {
    pub fn low_value(&self, h: usize, s: usize) -> f64 {
        self.low_v[h * self.num_states + s]
    }

    pub fn up_value(&self, h: usize, s: usize) -> f64 {
        self.up_v[h * self.num_states + s]
    }

    /// `(lowV_1(s_1), upV_1(s_1))`.
    pub fn start_bounds(&self) -> (f64, f64) {
        (
            self.low_value(0, self.initial_state),
            self.up_value(0, self.initial_state),
        )
    }
}

fn check_direction(theta: &[f64], game: &VectorGame) -> Result<()> {
    if theta.len() != game.dim() {
        return Err(Error::Shape(format!(
            "direction has dimension {}, game has {}",
            theta.len(),
            game.dim()
        )));
    }
    let n = crate::geometry::norm(theta);
    if n > 1.0 + 1e-9 {
        return Err(Error::Config(format!(
            "planning direction must have norm <= 1, got {n}"
        )));
    }
    Ok(())
}

/// Optimistic value iteration with Hoeffding bonuses and a Nash step per state.
pub fn vi_hoeffding<M: TransitionModel>(
    theta: &[f64],
    game: &VectorGame,
    model: &M,
    cfg: &BonusConfig,
) -> Result<PlanOutput> {
    check_direction(theta, game)?;
    let (hz, ns, na, nb, d) = (
        game.horizon(),
        game.num_states(),
        game.num_agent_actions(),
        game.num_opponent_actions(),
        game.dim(),
    );
    let floor = -game.value_bound();
    let mut q = vec![floor; game.num_cells()];
    let mut v = vec![0.0; (hz + 1) * ns];
    let mut mu = vec![0.0; hz * ns * na];
    let mut omega = vec![0.0; hz * ns * nb];
    let mut block = vec![0.0; na * nb];
    for h in (0..hz).rev() {
        let (cur, next) = v.split_at_mut((h + 1) * ns);
        let next = &next[..ns];
        for s in 0..ns {
            for a in 0..na {
                for b in 0..nb {
                    let t = model.visits(h, s, a, b);
                    if t == 0 {
                        continue;
                    }
                    let r = game.scalar_reward(h, s, a, b, theta);
                    let beta = hoeffding_bonus(t, d, ns, hz, cfg);
                    let backup = r + dot(model.row(h, s, a, b), next) - beta;
                    q[game.cell(h, s, a, b)] = backup.max(floor);
                }
            }
            let start = game.cell(h, s, 0, 0);
            block.copy_from_slice(&q[start..start + na * nb]);
            let eq = solve_zero_sum(&MatrixGame::new(na, nb, block.clone())?)?;
            mu[(h * ns + s) * na..(h * ns + s + 1) * na].copy_from_slice(&eq.row_strategy);
            omega[(h * ns + s) * nb..(h * ns + s + 1) * nb].copy_from_slice(&eq.col_strategy);
            cur[h * ns + s] = eq.value;
        }
    }
    let policy = JointPolicy::new(
        MarkovPolicy::from_rows_unchecked(hz, ns, na, mu),
        MarkovPolicy::from_rows_unchecked(hz, ns, nb, omega),
    )?;
    Ok(PlanOutput {
        policy,
        q,
        v,
        num_states: ns,
        initial_state: game.initial_state(),
    })
}

/// Value iteration with Bernstein bonuses and paired lower/upper bounds (MDPs only).
pub fn vi_bernstein<M: TransitionModel>(
    theta: &[f64],
    game: &VectorGame,
    model: &M,
    cfg: &BonusConfig,
) -> Result<PlanOutputBounds> {
    check_direction(theta, game)?;
    if !game.is_mdp() {
        return Err(Error::Config(
            "the Bernstein planner requires a single opponent action".into(),
        ));
    }
    let (hz, ns, na, d) = (game.horizon(), game.num_states(), game.num_agent_actions(), game.dim());
    let bound = game.value_bound();
    let mut low_q = vec![-bound; hz * ns * na];
    let mut up_q = vec![bound; hz * ns * na];
    let mut low_v = vec![0.0; (hz + 1) * ns];
    let mut up_v = vec![0.0; (hz + 1) * ns];
    let mut actions = vec![0usize; hz * ns];
    let mut gap = vec![0.0; ns];
    for h in (0..hz).rev() {
        let low_next = low_v[(h + 1) * ns..(h + 2) * ns].to_vec();
        let up_next = up_v[(h + 1) * ns..(h + 2) * ns].to_vec();
        for (g, (u, l)) in gap.iter_mut().zip(up_next.iter().zip(&low_next)) {
            *g = u - l;
        }
        for s in 0..ns {
            for a in 0..na {
                let t = model.visits(h, s, a, 0);
                if t == 0 {
                    continue;
                }
                let row = model.row(h, s, a, 0);
                let r = game.scalar_reward(h, s, a, 0, theta);
                let var_low = empirical_variance(row, &low_next);
                let gap_mean = dot(row, &gap);
                let beta = bernstein_bonus(t, d, ns, hz, cfg, var_low, gap_mean);
                let i = (h * ns + s) * na + a;
                low_q[i] = (r + dot(row, &low_next) - beta).max(-bound);
                up_q[i] = (r + dot(row, &up_next) + beta).min(bound);
            }
            let base = (h * ns + s) * na;
            let mut best = 0;
            for a in 1..na {
                if low_q[base + a] < low_q[base + best] {
                    best = a;
                }
            }
            actions[h * ns + s] = best;
            low_v[h * ns + s] = low_q[base + best];
            up_v[h * ns + s] = up_q[base + best];
        }
    }
    let policy = MarkovPolicy::deterministic(hz, ns, na, &actions)?;
    Ok(PlanOutputBounds {
        policy,
        actions,
        low_q,
        up_q,
        low_v,
        up_v,
        num_states: ns,
        initial_state: game.initial_state(),
    })
}
