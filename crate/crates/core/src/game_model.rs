//! Tabular episodic vector-valued two-player zero-sum games.
//!
//! Steps, states and actions are dense 0-based indices. Transition rows and
//! return vectors are stored in flat row-major tables indexed by
//! `(h, s, a, b)`. An MDP is the special case with a single opponent action.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::sample_index;

/// Tolerance on the sum of every probability row.
pub const PROB_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GameDoc", into = "GameDoc")]
pub struct VectorGame {
    horizon: usize,
    num_states: usize,
    num_agent_actions: usize,
    num_opponent_actions: usize,
    dim: usize,
    initial_state: usize,
    transitions: Vec<f64>,
    returns: Vec<f64>,
}

/// On-disk layout: `transitions[h][s][a][b][s']`, `returns[h][s][a][b][j]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct GameDoc {
    #[serde(rename = "H")]
    horizon: usize,
    #[serde(rename = "S")]
    num_states: usize,
    #[serde(rename = "A")]
    num_agent_actions: usize,
    #[serde(rename = "B")]
    num_opponent_actions: usize,
    d: usize,
    initial_state: usize,
    transitions: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    returns: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
}

impl TryFrom<GameDoc> for VectorGame {
    type Error = Error;

    fn try_from(doc: GameDoc) -> Result<Self> {
        let GameDoc {
            horizon,
            num_states,
            num_agent_actions,
            num_opponent_actions,
            d,
            initial_state,
            transitions,
            returns,
        } = doc;
        let flat_p = flatten5(
            &transitions,
            [horizon, num_states, num_agent_actions, num_opponent_actions, num_states],
        )
        .ok_or_else(|| Error::InvalidGame("transitions array has the wrong shape".into()))?;
        let flat_r = flatten5(
            &returns,
            [horizon, num_states, num_agent_actions, num_opponent_actions, d],
        )
        .ok_or_else(|| Error::InvalidGame("returns array has the wrong shape".into()))?;
        VectorGame::new(
            horizon,
            num_states,
            num_agent_actions,
            num_opponent_actions,
            d,
            initial_state,
            flat_p,
            flat_r,
        )
    }
}

impl From<VectorGame> for GameDoc {
    fn from(g: VectorGame) -> Self {
        let nest = |data: &[f64], last: usize| {
            let mut out = Vec::with_capacity(g.horizon);
            let mut chunks = data.chunks(last);
            for _ in 0..g.horizon {
                let mut hs = Vec::with_capacity(g.num_states);
                for _ in 0..g.num_states {
                    let mut sa = Vec::with_capacity(g.num_agent_actions);
                    for _ in 0..g.num_agent_actions {
                        let sb = (0..g.num_opponent_actions)
                            .map(|_| chunks.next().unwrap_or_default().to_vec())
                            .collect();
                        sa.push(sb);
                    }
                    hs.push(sa);
                }
                out.push(hs);
            }
            out
        };
        GameDoc {
            horizon: g.horizon,
            num_states: g.num_states,
            num_agent_actions: g.num_agent_actions,
            num_opponent_actions: g.num_opponent_actions,
            d: g.dim,
            initial_state: g.initial_state,
            transitions: nest(&g.transitions, g.num_states),
            returns: nest(&g.returns, g.dim),
        }
    }
}

fn flatten5(data: &[Vec<Vec<Vec<Vec<f64>>>>], shape: [usize; 5]) -> Option<Vec<f64>> {
    if data.len() != shape[0] {
        return None;
    }
    let mut out = Vec::with_capacity(shape.iter().product());
    for l1 in data {
        if l1.len() != shape[1] {
            return None;
        }
        for l2 in l1 {
            if l2.len() != shape[2] {
                return None;
            }
            for l3 in l2 {
                if l3.len() != shape[3] {
                    return None;
                }
                for l4 in l3 {
                    if l4.len() != shape[4] {
                        return None;
                    }
                    out.extend_from_slice(l4);
                }
            }
        }
    }
    Some(out)
}

impl VectorGame {
    /// Builds and validates a game from flat tables.
    ///
    /// `transitions` has length `H*S*A*B*S` and `returns` has length
    /// `H*S*A*B*d`, both ordered `(h, s, a, b, ·)` row-major.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        horizon: usize,
        num_states: usize,
        num_agent_actions: usize,
        num_opponent_actions: usize,
        dim: usize,
        initial_state: usize,
        transitions: Vec<f64>,
        returns: Vec<f64>,
    ) -> Result<Self> {
        let game = Self {
            horizon,
            num_states,
            num_agent_actions,
            num_opponent_actions,
            dim,
            initial_state,
            transitions,
            returns,
        };
        validate_game(&game)?;
        Ok(game)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_agent_actions(&self) -> usize {
        self.num_agent_actions
    }

    pub fn num_opponent_actions(&self) -> usize {
        self.num_opponent_actions
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn is_mdp(&self) -> bool {
        self.num_opponent_actions == 1
    }

    /// `sqrt(d) * H`, the bound on any scalarized value with a unit direction.
    pub fn value_bound(&self) -> f64 {
        (self.dim as f64).sqrt() * self.horizon as f64
    }

    /// Number of `(h, s, a, b)` cells.
    pub fn num_cells(&self) -> usize {
        self.horizon * self.num_states * self.num_agent_actions * self.num_opponent_actions
    }

    #[inline]
    pub fn cell(&self, h: usize, s: usize, a: usize, b: usize) -> usize {
        ((h * self.num_states + s) * self.num_agent_actions + a) * self.num_opponent_actions + b
    }

    #[inline]
    pub fn transition_row(&self, h: usize, s: usize, a: usize, b: usize) -> &[f64] {
        let i = self.cell(h, s, a, b) * self.num_states;
        &self.transitions[i..i + self.num_states]
    }

    #[inline]
    pub fn reward(&self, h: usize, s: usize, a: usize, b: usize) -> &[f64] {
        let i = self.cell(h, s, a, b) * self.dim;
        &self.returns[i..i + self.dim]
    }

    #[inline]
    pub fn scalar_reward(&self, h: usize, s: usize, a: usize, b: usize, theta: &[f64]) -> f64 {
        dot(self.reward(h, s, a, b), theta)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn check_policy(&self, policy: &MarkovPolicy, actions: usize, who: &str) -> Result<()> {
        if policy.horizon != self.horizon || policy.num_states != self.num_states || policy.num_actions != actions {
            return Err(Error::Shape(format!(
                "{who} policy has shape (H={}, S={}, actions={}), game expects (H={}, S={}, actions={})",
                policy.horizon, policy.num_states, policy.num_actions, self.horizon, self.num_states, actions
            )));
        }
        Ok(())
    }
}

/// Checks every structural invariant of a game and reports the first violation.
pub fn validate_game(game: &VectorGame) -> Result<()> {
    let dims = [
        ("H", game.horizon),
        ("S", game.num_states),
        ("A", game.num_agent_actions),
        ("B", game.num_opponent_actions),
        ("d", game.dim),
    ];
    for (name, v) in dims {
        if v == 0 {
            return Err(Error::InvalidGame(format!("{name} must be positive")));
        }
    }
    if game.initial_state >= game.num_states {
        return Err(Error::InvalidGame(format!(
            "initial state {} out of range for S={}",
            game.initial_state, game.num_states
        )));
    }
    let cells = game.num_cells();
    if game.transitions.len() != cells * game.num_states {
        return Err(Error::InvalidGame(format!(
            "transition table has {} entries, expected {}",
            game.transitions.len(),
            cells * game.num_states
        )));
    }
    if game.returns.len() != cells * game.dim {
        return Err(Error::InvalidGame(format!(
            "return table has {} entries, expected {}",
            game.returns.len(),
            cells * game.dim
        )));
    }
    for h in 0..game.horizon {
        for s in 0..game.num_states {
            for a in 0..game.num_agent_actions {
                for b in 0..game.num_opponent_actions {
                    let row = game.transition_row(h, s, a, b);
                    if let Some(sp) = row.iter().position(|p| !p.is_finite() || *p < 0.0) {
                        return Err(Error::InvalidGame(format!(
                            "negative or non-finite transition probability at (h={h}, s={s}, a={a}, b={b}, s'={sp})"
                        )));
                    }
                    let total: f64 = row.iter().sum();
                    if (total - 1.0).abs() > PROB_TOL {
                        return Err(Error::InvalidGame(format!(
                            "row not normalized at (h={h}, s={s}, a={a}, b={b}): sums to {total}"
                        )));
                    }
                    let r = game.reward(h, s, a, b);
                    if let Some(j) = r.iter().position(|x| !(0.0..=1.0).contains(x)) {
                        return Err(Error::InvalidGame(format!(
                            "return out of [0,1] at (h={h}, s={s}, a={a}, b={b}, j={j}): {}",
                            r[j]
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// A per-step, per-state distribution over one player's actions.
///
/// Used for both the agent (`mu`) and the opponent (`nu`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovPolicy {
    horizon: usize,
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

pub type AgentPolicy = MarkovPolicy;
pub type OpponentPolicy = MarkovPolicy;

impl MarkovPolicy {
    pub fn new(horizon: usize, num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if num_actions == 0 {
            return Err(Error::InvalidPolicy("policy needs at least one action".into()));
        }
        if probs.len() != horizon * num_states * num_actions {
            return Err(Error::InvalidPolicy(format!(
                "expected {} probabilities, got {}",
                horizon * num_states * num_actions,
                probs.len()
            )));
        }
        let policy = Self {
            horizon,
            num_states,
            num_actions,
            probs,
        };
        for h in 0..horizon {
            for s in 0..num_states {
                check_distribution(policy.dist(h, s))
                    .map_err(|msg| Error::InvalidPolicy(format!("at (h={h}, s={s}): {msg}")))?;
            }
        }
        Ok(policy)
    }

    pub fn uniform(horizon: usize, num_states: usize, num_actions: usize) -> Self {
        let p = 1.0 / num_actions as f64;
        Self {
            horizon,
            num_states,
            num_actions,
            probs: vec![p; horizon * num_states * num_actions],
        }
    }

    /// One action per `(h, s)`, laid out `choices[h * S + s]`.
    pub fn deterministic(horizon: usize, num_states: usize, num_actions: usize, choices: &[usize]) -> Result<Self> {
        if choices.len() != horizon * num_states {
            return Err(Error::InvalidPolicy(format!(
                "expected {} choices, got {}",
                horizon * num_states,
                choices.len()
            )));
        }
        let mut probs = vec![0.0; horizon * num_states * num_actions];
        for (i, &c) in choices.iter().enumerate() {
            if c >= num_actions {
                return Err(Error::InvalidPolicy(format!(
                    "action {c} out of range for {num_actions} actions"
                )));
            }
            probs[i * num_actions + c] = 1.0;
        }
        Ok(Self {
            horizon,
            num_states,
            num_actions,
            probs,
        })
    }

    /// Builds a policy from per-`(h, s)` rows without revalidating them.
    pub(crate) fn from_rows_unchecked(horizon: usize, num_states: usize, num_actions: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), horizon * num_states * num_actions);
        Self {
            horizon,
            num_states,
            num_actions,
            probs,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    pub fn dist(&self, h: usize, s: usize) -> &[f64] {
        let i = (h * self.num_states + s) * self.num_actions;
        &self.probs[i..i + self.num_actions]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

fn check_distribution(p: &[f64]) -> std::result::Result<(), String> {
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err("negative or non-finite probability".into());
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(format!("probabilities sum to {total}"));
    }
    Ok(())
}

/// Joint policy over `A x B` in product form `mu (x) omega`.
///
/// The planner's equilibrium profile is always a product of the two
/// marginals, so only the factors are stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointPolicy {
    agent: MarkovPolicy,
    opponent: MarkovPolicy,
}

impl JointPolicy {
    pub fn new(agent: MarkovPolicy, opponent: MarkovPolicy) -> Result<Self> {
        if agent.horizon != opponent.horizon || agent.num_states != opponent.num_states {
            return Err(Error::Shape("joint policy factors disagree on (H, S)".into()));
        }
        Ok(Self { agent, opponent })
    }

    pub fn prob(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.agent.dist(h, s)[a] * self.opponent.dist(h, s)[b]
    }

    /// Agent marginal `mu`.
    pub fn agent_marginal(&self) -> &MarkovPolicy {
        &self.agent
    }

    /// Opponent marginal `omega`.
    pub fn opponent_marginal(&self) -> &MarkovPolicy {
        &self.opponent
    }

    pub fn into_parts(self) -> (MarkovPolicy, MarkovPolicy) {
        (self.agent, self.opponent)
    }
}

/// One played episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    /// `H + 1` states; the last one is the state reached after step `H`.
    pub states: Vec<usize>,
    pub agent_actions: Vec<usize>,
    pub opponent_actions: Vec<usize>,
    /// Coordinate-wise sum of the collected return vectors.
    pub total_return: Vec<f64>,
}

impl EpisodeTrace {
    pub fn len(&self) -> usize {
        self.agent_actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agent_actions.is_empty()
    }
}

/// Plays one episode from the initial state.
pub fn simulate_episode<R: Rng + ?Sized>(
    game: &VectorGame,
    agent: &AgentPolicy,
    opponent: &OpponentPolicy,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    game.check_policy(agent, game.num_agent_actions, "agent")?;
    game.check_policy(opponent, game.num_opponent_actions, "opponent")?;
    let mut states = Vec::with_capacity(game.horizon + 1);
    let mut agent_actions = Vec::with_capacity(game.horizon);
    let mut opponent_actions = Vec::with_capacity(game.horizon);
    let mut total_return = vec![0.0; game.dim];
    let mut s = game.initial_state;
    states.push(s);
    for h in 0..game.horizon {
        let a = sample_index(rng, agent.dist(h, s));
        let b = sample_index(rng, opponent.dist(h, s));
        for (acc, r) in total_return.iter_mut().zip(game.reward(h, s, a, b)) {
            *acc += r;
        }
        s = sample_index(rng, game.transition_row(h, s, a, b));
        agent_actions.push(a);
        opponent_actions.push(b);
        states.push(s);
    }
    Ok(EpisodeTrace {
        states,
        agent_actions,
        opponent_actions,
        total_return,
    })
}

/// Exact vector value `V_1^{mu,nu}(s_1)` by backward induction on the true model.
pub fn policy_value(game: &VectorGame, agent: &AgentPolicy, opponent: &OpponentPolicy) -> Result<Vec<f64>> {
    game.check_policy(agent, game.num_agent_actions, "agent")?;
    game.check_policy(opponent, game.num_opponent_actions, "opponent")?;
    let (s_n, d) = (game.num_states, game.dim);
    let mut next = vec![0.0; s_n * d];
    let mut cur = vec![0.0; s_n * d];
    for h in (0..game.horizon).rev() {
        cur.iter_mut().for_each(|x| *x = 0.0);
        for s in 0..s_n {
            let mu = agent.dist(h, s);
            let nu = opponent.dist(h, s);
            let out = &mut cur[s * d..(s + 1) * d];
            for (a, &pa) in mu.iter().enumerate() {
                if pa == 0.0 {
                    continue;
                }
                for (b, &pb) in nu.iter().enumerate() {
                    let w = pa * pb;
                    if w == 0.0 {
                        continue;
                    }
                    let r = game.reward(h, s, a, b);
                    let row = game.transition_row(h, s, a, b);
                    for j in 0..d {
                        let mut q = r[j];
                        for (sp, &p) in row.iter().enumerate() {
                            q += p * next[sp * d + j];
                        }
                        out[j] += w * q;
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let s1 = game.initial_state;
    Ok(next[s1 * d..(s1 + 1) * d].to_vec())
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
