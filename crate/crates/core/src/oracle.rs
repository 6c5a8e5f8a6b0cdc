//! Ground truth on the true model.
//!
//! Everything here uses the real transition kernel and is meant for
//! evaluation, opponents that stress-test the learner, and assumption checks.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_model::{dot, policy_value, MarkovPolicy, VectorGame};
use crate::geometry::{sample_unit_direction, TargetSet};
use crate::matrix_nash::{solve_zero_sum, MatrixGame};

#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxSolution {
    /// `V*_1(theta, s_1)`.
    pub value: f64,
    pub agent: MarkovPolicy,
    pub opponent: MarkovPolicy,
    /// `V*_h(theta, s)` for `h` in `0..=H`.
    pub values: Vec<f64>,
}

/// `Q_h(s, a, b) = theta . r_h(s, a, b) + P_h V_{h+1}(s, a, b)`.
fn scalar_backup(game: &VectorGame, theta: &[f64], h: usize, s: usize, a: usize, b: usize, next: &[f64]) -> f64 {
    game.scalar_reward(h, s, a, b, theta) + dot(game.transition_row(h, s, a, b), next)
}

fn check_theta(game: &VectorGame, theta: &[f64]) -> Result<()> {
    if theta.len() != game.dim() || theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Shape(format!(
            "direction must be a finite vector of length {}",
            game.dim()
        )));
    }
    Ok(())
}

/// Minimax value of the `theta`-scalarized game by backward induction.
pub fn exact_minimax_value(game: &VectorGame, theta: &[f64]) -> Result<MinimaxSolution> {
    check_theta(game, theta)?;
    let (hz, ns, na, nb) = (
        game.horizon(),
        game.num_states(),
        game.num_agent_actions(),
        game.num_opponent_actions(),
    );
    let mut values = vec![0.0; (hz + 1) * ns];
    let mut mu = vec![0.0; hz * ns * na];
    let mut nu = vec![0.0; hz * ns * nb];
    let mut block = vec![0.0; na * nb];
    for h in (0..hz).rev() {
        let next = values[(h + 1) * ns..(h + 2) * ns].to_vec();
        for s in 0..ns {
            for a in 0..na {
                for b in 0..nb {
                    block[a * nb + b] = scalar_backup(game, theta, h, s, a, b, &next);
                }
            }
            let eq = solve_zero_sum(&MatrixGame::new(na, nb, block.clone())?)?;
            mu[(h * ns + s) * na..(h * ns + s + 1) * na].copy_from_slice(&eq.row_strategy);
            nu[(h * ns + s) * nb..(h * ns + s + 1) * nb].copy_from_slice(&eq.col_strategy);
            values[h * ns + s] = eq.value;
        }
    }
    Ok(MinimaxSolution {
        value: values[game.initial_state()],
        agent: MarkovPolicy::from_rows_unchecked(hz, ns, na, mu),
        opponent: MarkovPolicy::from_rows_unchecked(hz, ns, nb, nu),
        values,
    })
}

/// Deterministic opponent policy maximizing the scalarized value against `agent`.
pub fn exact_best_response(game: &VectorGame, theta: &[f64], agent: &MarkovPolicy) -> Result<MarkovPolicy> {
    best_response(game, theta, agent, Side::Opponent)
}

/// Deterministic agent policy minimizing the scalarized value against `opponent`.
pub fn exact_best_response_min(game: &VectorGame, theta: &[f64], opponent: &MarkovPolicy) -> Result<MarkovPolicy> {
    best_response(game, theta, opponent, Side::Agent)
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Agent,
    Opponent,
}

fn best_response(game: &VectorGame, theta: &[f64], fixed: &MarkovPolicy, responder: Side) -> Result<MarkovPolicy> {
    check_theta(game, theta)?;
    let (hz, ns, na, nb) = (
        game.horizon(),
        game.num_states(),
        game.num_agent_actions(),
        game.num_opponent_actions(),
    );
    let (fixed_actions, free_actions) = match responder {
        Side::Opponent => (na, nb),
        Side::Agent => (nb, na),
    };
    if fixed.horizon() != hz || fixed.num_states() != ns || fixed.num_actions() != fixed_actions {
        return Err(Error::Shape("fixed policy does not match the game".into()));
    }
    let mut next = vec![0.0; ns];
    let mut cur = vec![0.0; ns];
    let mut choices = vec![0usize; hz * ns];
    for h in (0..hz).rev() {
        for s in 0..ns {
            let dist = fixed.dist(h, s);
            let mut best = (0usize, 0.0f64);
            for x in 0..free_actions {
                let mut val = 0.0;
                for (y, &p) in dist.iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    let (a, b) = match responder {
                        Side::Opponent => (y, x),
                        Side::Agent => (x, y),
                    };
                    val += p * scalar_backup(game, theta, h, s, a, b, &next);
                }
                let better = match responder {
                    Side::Opponent => val > best.1,
                    Side::Agent => val < best.1,
                };
                if x == 0 || better {
                    best = (x, val);
                }
            }
            choices[h * ns + s] = best.0;
            cur[s] = best.1;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    MarkovPolicy::deterministic(hz, ns, free_actions, &choices)
}

/// Sampled lower bound on the non-approachability gap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    pub directions: usize,
    pub worst_direction: Vec<f64>,
}

/// `max_theta (V*_1(theta) - max_{x in target} theta . x)_+` over `n` sampled unit directions.
pub fn estimate_delta<R: Rng + ?Sized>(
    game: &VectorGame,
    target: &TargetSet,
    n: usize,
    rng: &mut R,
) -> Result<DeltaEstimate> {
    if n == 0 {
        return Err(Error::Config("delta estimation needs at least one direction".into()));
    }
    if target.dim() != game.dim() {
        return Err(Error::Shape("target and game dimensions differ".into()));
    }
    let directions: Vec<Vec<f64>> = (0..n).map(|_| sample_unit_direction(rng, game.dim())).collect();
    let gaps = directions
        .par_iter()
        .map(|theta| -> Result<f64> {
            let v = exact_minimax_value(game, theta)?.value;
            Ok(v - target.support_value(theta)?)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mut worst, mut delta) = (0, 0.0);
    for (i, g) in gaps.iter().enumerate() {
        if *g > delta {
            delta = *g;
            worst = i;
        }
    }
    Ok(DeltaEstimate {
        delta,
        directions: n,
        worst_direction: directions[worst].clone(),
    })
}

/// True when no sampled direction shows a gap above `tol`.
pub fn is_approachable<R: Rng + ?Sized>(
    game: &VectorGame,
    target: &TargetSet,
    n: usize,
    rng: &mut R,
    tol: f64,
) -> Result<bool> {
    Ok(estimate_delta(game, target, n, rng)?.delta <= tol)
}

/// Default cap on the number of enumerated deterministic policies.
pub const DEFAULT_VERTEX_LIMIT: usize = 1_000_000;

/// Exact value vectors of every deterministic Markov policy of an MDP.
///
/// Their convex hull is the achievable set.
pub fn achievable_set_vertices(mdp: &VectorGame, limit: usize) -> Result<Vec<Vec<f64>>> {
    if !mdp.is_mdp() {
        return Err(Error::Config(
            "achievable set enumeration needs a single opponent action".into(),
        ));
    }
    let (hz, ns, na) = (mdp.horizon(), mdp.num_states(), mdp.num_agent_actions());
    let slots = hz * ns;
    let count = u32::try_from(slots)
        .ok()
        .and_then(|e| na.checked_pow(e))
        .filter(|&c| c <= limit)
        .ok_or_else(|| Error::TooLarge(format!("{na}^{slots} deterministic policies exceed the limit {limit}")))?;
    let opponent = MarkovPolicy::uniform(hz, ns, 1);
    let mut choices = vec![0usize; slots];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let agent = MarkovPolicy::deterministic(hz, ns, na, &choices)?;
        out.push(policy_value(mdp, &agent, &opponent)?);
        for c in choices.iter_mut() {
            *c += 1;
            if *c < na {
                break;
            }
            *c = 0;
        }
    }
    Ok(out)
}
