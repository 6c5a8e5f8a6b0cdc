//! Multi-objective learning in tabular vector-valued Markov games.
//!
//! The agent controls the min-player of an episodic two-player zero-sum game
//! whose per-step returns are vectors in `[0,1]^d`. Each episode it picks a
//! scalarization direction `theta`, plans optimistically against the
//! `theta`-scalarized game, plays one episode and updates its model. The
//! direction itself is driven by a dual update so the running average of the
//! episode returns approaches a convex target set.
//!
//! Layout:
//!
//! - [`game_model`]: games, policies, simulation and exact policy evaluation.
//! - [`geometry`]: target sets, cost functions and their support/conjugate oracles.
//! - [`matrix_nash`]: a dense simplex solver and exact zero-sum matrix game equilibria.
//! - [`planning`]: visit statistics, bonuses and the optimistic planners.
//! - [`dual_updates`]: projection-based, subgradient and double dual updates.
//! - [`moma`]: the episode loop and opponent strategies.
//! - [`oracle`]: ground truth on the true model (minimax values, best responses, delta).
//! - [`harness`]: experiment configs, instance generators, CLI and result files.

pub mod dual_updates;
pub mod error;
pub mod game_model;
pub mod geometry;
pub mod harness;
pub mod matrix_nash;
pub mod moma;
pub mod oracle;
pub mod planning;
pub mod rng;

pub use error::{Error, Result};
pub use game_model::{EpisodeTrace, JointPolicy, MarkovPolicy, VectorGame};
pub use geometry::{CostFunction, Halfspace, TargetSet};
pub use matrix_nash::{solve_zero_sum, MatrixGame, NashSolution};
pub use moma::{run_moma, DualKind, OpponentSpec, PlannerKind, RunConfig, RunResult};
