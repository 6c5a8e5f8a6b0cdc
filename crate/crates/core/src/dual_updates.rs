//! Updates of the scalarization direction between episodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, project_unit_ball, sub, CostFunction, TargetSet};

/// Distance at or below which the running average counts as inside the target.
pub const INSIDE_TOL: f64 = 1e-9;

/// `eta^k = sqrt(1 / (d H^2 k))`.
pub fn step_size(k: u64, dim: usize, horizon: f64) -> f64 {
    (1.0 / (dim as f64 * horizon * horizon * k as f64)).sqrt()
}

/// Running mean of the episode returns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningAverage {
    mean: Vec<f64>,
    count: u64,
}

impl RunningAverage {
    pub fn new(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            count: 0,
        }
    }

    /// `W <- ((k - 1) W + v) / k`.
    pub fn push(&mut self, v: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        for (w, x) in self.mean.iter_mut().zip(v) {
            *w = ((k - 1.0) * *w + x) / k;
        }
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

/// Projection-based direction: the unit vector from the projection of `avg`
/// towards `avg`, or `prev_theta` when `avg` is already inside the target.
pub fn pdu(avg: &[f64], target: &TargetSet, prev_theta: &[f64]) -> Result<Vec<f64>> {
    let proj = target.project(avg)?;
    let diff = sub(avg, &proj);
    let dist = norm(&diff);
    if dist <= INSIDE_TOL {
        return Ok(prev_theta.to_vec());
    }
    Ok(diff.into_iter().map(|x| x / dist).collect())
}

/// Dual variables carried across episodes.
///
/// For the single-dual rules only `theta` is used. The double rule keeps a
/// target dual and a cost dual and combines them as
/// `theta = rho * target_dual + cost_dual`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub theta: Vec<f64>,
    pub target_dual: Vec<f64>,
    pub cost_dual: Vec<f64>,
    pub rho: f64,
    /// Index of the episode whose return feeds the next update (starts at 1).
    pub k: u64,
    pub horizon: f64,
}

impl DualState {
    pub fn new(theta: Vec<f64>, horizon: f64) -> Self {
        let dim = theta.len();
        Self {
            theta,
            target_dual: vec![0.0; dim],
            cost_dual: vec![0.0; dim],
            rho: 0.0,
            k: 1,
            horizon,
        }
    }

    /// Double-dual state with both duals at the origin.
    pub fn double(dim: usize, rho: f64, horizon: f64) -> Result<Self> {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::Config(format!("rho must be finite and >= 0, got {rho}")));
        }
        Ok(Self {
            theta: vec![0.0; dim],
            target_dual: vec![0.0; dim],
            cost_dual: vec![0.0; dim],
            rho,
            k: 1,
            horizon,
        })
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn eta(&self) -> f64 {
        step_size(self.k, self.dim(), self.horizon)
    }

    /// Online subgradient step on `theta`, then back onto the unit ball.
    pub fn odu_step(&mut self, vhat: &[f64], target: &TargetSet) -> Result<()> {
        let eta = self.eta();
        let support = target.support_argmax(&self.theta)?;
        for j in 0..self.theta.len() {
            self.theta[j] += eta * (vhat[j] - support[j]);
        }
        project_unit_ball(&mut self.theta);
        self.k += 1;
        Ok(())
    }

    /// Subgradient steps on both duals, then recombines `theta`.
    pub fn dodu_step(&mut self, vhat: &[f64], target: &TargetSet, cost: &CostFunction) -> Result<()> {
        let eta = self.eta();
        let support = target.support_argmax(&self.target_dual)?;
        let conj = cost.conjugate_subgradient(&self.cost_dual, self.horizon)?;
        for j in 0..self.theta.len() {
            self.target_dual[j] += eta * (vhat[j] - support[j]);
            self.cost_dual[j] += eta * (vhat[j] - conj[j]);
        }
        project_unit_ball(&mut self.target_dual);
        project_unit_ball(&mut self.cost_dual);
        for j in 0..self.theta.len() {
            self.theta[j] = self.rho * self.target_dual[j] + self.cost_dual[j];
        }
        self.k += 1;
        Ok(())
    }
}

/// `rho = 2 / gamma_min`, or 2 with a warning when `gamma_min` is unknown.
pub fn default_rho(gamma_min: Option<f64>) -> Result<f64> {
    match gamma_min {
        Some(g) if g > 0.0 && g.is_finite() => Ok(2.0 / g),
        Some(g) => Err(Error::Config(format!("gamma_min must be positive, got {g}"))),
        None => {
            log::warn!("gamma_min not configured; falling back to rho = 2");
            Ok(2.0)
        }
    }
}
