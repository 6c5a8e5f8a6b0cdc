//! Convex target sets and cost functions over the return space.
//!
//! A [`TargetSet`] answers three queries: Euclidean projection, distance, and
//! a maximizer of a linear function (the support argmax, which is also a
//! subgradient of the conjugate of the distance function). A
//! [`CostFunction`] answers the conjugate subgradient query over the return
//! box `[0,H]^d`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game_model::dot;
use crate::matrix_nash::lp::{solve_lp, LpProblem};

/// Membership and projection fixed-point tolerance.
pub const SET_TOL: f64 = 1e-9;
/// Dykstra stops once a full sweep changes the iterate and its increments by less than this.
pub const DYKSTRA_TOL: f64 = 1e-9;
pub const DYKSTRA_MAX_SWEEPS: usize = 100_000;

/// `normal . x <= offset`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    fn violation(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    fn project_in_place(&self, x: &mut [f64]) {
        let excess = self.violation(x);
        if excess <= 0.0 {
            return;
        }
        let nn = dot(&self.normal, &self.normal);
        if nn == 0.0 {
            return;
        }
        let step = excess / nn;
        for (xi, ci) in x.iter_mut().zip(&self.normal) {
            *xi -= step * ci;
        }
    }
}

/// Closed convex bounded subset of `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TargetSet {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// Intersection of halfspaces with the box `[lower, upper]`.
    Polytope {
        halfspaces: Vec<Halfspace>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Translate {
        inner: Box<TargetSet>,
        shift: Vec<f64>,
    },
}

/// User-facing description of a target set.
///
/// Identical to [`TargetSet`] except that a polytope's bounding box may be
/// omitted, in which case it defaults to `[0,H]^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TargetSpec {
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Polytope {
        halfspaces: Vec<Halfspace>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<Vec<f64>>,
    },
    Translate {
        inner: Box<TargetSpec>,
        shift: Vec<f64>,
    },
}

impl TargetSpec {
    /// Resolves the spec for a game with `d` coordinates and horizon `H`.
    ///
    /// Boxes and polytopes are intersected with `[-sqrt(d) H, sqrt(d) H]^d`;
    /// a ball must already fit inside that region.
    pub fn resolve(&self, dim: usize, horizon: usize) -> Result<TargetSet> {
        let reach = (dim as f64).sqrt() * horizon as f64;
        self.resolve_within(dim, horizon, &vec![-reach; dim], &vec![reach; dim])
    }

    fn resolve_within(&self, dim: usize, horizon: usize, lo: &[f64], hi: &[f64]) -> Result<TargetSet> {
        let clamp = |lower: &[f64], upper: &[f64]| -> (Vec<f64>, Vec<f64>) {
            (
                lower.iter().zip(lo).map(|(a, b)| a.max(*b)).collect(),
                upper.iter().zip(hi).map(|(a, b)| a.min(*b)).collect(),
            )
        };
        match self {
            TargetSpec::Box { lower, upper } => {
                check_len(lower, dim, "box lower")?;
                check_len(upper, dim, "box upper")?;
                let (lower, upper) = clamp(lower, upper);
                TargetSet::new_box(lower, upper)
            }
            TargetSpec::Ball { center, radius } => {
                check_len(center, dim, "ball center")?;
                let fits = center
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(c, (l, h))| c - radius >= *l - SET_TOL && c + radius <= *h + SET_TOL);
                if !fits {
                    return Err(Error::InvalidTarget(
                        "ball extends beyond [-sqrt(d) H, sqrt(d) H]^d".into(),
                    ));
                }
                TargetSet::new_ball(center.clone(), *radius)
            }
            TargetSpec::Polytope {
                halfspaces,
                lower,
                upper,
            } => {
                let default_lo = vec![0.0; dim];
                let default_hi = vec![horizon as f64; dim];
                let lower = lower.as_deref().unwrap_or(&default_lo);
                let upper = upper.as_deref().unwrap_or(&default_hi);
                check_len(lower, dim, "polytope lower")?;
                check_len(upper, dim, "polytope upper")?;
                let (lower, upper) = clamp(lower, upper);
                TargetSet::new_polytope(halfspaces.clone(), lower, upper)
            }
            TargetSpec::Translate { inner, shift } => {
                check_len(shift, dim, "translation")?;
                let lo: Vec<f64> = lo.iter().zip(shift).map(|(a, s)| a - s).collect();
                let hi: Vec<f64> = hi.iter().zip(shift).map(|(a, s)| a - s).collect();
                let inner = inner.resolve_within(dim, horizon, &lo, &hi)?;
                Ok(TargetSet::translate(inner, shift.clone()))
            }
        }
    }
}

impl From<&TargetSet> for TargetSpec {
    fn from(set: &TargetSet) -> Self {
        match set {
            TargetSet::Box { lower, upper } => TargetSpec::Box {
                lower: lower.clone(),
                upper: upper.clone(),
            },
            TargetSet::Ball { center, radius } => TargetSpec::Ball {
                center: center.clone(),
                radius: *radius,
            },
            TargetSet::Polytope {
                halfspaces,
                lower,
                upper,
            } => TargetSpec::Polytope {
                halfspaces: halfspaces.clone(),
                lower: Some(lower.clone()),
                upper: Some(upper.clone()),
            },
            TargetSet::Translate { inner, shift } => TargetSpec::Translate {
                inner: Box::new(TargetSpec::from(inner.as_ref())),
                shift: shift.clone(),
            },
        }
    }
}

fn check_len(v: &[f64], dim: usize, what: &str) -> Result<()> {
    if v.len() != dim {
        return Err(Error::InvalidTarget(format!(
            "{what} has length {}, expected {dim}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidTarget(format!("{what} has non-finite entries")));
    }
    Ok(())
}

impl TargetSet {
    pub fn new_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidTarget(
                "box bounds must have equal positive length".into(),
            ));
        }
        check_len(&lower, lower.len(), "box lower")?;
        check_len(&upper, upper.len(), "box upper")?;
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::InvalidTarget("box is empty".into()));
        }
        Ok(TargetSet::Box { lower, upper })
    }

    /// The return box `[0,H]^d`.
    pub fn return_box(dim: usize, horizon: usize) -> Self {
        TargetSet::Box {
            lower: vec![0.0; dim],
            upper: vec![horizon as f64; dim],
        }
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidTarget("ball center must be non-empty".into()));
        }
        check_len(&center, center.len(), "ball center")?;
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidTarget(format!(
                "ball radius must be finite and >= 0, got {radius}"
            )));
        }
        Ok(TargetSet::Ball { center, radius })
    }

    /// Halfspaces intersected with `[lower, upper]`; rejects an empty result.
    pub fn new_polytope(halfspaces: Vec<Halfspace>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let dim = lower.len();
        if dim == 0 || upper.len() != dim {
            return Err(Error::InvalidTarget(
                "polytope bounds must have equal positive length".into(),
            ));
        }
        check_len(&lower, dim, "polytope lower")?;
        check_len(&upper, dim, "polytope upper")?;
        for (i, hs) in halfspaces.iter().enumerate() {
            if hs.normal.len() != dim {
                return Err(Error::InvalidTarget(format!("halfspace {i} has the wrong dimension")));
            }
            if !hs.offset.is_finite() || hs.normal.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidTarget(format!("halfspace {i} has non-finite data")));
            }
        }
        let set = TargetSet::Polytope {
            halfspaces,
            lower,
            upper,
        };
        match set.polytope_lp(vec![0.0; dim]).map(|lp| solve_lp(&lp)) {
            Some(Ok(_)) => Ok(set),
            Some(Err(Error::Infeasible)) => Err(Error::InvalidTarget("polytope is empty".into())),
            Some(Err(e)) => Err(e),
            None => unreachable!(),
        }
    }

    pub fn translate(inner: TargetSet, shift: Vec<f64>) -> Self {
        TargetSet::Translate {
            inner: Box::new(inner),
            shift,
        }
    }

    pub fn from_json(text: &str, dim: usize, horizon: usize) -> Result<Self> {
        let spec: TargetSpec = serde_json::from_str(text)?;
        spec.resolve(dim, horizon)
    }

    pub fn dim(&self) -> usize {
        match self {
            TargetSet::Box { lower, .. } | TargetSet::Polytope { lower, .. } => lower.len(),
            TargetSet::Ball { center, .. } => center.len(),
            TargetSet::Translate { shift, .. } => shift.len(),
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Shape(format!(
                "point has dimension {}, target set has {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Axis-aligned box containing the set.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            TargetSet::Box { lower, upper } | TargetSet::Polytope { lower, upper, .. } => {
                (lower.clone(), upper.clone())
            }
            TargetSet::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            TargetSet::Translate { inner, shift } => {
                let (lo, hi) = inner.bounding_box();
                (
                    lo.iter().zip(shift).map(|(a, s)| a + s).collect(),
                    hi.iter().zip(shift).map(|(a, s)| a + s).collect(),
                )
            }
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self {
            TargetSet::Box { lower, upper } => in_box(x, lower, upper, tol),
            TargetSet::Ball { center, radius } => norm(&sub(x, center)) <= radius + tol,
            TargetSet::Polytope {
                halfspaces,
                lower,
                upper,
            } => in_box(x, lower, upper, tol) && halfspaces.iter().all(|h| h.violation(x) <= tol),
            TargetSet::Translate { inner, shift } => inner.contains(&sub(x, shift), tol),
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        match self {
            TargetSet::Box { lower, upper } => Ok(clamp_box(x, lower, upper)),
            TargetSet::Ball { center, radius } => {
                let diff = sub(x, center);
                let n = norm(&diff);
                if n <= *radius {
                    Ok(x.to_vec())
                } else {
                    Ok(center.iter().zip(&diff).map(|(c, v)| c + radius * v / n).collect())
                }
            }
            TargetSet::Polytope {
                halfspaces,
                lower,
                upper,
            } => dykstra(x, halfspaces, lower, upper),
            TargetSet::Translate { inner, shift } => {
                let p = inner.project(&sub(x, shift))?;
                Ok(p.iter().zip(shift).map(|(a, s)| a + s).collect())
            }
        }
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        let p = self.project(x)?;
        Ok(norm(&sub(x, &p)))
    }

    /// A maximizer of `theta . x` over the set.
    ///
    /// Ties are broken deterministically: the lower corner for boxes, the
    /// center for balls with `theta = 0`, and the lexicographically smallest
    /// optimal point for polytopes.
    pub fn support_argmax(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_point(theta)?;
        match self {
            TargetSet::Box { lower, upper } => Ok(theta
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(t, (l, u))| if *t > 0.0 { *u } else { *l })
                .collect()),
            TargetSet::Ball { center, radius } => {
                let n = norm(theta);
                if n == 0.0 {
                    Ok(center.clone())
                } else {
                    Ok(center.iter().zip(theta).map(|(c, t)| c + radius * t / n).collect())
                }
            }
            TargetSet::Polytope { .. } => self.polytope_lex_argmax(theta),
            TargetSet::Translate { inner, shift } => {
                let p = inner.support_argmax(theta)?;
                Ok(p.iter().zip(shift).map(|(a, s)| a + s).collect())
            }
        }
    }

    /// Support function `max_{x in set} theta . x`.
    pub fn support_value(&self, theta: &[f64]) -> Result<f64> {
        self.check_point(theta)?;
        match self {
            TargetSet::Polytope { .. } => {
                let lp = self.polytope_lp(theta.to_vec()).expect("polytope");
                Ok(solve_lp(&lp)?.objective)
            }
            TargetSet::Translate { inner, shift } => Ok(inner.support_value(theta)? + dot(theta, shift)),
            _ => Ok(dot(theta, &self.support_argmax(theta)?)),
        }
    }

    fn polytope_lp(&self, objective: Vec<f64>) -> Option<LpProblem> {
        let TargetSet::Polytope {
            halfspaces,
            lower,
            upper,
        } = self
        else {
            return None;
        };
        let mut lp = LpProblem::maximize(objective);
        for hs in halfspaces {
            lp = lp.le(hs.normal.clone(), hs.offset);
        }
        for j in 0..lower.len() {
            lp = lp.bounds(j, lower[j], upper[j]);
        }
        Some(lp)
    }

    fn polytope_lex_argmax(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let dim = theta.len();
        let base = self.polytope_lp(theta.to_vec()).expect("polytope");
        let first = solve_lp(&base)?;
        let opt = first.objective;
        let slack = 1e-10 * (1.0 + opt.abs());
        // Each refinement keeps the face of optimal points and the already
        // minimized leading coordinates.
        let mut refined = base.ge(theta.to_vec(), opt - slack);
        let mut x = first.x;
        for j in 0..dim {
            let mut lp = refined.clone();
            lp.sense = crate::matrix_nash::lp::Sense::Minimize;
            lp.objective = unit(dim, j);
            let sol = match solve_lp(&lp) {
                Ok(sol) => sol,
                // Rounding left the face numerically empty; the simplex vertex is optimal anyway.
                Err(Error::Infeasible) => break,
                Err(e) => return Err(e),
            };
            x = sol.x;
            refined = refined.le(unit(dim, j), x[j] + slack);
        }
        Ok(x)
    }
}

fn in_box(x: &[f64], lower: &[f64], upper: &[f64], tol: f64) -> bool {
    x.iter()
        .zip(lower.iter().zip(upper))
        .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
}

fn clamp_box(x: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(lower.iter().zip(upper))
        .map(|(v, (l, u))| v.max(*l).min(*u))
        .collect()
}

/// Dykstra's alternating projections onto the halfspaces and the box.
fn dykstra(x: &[f64], halfspaces: &[Halfspace], lower: &[f64], upper: &[f64]) -> Result<Vec<f64>> {
    let feasible = in_box(x, lower, upper, 0.0) && halfspaces.iter().all(|h| h.violation(x) <= 0.0);
    if feasible {
        return Ok(x.to_vec());
    }
    let dim = x.len();
    let nsets = halfspaces.len() + 1;
    let mut iterate = x.to_vec();
    let mut increments = vec![0.0; nsets * dim];
    let mut start = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    for _ in 0..DYKSTRA_MAX_SWEEPS {
        start.copy_from_slice(&iterate);
        // The iterate alone can return to the same point while the
        // increments are still far from their fixed point.
        let mut shift = 0.0;
        for set in 0..nsets {
            let inc = &mut increments[set * dim..(set + 1) * dim];
            for j in 0..dim {
                y[j] = iterate[j] + inc[j];
            }
            let before = y.clone();
            if set < halfspaces.len() {
                halfspaces[set].project_in_place(&mut y);
            } else {
                for j in 0..dim {
                    y[j] = y[j].max(lower[j]).min(upper[j]);
                }
            }
            for j in 0..dim {
                let next = before[j] - y[j];
                shift += (next - inc[j]) * (next - inc[j]);
                inc[j] = next;
                iterate[j] = y[j];
            }
        }
        let moved = (norm(&sub(&iterate, &start)).powi(2) + shift).sqrt();
        let violation = halfspaces.iter().map(|h| h.violation(&iterate)).fold(0.0, f64::max);
        if moved <= DYKSTRA_TOL && violation <= DYKSTRA_TOL {
            return Ok(iterate);
        }
    }
    Err(Error::NoConvergence {
        method: "Dykstra projection",
        iterations: DYKSTRA_MAX_SWEEPS,
    })
}

/// Convex 1-Lipschitz cost on the return space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CostFunction {
    /// `g(x) = c . x`
    Linear { c: Vec<f64> },
    /// `g(x) = x_index`
    Coordinate { index: usize },
    /// `g(x) = max_i (c_i . x + b_i)`
    MaxOfLinear { pieces: Vec<Halfspace> },
}

impl CostFunction {
    pub fn linear(c: Vec<f64>) -> Result<Self> {
        let g = CostFunction::Linear { c };
        g.validate(None)?;
        Ok(g)
    }

    /// Checks the Lipschitz constraint and, when given, the dimension.
    pub fn validate(&self, dim: Option<usize>) -> Result<()> {
        let check = |c: &[f64]| -> Result<()> {
            if let Some(d) = dim {
                if c.len() != d {
                    return Err(Error::InvalidCost(format!(
                        "coefficient vector has length {}, expected {d}",
                        c.len()
                    )));
                }
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidCost("non-finite coefficient".into()));
            }
            if norm(c) > 1.0 + 1e-12 {
                return Err(Error::InvalidCost(format!("coefficient norm {} exceeds 1", norm(c))));
            }
            Ok(())
        };
        match self {
            CostFunction::Linear { c } => check(c),
            CostFunction::Coordinate { index } => match dim {
                Some(d) if *index >= d => Err(Error::InvalidCost(format!("coordinate {index} out of range for d={d}"))),
                _ => Ok(()),
            },
            CostFunction::MaxOfLinear { pieces } => {
                if pieces.is_empty() {
                    return Err(Error::InvalidCost("max-of-linear cost needs at least one piece".into()));
                }
                pieces.iter().try_for_each(|p| {
                    check(&p.normal)?;
                    if p.offset.is_finite() {
                        Ok(())
                    } else {
                        Err(Error::InvalidCost("non-finite offset".into()))
                    }
                })
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            CostFunction::Linear { c } => dot(c, x),
            CostFunction::Coordinate { index } => x[*index],
            CostFunction::MaxOfLinear { pieces } => pieces
                .iter()
                .map(|p| dot(&p.normal, x) + p.offset)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// A maximizer of `phi . x - g(x)` over `[0,H]^d`.
    ///
    /// Linear costs use the per-coordinate sign rule with ties sent to 0;
    /// piecewise-linear costs solve the epigraph LP.
    pub fn conjugate_subgradient(&self, phi: &[f64], horizon: f64) -> Result<Vec<f64>> {
        let dim = phi.len();
        let sign_rule = |c: &dyn Fn(usize) -> f64| -> Vec<f64> {
            (0..dim).map(|j| if phi[j] > c(j) { horizon } else { 0.0 }).collect()
        };
        match self {
            CostFunction::Linear { c } => {
                if c.len() != dim {
                    return Err(Error::Shape("cost and direction dimensions differ".into()));
                }
                Ok(sign_rule(&|j| c[j]))
            }
            CostFunction::Coordinate { index } => {
                if *index >= dim {
                    return Err(Error::Shape("cost coordinate out of range".into()));
                }
                Ok(sign_rule(&|j| if j == *index { 1.0 } else { 0.0 }))
            }
            CostFunction::MaxOfLinear { pieces } => {
                // Variables (x, t): max phi.x - t  s.t.  c_i.x + b_i <= t.
                let mut objective = phi.to_vec();
                objective.push(-1.0);
                let mut lp = LpProblem::maximize(objective);
                for p in pieces {
                    if p.normal.len() != dim {
                        return Err(Error::Shape("cost piece dimension differs".into()));
                    }
                    let mut coeffs = p.normal.clone();
                    coeffs.push(-1.0);
                    lp = lp.le(coeffs, -p.offset);
                }
                for j in 0..dim {
                    lp = lp.bounds(j, 0.0, horizon);
                }
                lp = lp.bounds(dim, f64::NEG_INFINITY, f64::INFINITY);
                let mut x = solve_lp(&lp)?.x;
                x.truncate(dim);
                for v in &mut x {
                    *v = v.clamp(0.0, horizon);
                }
                Ok(x)
            }
        }
    }
}

/// Uniform direction on the unit sphere via normalized Gaussians.
pub fn sample_unit_direction<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-300 && n.is_finite() {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn unit(dim: usize, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[j] = 1.0;
    e
}

/// Rescales `v` onto the closed unit ball when it lies outside.
pub fn project_unit_ball(v: &mut [f64]) {
    let n = norm(v);
    if n > 1.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}
