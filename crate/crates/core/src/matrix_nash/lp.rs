//! Small dense linear programs.
//!
//! Two-phase tableau simplex with Bland's rule. Every row gets an artificial
//! column, which keeps the basis inverse readable from the final tableau and
//! gives shadow prices for free. Intended for the tiny problems that show up
//! per state in planning and per episode in the dual updates, not for large
//! sparse models.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub kind: ConstraintKind,
    pub rhs: f64,
}

/// `optimize c.x  s.t.  rows,  lower <= x <= upper`.
///
/// Bounds may be infinite. Variables default to `[0, +inf)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Shadow price of each constraint: derivative of the optimal objective
    /// with respect to its right-hand side.
    pub duals: Vec<f64>,
}

impl LpProblem {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn maximize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Maximize, objective)
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::new(Sense::Minimize, objective)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(mut self, coeffs: Vec<f64>, kind: ConstraintKind, rhs: f64) -> Self {
        self.constraints.push(Constraint { coeffs, kind, rhs });
        self
    }

    pub fn le(self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.constrain(coeffs, ConstraintKind::Le, rhs)
    }

    pub fn ge(self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.constrain(coeffs, ConstraintKind::Ge, rhs)
    }

    pub fn eq(self, coeffs: Vec<f64>, rhs: f64) -> Self {
        self.constrain(coeffs, ConstraintKind::Eq, rhs)
    }

    pub fn bounds(mut self, var: usize, lower: f64, upper: f64) -> Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Shape("bound vectors do not match the objective".into()));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Shape(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::Shape(format!("constraint {i} has non-finite data")));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("objective has non-finite entries".into()));
        }
        for j in 0..n {
            if self.lower[j].is_nan()
                || self.upper[j].is_nan()
                || self.lower[j] == f64::INFINITY
                || self.upper[j] == f64::NEG_INFINITY
            {
                return Err(Error::Shape(format!("variable {j} has invalid bounds")));
            }
            if self.lower[j] > self.upper[j] {
                return Err(Error::Infeasible);
            }
        }
        Ok(())
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// x = offset + y
    Shifted { col: usize, offset: f64 },
    /// x = offset - y
    Mirrored { col: usize, offset: f64 },
    /// x = y+ - y-
    Free { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.data[r * self.width + self.width - 1]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let p = self.data[pr * w + pc];
        for c in 0..w {
            self.data[pr * w + c] /= p;
        }
        self.data[pr * w + pc] = 1.0;
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.data[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                let v = self.data[pr * w + c];
                if v != 0.0 {
                    self.data[r * w + c] -= f * v;
                }
            }
            self.data[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        (0..self.rows).map(|r| cost[self.basis[r]] * self.rhs(r)).sum()
    }

    /// Minimizes `cost` over the columns flagged in `allowed`, Bland's rule.
    fn run(&mut self, cost: &[f64], allowed: &[bool], pivots: &mut usize) -> Result<()> {
        let ncols = self.width - 1;
        loop {
            let mut entering = None;
            for j in 0..ncols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j];
                for r in 0..self.rows {
                    let a = self.at(r, j);
                    if a != 0.0 {
                        reduced -= cost[self.basis[r]] * a;
                    }
                }
                if reduced < -COST_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(pc) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leaving = match leaving {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                        if ratio < lratio && !tie || tie && self.basis[r] < self.basis[lr] {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            let Some((pr, _)) = leaving else {
                return Err(Error::Unbounded);
            };
            self.pivot(pr, pc);
            *pivots += 1;
            if *pivots > MAX_PIVOTS {
                return Err(Error::NoConvergence {
                    method: "simplex",
                    iterations: MAX_PIVOTS,
                });
            }
        }
    }
}

/// Solves a small dense LP to an optimal basic feasible solution.
///
/// Deterministic: the same problem always yields the same vertex.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    problem.check()?;
    let n = problem.num_vars();

    // Map bounded variables onto nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut ncols_struct = 0;
    let mut extra_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (problem.lower[j], problem.upper[j]);
        if lo.is_finite() {
            maps.push(VarMap::Shifted {
                col: ncols_struct,
                offset: lo,
            });
            if hi.is_finite() {
                extra_rows.push((ncols_struct, hi - lo));
            }
            ncols_struct += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirrored {
                col: ncols_struct,
                offset: hi,
            });
            ncols_struct += 1;
        } else {
            maps.push(VarMap::Free {
                pos: ncols_struct,
                neg: ncols_struct + 1,
            });
            ncols_struct += 2;
        }
    }

    // Standardized rows over structural columns.
    let m_user = problem.constraints.len();
    let m = m_user + extra_rows.len();
    let mut rows: Vec<(Vec<f64>, ConstraintKind, f64)> = Vec::with_capacity(m);
    for c in &problem.constraints {
        let mut coeffs = vec![0.0; ncols_struct];
        let mut rhs = c.rhs;
        for (j, &a) in c.coeffs.iter().enumerate() {
            match maps[j] {
                VarMap::Shifted { col, offset } => {
                    coeffs[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Mirrored { col, offset } => {
                    coeffs[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Free { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, c.kind, rhs));
    }
    for &(col, width) in &extra_rows {
        let mut coeffs = vec![0.0; ncols_struct];
        coeffs[col] = 1.0;
        rows.push((coeffs, ConstraintKind::Le, width));
    }

    // Make every rhs nonnegative.
    let mut flip = vec![1.0; m];
    for (i, row) in rows.iter_mut().enumerate() {
        if row.2 < 0.0 {
            flip[i] = -1.0;
            row.0.iter_mut().for_each(|v| *v = -*v);
            row.2 = -row.2;
            row.1 = match row.1 {
                ConstraintKind::Le => ConstraintKind::Ge,
                ConstraintKind::Ge => ConstraintKind::Le,
                ConstraintKind::Eq => ConstraintKind::Eq,
            };
        }
    }

    // Columns: structural | slack/surplus | artificial | rhs.
    let slack_cols: Vec<Option<usize>> = {
        let mut next = ncols_struct;
        rows.iter()
            .map(|r| match r.1 {
                ConstraintKind::Eq => None,
                _ => {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect()
    };
    let art_start = ncols_struct + slack_cols.iter().flatten().count();
    let ncols = art_start + m;
    let width = ncols + 1;
    let mut data = vec![0.0; m * width];
    for (i, (coeffs, kind, rhs)) in rows.iter().enumerate() {
        let row = &mut data[i * width..(i + 1) * width];
        row[..ncols_struct].copy_from_slice(coeffs);
        if let Some(sc) = slack_cols[i] {
            row[sc] = if *kind == ConstraintKind::Le { 1.0 } else { -1.0 };
        }
        row[art_start + i] = 1.0;
        row[ncols] = *rhs;
    }
    let mut tab = Tableau {
        rows: m,
        width,
        data,
        basis: (art_start..art_start + m).collect(),
    };
    let mut pivots = 0;

    // Phase 1.
    if m > 0 {
        let mut cost1 = vec![0.0; ncols];
        cost1[art_start..].iter_mut().for_each(|c| *c = 1.0);
        let allowed1 = vec![true; ncols];
        tab.run(&cost1, &allowed1, &mut pivots)?;
        let scale = 1.0 + rows.iter().map(|r| r.2).fold(0.0, f64::max);
        if tab.objective(&cost1) > FEAS_EPS * scale {
            return Err(Error::Infeasible);
        }
        // Drive remaining artificials out of the basis where possible.
        for r in 0..m {
            if tab.basis[r] < art_start {
                continue;
            }
            if let Some(pc) = (0..art_start).find(|&j| tab.at(r, j).abs() > 1e-9 && !tab.basis.contains(&j)) {
                tab.pivot(r, pc);
            }
        }
    }

    // Phase 2 in minimization form.
    let sign = match problem.sense {
        Sense::Maximize => -1.0,
        Sense::Minimize => 1.0,
    };
    let mut cost2 = vec![0.0; ncols];
    for (j, map) in maps.iter().enumerate() {
        let c = sign * problem.objective[j];
        match *map {
            VarMap::Shifted { col, .. } => cost2[col] += c,
            VarMap::Mirrored { col, .. } => cost2[col] -= c,
            VarMap::Free { pos, neg } => {
                cost2[pos] += c;
                cost2[neg] -= c;
            }
        }
    }
    let mut allowed2 = vec![true; ncols];
    allowed2[art_start..].iter_mut().for_each(|a| *a = false);
    tab.run(&cost2, &allowed2, &mut pivots)?;

    let mut y = vec![0.0; ncols];
    for r in 0..m {
        y[tab.basis[r]] = tab.rhs(r).max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shifted { col, offset } => offset + y[col],
            VarMap::Mirrored { col, offset } => offset - y[col],
            VarMap::Free { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    let duals = (0..m_user)
        .map(|i| {
            let y_i: f64 = (0..m).map(|r| cost2[tab.basis[r]] * tab.at(r, art_start + i)).sum();
            sign * flip[i] * y_i
        })
        .collect();
    Ok(LpSolution { x, objective, duals })
}
