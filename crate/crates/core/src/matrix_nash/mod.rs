//! Exact equilibria of two-player zero-sum matrix games.
//!
//! Entries are costs to the row player (the min-player). The game is shifted
//! so every entry is at least one, which turns the row player's problem into
//! `max sum(u)  s.t.  M^T u <= 1, u >= 0`; the column player's strategy is the
//! vector of shadow prices of the same program.

pub mod lp;

pub use lp::{solve_lp, Constraint, ConstraintKind, LpProblem, LpSolution, Sense};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `rows x cols` cost matrix for the row player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl MatrixGame {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("matrix game needs at least one row and one column".into()));
        }
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("matrix game entries must be finite".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged matrix".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    /// `(M nu)_a` for every row.
    pub fn row_payoffs(&self, col_strategy: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|a| (0..self.cols).map(|b| self.get(a, b) * col_strategy[b]).sum())
            .collect()
    }

    /// `(mu^T M)_b` for every column.
    pub fn col_payoffs(&self, row_strategy: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|b| (0..self.rows).map(|a| row_strategy[a] * self.get(a, b)).sum())
            .collect()
    }

    pub fn expected(&self, row_strategy: &[f64], col_strategy: &[f64]) -> f64 {
        crate::game_model::dot(&self.row_payoffs(col_strategy), row_strategy)
    }

    pub fn negated_transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for b in 0..self.cols {
            for a in 0..self.rows {
                entries.push(-self.get(a, b));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NashSolution {
    /// Min-player mixed strategy.
    pub row_strategy: Vec<f64>,
    /// Max-player mixed strategy.
    pub col_strategy: Vec<f64>,
    pub value: f64,
}

/// Computes a Nash equilibrium `(mu, nu, v)` with `v = min_mu max_nu mu^T M nu`.
pub fn solve_zero_sum(game: &MatrixGame) -> Result<NashSolution> {
    let (rows, cols) = (game.rows, game.cols);
    if cols == 1 {
        let a = argmin_first((0..rows).map(|a| game.get(a, 0)));
        return Ok(NashSolution {
            row_strategy: one_hot(rows, a),
            col_strategy: vec![1.0],
            value: game.get(a, 0),
        });
    }
    if rows == 1 {
        let b = argmin_first((0..cols).map(|b| -game.get(0, b)));
        return Ok(NashSolution {
            row_strategy: vec![1.0],
            col_strategy: one_hot(cols, b),
            value: game.get(0, b),
        });
    }

    let min_entry = game.entries.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min_entry;
    let mut lp = LpProblem::maximize(vec![1.0; rows]);
    for b in 0..cols {
        let coeffs = (0..rows).map(|a| game.get(a, b) + shift).collect();
        lp = lp.le(coeffs, 1.0);
    }
    let sol = solve_lp(&lp)?;
    let row_strategy = normalize(&sol.x);
    let col_strategy = normalize(&sol.duals);
    // Report the value of the returned profile; it equals 1/sum(u) - shift up
    // to rounding, but this form keeps the saddle certificate self-consistent.
    let value = game.expected(&row_strategy, &col_strategy);
    Ok(NashSolution {
        row_strategy,
        col_strategy,
        value,
    })
}

fn argmin_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn normalize(weights: &[f64]) -> Vec<f64> {
    let clipped: Vec<f64> = weights.iter().map(|w| w.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return vec![1.0 / weights.len() as f64; weights.len()];
    }
    clipped.into_iter().map(|w| w / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn certificate_holds(m: &MatrixGame, sol: &NashSolution, tol: f64) -> bool {
        let rows = m.row_payoffs(&sol.col_strategy);
        let cols = m.col_payoffs(&sol.row_strategy);
        rows.iter().all(|&r| r >= sol.value - tol) && cols.iter().all(|&c| c <= sol.value + tol)
    }

    #[test]
    fn trivial_game() {
        let m = MatrixGame::from_rows(&[vec![0.0]]).unwrap();
        let sol = solve_zero_sum(&m).unwrap();
        assert_eq!(sol.row_strategy, vec![1.0]);
        assert_eq!(sol.col_strategy, vec![1.0]);
        assert_eq!(sol.value, 0.0);
    }

    #[test]
    fn matching_pennies() {
        let m = MatrixGame::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let sol = solve_zero_sum(&m).unwrap();
        assert!(sol.value.abs() < 1e-12);
        for p in sol.row_strategy.iter().chain(&sol.col_strategy) {
            assert!((p - 0.5).abs() < 1e-12);
        }
        assert!(certificate_holds(&m, &sol, 1e-8));
    }

    #[test]
    fn pure_saddle() {
        let m = MatrixGame::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let sol = solve_zero_sum(&m).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);
        assert!((sol.row_strategy[0] - 1.0).abs() < 1e-12);
        assert!((sol.col_strategy[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rock_paper_scissors() {
        let m = MatrixGame::from_rows(&[vec![0.0, 1.0, -1.0], vec![-1.0, 0.0, 1.0], vec![1.0, -1.0, 0.0]]).unwrap();
        let sol = solve_zero_sum(&m).unwrap();
        assert!(sol.value.abs() < 1e-12);
        assert!(certificate_holds(&m, &sol, 1e-10));
    }

    #[test]
    fn single_column_and_row_fast_paths() {
        let col = MatrixGame::new(3, 1, vec![0.5, -0.2, -0.2]).unwrap();
        let sol = solve_zero_sum(&col).unwrap();
        assert_eq!(sol.row_strategy, vec![0.0, 1.0, 0.0]);
        assert_eq!(sol.value, -0.2);
        let row = MatrixGame::new(1, 3, vec![0.5, 0.7, 0.7]).unwrap();
        let sol = solve_zero_sum(&row).unwrap();
        assert_eq!(sol.col_strategy, vec![0.0, 1.0, 0.0]);
        assert_eq!(sol.value, 0.7);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(MatrixGame::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(MatrixGame::new(2, 2, vec![0.0; 3]).is_err());
    }
}
