//! Python bindings. Structured values cross the boundary as JSON text or
//! plain Python lists.

use moma_core::geometry::TargetSpec;
use moma_core::{self as core, CostFunction, DualKind, OpponentSpec, PlannerKind, RunConfig};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: core::Error) -> PyErr {
    match err {
        core::Error::Io(_)
        | core::Error::Infeasible
        | core::Error::Unbounded
        | core::Error::NoConvergence { .. }
        | core::Error::TooLarge(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("bad {what} JSON: {e}")))
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Tabular vector-valued Markov game.
#[pyclass(name = "VectorGame", module = "moma", frozen)]
struct PyVectorGame {
    inner: core::VectorGame,
}

#[pymethods]
impl PyVectorGame {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: core::VectorGame::from_json(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    #[getter(H)]
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    #[getter(S)]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter(A)]
    fn num_agent_actions(&self) -> usize {
        self.inner.num_agent_actions()
    }

    #[getter(B)]
    fn num_opponent_actions(&self) -> usize {
        self.inner.num_opponent_actions()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.dim()
    }

    fn is_mdp(&self) -> bool {
        self.inner.is_mdp()
    }

    fn __repr__(&self) -> String {
        format!(
            "VectorGame(H={}, S={}, A={}, B={}, d={})",
            self.inner.horizon(),
            self.inner.num_states(),
            self.inner.num_agent_actions(),
            self.inner.num_opponent_actions(),
            self.inner.dim()
        )
    }
}

/// Closed convex target set.
#[pyclass(name = "TargetSet", module = "moma", frozen)]
struct PyTargetSet {
    inner: core::TargetSet,
}

#[pymethods]
impl PyTargetSet {
    /// Parses a target spec for a game with `dim` coordinates and horizon `horizon`.
    #[staticmethod]
    fn from_json(text: &str, dim: usize, horizon: usize) -> PyResult<Self> {
        let spec: TargetSpec = parse(text, "target")?;
        Ok(Self {
            inner: spec.resolve(dim, horizon).map_err(to_py)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[pyo3(signature = (x, tol = 1e-9))]
    fn contains(&self, x: Vec<f64>, tol: f64) -> PyResult<bool> {
        self.check(&x)?;
        Ok(self.inner.contains(&x, tol))
    }

    fn project(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&x)?;
        self.inner.project(&x).map_err(to_py)
    }

    fn distance(&self, x: Vec<f64>) -> PyResult<f64> {
        self.check(&x)?;
        self.inner.distance(&x).map_err(to_py)
    }

    fn support_value(&self, theta: Vec<f64>) -> PyResult<f64> {
        self.check(&theta)?;
        self.inner.support_value(&theta).map_err(to_py)
    }
}

impl PyTargetSet {
    fn check(&self, x: &[f64]) -> PyResult<()> {
        if x.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "expected {} coordinates, got {}",
                self.inner.dim(),
                x.len()
            )));
        }
        Ok(())
    }
}

#[pyfunction]
fn generate_random_game(
    num_states: usize,
    num_agent_actions: usize,
    num_opponent_actions: usize,
    horizon: usize,
    d: usize,
    seed: u64,
) -> PyResult<PyVectorGame> {
    if [num_states, num_agent_actions, num_opponent_actions, horizon, d].contains(&0) {
        return Err(PyValueError::new_err("dimensions must be positive"));
    }
    Ok(PyVectorGame {
        inner: core::harness::generate_random_game(
            num_states,
            num_agent_actions,
            num_opponent_actions,
            horizon,
            d,
            seed,
        ),
    })
}

/// Returns `(value, row_strategy, col_strategy)`; the row player minimizes.
#[pyfunction]
fn solve_zero_sum(payoff: Vec<Vec<f64>>) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let game = core::MatrixGame::from_rows(&payoff).map_err(to_py)?;
    let eq = core::solve_zero_sum(&game).map_err(to_py)?;
    Ok((eq.value, eq.row_strategy, eq.col_strategy))
}

#[pyfunction]
fn exact_minimax_value(game: &PyVectorGame, theta: Vec<f64>) -> PyResult<f64> {
    Ok(core::oracle::exact_minimax_value(&game.inner, &theta)
        .map_err(to_py)?
        .value)
}

/// Runs the learner and returns the result as a dict.
///
/// `cost` and `opponent` take the same JSON objects as the config file.
#[pyfunction]
#[pyo3(signature = (
    game, target, episodes, planner = "hoeffding", algo = "pdu", c = 1.0, p = 0.05, seed = 0,
    gamma_min = None, rho = None, cost = None, opponent = None, reference_value = None,
    record_timing = true
))]
#[allow(clippy::too_many_arguments)]
fn run_moma<'py>(
    py: Python<'py>,
    game: &PyVectorGame,
    target: &PyTargetSet,
    episodes: usize,
    planner: &str,
    algo: &str,
    c: f64,
    p: f64,
    seed: u64,
    gamma_min: Option<f64>,
    rho: Option<f64>,
    cost: Option<&str>,
    opponent: Option<&str>,
    reference_value: Option<Vec<f64>>,
    record_timing: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let planner: PlannerKind = planner.parse().map_err(to_py)?;
    let dual: DualKind = algo.parse().map_err(to_py)?;
    let cfg = RunConfig {
        c,
        p,
        gamma_min,
        rho,
        cost: cost.map(|t| parse::<CostFunction>(t, "cost")).transpose()?,
        opponent: opponent
            .map(|t| parse::<OpponentSpec>(t, "opponent"))
            .transpose()?
            .unwrap_or_default(),
        reference_value,
        record_timing,
        ..RunConfig::new(episodes, planner, dual, seed)
    };
    let (g, t) = (game.inner.clone(), target.inner.clone());
    let result = py.detach(move || core::run_moma(&g, &t, &cfg)).map_err(to_py)?;
    let out = to_dict(py, &result)?;
    if let Some(slope) = result.slope_fit() {
        out.cast::<PyDict>()?.set_item("slope_fit", slope)?;
    }
    Ok(out)
}

#[pymodule]
fn moma(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVectorGame>()?;
    m.add_class::<PyTargetSet>()?;
    m.add_function(wrap_pyfunction!(generate_random_game, m)?)?;
    m.add_function(wrap_pyfunction!(solve_zero_sum, m)?)?;
    m.add_function(wrap_pyfunction!(exact_minimax_value, m)?)?;
    m.add_function(wrap_pyfunction!(run_moma, m)?)?;
    Ok(())
}
