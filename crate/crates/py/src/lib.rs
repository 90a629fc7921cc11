//! Python bindings. Problems and solutions are classes; reports come back as
//! plain dicts parsed from the crate's JSON output.

use otstruct::analysis::analyze_with;
use otstruct::generators;
use otstruct::homotopy::{track as track_path, PathSpec, DEFAULT_SAMPLES};
use otstruct::metrics::wp as wp_distance;
use otstruct::solver::{solve as solve_float, solve_exact, ExactProblem, Solution};
use otstruct::{CostSpec, DiscreteMeasure, OtError, Tolerances, TransportProblem};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

create_exception!(otstruct, OtstructError, PyValueError);

fn err(e: OtError) -> PyErr {
    OtstructError::new_err(e.to_string())
}

fn tolerances(tie: f64) -> PyResult<Tolerances> {
    let tol = Tolerances {
        tie,
        ..Tolerances::default()
    };
    tol.validate().map_err(err)?;
    Ok(tol)
}

fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

#[pyclass(name = "TransportProblem", frozen)]
struct PyProblem {
    inner: TransportProblem,
}

#[pymethods]
impl PyProblem {
    /// `cost` is "p_norm" (with `p`), "correlation" or "matrix" (with `matrix`).
    #[new]
    #[pyo3(signature = (source_points, source_weights, target_points, target_weights, cost = "p_norm", p = 2.0, matrix = None))]
    fn new(
        source_points: Vec<Vec<f64>>,
        source_weights: Vec<f64>,
        target_points: Vec<Vec<f64>>,
        target_weights: Vec<f64>,
        cost: &str,
        p: f64,
        matrix: Option<Vec<Vec<f64>>>,
    ) -> PyResult<Self> {
        let cost = match (cost, matrix) {
            ("p_norm", None) => CostSpec::PNorm { p },
            ("correlation", None) => CostSpec::Correlation,
            ("matrix", Some(values)) => CostSpec::Matrix { values },
            (other, _) => {
                return Err(OtstructError::new_err(format!(
                    "cost {other:?}: use p_norm, correlation, or matrix together with `matrix=`"
                )))
            }
        };
        let source = DiscreteMeasure::new(source_points, source_weights).map_err(err)?;
        let target = DiscreteMeasure::new(target_points, target_weights).map_err(err)?;
        Ok(Self {
            inner: TransportProblem::new(source, target, cost).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: TransportProblem::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("problem serialises")
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("TransportProblem(m={}, n={}, cost={:?})", self.inner.m(), self.inner.n(), self.inner.cost)
    }
}

#[pyclass(name = "Solution", frozen)]
struct PySolution {
    #[pyo3(get)]
    value: f64,
    /// `(i, j, mass)` triples.
    #[pyo3(get)]
    plan: Vec<(usize, usize, f64)>,
    #[pyo3(get)]
    phi: Vec<f64>,
    #[pyo3(get)]
    psi: Vec<f64>,
    #[pyo3(get)]
    iterations: usize,
}

impl From<Solution> for PySolution {
    fn from(s: Solution) -> Self {
        Self {
            value: s.value,
            plan: s.plan.entries,
            phi: s.dual.phi,
            psi: s.dual.psi,
            iterations: s.iterations,
        }
    }
}

#[pymethods]
impl PySolution {
    fn __repr__(&self) -> String {
        format!("Solution(value={}, support={})", self.value, self.plan.len())
    }
}

fn solve_with(problem: &TransportProblem, tol: &Tolerances, exact: bool) -> Result<Solution, OtError> {
    if exact {
        let e = ExactProblem::from_problem(problem)?;
        problem.validate(tol)?;
        Ok(solve_exact(&e)?.to_float())
    } else {
        solve_float(problem, tol)
    }
}

/// Optimal plan and dual; `exact=True` uses rational arithmetic.
#[pyfunction]
#[pyo3(signature = (problem, tol_tie = 1e-9, exact = false))]
fn solve(problem: &PyProblem, tol_tie: f64, exact: bool) -> PyResult<PySolution> {
    let tol = tolerances(tol_tie)?;
    Ok(solve_with(&problem.inner, &tol, exact).map_err(err)?.into())
}

/// Uniqueness report as a dict: `g_gamma`, `primal_unique`, `dual_unique`,
/// witnesses, `halfspaces`, `intervals`.
#[pyfunction]
#[pyo3(signature = (problem, tol_tie = 1e-9, exact = false))]
fn analyze<'py>(py: Python<'py>, problem: &PyProblem, tol_tie: f64, exact: bool) -> PyResult<Bound<'py, PyAny>> {
    let tol = tolerances(tol_tie)?;
    let base = solve_with(&problem.inner, &tol, exact).map_err(err)?;
    let a = analyze_with(&problem.inner, base, &tol).map_err(err)?;
    to_py(py, &serde_json::to_value(&a).expect("analysis serialises"))
}

/// `W_p` between two weighted point clouds.
#[pyfunction]
#[pyo3(signature = (points0, weights0, points1, weights1, p = 2.0))]
fn wp(points0: Vec<Vec<f64>>, weights0: Vec<f64>, points1: Vec<Vec<f64>>, weights1: Vec<f64>, p: f64) -> PyResult<f64> {
    let a = DiscreteMeasure::new(points0, weights0).map_err(err)?;
    let b = DiscreteMeasure::new(points1, weights1).map_err(err)?;
    wp_distance(&a, &b, p, &Tolerances::default()).map_err(err)
}

/// Track report for a path given as JSON (problem schema plus "x1", "y1",
/// "samples").
#[pyfunction]
#[pyo3(signature = (path_json, samples = None, tol_tie = 1e-9))]
fn track<'py>(py: Python<'py>, path_json: &str, samples: Option<usize>, tol_tie: f64) -> PyResult<Bound<'py, PyAny>> {
    let mut path = PathSpec::from_json(path_json).map_err(err)?;
    if let Some(s) = samples {
        path.samples = s;
    }
    let r = track_path(&path, &tolerances(tol_tie)?).map_err(err)?;
    to_py(py, &serde_json::to_value(&r).expect("report serialises"))
}

/// Worked examples as JSON text: "jump", "jump-path", "disc", "figure-cells",
/// "two-cluster", "glue".
#[pyfunction]
#[pyo3(signature = (name, eps = 0.1, to = -0.1, grid = 40, theta = 0.2, seed = 0, samples = DEFAULT_SAMPLES))]
fn example(name: &str, eps: f64, to: f64, grid: usize, theta: f64, seed: u64, samples: usize) -> PyResult<String> {
    let problem = |p: TransportProblem| serde_json::to_string(&p).expect("problem serialises");
    Ok(match name {
        "jump" => problem(generators::jump(eps)),
        "jump-path" => generators::jump_path(eps, to, samples).to_json_value().to_string(),
        "disc" => problem(generators::disc(grid, theta)),
        "figure-cells" => problem(generators::figure_cells()),
        "two-cluster" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            problem(generators::random_two_cluster(&mut rng, 4, CostSpec::PNorm { p: 2.0 }))
        }
        "glue" => generators::glue_path(samples).to_json_value().to_string(),
        other => return Err(OtstructError::new_err(format!("unknown example {other:?}"))),
    })
}

#[pymodule]
#[pyo3(name = "otstruct")]
fn otstruct_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("OtstructError", m.py().get_type::<OtstructError>())?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(wp, m)?)?;
    m.add_function(wrap_pyfunction!(track, m)?)?;
    m.add_function(wrap_pyfunction!(example, m)?)?;
    Ok(())
}
