//! Python bindings for `nashtopo`.
//!
//! Structured results (reports, homology, certificates) cross the boundary
//! as JSON and come back as plain dicts and lists.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

use nashtopo::cli::{self, CliError, GameFile};
use nashtopo::equilibrium::{find_equilibria, EquilibriumError};
use nashtopo::fta::{boundary_winding, locate_roots, FtaError, Polynomial, DEFAULT_SAMPLES};
use nashtopo::game::{best_response_set, default_eps, GameError};
use nashtopo::homology::{homology, is_acyclic, smith_normal_form, HomologyError, IntegerMatrix};
use nashtopo::obstruction::{
    analyze_game, antipodal_witness, lefschetz_number, winding_number, CircleMapSample, DegreeMatrix, ObstructionError,
};
use nashtopo::spaces::{distance, make_circle, make_interval, product, triangulate, DiscreteSpace, SpaceError};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

trait IntoPyErr {
    fn into_py_err(self) -> PyErr;
}

macro_rules! input_errors {
    ($($t:ty),*) => {$(
        impl IntoPyErr for $t {
            fn into_py_err(self) -> PyErr {
                value_err(self)
            }
        }
    )*};
}

input_errors!(SpaceError, GameError);

impl IntoPyErr for CliError {
    fn into_py_err(self) -> PyErr {
        classify(self.exit_code() == cli::EXIT_INPUT, self)
    }
}

fn classify(input: bool, e: impl std::fmt::Display) -> PyErr {
    if input {
        value_err(e)
    } else {
        runtime_err(e)
    }
}

impl IntoPyErr for EquilibriumError {
    fn into_py_err(self) -> PyErr {
        let input = matches!(self, EquilibriumError::InvalidArgument(_) | EquilibriumError::Game(_));
        classify(input, self)
    }
}

impl IntoPyErr for ObstructionError {
    fn into_py_err(self) -> PyErr {
        let input = matches!(self, ObstructionError::InvalidArgument(_) | ObstructionError::Game(_));
        classify(input, self)
    }
}

impl IntoPyErr for HomologyError {
    fn into_py_err(self) -> PyErr {
        let input = matches!(self, HomologyError::InvalidDimension { .. } | HomologyError::InvalidComplex { .. });
        classify(input, self)
    }
}

impl IntoPyErr for FtaError {
    fn into_py_err(self) -> PyErr {
        let input = matches!(self, FtaError::InvalidPolynomial(_) | FtaError::InvalidArgument(_));
        classify(input, self)
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T, E: IntoPyErr> OrPy<T> for Result<T, E> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(IntoPyErr::into_py_err)
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(runtime_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A discretized interval, circle, or product of those.
#[pyclass(module = "pynashtopo", frozen, from_py_object)]
#[derive(Clone)]
pub struct Space {
    inner: DiscreteSpace,
}

#[pymethods]
impl Space {
    #[staticmethod]
    fn interval(n: usize) -> PyResult<Space> {
        Ok(Space {
            inner: make_interval(n).py_err()?,
        })
    }

    #[staticmethod]
    fn circle(n: usize) -> PyResult<Space> {
        Ok(Space {
            inner: make_circle(n).py_err()?,
        })
    }

    #[staticmethod]
    fn product(factors: Vec<Space>) -> PyResult<Space> {
        let parts: Vec<DiscreteSpace> = factors.into_iter().map(|s| s.inner).collect();
        Ok(Space {
            inner: product(&parts).py_err()?,
        })
    }

    /// Shorthand such as `"circle:8*interval:5"` or a JSON space spec.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Space> {
        let spec = cli::parse_space_arg(text).py_err()?;
        Ok(Space {
            inner: spec.build().py_err()?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Space({}, {} points)", serde_json::to_string(&self.inner.spec()).unwrap_or_default(), self.inner.len())
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    #[getter]
    fn resolution(&self) -> Vec<usize> {
        self.inner.resolution()
    }

    fn point(&self, index: usize) -> PyResult<Vec<f64>> {
        Ok(self.inner.coords(index).py_err()?.to_vec())
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.points().map(<[f64]>::to_vec).collect()
    }

    fn distance(&self, a: usize, b: usize) -> PyResult<f64> {
        distance(&self.inner, a, b).py_err()
    }

    fn neighbors(&self, index: usize) -> PyResult<Vec<usize>> {
        self.inner.neighbors(index).py_err()
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    /// Integral homology of the triangulated grid: `{"betti": [...], "torsion": [...]}`.
    fn homology<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let complex = triangulate(&self.inner).py_err()?;
        let h = py.detach(|| homology(&complex)).py_err()?;
        to_py(py, &h)
    }

    fn is_acyclic(&self, py: Python<'_>) -> PyResult<bool> {
        let complex = triangulate(&self.inner).py_err()?;
        Ok(is_acyclic(&py.detach(|| homology(&complex)).py_err()?))
    }
}

/// A finite game with utilities written in the expression language.
#[pyclass(module = "pynashtopo", frozen)]
pub struct Game {
    file: GameFile,
    inner: nashtopo::game::Game,
}

impl Game {
    fn from_file(file: GameFile) -> PyResult<Game> {
        let inner = file.build().py_err()?;
        Ok(Game { file, inner })
    }

    fn tolerances(&self, eps: Option<f64>, tol: Option<f64>) -> PyResult<(f64, f64)> {
        let saved = self.file.tolerances.unwrap_or_default();
        let eps = match eps.or(saved.eps) {
            Some(e) => e,
            None => default_eps(&self.inner, saved.lipschitz).py_err()?,
        };
        Ok((eps, tol.or(saved.tol).unwrap_or(eps)))
    }
}

#[pymethods]
impl Game {
    /// `spaces` are shorthand strings (`"circle:16"`) or JSON specs.
    #[new]
    fn new(players: Vec<String>, spaces: Vec<String>, utilities: Vec<String>) -> PyResult<Game> {
        let spaces = spaces.iter().map(|s| cli::parse_space_arg(s)).collect::<Result<Vec<_>, _>>().py_err()?;
        Game::from_file(GameFile {
            players,
            spaces,
            utilities,
            tolerances: None,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Game> {
        Game::from_file(cli::parse_game_document(text).py_err()?)
    }

    #[staticmethod]
    #[pyo3(signature = (name, resolution=None))]
    fn preset(name: &str, resolution: Option<usize>) -> PyResult<Game> {
        let file = cli::preset(name, resolution)
            .ok_or_else(|| PyValueError::new_err(format!("unknown preset {name:?}; known: {:?}", cli::PRESETS)))?;
        Game::from_file(file)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.file).map_err(runtime_err)
    }

    #[getter]
    fn players(&self) -> Vec<String> {
        self.inner.players().to_vec()
    }

    #[getter]
    fn spaces(&self) -> Vec<Space> {
        self.inner.spaces().iter().map(|s| Space { inner: s.clone() }).collect()
    }

    #[pyo3(signature = (lipschitz=None))]
    fn default_eps(&self, lipschitz: Option<f64>) -> PyResult<f64> {
        default_eps(&self.inner, lipschitz).py_err()
    }

    /// Own grid indices within `eps` of the best payoff against `opponents`.
    #[pyo3(signature = (player, opponents, eps=0.0))]
    fn best_response(&self, player: usize, opponents: Vec<usize>, eps: f64) -> PyResult<Vec<usize>> {
        best_response_set(&self.inner, player, &opponents, eps).py_err()
    }

    #[pyo3(signature = (eps=None, tol=None))]
    fn find_equilibria<'py>(&self, py: Python<'py>, eps: Option<f64>, tol: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
        let (eps, tol) = self.tolerances(eps, tol)?;
        let report = py.detach(|| find_equilibria(&self.inner, eps, tol)).py_err()?;
        to_py(py, &report)
    }

    /// Grid search plus existence certificate: `(equilibrium, obstruction)`.
    #[pyo3(signature = (eps=None, tol=None))]
    fn certify<'py>(&self, py: Python<'py>, eps: Option<f64>, tol: Option<f64>) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>)> {
        let (eps, tol) = self.tolerances(eps, tol)?;
        let (search, report) = py.detach(|| analyze_game(&self.inner, eps, tol)).py_err()?;
        Ok((to_py(py, &search)?, to_py(py, &report)?))
    }
}

/// Winding number of a closed loop of circle angles.
#[pyfunction]
fn winding(angles: Vec<f64>) -> PyResult<i64> {
    winding_number(&CircleMapSample::from_angles(&angles).py_err()?).py_err()
}

/// `det(I − D)` for a square integer matrix `D`.
#[pyfunction]
fn lefschetz(rows: Vec<Vec<i64>>) -> PyResult<i64> {
    if rows.iter().any(|r| r.len() != rows.len()) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    lefschetz_number(&DegreeMatrix::from_rows(&rows)).py_err()
}

/// Invariant factors of an integer matrix.
#[pyfunction]
fn invariant_factors(rows: Vec<Vec<i64>>) -> PyResult<Vec<String>> {
    if rows.windows(2).any(|w| w[0].len() != w[1].len()) {
        return Err(PyValueError::new_err("rows differ in length"));
    }
    Ok(smith_normal_form(&IntegerMatrix::from_rows(&rows))
        .factors
        .iter()
        .map(ToString::to_string)
        .collect())
}

fn polynomial(coefficients: Vec<Complex64>) -> PyResult<Polynomial> {
    Polynomial::new(coefficients).py_err()
}

/// Winding of `P/|P|` on the circle of the given radius, or `None` when
/// `P` vanishes on it. Coefficients are constant term first.
#[pyfunction]
fn boundary_winding_number(coefficients: Vec<Complex64>, radius: f64) -> PyResult<Option<i64>> {
    Ok(boundary_winding(&polynomial(coefficients)?, radius, DEFAULT_SAMPLES).py_err()?.winding())
}

/// Roots with multiplicity, each to within `tol`.
#[pyfunction]
#[pyo3(signature = (coefficients, tol=1e-8))]
fn roots(py: Python<'_>, coefficients: Vec<Complex64>, tol: f64) -> PyResult<Vec<Complex64>> {
    let p = polynomial(coefficients)?;
    py.detach(|| locate_roots(&p, p.cauchy_bound(), tol)).py_err()
}

#[pyfunction]
fn antipodal<'py>(py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &antipodal_witness(n).py_err()?)
}

/// Runs the command-line tool in-process: `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(py: Python<'_>, args: Vec<String>) -> (i32, String, String) {
    let argv: Vec<String> = std::iter::once("nashtopo".to_string()).chain(args).collect();
    let out = py.detach(|| cli::run(&argv));
    (out.exit_code, out.stdout, out.stderr)
}

#[pymodule]
fn pynashtopo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Space>()?;
    m.add_class::<Game>()?;
    m.add_function(wrap_pyfunction!(winding, m)?)?;
    m.add_function(wrap_pyfunction!(lefschetz, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_factors, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_winding_number, m)?)?;
    m.add_function(wrap_pyfunction!(roots, m)?)?;
    m.add_function(wrap_pyfunction!(antipodal, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
