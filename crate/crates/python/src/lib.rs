//! Python module `blochx`.
//!
//! Matrices cross the boundary as nested lists of Python `complex`, Bloch
//! vectors as lists of floats. Reports come back as plain dicts.

use blochx_core::bloch::{self, BlochVector, DensityState, PureState};
use blochx_core::composite::{coupled_basis, product_basis, CompositeSpinSystem};
use blochx_core::measurement::{self, MeasurementSimplex, RunOptions};
use blochx_core::space::{self, CompositeBasisKind, Proposition, SpaceVectorBuilder, VerifyTarget};
use blochx_core::spin::{self as bspin, Direction3, Spin, SpinObservable as CoreObservable, SpinSystem};
use blochx_core::{BlochError, ComplexMatrix, GeneratorSet as CoreGenerators};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};
use serde::Serialize;
use serde_json::Value;

type Rows = Vec<Vec<Complex64>>;

fn err(e: BlochError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spin(s: f64) -> PyResult<Spin> {
    Spin::new(s).map_err(err)
}

fn direction(d: [f64; 3]) -> PyResult<Direction3> {
    Direction3::normalize(d).map(|(n, _)| n).map_err(err)
}

fn basis_kind(basis: &str) -> PyResult<CompositeBasisKind> {
    match basis {
        "coupled" => Ok(CompositeBasisKind::Coupled),
        "product" => Ok(CompositeBasisKind::Product),
        other => Err(PyValueError::new_err(format!("basis must be 'coupled' or 'product', got {other:?}"))),
    }
}

fn matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(rows).map_err(err)
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_pyobject(py)?.into_any(),
            (None, Some(i)) => i.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, report: &T) -> PyResult<Bound<'py, PyAny>> {
    let value = serde_json::to_value(report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

/// SU(N) generators in the fixed `U, V, W` order.
#[pyclass(name = "GeneratorSet", module = "blochx", frozen)]
struct PyGeneratorSet {
    inner: CoreGenerators,
}

#[pymethods]
impl PyGeneratorSet {
    #[new]
    fn new(n: usize) -> PyResult<Self> {
        Ok(Self { inner: CoreGenerators::new(n).map_err(err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn c_n(&self) -> f64 {
        self.inner.c_n()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn label(&self, i: usize) -> PyResult<String> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!("generator index {i} out of range")));
        }
        Ok(self.inner.label(i))
    }

    fn matrices(&self) -> Vec<Rows> {
        self.inner.generators().iter().map(ComplexMatrix::to_rows).collect()
    }

    fn __repr__(&self) -> String {
        format!("GeneratorSet(n={})", self.inner.dim())
    }
}

/// Validated density matrix.
#[pyclass(name = "DensityState", module = "blochx", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDensityState {
    inner: DensityState,
}

#[pymethods]
impl PyDensityState {
    #[new]
    fn new(rows: Rows) -> PyResult<Self> {
        Ok(Self { inner: DensityState::new(matrix(rows)?).map_err(err)? })
    }

    #[staticmethod]
    fn from_ket(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self { inner: PureState::new(amplitudes).map_err(err)?.projector() })
    }

    #[staticmethod]
    fn maximally_mixed(n: usize) -> Self {
        Self { inner: DensityState::maximally_mixed(n) }
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn matrix(&self) -> Rows {
        self.inner.matrix().to_rows()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn bloch_vector(&self) -> PyResult<PyBlochVector> {
        let g = CoreGenerators::new(self.inner.dim()).map_err(err)?;
        Ok(PyBlochVector { inner: bloch::state_to_bloch(&self.inner, &g).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("DensityState(n={}, purity={:.6})", self.inner.dim(), self.inner.purity())
    }
}

/// Real coordinates of an operator in the unit ball.
#[pyclass(name = "BlochVector", module = "blochx", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBlochVector {
    inner: BlochVector,
}

impl PyBlochVector {
    fn generators(&self) -> PyResult<CoreGenerators> {
        CoreGenerators::new(self.inner.dim_n()).map_err(err)
    }
}

#[pymethods]
impl PyBlochVector {
    #[new]
    fn new(n: usize, coords: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: BlochVector::new(n, coords).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.dim_n()
    }

    #[getter]
    fn coords(&self) -> Vec<f64> {
        self.inner.coords().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn dot(&self, other: &PyBlochVector) -> PyResult<f64> {
        if other.inner.dim_n() != self.inner.dim_n() {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(self.inner.dot(&other.inner))
    }

    /// `Tr D(r)^2` from the closed form.
    fn purity(&self) -> f64 {
        bloch::purity(&self.inner)
    }

    /// `(is_state, min_eigenvalue)` of `D(r)`.
    fn is_state(&self) -> PyResult<(bool, f64)> {
        let check = bloch::is_state(&self.inner, &self.generators()?).map_err(err)?;
        Ok((check.is_state, check.min_eigenvalue))
    }

    fn to_matrix(&self) -> PyResult<Rows> {
        Ok(bloch::bloch_to_operator(&self.inner, &self.generators()?).map_err(err)?.to_rows())
    }

    fn to_state(&self) -> PyResult<PyDensityState> {
        Ok(PyDensityState { inner: bloch::bloch_to_state(&self.inner, &self.generators()?).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!("BlochVector(n={}, norm={:.6})", self.inner.dim_n(), self.inner.norm())
    }
}

/// `S_n` for a single spin or a two-spin composite, with its measurement simplex.
#[pyclass(name = "SpinObservable", module = "blochx", frozen)]
struct PySpinObservable {
    eigenvalues: Vec<f64>,
    matrix: ComplexMatrix,
    simplex: MeasurementSimplex,
    generators: CoreGenerators,
}

impl PySpinObservable {
    fn from_single(obs: CoreObservable) -> PyResult<Self> {
        let generators = CoreGenerators::new(obs.spin.dim()).map_err(err)?;
        let simplex = measurement::simplex_from_observable(&obs, &generators).map_err(err)?;
        Ok(Self {
            eigenvalues: obs.eigenvalues,
            matrix: obs.matrix,
            simplex,
            generators,
        })
    }

    fn check_state(&self, state: &PyDensityState) -> PyResult<()> {
        if state.inner.dim() != self.generators.dim() {
            return Err(PyValueError::new_err(format!(
                "state dimension {} does not match observable dimension {}",
                state.inner.dim(),
                self.generators.dim()
            )));
        }
        Ok(())
    }
}

#[pymethods]
impl PySpinObservable {
    #[new]
    #[pyo3(signature = (s, direction = [0.0, 0.0, 1.0]))]
    fn new(s: f64, direction: [f64; 3]) -> PyResult<Self> {
        let obs = bspin::spin_along(&SpinSystem::new(spin(s)?), &self::direction(direction)?).map_err(err)?;
        Self::from_single(obs)
    }

    /// Total `S_n` of two spins; `basis` picks the eigenbasis used for the simplex.
    #[staticmethod]
    #[pyo3(signature = (s1, s2, direction = [0.0, 0.0, 1.0], basis = "coupled"))]
    fn composite(s1: f64, s2: f64, direction: [f64; 3], basis: &str) -> PyResult<Self> {
        let c = CompositeSpinSystem::new(spin(s1)?, spin(s2)?);
        let n = self::direction(direction)?;
        let generators = CoreGenerators::new(c.dim()).map_err(err)?;
        let simplex = match basis_kind(basis)? {
            CompositeBasisKind::Coupled => coupled_basis(&c, &n).and_then(|b| b.simplex(&generators)),
            CompositeBasisKind::Product => product_basis(&c, &n).and_then(|b| b.simplex(&generators)),
        }
        .map_err(err)?;
        Ok(Self {
            eigenvalues: simplex.eigenvalues().to_vec(),
            matrix: c.along(&n),
            simplex,
            generators,
        })
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.clone()
    }

    #[getter]
    fn degeneracy_groups(&self) -> Vec<Vec<usize>> {
        self.simplex.degeneracy_groups().to_vec()
    }

    fn matrix(&self) -> Rows {
        self.matrix.to_rows()
    }

    fn eigenstates(&self) -> Vec<Vec<Complex64>> {
        self.simplex.eigenstates().iter().map(|e| e.amplitudes().to_vec()).collect()
    }

    fn vertices(&self) -> Vec<PyBlochVector> {
        self.simplex.vertices().iter().map(|v| PyBlochVector { inner: v.clone() }).collect()
    }

    /// Per-vertex Born probabilities as barycentric weights.
    fn born_probabilities(&self, state: &PyDensityState) -> PyResult<Vec<f64>> {
        self.check_state(state)?;
        Ok(measurement::born_probabilities(&state.inner, &self.simplex, &self.generators).map_err(err)?.vertex)
    }

    /// Per-vertex `Tr(psi P_i)`.
    fn trace_probabilities(&self, state: &PyDensityState) -> PyResult<Vec<f64>> {
        self.check_state(state)?;
        Ok(measurement::trace_probabilities(&state.inner, &self.simplex).map_err(err)?.vertex)
    }

    /// Hidden-measurement run; returns the report as a dict.
    #[pyo3(signature = (state = None, samples = 100_000, seed = 0, trajectory_steps = None))]
    fn measure<'py>(
        &self,
        py: Python<'py>,
        state: Option<PyRef<'py, PyDensityState>>,
        samples: u64,
        seed: u64,
        trajectory_steps: Option<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let psi = match &state {
            Some(s) => {
                self.check_state(s)?;
                s.inner.clone()
            }
            None => DensityState::maximally_mixed(self.generators.dim()),
        };
        let options = RunOptions { trajectory_steps, ..RunOptions::default() };
        let report = py
            .detach(|| measurement::run_measurement(&psi, &self.simplex, &self.generators, samples, seed, options))
            .map_err(err)?;
        to_dict(py, &report)
    }

    /// Lüders state after outcome group `group` (index into `degeneracy_groups`).
    fn post_state(&self, state: &PyDensityState, group: usize) -> PyResult<PyDensityState> {
        self.check_state(state)?;
        let members = self
            .simplex
            .degeneracy_groups()
            .get(group)
            .ok_or_else(|| PyValueError::new_err(format!("group {group} out of range")))?;
        Ok(PyDensityState {
            inner: measurement::lueders_post_state(&state.inner, members, &self.simplex).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("SpinObservable(n={}, eigenvalues={:?})", self.generators.dim(), self.eigenvalues)
    }
}

/// Unit Bloch-space vector representing `direction` for spin `s`.
#[pyfunction]
#[pyo3(signature = (s, direction))]
fn space_vector(s: f64, direction: [f64; 3]) -> PyResult<PyBlochVector> {
    let b = SpaceVectorBuilder::single(spin(s)?).map_err(err)?;
    Ok(PyBlochVector { inner: b.build(&self::direction(direction)?).map_err(err)?.vector })
}

#[pyfunction]
#[pyo3(signature = (s1, s2, direction, basis = "coupled"))]
fn composite_space_vector(s1: f64, s2: f64, direction: [f64; 3], basis: &str) -> PyResult<PyBlochVector> {
    let b = SpaceVectorBuilder::composite(spin(s1)?, spin(s2)?, basis_kind(basis)?).map_err(err)?;
    Ok(PyBlochVector { inner: b.build(&self::direction(direction)?).map_err(err)?.vector })
}

/// Runs the direction-correspondence checks; `prop` is "1", "2" or "2bis".
#[pyfunction]
#[pyo3(signature = (prop, s = None, s1 = None, s2 = None, trials = 100, seed = 0))]
fn verify<'py>(
    py: Python<'py>,
    prop: &str,
    s: Option<f64>,
    s1: Option<f64>,
    s2: Option<f64>,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let prop: Proposition = prop.parse().map_err(err)?;
    let target = match (s, s1, s2) {
        (Some(s), _, _) if prop == Proposition::Single => VerifyTarget::Single(spin(s)?),
        (_, Some(a), Some(b)) => VerifyTarget::Composite(spin(a)?, spin(b)?),
        _ => return Err(PyValueError::new_err("give s for prop 1, s1 and s2 otherwise")),
    };
    let report = py.detach(|| space::verify_proposition(prop, target, trials, seed)).map_err(err)?;
    to_dict(py, &report)
}

#[pyfunction]
fn cone_projection_range(s: f64, mu: f64) -> PyResult<(f64, f64)> {
    bspin::cone_projection_range(spin(s)?, mu).map_err(err)
}

#[pyfunction]
fn classical_resultant_range(s1: f64, mu1: f64, s2: f64, mu2: f64) -> PyResult<(f64, f64)> {
    bspin::classical_resultant_range(spin(s1)?, mu1, spin(s2)?, mu2).map_err(err)
}

#[pymodule]
fn blochx(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGeneratorSet>()?;
    m.add_class::<PyDensityState>()?;
    m.add_class::<PyBlochVector>()?;
    m.add_class::<PySpinObservable>()?;
    m.add_function(wrap_pyfunction!(space_vector, m)?)?;
    m.add_function(wrap_pyfunction!(composite_space_vector, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(cone_projection_range, m)?)?;
    m.add_function(wrap_pyfunction!(classical_resultant_range, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
