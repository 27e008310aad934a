//! Python bindings for `qmengine`.
//!
//! Every fallible call raises `ValueError` with the Rust error text.

use std::fmt::Display;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qmengine::channels::{self, KrausSet};
use qmengine::engine::{self, CycleMode, CycleParams, EnergyLedger, StrokeRecord, Validity};
use qmengine::qlinalg::{SquareMatrix, C64};
use qmengine::qstate::{self, DensityMatrix, Hamiltonian, ThermalParams};
use qmengine::verify::{run_verify, Perturbation, VerifyGrid};

fn value_err<E: Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rows(m: &SquareMatrix) -> Vec<Vec<C64>> {
    let n = m.dim();
    (0..n).map(|r| (0..n).map(|c| m[(r, c)]).collect()).collect()
}

fn from_rows(rows: Vec<Vec<C64>>) -> PyResult<SquareMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    SquareMatrix::from_row_major(n, rows.into_iter().flatten().collect()).map_err(value_err)
}

fn parse_mode(mode: &str) -> PyResult<CycleMode> {
    mode.parse().map_err(value_err)
}

fn qubit(frequency: f64) -> PyResult<Hamiltonian> {
    Hamiltonian::qubit(frequency).map_err(value_err)
}

#[pyclass(name = "DensityMatrix", module = "qmengine_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix(DensityMatrix);

#[pymethods]
impl PyDensityMatrix {
    /// Build from a square list of rows; entries may be complex.
    #[new]
    fn new(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        DensityMatrix::new(from_rows(rows)?).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn from_populations(populations: Vec<f64>) -> PyResult<Self> {
        DensityMatrix::from_populations(&populations)
            .map(Self)
            .map_err(value_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn matrix(&self) -> Vec<Vec<C64>> {
        to_rows(self.0.matrix())
    }

    fn populations(&self) -> Vec<f64> {
        self.0.populations()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues()
    }

    fn max_coherence(&self) -> f64 {
        self.0.max_coherence()
    }

    fn entropy(&self) -> f64 {
        qstate::von_neumann_entropy(&self.0)
    }

    /// Mean energy under a qubit Hamiltonian with the given level spacing.
    #[pyo3(signature = (frequency = 1.0))]
    fn energy(&self, frequency: f64) -> PyResult<f64> {
        qstate::mean_energy(&self.0, &qubit(frequency)?).map_err(value_err)
    }

    fn trace_distance(&self, other: &PyDensityMatrix) -> PyResult<f64> {
        qstate::trace_distance(&self.0, &other.0).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(populations={:?})", self.0.populations())
    }
}

#[pyclass(name = "KrausSet", module = "qmengine_py", frozen)]
struct PyKrausSet(KrausSet);

#[pymethods]
impl PyKrausSet {
    #[new]
    fn new(label: String, ops: Vec<Vec<Vec<C64>>>) -> PyResult<Self> {
        let ops = ops.into_iter().map(from_rows).collect::<PyResult<Vec<_>>>()?;
        KrausSet::new(label, ops).map(Self).map_err(value_err)
    }

    #[getter]
    fn label(&self) -> &str {
        self.0.label()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn outcomes(&self) -> usize {
        self.0.outcomes()
    }

    fn operators(&self) -> Vec<Vec<Vec<C64>>> {
        self.0.ops().iter().map(to_rows).collect()
    }

    /// `(passed, deviation)` of the completeness check.
    fn completeness(&self) -> (bool, f64) {
        let rep = channels::validate_completeness(&self.0);
        (rep.passed, rep.deviation)
    }

    fn apply(&self, rho: &PyDensityMatrix) -> PyResult<PyDensityMatrix> {
        channels::apply_unselective(&self.0, &rho.0)
            .map(PyDensityMatrix)
            .map_err(value_err)
    }

    /// Per-outcome `(probability, post_state or None)`.
    fn measure(&self, rho: &PyDensityMatrix) -> PyResult<Vec<(f64, Option<PyDensityMatrix>)>> {
        let outcomes = channels::measure_selective(&self.0, &rho.0).map_err(value_err)?;
        Ok(outcomes
            .into_iter()
            .map(|o| (o.probability, o.post_state.map(PyDensityMatrix)))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("KrausSet(label={:?}, outcomes={})", self.0.label(), self.0.outcomes())
    }
}

#[pyclass(name = "CycleParams", module = "qmengine_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCycleParams(CycleParams);

#[pymethods]
impl PyCycleParams {
    /// `mode` is `"three"` or `"five"`.
    #[new]
    #[pyo3(signature = (mode, b, gamma, r = 1.0))]
    fn new(mode: &str, b: f64, gamma: f64, r: f64) -> PyResult<Self> {
        CycleParams::new(parse_mode(mode)?, b, gamma, r)
            .map(Self)
            .map_err(value_err)
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.0.mode().short_name()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    #[getter]
    fn r(&self) -> f64 {
        self.0.r()
    }

    #[getter]
    fn strength(&self) -> f64 {
        self.0.strength()
    }

    fn __repr__(&self) -> String {
        format!(
            "CycleParams(mode={:?}, b={}, gamma={}, r={})",
            self.0.mode().short_name(),
            self.0.b(),
            self.0.gamma(),
            self.0.r()
        )
    }
}

#[pyclass(name = "Stroke", module = "qmengine_py", frozen)]
struct PyStroke(StrokeRecord);

#[pymethods]
impl PyStroke {
    #[getter]
    fn name(&self) -> String {
        self.0.name.to_string()
    }

    #[getter]
    fn state(&self) -> PyDensityMatrix {
        PyDensityMatrix(self.0.state_after.clone())
    }

    #[getter]
    fn frequency(&self) -> Option<f64> {
        self.0.hamiltonian_after.frequency()
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.0.energy_after
    }

    #[getter]
    fn entropy(&self) -> f64 {
        self.0.entropy_after
    }

    fn __repr__(&self) -> String {
        format!(
            "Stroke({}, energy={}, entropy={})",
            self.0.name, self.0.energy_after, self.0.entropy_after
        )
    }
}

#[pyclass(name = "EnergyLedger", module = "qmengine_py", frozen)]
struct PyEnergyLedger(EnergyLedger);

#[pymethods]
impl PyEnergyLedger {
    #[getter]
    fn params(&self) -> PyCycleParams {
        PyCycleParams(self.0.params)
    }

    #[getter]
    fn source(&self) -> String {
        self.0.source.to_string()
    }

    /// `"valid"`, `"formula_only"` or `"out_of_range"`.
    #[getter]
    fn validity(&self) -> &'static str {
        match self.0.validity {
            Validity::Valid => "valid",
            Validity::FormulaOnly => "formula_only",
            Validity::OutOfRange => "out_of_range",
        }
    }

    #[getter]
    fn q_in(&self) -> f64 {
        self.0.q_in
    }

    #[getter]
    fn q_out(&self) -> f64 {
        self.0.q_out
    }

    #[getter]
    fn w_api(&self) -> f64 {
        self.0.w_api
    }

    #[getter]
    fn w_apii(&self) -> f64 {
        self.0.w_apii
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }

    #[getter]
    fn w_ext(&self) -> f64 {
        self.0.w_ext
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.0.eta
    }

    #[getter]
    fn eta_undefined(&self) -> bool {
        self.0.eta_undefined
    }

    #[getter]
    fn q_used(&self) -> Option<f64> {
        self.0.q_used
    }

    fn strokes(&self) -> Vec<PyStroke> {
        self.0.strokes.iter().cloned().map(PyStroke).collect()
    }

    fn first_law_residual(&self) -> PyResult<f64> {
        engine::first_law_residual(&self.0).map_err(value_err)
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        for (k, v) in self.0.scalar_entries() {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "EnergyLedger(mode={:?}, source={}, eta={}, w_ext={})",
            self.0.params.mode().short_name(),
            self.0.source,
            self.0.eta,
            self.0.w_ext
        )
    }
}

/// Gibbs state of a qubit with level spacing `frequency` at `b`.
#[pyfunction]
#[pyo3(signature = (b, frequency = 1.0))]
fn gibbs_state(b: f64, frequency: f64) -> PyResult<PyDensityMatrix> {
    let t = ThermalParams::new(b).map_err(value_err)?;
    Ok(PyDensityMatrix(qstate::gibbs_state(&qubit(frequency)?, t)))
}

#[pyfunction]
fn von_neumann_entropy(rho: &PyDensityMatrix) -> f64 {
    qstate::von_neumann_entropy(&rho.0)
}

#[pyfunction]
fn first_channel(p: f64) -> PyResult<PyKrausSet> {
    channels::first_channel(p).map(PyKrausSet).map_err(value_err)
}

#[pyfunction]
fn second_channel(q: f64) -> PyResult<PyKrausSet> {
    channels::second_channel(q).map(PyKrausSet).map_err(value_err)
}

#[pyfunction]
fn isentropic_threshold(b: f64) -> f64 {
    channels::isentropic_threshold(b)
}

#[pyfunction]
fn isentropic_strength(p: f64, b: f64) -> PyResult<f64> {
    channels::isentropic_strength(p, b).map_err(value_err)
}

/// `(gamma_min, gamma_max)` for a mode and compression ratio.
#[pyfunction]
#[pyo3(signature = (mode, r = 1.0))]
fn gamma_bounds(mode: &str, r: f64) -> PyResult<(f64, f64)> {
    engine::gamma_bounds(parse_mode(mode)?, r).map_err(value_err)
}

/// Run one cycle. `source` is `"numeric"` (propagate states) or
/// `"analytic"` (closed forms).
#[pyfunction]
#[pyo3(signature = (params, source = "numeric"))]
fn run_cycle(params: &PyCycleParams, source: &str) -> PyResult<PyEnergyLedger> {
    let ledger = match source {
        "numeric" => engine::run_numeric(&params.0),
        "analytic" => engine::run_analytic(&params.0),
        other => return Err(PyValueError::new_err(format!("unknown source '{other}'"))),
    };
    ledger.map(PyEnergyLedger).map_err(value_err)
}

/// Run the verification suite. Returns `(passed, checks_run, failures)`.
#[pyfunction]
#[pyo3(signature = (b = None, gamma = None, r = None, perturb = None))]
fn verify(
    py: Python<'_>,
    b: Option<Vec<f64>>,
    gamma: Option<Vec<f64>>,
    r: Option<Vec<f64>>,
    perturb: Option<&str>,
) -> PyResult<(bool, usize, Vec<String>)> {
    let mut grid = VerifyGrid::default();
    if let Some(b) = b {
        grid.b = b;
    }
    if let Some(g) = gamma {
        grid.gamma = g;
    }
    if let Some(r) = r {
        grid.r = r;
    }
    let perturb = perturb.map(str::parse::<Perturbation>).transpose().map_err(value_err)?;
    let report = py.detach(|| run_verify(&grid, perturb));
    let failures = report.failures.iter().map(ToString::to_string).collect();
    Ok((report.passed(), report.checks_run, failures))
}

#[pymodule]
fn qmengine_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyKrausSet>()?;
    m.add_class::<PyCycleParams>()?;
    m.add_class::<PyStroke>()?;
    m.add_class::<PyEnergyLedger>()?;
    m.add_function(wrap_pyfunction!(gibbs_state, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(first_channel, m)?)?;
    m.add_function(wrap_pyfunction!(second_channel, m)?)?;
    m.add_function(wrap_pyfunction!(isentropic_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(isentropic_strength, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(run_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
