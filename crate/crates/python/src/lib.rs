//! Python bindings: `import pywcop`.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyString;

use wcop::estimators::{self, AnalysisConfig};
use wcop::funcspace::{self, DiscFunction, Exponent, QuadratureConfig};
use wcop::report::{self, Command};
use wcop::scenario::{parse_scenario, Scenario as CoreScenario};
use wcop::truncation;
use wcop::Error;

create_exception!(pywcop, WcopError, PyException);
create_exception!(pywcop, UndecidedError, WcopError);

fn py_err(e: Error) -> PyErr {
    if e.is_indecision() {
        UndecidedError::new_err(e.to_string())
    } else {
        WcopError::new_err(e.to_string())
    }
}

/// Accepts `"inf"`, a number, or a numeric string.
fn exponent(value: &Bound<'_, PyAny>) -> PyResult<Exponent> {
    if let Ok(s) = value.cast::<PyString>() {
        return s.to_str()?.parse().map_err(py_err);
    }
    let v: f64 = value.extract()?;
    if v.is_infinite() && v > 0.0 {
        return Ok(Exponent::Infinity);
    }
    Exponent::finite(v).map_err(py_err)
}

fn json_to_py(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    json_to_py(py, &report::to_json(value).map_err(py_err)?)
}

/// An analytic function on the disk, written in the scenario expression
/// grammar, e.g. `Function("mul(0.5, z)")`.
#[pyclass(frozen, module = "pywcop")]
struct Function {
    inner: DiscFunction,
}

#[pymethods]
impl Function {
    #[new]
    fn new(expr: &str) -> PyResult<Self> {
        Ok(Function {
            inner: expr.parse().map_err(py_err)?,
        })
    }

    fn __call__(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.evaluate(z).map_err(py_err)
    }

    /// `‖f‖_p`; `p` may be `"inf"`.
    fn hardy_norm(&self, p: &Bound<'_, PyAny>) -> PyResult<f64> {
        funcspace::hardy_norm(&self.inner, exponent(p)?, &QuadratureConfig::default()).map_err(py_err)
    }

    /// Taylor coefficients `0..=k`.
    fn taylor(&self, k: usize) -> PyResult<Vec<Complex64>> {
        Ok(funcspace::taylor_coefficients(&self.inner, k, self.inner.boundary_radius())
            .map_err(py_err)?
            .coefficients)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Function({:?})", self.inner.to_string())
    }
}

/// A validated analytic self-map of the disk.
#[pyclass(frozen, module = "pywcop")]
struct SelfMap {
    inner: funcspace::SelfMap,
}

#[pymethods]
impl SelfMap {
    #[new]
    fn new(expr: &str) -> PyResult<Self> {
        let f: DiscFunction = expr.parse().map_err(py_err)?;
        Ok(SelfMap {
            inner: funcspace::SelfMap::new(f).map_err(py_err)?,
        })
    }

    fn __call__(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.evaluate(z).map_err(py_err)
    }

    #[getter]
    fn sup_modulus(&self) -> f64 {
        self.inner.sup_modulus_estimate()
    }

    fn __str__(&self) -> String {
        self.inner.map().to_string()
    }

    fn __repr__(&self) -> String {
        format!("SelfMap({:?})", self.inner.map().to_string())
    }
}

/// A parsed scenario file.
#[pyclass(frozen, module = "pywcop")]
struct Scenario {
    inner: CoreScenario,
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Scenario {
            inner: parse_scenario(text).map_err(py_err)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn p(&self) -> String {
        self.inner.p.to_string()
    }

    #[getter]
    fn q(&self) -> String {
        self.inner.q.to_string()
    }

    fn serialize(&self) -> String {
        self.inner.serialize()
    }

    /// Runs a subcommand and returns `(exit_code, report)`.
    fn run(&self, py: Python<'_>, command: &str) -> PyResult<(i32, Py<PyAny>)> {
        let command: Command = command.parse().map_err(py_err)?;
        if matches!(command, Command::Selftest | Command::Sweep) {
            return Err(WcopError::new_err(format!("{command} is not a single-scenario command")));
        }
        let scenario = self.inner.clone();
        let r = py.detach(|| report::execute(command, &scenario)).map_err(py_err)?;
        Ok((r.exit_code(), to_py(py, &r)?))
    }
}

/// Full analysis of `u C_φ : H^p → H^q` with default settings.
#[pyfunction]
fn analyze(py: Python<'_>, u: &Function, phi: &SelfMap, p: &Bound<'_, PyAny>, q: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let (p, q) = (exponent(p)?, exponent(q)?);
    let (u, phi) = (u.inner.clone(), phi.inner.clone());
    let r = py
        .detach(|| estimators::analyze(&u, &phi, p, q, &AnalysisConfig::default()))
        .map_err(py_err)?;
    to_py(py, &r)
}

/// `∫ |u|^q ((1-|a|²)/|1-āφ|²)^{q/p} dm`.
#[pyfunction]
fn kernel_integral(
    u: &Function,
    phi: &SelfMap,
    p: &Bound<'_, PyAny>,
    q: &Bound<'_, PyAny>,
    a: Complex64,
) -> PyResult<f64> {
    let cfg = QuadratureConfig::default();
    Ok(estimators::kernel_integral(&u.inner, &phi.inner, exponent(p)?, exponent(q)?, a, &cfg)
        .map_err(py_err)?
        .value)
}

/// H² truncation bracket of degree `degree` over the N schedule.
#[pyfunction]
#[pyo3(signature = (u, phi, degree=truncation::DEFAULT_DEGREE, schedule=None))]
fn truncation_bracket(
    py: Python<'_>,
    u: &Function,
    phi: &SelfMap,
    degree: usize,
    schedule: Option<Vec<usize>>,
) -> PyResult<Py<PyAny>> {
    let schedule = schedule.unwrap_or_else(|| truncation::DEFAULT_N_SCHEDULE.to_vec());
    let (u, phi) = (u.inner.clone(), phi.inner.clone());
    let b = py
        .detach(|| {
            let t = truncation::build_matrix(&u, &phi, degree, truncation::default_grid(degree), 1.0)?;
            truncation::truncation_bracket(&t, &schedule)
        })
        .map_err(py_err)?;
    to_py(py, &b)
}

/// Runs the acceptance criteria (all, or the listed ids).
#[pyfunction]
#[pyo3(signature = (only=None))]
fn selftest(py: Python<'_>, only: Option<Vec<usize>>) -> PyResult<Py<PyAny>> {
    let r = py.detach(|| report::selftest(only.as_deref()));
    to_py(py, &r)
}

#[pymodule]
pub fn pywcop(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", report::VERSION)?;
    m.add("WcopError", m.py().get_type::<WcopError>())?;
    m.add("UndecidedError", m.py().get_type::<UndecidedError>())?;
    m.add_class::<Function>()?;
    m.add_class::<SelfMap>()?;
    m.add_class::<Scenario>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_integral, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
