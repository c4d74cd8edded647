//! Python bindings for `parisian-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use parisian_core::config::{Entries, RunConfig};
use parisian_core::mc::{ruin_functional, simulate_ruin};
use parisian_core::{
    run_validation_suite, Backend, Error, Kernels, LevyModel, McConfig, McMode, Parisian, ParisianQuery, QuadOptions,
    ScaleFunction,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(parisian, NonConvergenceError, PyRuntimeError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NonConvergence(msg) => NonConvergenceError::new_err(msg),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for parisian_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

#[pyclass(name = "LevyModel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyLevyModel {
    inner: LevyModel,
}

#[pymethods]
impl PyLevyModel {
    #[staticmethod]
    fn brownian(mu: f64, sigma: f64) -> PyResult<Self> {
        Ok(PyLevyModel {
            inner: LevyModel::brownian(mu, sigma).py()?,
        })
    }

    /// Premium rate `c`, claim intensity and mean claim size.
    #[staticmethod]
    fn cramer_lundberg(c: f64, jump_rate: f64, jump_mean: f64) -> PyResult<Self> {
        Ok(PyLevyModel {
            inner: LevyModel::cramer_lundberg(c, jump_rate, jump_mean).py()?,
        })
    }

    #[staticmethod]
    fn perturbed(mu: f64, sigma: f64, jump_rate: f64, jump_mean: f64) -> PyResult<Self> {
        Ok(PyLevyModel {
            inner: LevyModel::perturbed(mu, sigma, jump_rate, jump_mean).py()?,
        })
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind.to_string()
    }

    fn psi(&self, lam: f64) -> f64 {
        self.inner.psi(lam)
    }

    fn phi(&self, theta: f64) -> PyResult<f64> {
        self.inner.phi(theta).py()
    }

    fn esscher(&self, nu: f64) -> PyResult<Self> {
        Ok(PyLevyModel {
            inner: self.inner.esscher(nu).py()?,
        })
    }

    /// Continuous part of the law of `X_t` at `z`.
    fn pdf(&self, t: f64, z: f64) -> PyResult<f64> {
        self.inner.transition_density(t).and_then(|d| d.pdf(z)).py()
    }

    fn __repr__(&self) -> String {
        let m = &self.inner;
        format!(
            "LevyModel(kind={}, mu={}, sigma={}, jump_rate={}, jump_mean={})",
            m.kind, m.mu, m.sigma, m.jump_rate, m.jump_mean
        )
    }
}

#[pyclass(name = "ScaleFunction", frozen)]
struct PyScaleFunction {
    inner: ScaleFunction,
}

#[pymethods]
impl PyScaleFunction {
    /// `backend` is `"closed"`, `"numeric"` or `None` for the default.
    #[new]
    #[pyo3(signature = (model, q, backend = None))]
    fn new(model: PyRef<'_, PyLevyModel>, q: f64, backend: Option<&str>) -> PyResult<Self> {
        let inner = match backend {
            None => ScaleFunction::auto(model.inner, q),
            Some("closed") => ScaleFunction::new(model.inner, q, Backend::ClosedForm),
            Some("numeric") => ScaleFunction::new(model.inner, q, Backend::NumericInversion),
            Some(other) => return Err(PyValueError::new_err(format!("unknown backend '{other}'"))),
        }
        .py()?;
        Ok(PyScaleFunction { inner })
    }

    #[getter]
    fn phi_q(&self) -> f64 {
        self.inner.phi_q()
    }

    fn w(&self, x: f64) -> PyResult<f64> {
        self.inner.w(x).py()
    }

    fn w_prime(&self, x: f64) -> PyResult<f64> {
        self.inner.w_prime(x).py()
    }

    fn w_bar(&self, x: f64) -> PyResult<f64> {
        self.inner.w_bar(x).py()
    }
}

#[pyclass(name = "Kernels", frozen)]
struct PyKernels {
    inner: Kernels,
}

#[pymethods]
impl PyKernels {
    #[new]
    #[pyo3(signature = (model, u, rel_tol = 1e-8, abs_tol = 1e-12))]
    fn new(model: PyRef<'_, PyLevyModel>, u: f64, rel_tol: f64, abs_tol: f64) -> PyResult<Self> {
        let opts = QuadOptions {
            rel_tol,
            abs_tol,
            ..QuadOptions::default()
        };
        Ok(PyKernels {
            inner: Kernels::new(model.inner, u, opts).py()?,
        })
    }

    #[pyo3(signature = (x, t, eps = 0.0))]
    fn omega(&self, x: f64, t: f64, eps: f64) -> PyResult<f64> {
        self.inner.omega(x, t, eps).py()
    }

    #[pyo3(signature = (x, t, eps = 0.0))]
    fn lambda_(&self, x: f64, t: f64, eps: f64) -> PyResult<f64> {
        self.inner.lambda(x, t, eps).py()
    }

    #[pyo3(signature = (x, r, eps = 0.0))]
    fn omega_time_integral(&self, x: f64, r: f64, eps: f64) -> PyResult<f64> {
        self.inner.omega_time_integral(x, r, eps).py()
    }

    #[pyo3(signature = (x, r, eps = 0.0))]
    fn lambda_time_integral(&self, x: f64, r: f64, eps: f64) -> PyResult<f64> {
        self.inner.lambda_time_integral(x, r, eps).py()
    }
}

#[pyclass(name = "Parisian", frozen)]
struct PyParisian {
    inner: Parisian,
}

#[pymethods]
impl PyParisian {
    #[new]
    #[pyo3(signature = (model, rel_tol = 1e-8, abs_tol = 1e-12, nodes = 24))]
    fn new(model: PyRef<'_, PyLevyModel>, rel_tol: f64, abs_tol: f64, nodes: usize) -> Self {
        let opts = QuadOptions {
            rel_tol,
            abs_tol,
            ..QuadOptions::default()
        };
        PyParisian {
            inner: Parisian::with_options(model.inner, opts).with_talbot_nodes(nodes),
        }
    }

    /// `E[e^{-u tau_r}]` from initial drawdown `z`.
    #[pyo3(signature = (a, r, u, z = 0.0))]
    fn lt_ruin(&self, py: Python<'_>, a: f64, r: f64, u: f64, z: f64) -> PyResult<f64> {
        py.detach(|| self.inner.lt_ruin(&ParisianQuery::new(a, r, u, z))).py()
    }

    /// `E[e^{-u tau_r + nu X_{tau_r}}]` from drawdown `z` and position `x0`.
    #[pyo3(signature = (a, r, u, z = 0.0, nu = 0.0, x0 = 0.0))]
    #[allow(clippy::too_many_arguments)]
    fn joint_lt(&self, py: Python<'_>, a: f64, r: f64, u: f64, z: f64, nu: f64, x0: f64) -> PyResult<f64> {
        py.detach(|| self.inner.joint_lt(&ParisianQuery::new(a, r, u, z).with_tilt(nu, x0)))
            .py()
    }

    fn lt_drawdown_up(&self, u: f64, nu: f64, a: f64, s: f64) -> PyResult<f64> {
        self.inner.lt_drawdown_up(u, nu, a, s).py()
    }

    fn lt_drawdown_down(&self, theta: f64, y: f64, a: f64) -> PyResult<f64> {
        self.inner.lt_drawdown_down(theta, y, a).py()
    }

    fn entry_then_down_prob(&self, py: Python<'_>, u: f64, eps: f64, a: f64, y: f64, r: f64) -> PyResult<f64> {
        py.detach(|| self.inner.entry_then_down_prob(u, eps, a, y, r)).py()
    }

    fn entry_then_down_lt(&self, py: Python<'_>, u: f64, eps: f64, a: f64, y: f64, r: f64) -> PyResult<f64> {
        py.detach(|| self.inner.entry_then_down_lt(u, eps, a, y, r)).py()
    }

    fn lt_ruin_eps(&self, py: Python<'_>, u: f64, eps: f64, a: f64, y: f64, r: f64) -> PyResult<f64> {
        py.detach(|| self.inner.lt_ruin_eps(u, eps, a, y, r)).py()
    }
}

/// Monte Carlo estimate of `E[e^{-u tau_r + nu X_{tau_r}}]` as a dict with
/// `mean`, `stderr`, `n_paths`, `capped_fraction` and `seed`.
#[pyfunction]
#[pyo3(signature = (model, a, r, u, z = 0.0, nu = 0.0, x0 = 0.0, paths = 100_000, seed = 42, dt = 1e-3, horizon_cap = 1000.0, mode = None))]
#[allow(clippy::too_many_arguments)]
fn mc_estimate<'py>(
    py: Python<'py>,
    model: PyRef<'_, PyLevyModel>,
    a: f64,
    r: f64,
    u: f64,
    z: f64,
    nu: f64,
    x0: f64,
    paths: usize,
    seed: u64,
    dt: f64,
    horizon_cap: f64,
    mode: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let m = model.inner;
    let mut cfg = McConfig {
        n_paths: paths,
        seed,
        dt,
        horizon_cap,
        ..McConfig::for_model(&m)
    };
    if let Some(mode) = mode {
        cfg.mode = mode.parse::<McMode>().py()?;
    }
    let q = ParisianQuery::new(a, r, u, z).with_tilt(nu, x0);
    q.validate().py()?;
    let est = py
        .detach(|| simulate_ruin(&m, a, r, z, x0, &cfg).map(|s| ruin_functional(&s, u, nu, seed)))
        .py()?;
    let d = PyDict::new(py);
    d.set_item("mean", est.mean)?;
    d.set_item("stderr", est.stderr)?;
    d.set_item("n_paths", est.n_paths)?;
    d.set_item("capped_fraction", est.capped_fraction)?;
    d.set_item("seed", est.seed)?;
    Ok(d)
}

/// Runs the identity suite for `model`; returns a list of dicts with
/// `identity`, `params`, `lhs`, `rhs`, `rel_err`, `tol` and `pass`.
#[pyfunction]
#[pyo3(signature = (model, rel_tol = 1e-8))]
fn validate<'py>(py: Python<'py>, model: PyRef<'_, PyLevyModel>, rel_tol: f64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let m = model.inner;
    let mut entries = Entries::new();
    let mut put = |k: &str, v: String| {
        entries.insert(k.to_string(), v);
    };
    put("model.kind", m.kind.to_string());
    put("model.mu", m.mu.to_string());
    if m.sigma > 0.0 {
        put("model.sigma", m.sigma.to_string());
    }
    if m.jump_rate > 0.0 {
        put("model.jump_rate", m.jump_rate.to_string());
        put("model.jump_mean", m.jump_mean.to_string());
    }
    put("quad.rel_tol", rel_tol.to_string());
    let cfg = RunConfig::from_entries(&entries).py()?;
    let report = py.detach(|| run_validation_suite(&cfg)).py()?;
    report
        .checks
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("identity", &c.identity)?;
            d.set_item("params", c.params.clone())?;
            d.set_item("lhs", c.lhs)?;
            d.set_item("rhs", c.rhs)?;
            d.set_item("rel_err", c.rel_err)?;
            d.set_item("tol", c.tol)?;
            d.set_item("pass", c.pass)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn parisian(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLevyModel>()?;
    m.add_class::<PyScaleFunction>()?;
    m.add_class::<PyKernels>()?;
    m.add_class::<PyParisian>()?;
    m.add_function(wrap_pyfunction!(mc_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    Ok(())
}
