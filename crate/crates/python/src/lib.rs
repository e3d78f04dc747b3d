use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use resolvent_lab::bounds;
use resolvent_lab::herglotz::{Atom, GeneratorSpec};
use resolvent_lab::resolvent::{self, SolverOptions};
use resolvent_lab::semigroup;
use resolvent_lab::starlike;
use resolvent_lab::verify::{self, SuiteConfig};
use resolvent_lab::Error;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::NonConvergence { .. } | Error::Integration { .. } => PyArithmeticError::new_err(err.to_string()),
        Error::Inconsistent(_) => PyRuntimeError::new_err(err.to_string()),
        Error::Io(_) => PyIOError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// Generator `f(z) = p(z) z` with `p` given by atoms, floor `a`, scale and `gamma`.
#[pyclass(name = "GeneratorSpec", module = "resolvent_lab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpec {
    inner: GeneratorSpec,
}

#[pymethods]
impl PySpec {
    /// `atoms` is a list of `(theta, weight)` pairs.
    #[new]
    #[pyo3(signature = (atoms, a, scale, gamma = 0.0))]
    fn new(atoms: Vec<(f64, f64)>, a: f64, scale: f64, gamma: f64) -> PyResult<Self> {
        let atoms = atoms.into_iter().map(|(theta, weight)| Atom { theta, weight }).collect();
        GeneratorSpec::new(atoms, a, scale, gamma).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (theta = 0.0, a = 0.0, scale = 1.0, gamma = 0.0))]
    fn single_atom(theta: f64, a: f64, scale: f64, gamma: f64) -> PyResult<Self> {
        GeneratorSpec::single_atom(theta, a, scale, gamma).map(|inner| Self { inner }).map_err(to_py)
    }

    /// Single atom at angle 0 with `p(0) = q` and floor `a`.
    #[staticmethod]
    fn extremal(q: Complex64, a: f64) -> PyResult<Self> {
        GeneratorSpec::extremal(q, a).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn constant(q: Complex64) -> PyResult<Self> {
        GeneratorSpec::constant(q).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        GeneratorSpec::from_json(text).map(|inner| Self { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn random(seed: u64) -> PyResult<Self> {
        resolvent_lab::sample_generator(seed, &Default::default())
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn q(&self) -> Complex64 {
        self.inner.q()
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    #[getter]
    fn scale(&self) -> f64 {
        self.inner.scale()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    #[getter]
    fn atoms(&self) -> Vec<(f64, f64)> {
        self.inner.atoms().iter().map(|a| (a.theta, a.weight)).collect()
    }

    fn p(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.eval_p(z).map_err(to_py)
    }

    fn p_prime(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.eval_p_prime(z).map_err(to_py)
    }

    fn f(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.eval_f(z).map_err(to_py)
    }

    /// `(center, radius)` of the disk containing `p` on `|z| = r`.
    fn value_disk(&self, r: f64) -> PyResult<(Complex64, f64)> {
        let d = self.inner.value_disk(r).map_err(to_py)?;
        Ok((d.center, d.radius))
    }

    fn harnack_bounds(&self, r: f64) -> PyResult<(f64, f64)> {
        self.inner.harnack_bounds(r).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("GeneratorSpec({})", self.inner.to_json())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Solves `w + λ p(w) w = z`; returns a dict with `w`, `g`, `residual`, `iterations`.
#[pyfunction]
#[pyo3(signature = (spec, lam, z, tol = 1e-12, max_iter = 10_000))]
fn solve<'py>(
    py: Python<'py>,
    spec: &PySpec,
    lam: f64,
    z: Complex64,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = SolverOptions {
        max_iter,
        ..SolverOptions::with_tol(tol)
    };
    let sol = resolvent::solve_resolvent(&spec.inner, lam, z, &opts).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("w", sol.w)?;
    d.set_item("g", sol.g)?;
    d.set_item("residual", sol.residual)?;
    d.set_item("iterations", sol.iterations)?;
    Ok(d)
}

/// `G_λ` applied `n` times.
#[pyfunction]
fn iterate(spec: &PySpec, lam: f64, z: Complex64, n: usize) -> PyResult<Complex64> {
    resolvent::iterate_resolvent(&spec.inner, lam, z, n, &SolverOptions::default()).map_err(to_py)
}

/// Closed-form bounds for `(q, a, λ)`.
#[pyfunction]
#[pyo3(name = "bounds")]
fn bound_set<'py>(py: Python<'py>, q: Complex64, a: f64, lam: f64) -> PyResult<Bound<'py, PyDict>> {
    let b = bounds::distortion_coefficients(q, a, lam).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("A", b.big_a)?;
    d.set_item("B", b.big_b)?;
    d.set_item("distortion", b.distortion)?;
    d.set_item("a_lambda", b.a_lambda)?;
    d.set_item("d_lambda", b.d_lambda)?;
    d.set_item("rho_star", b.rho_star)?;
    d.set_item("alpha", b.alpha)?;
    d.set_item("beta", b.beta)?;
    d.set_item(
        "resolvent_accretivity_disk",
        bounds::disk_accretivity_bound(q, a, lam).map_err(to_py)?,
    )?;
    Ok(d)
}

#[pyfunction]
fn distortion(q: Complex64, a: f64, lam: f64) -> PyResult<f64> {
    bounds::distortion(q, a, lam).map_err(to_py)
}

#[pyfunction]
fn t_function(alpha: f64, beta: f64, r: f64) -> PyResult<f64> {
    bounds::t_function(alpha, beta, r).map_err(to_py)
}

#[pyfunction]
fn threshold_m1(q: Complex64, a: f64) -> PyResult<f64> {
    bounds::threshold_m1(q, a).map_err(to_py)
}

#[pyfunction]
fn threshold_m2(q: Complex64, lam: f64) -> PyResult<f64> {
    bounds::threshold_m2(q, lam).map_err(to_py)
}

#[pyfunction]
fn region_boundary(s: f64) -> f64 {
    bounds::region_boundary(s)
}

/// Certified order of starlikeness, or `None` when neither sufficient condition holds.
#[pyfunction]
fn calc_order<'py>(py: Python<'py>, q: Complex64, a: f64, lam: f64) -> PyResult<Option<Bound<'py, PyDict>>> {
    let Some(c) = bounds::calc_order(q, a, lam).map_err(to_py)? else {
        return Ok(None);
    };
    let d = PyDict::new(py);
    d.set_item("order", c.order)?;
    d.set_item(
        "condition",
        match c.condition {
            bounds::OrderCondition::I => "i",
            bounds::OrderCondition::Ii => "ii",
        },
    )?;
    d.set_item("rho", c.rho)?;
    d.set_item("t_rho", c.t_rho)?;
    Ok(Some(d))
}

/// `Q = G_λ(z) / (z G_λ′(z))`.
#[pyfunction]
fn starlike_functional(spec: &PySpec, lam: f64, z: Complex64) -> PyResult<Complex64> {
    starlike::starlike_functional(&spec.inner, lam, z, &SolverOptions::default())
        .map(|s| s.functional)
        .map_err(to_py)
}

/// Sampled orders on `|z| = r_max`: `(order, strong_order, max |Q − 1|)`.
#[pyfunction]
#[pyo3(signature = (spec, lam, n_samples = 720, r_max = 0.999))]
fn empirical_order(spec: &PySpec, lam: f64, n_samples: usize, r_max: f64) -> PyResult<(f64, f64, f64)> {
    let e = starlike::empirical_order(&spec.inner, lam, n_samples, r_max, &SolverOptions::default())
        .map_err(to_py)?;
    Ok((e.order_lb, e.strong_order_lb, e.max_deviation))
}

/// Flow of `du/dt = −p(u) u`; returns `(times, points)`.
#[pyfunction]
#[pyo3(signature = (spec, z0, t_end, tol = 1e-9))]
fn integrate(spec: &PySpec, z0: Complex64, t_end: f64, tol: f64) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let traj = semigroup::integrate(&spec.inner, z0, t_end, tol).map_err(to_py)?;
    Ok((traj.times, traj.points))
}

/// `(iterated, integrated, gap)` for `G_{t/n}^n(z0)` against the flow.
#[pyfunction]
fn product_formula(spec: &PySpec, z0: Complex64, t: f64, n: usize) -> PyResult<(Complex64, Complex64, f64)> {
    let p = semigroup::product_formula(&spec.inner, z0, t, n).map_err(to_py)?;
    Ok((p.iterated, p.integrated, p.gap))
}

/// Runs a verification suite and returns its report as a JSON string.
#[pyfunction]
#[pyo3(signature = (name, seed = 42, config = None, negative_control = false))]
fn run_suite(py: Python<'_>, name: &str, seed: u64, config: Option<&str>, negative_control: bool) -> PyResult<String> {
    let mut cfg = match config {
        Some(text) => SuiteConfig::from_json(text).map_err(to_py)?,
        None => SuiteConfig::default(),
    };
    cfg.negative_control |= negative_control;
    let report = py
        .detach(|| verify::run_suite_named(name, &cfg, seed))
        .map_err(to_py)?;
    Ok(report.to_json())
}

#[pyfunction]
fn suites() -> Vec<&'static str> {
    verify::Suite::ALL.iter().map(|s| s.name()).collect()
}

#[pymodule]
#[pyo3(name = "resolvent_lab")]
fn resolvent_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpec>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(iterate, m)?)?;
    m.add_function(wrap_pyfunction!(bound_set, m)?)?;
    m.add_function(wrap_pyfunction!(distortion, m)?)?;
    m.add_function(wrap_pyfunction!(t_function, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_m1, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_m2, m)?)?;
    m.add_function(wrap_pyfunction!(region_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(calc_order, m)?)?;
    m.add_function(wrap_pyfunction!(starlike_functional, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_order, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(product_formula, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(suites, m)?)?;
    Ok(())
}
