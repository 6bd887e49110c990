//! Python bindings: structures, brackets, involutivity, distances, contact
//! sets and the metric Jacobian. Results come back as plain dicts and lists.

use ccgeo::acceptance;
use ccgeo::calc::json::{field_to_json, parse_rational};
use ccgeo::calc::{rational_to_f64, CheckStatus, Point, Rational};
use ccgeo::involutivity::{h_noninvolutive_at, noninvolutive_at, SearchOptions};
use ccgeo::metrics::oracle::heisenberg_lattice_distance;
use ccgeo::metrics::{cc_distance, eta_distance, CcOptions, EtaContext, EtaOptions};
use ccgeo::structures::{build_catalog_model, hormander_step, resolve_structure, ComplementedStructure, CATALOG_NAMES};
use ccgeo::tangency::{contact_set, metric_jacobian, SeminormSample, SurfaceGraph};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyFloat, PyString};
use pythonize::pythonize;
use serde_json::{json, Value};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: serde::Serialize + ?Sized>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    pythonize(py, v).map_err(value_error)
}

fn rats(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(|r| Value::String(r.to_string())).collect())
}

/// Strings (`"p/q"`) and ints are exact; any float makes the point floating.
fn point_arg(coords: Option<Vec<Bound<'_, PyAny>>>, n: usize) -> PyResult<Point> {
    let Some(coords) = coords else {
        return Ok(Point::origin_exact(n));
    };
    if coords.len() != n {
        return Err(value_error(format!("point has {} coordinates, expected {n}", coords.len())));
    }
    if coords.iter().any(|c| c.is_instance_of::<PyFloat>()) {
        let xs = coords.iter().map(|c| c.extract::<f64>()).collect::<PyResult<Vec<_>>>()?;
        return Ok(Point::Float(xs));
    }
    let exact = coords
        .iter()
        .map(|c| {
            let text = if c.is_instance_of::<PyString>() { c.extract::<String>()? } else { c.str()?.to_string() };
            parse_rational(&text).map_err(value_error)
        })
        .collect::<PyResult<Vec<_>>>()?;
    Ok(Point::Exact(exact))
}

/// A distribution with a complementary frame, from a catalog name or file.
#[pyclass(name = "Structure", frozen)]
struct PyStructure {
    inner: ComplementedStructure,
}

#[pymethods]
impl PyStructure {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        resolve_structure(spec).map(|inner| PyStructure { inner }).map_err(value_error)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn degrees(&self) -> Vec<u32> {
        self.inner.degrees().to_vec()
    }

    #[getter(working_box)]
    fn working_box(&self) -> (f64, f64) {
        let [lo, hi] = self.inner.working_box();
        (lo, hi)
    }

    fn __repr__(&self) -> String {
        format!("Structure({:?}, n={}, k={})", self.inner.name(), self.inner.n(), self.inner.k())
    }

    /// Frame vectors (distribution first, then complement) as columns.
    fn frame_matrix(&self, point: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        if point.len() != self.inner.n() {
            return Err(value_error("point has the wrong dimension"));
        }
        let m = self.inner.frame_matrix(&point);
        Ok(m.row_iter().map(|r| r.iter().copied().collect()).collect())
    }

    /// `[F_i, F_j]` of full-frame fields (1-based), and its frame coordinates at `point`.
    #[pyo3(signature = (i, j, point=None))]
    fn bracket<'py>(&self, py: Python<'py>, i: usize, j: usize, point: Option<Vec<Bound<'py, PyAny>>>) -> PyResult<Bound<'py, PyAny>> {
        let s = &self.inner;
        let n = s.n();
        if !(1..=n).contains(&i) || !(1..=n).contains(&j) {
            return Err(value_error(format!("field indices must lie in 1..={n}")));
        }
        let x = point_arg(point, n)?.to_exact().map_err(value_error)?;
        let full = s.full_frame();
        let field = full[i - 1].bracket(&full[j - 1]).map_err(value_error)?;
        let value = field.eval_exact(&x).map_err(value_error)?;
        let coords = s
            .frame_matrix_exact(&x)
            .map_err(value_error)?
            .solve(&value)
            .ok_or_else(|| value_error("frame is singular at the point"))?;
        let zero = Rational::from_integer(0.into());
        let v = json!({
            "field": field_to_json(&field),
            "value": value.iter().map(rational_to_f64).collect::<Vec<_>>(),
            "exact_value": rats(&value),
            "frame_coordinates": rats(&coords),
            "in_distribution": coords[s.k()..].iter().all(|c| *c == zero),
        });
        to_py(py, &v)
    }

    /// Non-involutivity at `point`, or h-non-involutivity when `h` is given.
    #[pyo3(signature = (point=None, h=None, restarts=64, seed=0))]
    fn involutivity<'py>(
        &self,
        py: Python<'py>,
        point: Option<Vec<Bound<'py, PyAny>>>,
        h: Option<usize>,
        restarts: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let x = point_arg(point, self.inner.n())?;
        let opts = SearchOptions { restarts, seed, ..Default::default() };
        let s = &self.inner;
        let report = py
            .detach(|| match h {
                None => noninvolutive_at(s, &x),
                Some(h) => h_noninvolutive_at(s, &x, h, &opts),
            })
            .map_err(value_error)?;
        to_py(py, &report.to_json())
    }

    #[pyo3(signature = (point=None, max_step=8))]
    fn hormander_step<'py>(&self, py: Python<'py>, point: Option<Vec<Bound<'py, PyAny>>>, max_step: usize) -> PyResult<Bound<'py, PyAny>> {
        let x = point_arg(point, self.inner.n())?;
        let r = hormander_step(self.inner.distribution(), &x, max_step).map_err(value_error)?;
        to_py(py, &r)
    }

    /// Bracket `[lower, upper]` on the Carnot-Carathéodory distance.
    #[pyo3(signature = (x, y, budget=24, restarts=8, seed=0))]
    fn cc_distance<'py>(&self, py: Python<'py>, x: Vec<f64>, y: Vec<f64>, budget: usize, restarts: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let opts = CcOptions { budget, restarts, seed, ..Default::default() };
        let s = &self.inner;
        let e = py.detach(|| cc_distance(s, &x, &y, &opts)).map_err(value_error)?;
        to_py(py, &e)
    }

    /// Bracket on the η-box distance, with the projection modulus sampled on
    /// the working box.
    #[pyo3(signature = (x, y, eta, budget=5, restarts=4, seed=0, modulus_samples=256))]
    #[allow(clippy::too_many_arguments)]
    fn eta_distance<'py>(
        &self,
        py: Python<'py>,
        x: Vec<f64>,
        y: Vec<f64>,
        eta: f64,
        budget: usize,
        restarts: usize,
        seed: u64,
        modulus_samples: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let opts = EtaOptions { budget, restarts, seed, ..Default::default() };
        let s = &self.inner;
        let e = py
            .detach(|| {
                let (ctx, _) = EtaContext::with_sampled_modulus(s, eta, modulus_samples, seed)?;
                eta_distance(&ctx, &x, &y, &opts)
            })
            .map_err(value_error)?;
        to_py(py, &e)
    }

    /// Grid points of a surface graph where its tangent plane lies in the distribution.
    #[pyo3(signature = (surface="saddle", grid=401, tau=1e-6))]
    fn contact_set<'py>(&self, py: Python<'py>, surface: &str, grid: usize, tau: f64) -> PyResult<Bound<'py, PyAny>> {
        let surf = SurfaceGraph::resolve(surface).map_err(value_error)?;
        let s = &self.inner;
        let cloud = py.detach(|| contact_set(s, &surf, grid, tau)).map_err(value_error)?;
        to_py(py, &cloud)
    }
}

#[pyfunction]
fn catalog_names() -> Vec<&'static str> {
    CATALOG_NAMES.to_vec()
}

/// Commutation relations of a catalog model, each checked exactly.
#[pyfunction]
fn catalog<'py>(py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyAny>> {
    let model = build_catalog_model(name).map_err(value_error)?;
    let checks = model.relation_checks().map_err(value_error)?;
    let rows: Vec<Value> = checks
        .iter()
        .map(|c| {
            json!({
                "bracket": [c.i + 1, c.j + 1],
                "expected": c.expected.iter().map(|(l, v)| json!([l + 1, v.to_string()])).collect::<Vec<_>>(),
                "status": serde_json::to_value(c.status).unwrap_or(Value::Null),
            })
        })
        .collect();
    let v = json!({
        "model": model.name,
        "dimension": model.n(),
        "rank": model.k(),
        "step": model.step(),
        "relation_checks": rows,
        "all_exact_pass": checks.iter().all(|c| c.status == CheckStatus::ExactPass),
    });
    to_py(py, &v)
}

/// Jacobian `1 / mean(s(u)^{-m})` of a seminorm sampled at unit directions.
#[pyfunction]
fn metric_jacobian_of(directions: Vec<Vec<f64>>, values: Vec<f64>, m: usize) -> PyResult<f64> {
    let sample = SeminormSample::new(directions, values).map_err(value_error)?;
    metric_jacobian(&sample, m).map_err(value_error)
}

/// Heisenberg distance from the origin by shortest paths on a lattice.
#[pyfunction]
#[pyo3(signature = (target, levels=256))]
fn lattice_distance(py: Python<'_>, target: [f64; 3], levels: usize) -> PyResult<Bound<'_, PyAny>> {
    let r = py.detach(|| heisenberg_lattice_distance(target, levels));
    match r {
        Some(r) => to_py(py, &r),
        None => Err(value_error("lattice too large for this target")),
    }
}

/// One acceptance criterion (1..=9).
#[pyfunction]
#[pyo3(signature = (id, seed=0))]
fn run_criterion(py: Python<'_>, id: usize, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    if !(1..acceptance::CRITERIA).contains(&id) {
        return Err(value_error(format!("criterion must lie in 1..={}", acceptance::CRITERIA - 1)));
    }
    let r = py.detach(|| acceptance::run_criterion(id, seed));
    to_py(py, &r)
}

#[pymodule]
pub fn ccgeo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStructure>()?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(metric_jacobian_of, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_distance, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
