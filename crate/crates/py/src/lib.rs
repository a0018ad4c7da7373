//! Python bindings: `Mat`, `ClassTable`, and the main operations. Reports
//! come back as plain dicts with fractions as `{"num", "den"}`.

use contring::ball::{
    ball_factorization, ball_factorization_split, invertible_approximation, sl_projection,
    tower_unit_density, TowerElem,
};
use contring::canonical::{index_bound_certificate, RcfJson};
use contring::coverage::{
    auto_tuple, class_product_closure, conjugacy_width, corollary_index_check, enumerate_group,
    rodgers_saxl_check, ClassTable,
};
use contring::geodesic::{
    approximate_midpoint, geodesic_between, geodesic_unit_to_identity, star_geodesic_algebraic,
    GeodesicPath,
};
use contring::{FieldSpec, Mat, Poly};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;
use serde_json::json;

create_exception!(contring_py, ContringError, PyException);

fn err(e: contring::Error) -> PyErr {
    ContringError::new_err(format!("{}: {e}", e.kind()))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).expect("serializable");
    py.import("json")?.call_method1("loads", (s,))
}

#[pyclass(name = "Mat", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyMat {
    inner: Mat,
}

fn wrap(inner: Mat) -> PyMat {
    PyMat { inner }
}

#[pymethods]
impl PyMat {
    #[new]
    fn new(p: u64, rows: Vec<Vec<i64>>) -> PyResult<Self> {
        let f = FieldSpec::new(p).map_err(err)?;
        Mat::from_rows(f, &rows).map(wrap).map_err(err)
    }

    /// `p=<prime>; <row>; ...` or `{"p":..,"rows":..}`
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Mat::parse(text).map(wrap).map_err(err)
    }

    #[staticmethod]
    fn identity(p: u64, n: usize) -> PyResult<Self> {
        Ok(wrap(Mat::identity(FieldSpec::new(p).map_err(err)?, n)))
    }

    #[getter]
    fn p(&self) -> u32 {
        self.inner.field().p()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn rows(&self) -> Vec<Vec<u32>> {
        self.inner.rows()
    }

    fn rank(&self) -> usize {
        self.inner.rank()
    }

    /// Normalized rank as `(num, den)`.
    fn rk(&self) -> (u64, u64) {
        let r = contring::rk(&self.inner);
        (r.num, r.den)
    }

    fn det(&self) -> u32 {
        self.inner.det()
    }

    fn is_invertible(&self) -> bool {
        self.inner.is_invertible()
    }

    fn inverse(&self) -> PyResult<Self> {
        self.inner.inverse().map(wrap).map_err(err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Mat({:?})", self.inner.to_text())
    }

    fn __mul__(&self, o: &PyMat) -> PyResult<Self> {
        self.inner.ensure_compatible(&o.inner).map_err(err)?;
        Ok(wrap(&self.inner * &o.inner))
    }

    fn __add__(&self, o: &PyMat) -> PyResult<Self> {
        self.inner.ensure_compatible(&o.inner).map_err(err)?;
        Ok(wrap(&self.inner + &o.inner))
    }

    fn __sub__(&self, o: &PyMat) -> PyResult<Self> {
        self.inner.ensure_compatible(&o.inner).map_err(err)?;
        Ok(wrap(&self.inner - &o.inner))
    }
}

/// `rank(a - b) / n` as `(num, den)`.
#[pyfunction]
fn dist(a: &PyMat, b: &PyMat) -> PyResult<(u64, u64)> {
    let d = contring::dist(&a.inner, &b.inner).map_err(err)?;
    Ok((d.num, d.den))
}

#[pyfunction]
fn center_dist<'py>(py: Python<'py>, a: &PyMat) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &contring::dist_to_center(&a.inner))
}

#[pyfunction]
fn rcf<'py>(py: Python<'py>, a: &PyMat) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &RcfJson::from(&contring::rcf(&a.inner)))
}

#[pyfunction]
fn index<'py>(py: Python<'py>, a: &PyMat) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &index_bound_certificate(&a.inner))
}

fn path_py<'py>(py: Python<'py>, p: contring::Result<GeodesicPath>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &p.map_err(err)?.to_json())
}

#[pyfunction]
fn geodesic<'py>(py: Python<'py>, a: &PyMat, b: &PyMat) -> PyResult<Bound<'py, PyAny>> {
    path_py(py, geodesic_between(&a.inner, &b.inner))
}

#[pyfunction]
fn unit_geodesic<'py>(py: Python<'py>, a: &PyMat) -> PyResult<Bound<'py, PyAny>> {
    path_py(py, geodesic_unit_to_identity(&a.inner))
}

/// Polynomials as coefficient lists, lowest degree first.
#[pyfunction]
#[pyo3(signature = (a, polys, c=1))]
fn star_geodesic<'py>(
    py: Python<'py>,
    a: &PyMat,
    polys: Vec<Vec<i64>>,
    c: u32,
) -> PyResult<Bound<'py, PyAny>> {
    let f = a.inner.field();
    let s: Vec<Poly> = polys.iter().map(|q| Poly::new(f, q)).collect();
    path_py(py, star_geodesic_algebraic(&a.inner, &s, c))
}

#[pyfunction]
#[pyo3(signature = (g0, g1, seed=0, budget=64))]
fn midpoint<'py>(
    py: Python<'py>,
    g0: &PyMat,
    g1: &PyMat,
    seed: u64,
    budget: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let mp = approximate_midpoint(&g0.inner, &g1.inner, seed, budget).map_err(err)?;
    to_py(
        py,
        &json!({
            "m": mp.m.rows(),
            "err": mp.err,
            "bound": mp.bound(),
            "within_bound": mp.err <= mp.bound(),
            "tries": mp.tries,
        }),
    )
}

#[pyfunction]
#[pyo3(signature = (g, m, conjugate=false))]
fn decompose<'py>(py: Python<'py>, g: &PyMat, m: usize, conjugate: bool) -> PyResult<Bound<'py, PyAny>> {
    let bf = if conjugate {
        ball_factorization_split(&g.inner, m)
    } else {
        ball_factorization(&g.inner, m)
    }
    .map_err(err)?;
    to_py(
        py,
        &json!({
            "factors": bf.factors.iter().map(Mat::rows).collect::<Vec<_>>(),
            "witnesses": bf.witnesses.iter().map(|w| w.describe()).collect::<Vec<_>>(),
            "distances": bf.distances(),
            "verified": bf.verify(),
        }),
    )
}

#[pyfunction]
fn approx_unit(a: &PyMat) -> PyMat {
    wrap(invertible_approximation(&a.inner))
}

#[pyfunction]
fn sl_project(a: &PyMat) -> PyResult<PyMat> {
    sl_projection(&a.inner).map(wrap).map_err(err)
}

/// Approximates the unit `g` by a unit embedded from the smaller `a`.
#[pyfunction]
fn tower_density<'py>(py: Python<'py>, g: &PyMat, a: &PyMat) -> PyResult<Bound<'py, PyAny>> {
    let g = TowerElem::new(g.inner.clone()).map_err(err)?;
    let a = TowerElem::new(a.inner.clone()).map_err(err)?;
    let r = tower_unit_density(&g, &a).map_err(err)?;
    to_py(py, &json!({"h": r.h.rows(), "trace": r.trace}))
}

#[pyclass(name = "ClassTable", frozen)]
struct PyClassTable {
    inner: ClassTable,
}

#[pymethods]
impl PyClassTable {
    #[new]
    #[pyo3(signature = (n, p, special=false, budget=100_000))]
    fn new(n: usize, p: u32, special: bool, budget: u64) -> PyResult<Self> {
        let inner = enumerate_group(n, p, special, budget as u128).map_err(err)?;
        Ok(PyClassTable { inner })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    fn classes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.class_infos())
    }

    fn center(&self) -> Vec<PyMat> {
        self.inner.center().into_iter().map(wrap).collect()
    }

    /// `(covered, (num, den))` for the product of the given classes.
    fn closure(&self, ids: Vec<usize>) -> PyResult<(bool, (u64, u64))> {
        let s = class_product_closure(&self.inner, &ids).map_err(err)?;
        Ok((s.is_full(), (self.inner.size_of(&s) as u64, self.inner.order() as u64)))
    }

    fn rodgers_saxl<'py>(&self, py: Python<'py>, ids: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &rodgers_saxl_check(&self.inner, &ids).map_err(err)?)
    }

    fn corollary<'py>(&self, py: Python<'py>, ids: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &corollary_index_check(&self.inner, &ids).map_err(err)?)
    }

    /// `"rs"` or `"cor"`.
    fn auto_tuple(&self, mode: &str) -> PyResult<Vec<usize>> {
        auto_tuple(&self.inner, mode).map_err(err)
    }

    fn width(&self, class_id: usize) -> PyResult<Option<usize>> {
        conjugacy_width(&self.inner, class_id).map_err(err)
    }
}

#[pyfunction]
#[pyo3(signature = (seed=0, only=None))]
fn verify_suite<'py>(py: Python<'py>, seed: u64, only: Option<Vec<u8>>) -> PyResult<Bound<'py, PyAny>> {
    let report = match only {
        None => contring::suite::run_suite(seed),
        Some(ids) => {
            let criteria = ids
                .into_iter()
                .map(|id| {
                    contring::suite::run_criterion(id, seed)
                        .ok_or_else(|| ContringError::new_err(format!("unknown criterion {id}")))
                })
                .collect::<PyResult<Vec<_>>>()?;
            contring::suite::SuiteReport {
                seed,
                passed: criteria.iter().all(|c| c.passed),
                criteria,
            }
        }
    };
    to_py(py, &report)
}

/// Runs the command line with `args` (without the program name).
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String) {
    contring::cli::run(std::iter::once("contring".to_string()).chain(args))
}

#[pymodule]
fn contring_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ContringError", m.py().get_type::<ContringError>())?;
    m.add_class::<PyMat>()?;
    m.add_class::<PyClassTable>()?;
    m.add_function(wrap_pyfunction!(dist, m)?)?;
    m.add_function(wrap_pyfunction!(center_dist, m)?)?;
    m.add_function(wrap_pyfunction!(rcf, m)?)?;
    m.add_function(wrap_pyfunction!(index, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(unit_geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(star_geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(midpoint, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(approx_unit, m)?)?;
    m.add_function(wrap_pyfunction!(sl_project, m)?)?;
    m.add_function(wrap_pyfunction!(tower_density, m)?)?;
    m.add_function(wrap_pyfunction!(verify_suite, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
