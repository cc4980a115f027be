//! Python bindings: one-call intersections, classification, the exact
//! reference, error bounds, and the basic error-free transformations.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use xsect_core::eft;
use xsect_core::geom::{ArcLatQuery, Classification, GeomError, Vec3};
use xsect_core::intersect::{self as core_intersect, Method};
use xsect_core::oracle;

fn vec3(t: (f64, f64, f64)) -> Vec3 {
    Vec3::new(t.0, t.1, t.2)
}

fn query(x1: (f64, f64, f64), x2: (f64, f64, f64), z0: f64) -> PyResult<ArcLatQuery> {
    ArcLatQuery::new(vec3(x1), vec3(x2), z0).map_err(geom_err)
}

fn geom_err(e: GeomError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn method(name: &str) -> PyResult<Method> {
    Method::parse(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown method `{name}`")))
}

fn class_name(c: Classification) -> &'static str {
    match c {
        Classification::NoIntersection => "none",
        Classification::Tangent => "tangent",
        Classification::TwoPoints => "two-points",
    }
}

/// Intersect the great-circle arc through `x1`, `x2` with the plane
/// `z = z0`. Returns `(classification, points)` where `points` is a list of
/// `(x, y, z)` tuples (0, 1 or 2 entries).
#[pyfunction]
#[pyo3(signature = (x1, x2, z0, method_name = "accux"))]
fn intersect(
    x1: (f64, f64, f64),
    x2: (f64, f64, f64),
    z0: f64,
    method_name: &str,
) -> PyResult<(&'static str, Vec<(f64, f64, f64)>)> {
    let q = query(x1, x2, z0)?;
    let sol = core_intersect::solve(&q, method(method_name)?).map_err(geom_err)?;
    Ok((
        class_name(sol.classification),
        sol.points().map(|p| (p.x, p.y, p.z)).collect(),
    ))
}

/// Classification only: "none", "tangent" or "two-points".
#[pyfunction]
fn classify(x1: (f64, f64, f64), x2: (f64, f64, f64), z0: f64) -> PyResult<&'static str> {
    let q = query(x1, x2, z0)?;
    let (canon, _) = core_intersect::canonicalize(&q).map_err(geom_err)?;
    Ok(class_name(core_intersect::classify(&canon).map_err(geom_err)?))
}

/// Correctly rounded reference intersection from the exact oracle.
#[pyfunction]
#[pyo3(signature = (x1, x2, z0, target_bits = 212))]
fn reference(
    x1: (f64, f64, f64),
    x2: (f64, f64, f64),
    z0: f64,
    target_bits: u32,
) -> PyResult<(&'static str, Vec<(f64, f64, f64)>)> {
    let q = query(x1, x2, z0)?;
    let out = oracle::intersect_reference(&q, target_bits).map_err(geom_err)?;
    let pts = out
        .points()
        .iter()
        .map(|p| {
            let r = p.rounded();
            (r.x, r.y, r.z)
        })
        .collect();
    Ok((class_name(out.classification()), pts))
}

/// A-priori relative error bound of the accurate tier at height `z0`.
#[pyfunction]
fn accux_error_bound(z0: f64) -> f64 {
    core_intersect::accux_error_bound(z0)
}

/// A-priori relative error bound of the direct floating-point tier for one
/// query (infinite when the crossing is tangent or absent).
#[pyfunction]
fn naive_error_bound(x1: (f64, f64, f64), x2: (f64, f64, f64), z0: f64) -> PyResult<f64> {
    Ok(core_intersect::naive_error_bound(&query(x1, x2, z0)?))
}

/// Exact sum: returns `(hi, lo)` with `hi + lo == a + b`.
#[pyfunction]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let r = eft::two_sum(a, b);
    (r.hi, r.lo)
}

/// Exact product: returns `(hi, lo)` with `hi + lo == a * b`.
#[pyfunction]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let r = eft::two_prod(a, b);
    (r.hi, r.lo)
}

#[pymodule]
fn xsect_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(intersect, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(reference, m)?)?;
    m.add_function(wrap_pyfunction!(accux_error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(naive_error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(two_sum, m)?)?;
    m.add_function(wrap_pyfunction!(two_prod, m)?)?;
    m.add("UNIT_ROUNDOFF", eft::UNIT_ROUNDOFF)?;
    Ok(())
}
