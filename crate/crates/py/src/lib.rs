//! Python bindings. Matrices go in and out as lists of row lists; exact
//! values come back as `fractions.Fraction`.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use sinkhorn_core::exact::{self, parse_rational, TerminationReport};
use sinkhorn_core::{
    BigRational, ClassLabel, Error, Label, MbnParams, PositiveMatrix, RationalMatrix, ScalingOrder, SinkhornOptions,
    SinkhornResult,
};

create_exception!(pysinkhorn, NotConvergedError, PyException);
create_exception!(pysinkhorn, ResourceLimitError, PyException);
create_exception!(pysinkhorn, NumericError, PyException);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::NotConverged { .. } => NotConvergedError::new_err(msg),
        Error::ResourceLimit { .. } => ResourceLimitError::new_err(msg),
        Error::NumericFailure(_)
        | Error::ZeroPolynomial
        | Error::BracketingFailure(_)
        | Error::MultipleValidTriples(_)
        | Error::ClassificationFailed => NumericError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn label(text: &str) -> PyResult<Label> {
    text.parse().map_err(py_err)
}

fn order(text: &str) -> PyResult<ScalingOrder> {
    match text {
        "row_first" => Ok(ScalingOrder::RowFirst),
        "col_first" => Ok(ScalingOrder::ColFirst),
        other => Err(PyValueError::new_err(format!("unknown order {other:?}"))),
    }
}

fn fraction<'py>(py: Python<'py>, r: &BigRational) -> PyResult<Bound<'py, PyAny>> {
    // Via Python ints: string conversion is capped for long integers.
    py.import("fractions")?.getattr("Fraction")?.call1((r.numer(), r.denom()))
}

fn fraction_rows<'py>(py: Python<'py>, m: &RationalMatrix) -> PyResult<Bound<'py, PyList>> {
    let rows = PyList::empty(py);
    for i in 0..m.nrows() {
        let row = PyList::empty(py);
        for v in m.row(i) {
            row.append(fraction(py, v)?)?;
        }
        rows.append(row)?;
    }
    Ok(rows)
}

/// Exact entries from anything whose `str()` is an integer, decimal or `p/q`.
fn rational_matrix(rows: &Bound<'_, PyAny>) -> PyResult<RationalMatrix> {
    let mut out = Vec::new();
    for row in rows.try_iter()? {
        let mut vals = Vec::new();
        for v in row?.try_iter()? {
            let text = v?.str()?.to_string();
            vals.push(parse_rational(&text).map_err(py_err)?);
        }
        out.push(vals);
    }
    RationalMatrix::from_rows(out).map_err(py_err)
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<PositiveMatrix> {
    PositiveMatrix::from_rows(rows).map_err(py_err)
}

fn result_dict<'py>(py: Python<'py>, r: &SinkhornResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("limit", r.limit.to_rows())?;
    d.set_item("x", r.x.values().to_vec())?;
    d.set_item("y", r.y.values().to_vec())?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("residual", r.residual)?;
    d.set_item("converged", r.converged)?;
    d.set_item("provenance", r.provenance.as_str())?;
    if let Some(trace) = &r.trace {
        d.set_item("trace", trace.clone())?;
    }
    Ok(d)
}

fn class_dict<'py>(py: Python<'py>, c: &ClassLabel<f64>) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("label", c.label.as_str())?;
    d.set_item("K", c.k)?;
    d.set_item("P", c.p.as_slice().to_vec())?;
    d.set_item("Q", c.q.as_slice().to_vec())?;
    d.set_item("lambda", c.lambda)?;
    Ok(d)
}

fn report_dict<'py>(py: Python<'py>, r: &TerminationReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("steps_run", r.steps_run)?;
    d.set_item("terminated", r.terminated)?;
    d.set_item("terminating_step", r.terminating_step)?;
    d.set_item("final_deviation", fraction(py, &r.final_deviation)?)?;
    Ok(d)
}

/// Alternate row and column scaling to the doubly stochastic limit.
#[pyfunction]
#[pyo3(signature = (rows, tol=1e-13, max_iters=100_000, order="row_first", trace=false))]
fn scale<'py>(
    py: Python<'py>,
    rows: Vec<Vec<f64>>,
    tol: f64,
    max_iters: usize,
    order: &str,
    trace: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = SinkhornOptions { tol, max_iters, record_trace: trace, order: self::order(order)? };
    let r = sinkhorn_core::sinkhorn(&matrix(rows)?, &opts).map_err(py_err)?;
    result_dict(py, &r)
}

/// Scaling to prescribed row sums `r` and column sums `c`.
#[pyfunction]
#[pyo3(signature = (rows, row_sums, col_sums, tol=1e-13, max_iters=100_000))]
fn target_scale<'py>(
    py: Python<'py>,
    rows: Vec<Vec<f64>>,
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
    tol: f64,
    max_iters: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = SinkhornOptions { tol, max_iters, ..SinkhornOptions::default() };
    let r = sinkhorn_core::target_sinkhorn(&matrix(rows)?, &row_sums, &col_sums, &opts).map_err(py_err)?;
    result_dict(py, &r)
}

/// Limit by closed form when the class is known, by iteration otherwise.
/// The `class` key is `None` for inputs outside the two-value 3×3 family.
#[pyfunction]
#[pyo3(signature = (rows, tol=1e-13))]
fn limit<'py>(py: Python<'py>, rows: Vec<Vec<f64>>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let c = sinkhorn_core::classified_limit(&matrix(rows)?, tol).map_err(py_err)?;
    let d = result_dict(py, &c.result)?;
    match &c.class {
        Some(class) => d.set_item("class", class_dict(py, class)?)?,
        None => d.set_item("class", py.None())?,
    }
    Ok(d)
}

#[pyfunction]
fn classify<'py>(py: Python<'py>, rows: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let c = sinkhorn_core::classify(&matrix(rows)?).map_err(py_err)?;
    class_dict(py, &c)
}

/// Exact classification; `K` and `lambda` come back as fractions.
#[pyfunction]
fn classify_exact<'py>(py: Python<'py>, rows: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyDict>> {
    let c = sinkhorn_core::classify_exact(&rational_matrix(rows)?).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("label", c.label.as_str())?;
    d.set_item("K", fraction(py, &c.k)?)?;
    d.set_item("P", c.p.as_slice().to_vec())?;
    d.set_item("Q", c.q.as_slice().to_vec())?;
    d.set_item("lambda", fraction(py, &c.lambda)?)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (label, k))]
fn canonical_matrix(label: &str, k: f64) -> PyResult<Vec<Vec<f64>>> {
    Ok(sinkhorn_core::canonical_matrix(self::label(label)?, k).map_err(py_err)?.to_rows())
}

/// Closed-form limit of a canonical class; `values` holds the distinct
/// shape entries in row-major order.
#[pyfunction]
#[pyo3(signature = (label, k))]
fn canonical_limit<'py>(py: Python<'py>, label: &str, k: f64) -> PyResult<Bound<'py, PyDict>> {
    let lim = sinkhorn_core::canonical_limit(self::label(label)?, k).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("label", lim.label.as_str())?;
    d.set_item("K", lim.k)?;
    d.set_item("limit", lim.s.to_rows())?;
    d.set_item("x", lim.x.values().to_vec())?;
    d.set_item("values", lim.shape_values())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (k, tol=1e-13))]
fn a7_limit<'py>(py: Python<'py>, k: f64, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let sol = sinkhorn_core::a7_limit(k, tol).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("K", sol.k)?;
    d.set_item("x", sol.x)?;
    d.set_item("y", sol.y)?;
    d.set_item("z", sol.z)?;
    d.set_item("limit", sol.s.to_rows())?;
    d.set_item("residuals", sol.residuals.to_vec())?;
    d.set_item("positive_root_count", sol.positive_root_count)?;
    d.set_item("provenance", sol.provenance.as_str())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (m, b, n, k, ell))]
fn mbn_limit<'py>(py: Python<'py>, m: f64, b: f64, n: f64, k: usize, ell: usize) -> PyResult<Bound<'py, PyDict>> {
    let params = MbnParams::new(m, b, n, k, ell).map_err(py_err)?;
    let lim = sinkhorn_core::mbn_limit(&params);
    let d = PyDict::new(py);
    d.set_item("L", params.ratio())?;
    d.set_item("a", lim.a)?;
    d.set_item("b", lim.b)?;
    d.set_item("c", lim.c)?;
    d.set_item("x", lim.x)?;
    d.set_item("y", lim.y)?;
    d.set_item("limit", lim.expand(k, ell).map_err(py_err)?.to_rows())?;
    Ok(d)
}

/// Exact alternate scaling; returns `(iterates, report)` with `iterates[0]`
/// the input.
#[pyfunction]
#[pyo3(signature = (rows, steps=20, max_bits=exact::DEFAULT_MAX_DENOMINATOR_BITS))]
fn exact_trace<'py>(
    py: Python<'py>,
    rows: &Bound<'py, PyAny>,
    steps: usize,
    max_bits: u64,
) -> PyResult<(Bound<'py, PyList>, Bound<'py, PyDict>)> {
    let a = rational_matrix(rows)?;
    let (iterates, report) = exact::exact_scaling_trace_bounded(&a, steps, max_bits).map_err(py_err)?;
    let out = PyList::empty(py);
    for it in &iterates {
        out.append(fraction_rows(py, it)?)?;
    }
    Ok((out, report_dict(py, &report)?))
}

/// `r` with `K = r(r+1)/2`, or `None` when `K` is not triangular.
#[pyfunction]
fn triangular_parameter(k: u64) -> Option<u64> {
    exact::triangular_parameter(k)
}

/// Exact `(a, b, c)` of the class A2 limit at `K = r(r+1)/2`.
#[pyfunction]
fn a2_rational_limit<'py>(py: Python<'py>, r: u64) -> PyResult<Bound<'py, PyDict>> {
    let lim = exact::a2_rational_limit(r).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("K", fraction(py, &lim.k)?)?;
    d.set_item("a", fraction(py, &lim.a)?)?;
    d.set_item("b", fraction(py, &lim.b)?)?;
    d.set_item("c", fraction(py, &lim.c)?)?;
    d.set_item("x_sq", fraction(py, &lim.x_sq)?)?;
    d.set_item("y_sq", fraction(py, &lim.y_sq)?)?;
    Ok(d)
}

/// Rational approximations of the cube root of 2 minus 1. Stops early at the
/// denominator bound; the second element is the bit count reached, if so.
#[pyfunction]
#[pyo3(signature = (steps=60, max_bits=exact::CONVERGENT_MAX_DENOMINATOR_BITS))]
fn cube_root_convergents<'py>(
    py: Python<'py>,
    steps: usize,
    max_bits: u64,
) -> PyResult<(Bound<'py, PyList>, Option<u64>)> {
    let conv = exact::cube_root_convergents_bounded(steps, max_bits).map_err(py_err)?;
    let out = PyList::empty(py);
    for t in &conv.terms {
        out.append(fraction(py, t)?)?;
    }
    Ok((out, conv.stopped_at_bits))
}

#[pymodule]
fn pysinkhorn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("NotConvergedError", py.get_type::<NotConvergedError>())?;
    m.add("ResourceLimitError", py.get_type::<ResourceLimitError>())?;
    m.add("NumericError", py.get_type::<NumericError>())?;
    m.add_function(wrap_pyfunction!(scale, m)?)?;
    m.add_function(wrap_pyfunction!(target_scale, m)?)?;
    m.add_function(wrap_pyfunction!(limit, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(classify_exact, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_limit, m)?)?;
    m.add_function(wrap_pyfunction!(a7_limit, m)?)?;
    m.add_function(wrap_pyfunction!(mbn_limit, m)?)?;
    m.add_function(wrap_pyfunction!(exact_trace, m)?)?;
    m.add_function(wrap_pyfunction!(triangular_parameter, m)?)?;
    m.add_function(wrap_pyfunction!(a2_rational_limit, m)?)?;
    m.add_function(wrap_pyfunction!(cube_root_convergents, m)?)?;
    Ok(())
}
