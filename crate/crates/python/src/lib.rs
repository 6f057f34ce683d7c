//! Python bindings for `histopush`.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use histopush::{bounds, pushforward, pwl, relunet, transport, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        Error::Internal(_) | Error::NotConverged(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Piecewise-constant density on the `n x n` grid of `[0,1]^2`.
#[pyclass(name = "Histogram2D", module = "histopush", frozen)]
struct PyHistogram2D(histopush::Histogram2D);

#[pymethods]
impl PyHistogram2D {
    /// `weights` is an `n x n` nested list of positive densities summing to `n^2`.
    #[new]
    fn new(weights: Vec<Vec<f64>>) -> PyResult<Self> {
        histopush::Histogram2D::new(weights.len(), &weights).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn uniform(n: usize) -> Self {
        Self(histopush::Histogram2D::uniform(n))
    }

    #[staticmethod]
    #[pyo3(signature = (n, seed=0, spread=1.0))]
    fn random(n: usize, seed: u64, spread: f64) -> PyResult<Self> {
        histopush::Histogram2D::random(n, seed, spread).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        histopush::Histogram2D::from_json(text).map(Self).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn weights(&self) -> Vec<Vec<f64>> {
        self.0.rows()
    }

    fn marginal_first(&self) -> Vec<f64> {
        self.0.marginal_first().weights().to_vec()
    }

    fn conditional_second(&self, i: usize) -> PyResult<Vec<f64>> {
        self.0.conditional_second(i).map(|h| h.weights().to_vec()).map_err(to_py)
    }

    #[pyo3(signature = (count, seed=0))]
    fn sample(&self, count: usize, seed: u64) -> Vec<(f64, f64)> {
        self.0.sample(count, seed).into_iter().map(|p| (p[0], p[1])).collect()
    }

    fn __repr__(&self) -> String {
        format!("Histogram2D(n={})", self.0.n())
    }
}

/// Feed-forward ReLU network; no activation after the last layer.
#[pyclass(name = "ReluNet", module = "histopush", frozen)]
struct PyReluNet(relunet::ReluNet);

#[pymethods]
impl PyReluNet {
    /// Dense layers as `[(matrix, bias), ...]`.
    #[new]
    fn new(layers: Vec<(Vec<Vec<f64>>, Vec<f64>)>) -> PyResult<Self> {
        let layers = layers
            .into_iter()
            .map(|(m, b)| relunet::AffineLayer::from_dense(&m, b))
            .collect::<histopush::Result<Vec<_>>>()
            .map_err(to_py)?;
        relunet::ReluNet::new(layers).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn sawtooth(s: usize) -> Self {
        Self(relunet::sawtooth(s))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        relunet::ReluNet::from_json(text).map(Self).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.0.depth()
    }

    #[getter]
    fn in_dim(&self) -> usize {
        self.0.in_dim()
    }

    #[getter]
    fn out_dim(&self) -> usize {
        self.0.out_dim()
    }

    fn eval(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.eval(&x).map_err(to_py)
    }

    /// Evaluates a scalar-input net at every point of `xs`.
    fn eval_many(&self, py: Python<'_>, xs: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        if self.0.in_dim() != 1 {
            return Err(to_py(Error::DimensionMismatch { expected: 1, got: self.0.in_dim() }));
        }
        Ok(py.detach(|| xs.iter().map(|&x| self.0.eval1(x)).collect()))
    }

    /// Breakpoints and per-piece `(slope, intercept)` pairs on `[a, b]`.
    #[pyo3(signature = (a=0.0, b=1.0, exact=false))]
    fn pieces<'py>(&self, py: Python<'py>, a: f64, b: f64, exact: bool) -> PyResult<Bound<'py, PyDict>> {
        let pd = if exact {
            relunet::extract_pieces_exact(&self.0, a, b)
        } else {
            relunet::extract_pieces(&self.0, a, b)
        }
        .map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("breakpoints", pd.breakpoints().to_vec())?;
        d.set_item("pieces", pd.pieces().to_vec())?;
        d.set_item("zeta", pd.count())?;
        d.set_item("lines", pd.image_lines())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("ReluNet(size={}, depth={})", self.0.size(), self.0.depth())
    }
}

fn report_dict<'py>(py: Python<'py>, r: &pushforward::BuildReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("s", r.s)?;
    d.set_item("size", r.size)?;
    d.set_item("depth", r.depth)?;
    d.set_item("W", r.width)?;
    d.set_item("guarantee", r.guarantee)?;
    d.set_item(
        "variant",
        match r.variant {
            pushforward::Variant::Deep => "deep",
            pushforward::Variant::Baseline => "baseline",
        },
    )?;
    Ok(d)
}

/// Generator network for `hist` at accuracy `epsilon`; returns `(net, report)`.
#[pyfunction]
#[pyo3(signature = (hist, epsilon, variant="deep", width=None))]
fn build_phi<'py>(
    py: Python<'py>,
    hist: &PyHistogram2D,
    epsilon: f64,
    variant: &str,
    width: Option<usize>,
) -> PyResult<(PyReluNet, Bound<'py, PyDict>)> {
    let p = &hist.0;
    let (net, report) = py
        .detach(|| match variant {
            "deep" => pushforward::build_phi(p, epsilon, width),
            "baseline" => pushforward::build_phi_baseline(p, epsilon),
            other => Err(Error::Domain(format!("unknown variant {other:?}"))),
        })
        .map_err(to_py)?;
    let d = report_dict(py, &report)?;
    Ok((PyReluNet(net), d))
}

/// Bracket `estimate +- slack` on `W(hist, net#U)`.
#[pyfunction]
#[pyo3(signature = (hist, net, r=4, m=1000))]
fn estimate_w<'py>(py: Python<'py>, hist: &PyHistogram2D, net: &PyReluNet, r: usize, m: usize) -> PyResult<Bound<'py, PyDict>> {
    let est = py.detach(|| transport::estimate_w(&hist.0, &net.0, r, m)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("estimate", est.estimate)?;
    d.set_item("slack", est.slack)?;
    d.set_item("lower", est.lower)?;
    d.set_item("upper", est.upper)?;
    d.set_item("r", est.r)?;
    d.set_item("m", est.m)?;
    d.set_item("method", if est.method == transport::Method::Exact { "exact" } else { "sinkhorn" })?;
    Ok(d)
}

#[pyfunction]
fn choose_s(n: usize, epsilon: f64) -> PyResult<usize> {
    pushforward::choose_s(n, epsilon).map_err(to_py)
}

#[pyfunction]
fn guarantee(n: usize, s: usize) -> f64 {
    pushforward::guarantee(n, s)
}

/// Exact 1-D Wasserstein-1 distance between two densities on `n` equal bins.
#[pyfunction]
fn wasserstein1d(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    let p = histopush::Histogram1D::new(p).map_err(to_py)?;
    let q = histopush::Histogram1D::new(q).map_err(to_py)?;
    Ok(pwl::wasserstein1d(&p, &q))
}

#[pyfunction]
fn c_constant(d: u32) -> PyResult<f64> {
    bounds::c_constant(d).map_err(to_py)
}

#[pyfunction]
fn zeta_cap(size: usize, depth: usize) -> PyResult<f64> {
    bounds::zeta_cap(size, depth).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, epsilon, depth, d=2))]
fn lower_bound_size(n: usize, epsilon: f64, depth: usize, d: u32) -> PyResult<f64> {
    bounds::lower_bound_size(n, epsilon, depth, d).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, zeta, d=2))]
fn w_floor(n: usize, zeta: f64, d: u32) -> PyResult<f64> {
    bounds::w_floor(n, zeta, d).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "histopush")]
fn histopush_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHistogram2D>()?;
    m.add_class::<PyReluNet>()?;
    m.add_function(wrap_pyfunction!(build_phi, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_w, m)?)?;
    m.add_function(wrap_pyfunction!(choose_s, m)?)?;
    m.add_function(wrap_pyfunction!(guarantee, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein1d, m)?)?;
    m.add_function(wrap_pyfunction!(c_constant, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_cap, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_size, m)?)?;
    m.add_function(wrap_pyfunction!(w_floor, m)?)?;
    Ok(())
}
