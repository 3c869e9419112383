//! Python bindings for twistfft.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use twistfft::analysis::{self, CLOSURE_CAP, DEFAULT_TOLERANCE};
use twistfft::synthesis::{self, count_closed_form, CountReport};
use twistfft::{Mode, SchemeConfig, Variant};

fn err(e: twistfft::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_variant(tag: &str) -> PyResult<Variant> {
    tag.parse().map_err(err)
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn counts_dict<'py>(py: Python<'py>, report: &CountReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (k, v) in &report.counts {
        d.set_item(k.tag(), *v)?;
    }
    Ok(d)
}

/// Compiled Fourier-transform interferometer.
#[pyclass(name = "Scheme", frozen)]
struct PyScheme {
    inner: synthesis::Scheme,
}

#[pymethods]
impl PyScheme {
    #[new]
    #[pyo3(signature = (dim, variant = "basic"))]
    fn new(dim: u64, variant: &str) -> PyResult<Self> {
        let cfg = SchemeConfig::new(dim, parse_variant(variant)?).map_err(err)?;
        Ok(PyScheme {
            inner: synthesis::build_scheme(&cfg).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> u64 {
        self.inner.config.d
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.inner.config.variant.tag()
    }

    #[getter]
    fn factors(&self) -> (u64, u64) {
        (self.inner.config.d_a, self.inner.config.d_b)
    }

    #[getter]
    fn beam_splitters(&self) -> u64 {
        self.inner.netlist.beam_splitter_count()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.netlist.depth()
    }

    /// Declared input modes as (oam, path, pol) tuples.
    fn inputs(&self) -> Vec<(i64, u32, Option<String>)> {
        self.inner.inputs.iter().map(mode_tuple).collect()
    }

    /// Declared output modes as (oam, path, pol) tuples.
    fn outputs(&self) -> Vec<(i64, u32, Option<String>)> {
        self.inner.outputs.iter().map(mode_tuple).collect()
    }

    #[pyo3(signature = (stamp = None))]
    fn netlist_json(&self, stamp: Option<String>) -> PyResult<String> {
        self.inner.document(stamp).to_json().map_err(err)
    }

    /// Restricted operator as rows of complex numbers, outputs by inputs.
    #[pyo3(signature = (t = None, hologram_t = 0.9))]
    fn matrix(&self, t: Option<f64>, hologram_t: f64) -> PyResult<Vec<Vec<Complex64>>> {
        let lm = t
            .map(|t| twistfft::LossModel::new(t, hologram_t))
            .transpose()
            .map_err(err)?;
        let op = analysis::operator_of(&self.inner.netlist, &self.inner.inputs, None, lm.as_ref())
            .map_err(err)?;
        Ok(op
            .block(&self.inner.inputs, &self.inner.outputs)
            .outer_iter()
            .map(|r| r.to_vec())
            .collect())
    }

    /// Applies the scheme to amplitudes on the declared inputs.
    fn transform(&self, amplitudes: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        let n = self.inner.inputs.len();
        if amplitudes.len() != n {
            return Err(PyValueError::new_err(format!("expected {n} amplitudes, got {}", amplitudes.len())));
        }
        let m = self.matrix(None, 1.0)?;
        Ok(m.iter()
            .map(|row| row.iter().zip(&amplitudes).map(|(a, x)| a * x).sum())
            .collect())
    }

    #[pyo3(signature = (tolerance = DEFAULT_TOLERANCE))]
    fn verify<'py>(&self, py: Python<'py>, tolerance: f64) -> PyResult<Bound<'py, PyAny>> {
        let r = analysis::verify_scheme(&self.inner, tolerance, CLOSURE_CAP).map_err(err)?;
        json_to_py(py, &serde_json::to_string(&r).map_err(|e| err(e.into()))?)
    }

    fn __repr__(&self) -> String {
        format!("Scheme(dim={}, variant='{}')", self.inner.config.d, self.inner.config.variant)
    }
}

fn mode_tuple(m: &Mode) -> (i64, u32, Option<String>) {
    (m.oam, m.path, m.pol.map(|p| format!("{p:?}")))
}

/// DFT matrix with entries e^{2πijk/d}/√d.
#[pyfunction]
fn dft_oracle(d: usize) -> PyResult<Vec<Vec<Complex64>>> {
    if d == 0 {
        return Err(PyValueError::new_err("d must be at least 1"));
    }
    Ok(analysis::dft_matrix(d).outer_iter().map(|r| r.to_vec()).collect())
}

/// Optimal (d_A, d_B) for d = 2^m.
#[pyfunction]
fn choose_factorization(m: u32) -> PyResult<(u64, u64)> {
    synthesis::choose_factorization(m).map_err(err)
}

/// Closed-form element counts keyed by element kind.
#[pyfunction]
#[pyo3(signature = (dim, variant = "basic"))]
fn counts<'py>(py: Python<'py>, dim: u64, variant: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg = SchemeConfig::new(dim, parse_variant(variant)?).map_err(err)?;
    counts_dict(py, &count_closed_form(&cfg))
}

/// Normalized fidelity of the lossy basic scheme at each transmission.
#[pyfunction]
#[pyo3(signature = (dim, t_grid, hologram_t = 0.9))]
fn loss_sweep(dim: u64, t_grid: Vec<f64>, hologram_t: f64) -> PyResult<Vec<(f64, f64)>> {
    Ok(analysis::loss_sweep(dim, &t_grid, hologram_t).map_err(err)?.samples)
}

/// Normalized fidelity |Tr(U†M)|² / (d·Tr(M†M)).
#[pyfunction]
fn normalized_fidelity(m: Vec<Vec<Complex64>>, u: Vec<Vec<Complex64>>) -> PyResult<f64> {
    let to_array = |rows: Vec<Vec<Complex64>>| {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        ndarray_from(rows, r, c)
    };
    analysis::normalized_fidelity(&to_array(m)?, &to_array(u)?).map_err(err)
}

fn ndarray_from(rows: Vec<Vec<Complex64>>, r: usize, c: usize) -> PyResult<ndarray::Array2<Complex64>> {
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    ndarray::Array2::from_shape_vec((r, c), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Verifies a netlist document given as JSON text.
#[pyfunction]
#[pyo3(signature = (text, tolerance = DEFAULT_TOLERANCE))]
fn verify_netlist_json<'py>(py: Python<'py>, text: &str, tolerance: f64) -> PyResult<Bound<'py, PyAny>> {
    let doc = twistfft::NetlistDocument::from_json(text).map_err(err)?;
    let r = analysis::verify_document(&doc, tolerance, CLOSURE_CAP).map_err(err)?;
    json_to_py(py, &serde_json::to_string(&r).map_err(|e| err(e.into()))?)
}

#[pymodule]
#[pyo3(name = "twistfft")]
fn twistfft_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScheme>()?;
    m.add_function(wrap_pyfunction!(dft_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(choose_factorization, m)?)?;
    m.add_function(wrap_pyfunction!(counts, m)?)?;
    m.add_function(wrap_pyfunction!(loss_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(verify_netlist_json, m)?)?;
    m.add("VARIANTS", Variant::ALL.iter().map(|v| v.tag()).collect::<Vec<_>>())?;
    Ok(())
}
