//! Python bindings: states, tomogram grids, simulated acquisition, the
//! uncertainty checks and Radon reconstruction.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use tomocheck::quadrature::linspace;
use tomocheck::radon::{Apodization, ForwardOptions};
use tomocheck::tomogram::{equispaced_thetas, QuadratureRecord, SampleMetadata};
use tomocheck::uncertainty::{default_theta_scan, f_scan};
use tomocheck::{
    AcquisitionPlan, CheckConfig, FockState, GaussianState, OpticalTomogramGrid, QuadratureSampleSet,
    ReconstructionOptions, StateModel, SymplecticPoint, TomographicData, WignerGrid,
};

create_exception!(pytomocheck, TomoError, PyValueError);

fn err(e: tomocheck::TomoError) -> PyErr {
    TomoError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

/// A quantum state with closed-form tomogram and Wigner function.
#[pyclass(name = "State", frozen, from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: StateModel,
}

#[pymethods]
impl PyState {
    #[staticmethod]
    fn vacuum() -> Self {
        PyState {
            inner: GaussianState::vacuum().into(),
        }
    }

    #[staticmethod]
    fn coherent(alpha_re: f64, alpha_im: f64) -> PyResult<Self> {
        Ok(PyState {
            inner: GaussianState::coherent(alpha_re, alpha_im).map_err(err)?.into(),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (r, phi = 0.0))]
    fn squeezed(r: f64, phi: f64) -> PyResult<Self> {
        Ok(PyState {
            inner: GaussianState::squeezed_vacuum(r, phi).map_err(err)?.into(),
        })
    }

    #[staticmethod]
    fn thermal(nbar: f64) -> PyResult<Self> {
        Ok(PyState {
            inner: GaussianState::thermal(nbar).map_err(err)?.into(),
        })
    }

    #[staticmethod]
    fn fock(n: u32) -> Self {
        PyState {
            inner: StateModel::Fock(FockState::new(n)),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (sigma_qq, sigma_pp, sigma_qp = 0.0, mean_q = 0.0, mean_p = 0.0))]
    fn gaussian(sigma_qq: f64, sigma_pp: f64, sigma_qp: f64, mean_q: f64, mean_p: f64) -> PyResult<Self> {
        Ok(PyState {
            inner: GaussianState::new(mean_q, mean_p, sigma_qq, sigma_pp, sigma_qp)
                .map_err(err)?
                .into(),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyState {
            inner: StateModel::from_json(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| TomoError::new_err(e.to_string()))
    }

    fn quadrature_mean(&self, theta: f64) -> f64 {
        self.inner.quadrature_mean(theta)
    }

    fn quadrature_variance(&self, theta: f64) -> f64 {
        self.inner.quadrature_variance(theta)
    }

    fn tomogram_density(&self, theta: f64, x: f64) -> f64 {
        self.inner.tomogram_density(theta, x)
    }

    fn wigner(&self, q: f64, p: f64) -> f64 {
        self.inner.exact_wigner(q, p)
    }

    /// (σqq, σpp, σqp)
    fn covariance(&self) -> (f64, f64, f64) {
        let c = self.inner.exact_covariance();
        (c.sigma_qq, c.sigma_pp, c.sigma_qp)
    }

    fn __repr__(&self) -> String {
        format!("State({})", self.to_json().unwrap_or_default())
    }
}

/// Optical tomogram sampled on a θ × X grid.
#[pyclass(name = "TomogramGrid", frozen, from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: OpticalTomogramGrid,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(thetas: Vec<f64>, xs: Vec<f64>, w: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyGrid {
            inner: OpticalTomogramGrid::new(thetas, xs, w).map_err(err)?,
        })
    }

    /// Exact tomogram on `thetas` equispaced phases over [0, π) and
    /// `x_range = (start, end, points)`.
    #[staticmethod]
    #[pyo3(signature = (state, thetas = 48, x_range = (-7.0, 7.0, 281)))]
    fn from_state(state: &PyState, thetas: usize, x_range: (f64, f64, usize)) -> PyResult<Self> {
        let xs = linspace(x_range.0, x_range.1, x_range.2);
        Ok(PyGrid {
            inner: OpticalTomogramGrid::from_state(&state.inner, equispaced_thetas(thetas), xs).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyGrid {
            inner: tomocheck::io::read_grid_json(text.as_bytes()).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        tomocheck::io::grid_to_json(&self.inner, None).map_err(err)
    }

    #[getter]
    fn thetas(&self) -> Vec<f64> {
        self.inner.thetas().to_vec()
    }

    #[getter]
    fn xs(&self) -> Vec<f64> {
        self.inner.xs().to_vec()
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.rows().to_vec()
    }

    /// Raises if a density is negative or a row integral is off by more than `eps`.
    #[pyo3(signature = (eps = 1e-6))]
    fn validate(&self, eps: f64) -> PyResult<()> {
        self.inner.validate(eps).into_result().map_err(err)
    }

    fn density(&self, theta: f64, x: f64) -> PyResult<f64> {
        self.inner.density(theta, x).map_err(err)
    }

    fn symplectic_density(&self, mu: f64, nu: f64, x: f64) -> PyResult<f64> {
        let point = SymplecticPoint::new(mu, nu).map_err(err)?;
        self.inner.symplectic_density(point, x).map_err(err)
    }

    fn moment(&self, theta: f64, n: u32) -> PyResult<f64> {
        self.inner.moment(theta, n).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "TomogramGrid({} phases x {} points)",
            self.inner.thetas().len(),
            self.inner.xs().len()
        )
    }
}

/// Homodyne records (θ, X).
#[pyclass(name = "Samples", frozen, from_py_object)]
#[derive(Clone)]
struct PySamples {
    inner: QuadratureSampleSet,
}

#[pymethods]
impl PySamples {
    #[new]
    #[pyo3(signature = (records, min_samples_per_phase = 1000))]
    fn new(records: Vec<(f64, f64)>, min_samples_per_phase: usize) -> Self {
        let records = records.into_iter().map(|(theta, x)| QuadratureRecord { theta, x }).collect();
        PySamples {
            inner: QuadratureSampleSet::new(records, SampleMetadata::default())
                .with_min_samples_per_phase(min_samples_per_phase),
        }
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(PySamples {
            inner: tomocheck::io::read_samples_csv(text.as_bytes(), "python").map_err(err)?,
        })
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        tomocheck::io::write_samples_csv(&self.inner, &mut buf).map_err(err)?;
        String::from_utf8(buf).map_err(|e| TomoError::new_err(e.to_string()))
    }

    #[getter]
    fn records(&self) -> Vec<(f64, f64)> {
        self.inner.records().iter().map(|r| (r.theta, r.x)).collect()
    }

    /// Values recorded at `theta`, with θ + π folded in.
    #[pyo3(signature = (theta, tol = 1e-6))]
    fn values_at(&self, theta: f64, tol: f64) -> Vec<f64> {
        self.inner.values_at(theta, tol)
    }

    /// (estimate, standard error) of the n-th moment at `theta`.
    #[pyo3(signature = (theta, n, tol = 1e-6))]
    fn moment(&self, theta: f64, n: u32, tol: f64) -> PyResult<(f64, f64)> {
        let m = self.inner.moment(theta, n, tol).map_err(err)?;
        Ok((m.estimate, m.standard_error))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Wigner function on a (q, p) grid, normalized to ∫∫ W = 2π.
#[pyclass(name = "WignerGrid", frozen, from_py_object)]
#[derive(Clone)]
struct PyWigner {
    inner: WignerGrid,
}

#[pymethods]
impl PyWigner {
    #[staticmethod]
    fn from_state(state: &PyState, qs: Vec<f64>, ps: Vec<f64>) -> PyResult<Self> {
        Ok(PyWigner {
            inner: WignerGrid::from_state(&state.inner, qs, ps).map_err(err)?,
        })
    }

    #[getter]
    fn qs(&self) -> Vec<f64> {
        self.inner.qs().to_vec()
    }

    #[getter]
    fn ps(&self) -> Vec<f64> {
        self.inner.ps().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        self.inner.values().to_vec()
    }

    fn value_at(&self, q: f64, p: f64) -> f64 {
        self.inner.value_at(q, p)
    }

    fn integral(&self) -> f64 {
        self.inner.integral()
    }

    /// (q, p, value) at the largest grid value.
    fn peak(&self) -> (f64, f64, f64) {
        self.inner.peak()
    }

    fn min_value(&self) -> f64 {
        self.inner.min_value()
    }

    fn to_json(&self) -> PyResult<String> {
        tomocheck::io::wigner_to_json(&self.inner, None).map_err(err)
    }
}

/// Simulated homodyne acquisition.
#[pyfunction]
#[pyo3(signature = (state, phases, samples_per_phase, seed = 0, noise_sigma = 0.0))]
fn acquire(
    py: Python<'_>,
    state: &PyState,
    phases: Vec<f64>,
    samples_per_phase: usize,
    seed: u64,
    noise_sigma: f64,
) -> PyResult<PySamples> {
    let plan = AcquisitionPlan::new(phases, samples_per_phase, seed, noise_sigma).map_err(err)?;
    let inner = py.detach(|| tomocheck::acquire(&state.inner, &plan));
    Ok(PySamples { inner })
}

/// Bins samples into a tomogram grid.
#[pyfunction]
#[pyo3(signature = (samples, theta_bins, x_bins, x_range = (-7.0, 7.0)))]
fn histogram(samples: &PySamples, theta_bins: usize, x_bins: usize, x_range: (f64, f64)) -> PyResult<PyGrid> {
    Ok(PyGrid {
        inner: tomocheck::histogram_tomogram(&samples.inner, theta_bins, x_bins, x_range).map_err(err)?,
    })
}

/// Full uncertainty report as a dict. `data` is a TomogramGrid or Samples;
/// `scan` defaults to π/48 steps for grids and to the measured phases for samples.
#[pyfunction]
#[pyo3(signature = (data, scan = None, replicates = 200, seed = 0, sample_slack_se = 3.0, grid_slack = 1e-9))]
fn check(
    py: Python<'_>,
    data: &Bound<'_, PyAny>,
    scan: Option<Vec<f64>>,
    replicates: usize,
    seed: u64,
    sample_slack_se: f64,
    grid_slack: f64,
) -> PyResult<Py<PyAny>> {
    let grid = data.cast::<PyGrid>().ok().map(|g| g.get().inner.clone());
    let samples = data.cast::<PySamples>().ok().map(|s| s.get().inner.clone());
    let tomographic: TomographicData<'_> = match (&grid, &samples) {
        (Some(g), _) => g.into(),
        (None, Some(s)) => s.into(),
        _ => return Err(TomoError::new_err("data must be a TomogramGrid or Samples")),
    };
    let thetas = match (scan, &samples) {
        (Some(t), _) => t,
        (None, Some(s)) => s.distinct_phases(1e-6),
        (None, None) => default_theta_scan(),
    };
    let config = CheckConfig {
        bootstrap_replicates: replicates,
        sample_slack_se,
        grid_slack,
        theta_scan: thetas.clone(),
        seed,
        ..CheckConfig::default()
    };
    let report = py.detach(|| f_scan(tomographic, &thetas, &config)).map_err(err)?;
    let value = serde_json::to_value(&report).map_err(|e| TomoError::new_err(e.to_string()))?;
    to_py(py, &value)
}

/// Filtered back-projection of a tomogram grid onto `qs` × `ps`.
#[pyfunction]
#[pyo3(signature = (grid, qs, ps, cutoff = 0.9, apodize = false))]
fn inverse_radon(
    py: Python<'_>,
    grid: &PyGrid,
    qs: Vec<f64>,
    ps: Vec<f64>,
    cutoff: f64,
    apodize: bool,
) -> PyResult<PyWigner> {
    let options = ReconstructionOptions {
        cutoff_fraction: cutoff,
        apodization: if apodize { Apodization::Cosine } else { Apodization::None },
    };
    let inner = py
        .detach(|| tomocheck::inverse_radon(&grid.inner, &qs, &ps, options))
        .map_err(err)?;
    Ok(PyWigner { inner })
}

/// Projects a Wigner grid; returns the tomogram and each row's normalization defect.
#[pyfunction]
fn forward_radon(py: Python<'_>, wigner: &PyWigner, thetas: Vec<f64>, xs: Vec<f64>) -> PyResult<(PyGrid, Vec<f64>)> {
    let out = py
        .detach(|| tomocheck::forward_radon(&wigner.inner, &thetas, &xs, ForwardOptions::default()))
        .map_err(err)?;
    Ok((PyGrid { inner: out.grid }, out.defects))
}

#[pymodule]
fn pytomocheck(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TomoError", m.py().get_type::<TomoError>())?;
    m.add_class::<PyState>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PySamples>()?;
    m.add_class::<PyWigner>()?;
    m.add_function(wrap_pyfunction!(acquire, m)?)?;
    m.add_function(wrap_pyfunction!(histogram, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_radon, m)?)?;
    m.add_function(wrap_pyfunction!(forward_radon, m)?)?;
    Ok(())
}
