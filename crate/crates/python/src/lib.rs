//! Python bindings: `import spectra`.

use std::hash::{DefaultHasher, Hash, Hasher};

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use pyo3::basic::CompareOp;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use spectra_core::spectral::{self, DEFAULT_GRID_STEPS};
use spectra_core::{ConfluenceEvent, PatternError, SpectralError, Tolerances};

fn pattern_err(e: PatternError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn spectral_err(e: SpectralError) -> PyErr {
    match e {
        SpectralError::InvalidFamily(_)
        | SpectralError::Config(_)
        | SpectralError::NotSymmetric(_)
        | SpectralError::Crossing(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A perfect matching of the levels `1..=2J`.
#[pyclass(name = "MergerPattern", module = "spectra", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMergerPattern(spectra_core::MergerPattern);

#[pymethods]
impl PyMergerPattern {
    /// Parses a symbol such as `{[1,4],[2,3]}`.
    #[new]
    fn new(symbol: &str) -> PyResult<Self> {
        spectra_core::parse_symbol(symbol).map(Self).map_err(pattern_err)
    }

    #[staticmethod]
    fn from_pairs(pairs: Vec<(usize, usize)>) -> PyResult<Self> {
        spectra_core::MergerPattern::from_pairs(pairs)
            .map(Self)
            .map_err(pattern_err)
    }

    #[getter]
    fn j(&self) -> usize {
        self.0.j()
    }

    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        self.0.pairs().collect()
    }

    fn partner_of(&self, level: usize) -> Option<usize> {
        self.0.partner_of(level)
    }

    fn is_noncrossing(&self) -> bool {
        self.0.is_noncrossing()
    }

    fn is_centrally_symmetric(&self) -> bool {
        self.0.is_centrally_symmetric()
    }

    fn reflect(&self) -> Self {
        Self(self.0.reflect())
    }

    fn nesting_depth(&self, level: usize) -> usize {
        self.0.nesting_depth(level)
    }

    fn symbol(&self) -> String {
        self.0.symbol()
    }

    fn __str__(&self) -> String {
        self.0.symbol()
    }

    fn __repr__(&self) -> String {
        format!("MergerPattern('{}')", self.0.symbol())
    }

    fn __richcmp__(&self, other: &Self, op: CompareOp) -> bool {
        op.matches(self.0.cmp(&other.0))
    }

    fn __hash__(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.0.hash(&mut h);
        h.finish()
    }
}

fn wrap(list: Vec<spectra_core::MergerPattern>) -> Vec<PyMergerPattern> {
    list.into_iter().map(PyMergerPattern).collect()
}

#[pyfunction]
#[pyo3(signature = (j, cap = spectra_core::DEFAULT_ENUM_CAP))]
fn enumerate_noncrossing(j: usize, cap: usize) -> PyResult<Vec<PyMergerPattern>> {
    spectra_core::enumerate_noncrossing_capped(j, cap)
        .map(wrap)
        .map_err(pattern_err)
}

#[pyfunction]
#[pyo3(signature = (j, cap = spectra_core::DEFAULT_ENUM_CAP))]
fn enumerate_symmetric(j: usize, cap: usize) -> PyResult<Vec<PyMergerPattern>> {
    spectra_core::enumerate_symmetric_capped(j, cap)
        .map(wrap)
        .map_err(pattern_err)
}

/// Number of non-crossing patterns of `2J` levels.
#[pyfunction]
#[pyo3(signature = (j, route = "closed"))]
fn count_t(j: usize, route: &str) -> PyResult<BigUint> {
    match route {
        "closed" => Ok(spectra_core::count_t_closed(j).0),
        "recurrence" => Ok(spectra_core::count_t_recurrence(j).0),
        "series" => Ok(spectra_core::series_f(j + 1).coefficients[j].0.clone()),
        _ => Err(PyValueError::new_err(format!("unknown route {route:?}"))),
    }
}

/// Number of centrally symmetric non-crossing patterns of `2J` levels.
#[pyfunction]
#[pyo3(signature = (j, route = "closed"))]
fn count_p(j: usize, route: &str) -> PyResult<BigUint> {
    match route {
        "closed" => Ok(spectra_core::count_p_closed(j).0),
        "recurrence" => Ok(spectra_core::count_p_recurrence(j).0),
        "series" => Ok(spectra_core::series_g(j + 1).coefficients[j].0.clone()),
        _ => Err(PyValueError::new_err(format!("unknown route {route:?}"))),
    }
}

/// First `order` coefficients of `f = 1 + x f^2`.
#[pyfunction]
fn series_f(order: usize) -> Vec<BigUint> {
    spectra_core::series_f(order)
        .coefficients
        .into_iter()
        .map(|c| c.0)
        .collect()
}

/// First `order` coefficients of the symmetric-pattern generating function.
#[pyfunction]
fn series_g(order: usize) -> Vec<BigUint> {
    spectra_core::series_g(order)
        .coefficients
        .into_iter()
        .map(|c| c.0)
        .collect()
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// The real one-parameter family `H(lambda) = A + lambda B`.
#[pyclass(name = "MatrixFamily", module = "spectra", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMatrixFamily(spectra_core::MatrixFamily);

#[pymethods]
impl PyMatrixFamily {
    #[new]
    #[pyo3(signature = (a, b, symmetric_hint = false))]
    fn new(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, symmetric_hint: bool) -> PyResult<Self> {
        spectra_core::MatrixFamily::from_rows(&a, &b, symmetric_hint)
            .map(Self)
            .map_err(spectral_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        spectra_core::MatrixFamily::from_json(text)
            .map(Self)
            .map_err(spectral_err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    #[getter]
    fn symmetric_hint(&self) -> bool {
        self.0.symmetric_hint()
    }

    #[getter]
    fn a(&self) -> Vec<Vec<f64>> {
        rows(self.0.a())
    }

    #[getter]
    fn b(&self) -> Vec<Vec<f64>> {
        rows(self.0.b())
    }

    /// `A + lambda B` as nested lists.
    fn at(&self, lambda: f64) -> Vec<Vec<f64>> {
        rows(&self.0.at(lambda))
    }

    /// Eigenvalues of `A + lambda B`, sorted by real then imaginary part.
    fn spectrum(&self, lambda: f64) -> PyResult<Vec<Complex64>> {
        spectral::spectrum(&self.0.at(lambda)).map_err(spectral_err)
    }

    fn __repr__(&self) -> String {
        format!("MatrixFamily(dimension={})", self.0.dimension())
    }
}

/// Eigenvalues of a real square matrix given as nested lists.
#[pyfunction]
fn spectrum(matrix: Vec<Vec<f64>>) -> PyResult<Vec<Complex64>> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
    spectral::spectrum(&m).map_err(spectral_err)
}

#[pyfunction]
fn build_witness(pattern: &PyMergerPattern) -> PyResult<PyMatrixFamily> {
    spectral::build_witness(&pattern.0)
        .map(PyMatrixFamily)
        .map_err(spectral_err)
}

#[pyfunction]
fn witness_lambda_max(pattern: &PyMergerPattern) -> PyResult<f64> {
    spectral::witness_lambda_max(&pattern.0).map_err(spectral_err)
}

fn event_dicts<'py>(py: Python<'py>, events: &[ConfluenceEvent]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    events
        .iter()
        .map(|e| {
            let d = PyDict::new(py);
            d.set_item("lambda_star", e.lambda_star)?;
            d.set_item("pair", (e.pair[0], e.pair[1]))?;
            d.set_item("value", e.value)?;
            Ok(d)
        })
        .collect()
}

fn tolerances(eps_im: f64, eps_gap: f64, eps_lambda: f64) -> Tolerances {
    Tolerances {
        im_rel: eps_im,
        gap_rel: eps_gap,
        lambda: eps_lambda,
    }
}

/// Sweeps `lambda` over `[0, lambda_max]` and returns the observed pattern
/// together with its confluence events.
#[pyfunction]
#[pyo3(signature = (family, lambda_max, steps = DEFAULT_GRID_STEPS, eps_im = 1e-8, eps_gap = 1e-8, eps_lambda = 1e-6))]
fn classify<'py>(
    py: Python<'py>,
    family: &PyMatrixFamily,
    lambda_max: f64,
    steps: usize,
    eps_im: f64,
    eps_gap: f64,
    eps_lambda: f64,
) -> PyResult<(PyMergerPattern, Vec<Bound<'py, PyDict>>)> {
    let tol = tolerances(eps_im, eps_gap, eps_lambda);
    let observed = spectral::classify(&family.0, lambda_max, steps, &tol).map_err(spectral_err)?;
    Ok((PyMergerPattern(observed.pattern), event_dicts(py, &observed.events)?))
}

/// Tests reflection symmetry of the spectrum at each sample `lambda`.
#[pyfunction]
#[pyo3(signature = (family, lambdas, eps_im = 1e-8, eps_gap = 1e-8, eps_lambda = 1e-6))]
fn check_central_symmetry<'py>(
    py: Python<'py>,
    family: &PyMatrixFamily,
    lambdas: Vec<f64>,
    eps_im: f64,
    eps_gap: f64,
    eps_lambda: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let tol = tolerances(eps_im, eps_gap, eps_lambda);
    let check = spectral::check_central_symmetry(&family.0, &lambdas, &tol).map_err(spectral_err)?;
    let d = PyDict::new(py);
    d.set_item("symmetric", check.symmetric)?;
    d.set_item("center", check.center.center())?;
    d.set_item("worst_deviation", check.worst_deviation)?;
    d.set_item("worst_lambda", check.worst_lambda)?;
    Ok(d)
}

#[pymodule]
fn spectra(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMergerPattern>()?;
    m.add_class::<PyMatrixFamily>()?;
    m.add_function(wrap_pyfunction!(enumerate_noncrossing, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(count_t, m)?)?;
    m.add_function(wrap_pyfunction!(count_p, m)?)?;
    m.add_function(wrap_pyfunction!(series_f, m)?)?;
    m.add_function(wrap_pyfunction!(series_g, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(build_witness, m)?)?;
    m.add_function(wrap_pyfunction!(witness_lambda_max, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(check_central_symmetry, m)?)?;
    m.add("DEFAULT_GRID_STEPS", DEFAULT_GRID_STEPS)?;
    Ok(())
}
