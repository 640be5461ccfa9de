//! Python bindings for the spatial blind source separation toolkit.
//!
//! The module exposes the core pipeline over numpy arrays: coordinate
//! generators, the random-field simulator, the unmixing estimators (through
//! the same method-spec strings the CLI accepts), the MDI performance index,
//! the compositional log-ratio transforms, and the moving-block variance map.
//!
//! Conversions are by value: matrices cross the boundary as C-order float64
//! arrays, and errors surface as `ValueError` (bad configuration or input
//! data) or `ArithmeticError` (numerical failure).

use nalgebra::DMatrix;
use numpy::ndarray::Array2;
use numpy::{IntoPyArray, PyArray1, PyArray2, PyReadonlyArray2};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use snss_core::error::ErrorCategory;
use snss_core::fields::{sample_setting, standard_setting, MaternParams};
use snss_core::geometry::make_partition;
use snss_core::sim::{replicate_seed as core_replicate_seed, fit_method, MethodSpec, Pattern};
use snss_core::{latent_scores, Coords, PartitionSpec, Rect, SpatialData, UnmixingModel};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Maps a core error onto the Python exception hierarchy: numerical failures
/// become `ArithmeticError`, everything else (config and data problems) a
/// `ValueError`.
fn to_py_err(e: snss_core::Error) -> PyErr {
    match e.category() {
        ErrorCategory::Numeric => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix_to_py<'py>(py: Python<'py>, m: &DMatrix<f64>) -> Bound<'py, PyArray2<f64>> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)]).into_pyarray(py)
}

fn matrix_from_py(a: &PyReadonlyArray2<'_, f64>) -> DMatrix<f64> {
    let v = a.as_array();
    DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)])
}

fn coords_to_py<'py>(py: Python<'py>, coords: &Coords) -> Bound<'py, PyArray2<f64>> {
    Array2::from_shape_fn((coords.len(), 2), |(i, j)| coords.point(i)[j]).into_pyarray(py)
}

fn coords_from_py(a: &PyReadonlyArray2<'_, f64>) -> PyResult<Coords> {
    let v = a.as_array();
    if v.ncols() != 2 {
        return Err(PyValueError::new_err(format!(
            "coordinates must have 2 columns, got {}",
            v.ncols()
        )));
    }
    let pts: Vec<[f64; 2]> = (0..v.nrows()).map(|i| [v[(i, 0)], v[(i, 1)]]).collect();
    Coords::new(pts).map_err(to_py_err)
}

/// n_side² sites placed uniformly at random on [0, n_side]².
#[pyfunction]
fn gen_uniform_coords(py: Python<'_>, n_side: u32, seed: u64) -> Bound<'_, PyArray2<f64>> {
    coords_to_py(py, &snss_core::geometry::gen_uniform_coords(n_side, seed))
}

/// n_side² sites with x ~ Beta(2,5)·n_side (density skewed toward the left
/// edge) and y uniform on [0, n_side].
#[pyfunction]
fn gen_skewed_coords(py: Python<'_>, n_side: u32, seed: u64) -> Bound<'_, PyArray2<f64>> {
    coords_to_py(py, &snss_core::geometry::gen_skewed_coords(n_side, seed))
}

/// Assigns each site to its nearest center (ties to the lowest index),
/// returning 0-based cluster labels.
#[pyfunction]
fn nearest_center_labels<'py>(
    py: Python<'py>,
    coords: PyReadonlyArray2<'py, f64>,
    centers: Vec<[f64; 2]>,
) -> PyResult<Bound<'py, PyArray1<usize>>> {
    let coords = coords_from_py(&coords)?;
    let domain = Rect::bounding(&coords);
    let partition = make_partition(&coords, &PartitionSpec::NearestCenters(centers), &domain)
        .map_err(to_py_err)?;
    Ok(partition.labels().to_vec().into_pyarray(py))
}

/// Draws the latent field of one standard study setting (1–6) on the given
/// sites and 0-based cluster labels, returning the n×p source matrix.
#[pyfunction]
fn simulate_setting<'py>(
    py: Python<'py>,
    setting: u8,
    coords: PyReadonlyArray2<'py, f64>,
    labels: Vec<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let spec = standard_setting(setting).map_err(to_py_err)?;
    let coords = coords_from_py(&coords)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let z = sample_setting(&spec, &coords, &labels, &mut rng).map_err(to_py_err)?;
    Ok(matrix_to_py(py, &z))
}

/// The per-replicate RNG seed used by the simulation study, so Python code
/// can regenerate any row of a results table.
#[pyfunction]
fn replicate_seed(base: u64, setting: u8, pattern: &str, n_side: u32, rep: u32) -> PyResult<u64> {
    let pattern: Pattern = pattern.parse().map_err(to_py_err)?;
    Ok(core_replicate_seed(base, setting, pattern, n_side, rep))
}

/// A fitted unmixing model: `w` is the p×p unmixing matrix, `t` the location
/// estimate, and `scores` recovers the latent components as (x − t)·wᵀ.
#[pyclass(name = "UnmixingModel", frozen)]
struct PyUnmixingModel {
    inner: UnmixingModel,
}

#[pymethods]
impl PyUnmixingModel {
    /// The p×p unmixing matrix (rows are recovered components).
    #[getter]
    fn w<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray2<f64>> {
        matrix_to_py(py, &self.inner.w)
    }

    /// The location estimate (column sample means).
    #[getter]
    fn t<'py>(&self, py: Python<'py>) -> Bound<'py, PyArray1<f64>> {
        self.inner.t.iter().copied().collect::<Vec<_>>().into_pyarray(py)
    }

    /// Method tag: "sd", "jd", "sjd", "sbss", or "fobi".
    #[getter]
    fn method(&self) -> &str {
        &self.inner.method
    }

    /// Whether the solver converged (always true for closed-form methods).
    #[getter]
    fn converged(&self) -> bool {
        self.inner.diagnostics.converged
    }

    /// Givens sweeps performed (0 for closed-form methods).
    #[getter]
    fn sweeps(&self) -> usize {
        self.inner.diagnostics.sweeps
    }

    /// Joint-diagonality criterion after init and after each sweep.
    #[getter]
    fn criterion_history(&self) -> Vec<f64> {
        self.inner.diagnostics.criterion_history.clone()
    }

    /// Latent scores (x − t)·wᵀ for an n×p data matrix on the given sites.
    fn scores<'py>(
        &self,
        py: Python<'py>,
        coords: PyReadonlyArray2<'py, f64>,
        values: PyReadonlyArray2<'py, f64>,
    ) -> PyResult<Bound<'py, PyArray2<f64>>> {
        let data = SpatialData::new(coords_from_py(&coords)?, matrix_from_py(&values))
            .map_err(to_py_err)?;
        let z = latent_scores(&self.inner, &data).map_err(to_py_err)?;
        Ok(matrix_to_py(py, &z))
    }

    fn __repr__(&self) -> String {
        format!(
            "UnmixingModel(method='{}', p={}, converged={})",
            self.inner.method,
            self.inner.w.nrows(),
            if self.inner.diagnostics.converged { "True" } else { "False" }
        )
    }
}

/// Fits an unmixing model on sites and observations using a method spec
/// string — the same grammar the CLI accepts: `sd/<partition>`,
/// `jd/<partition>`, `sjd/<partition>/<kernels>`, `sbss/<kernels>`, `fobi`,
/// with kernels '+'-joined (e.g. "sjd/grid:2x2/ball:1.5+ring:1.5:3").
/// Partitions that need a domain use the bounding box of the sites.
#[pyfunction]
fn fit<'py>(
    coords: PyReadonlyArray2<'py, f64>,
    values: PyReadonlyArray2<'py, f64>,
    method: &str,
) -> PyResult<PyUnmixingModel> {
    let spec: MethodSpec = method.parse().map_err(to_py_err)?;
    let data = SpatialData::new(coords_from_py(&coords)?, matrix_from_py(&values))
        .map_err(to_py_err)?;
    let domain = Rect::bounding(data.coords());
    let model = fit_method(&spec, &data, &domain).map_err(to_py_err)?;
    Ok(PyUnmixingModel { inner: model })
}

/// Minimum distance index of a p×p gain matrix: 0 on generalized
/// permutations, at most 1, invariant to row scaling and permutation.
#[pyfunction]
fn mdi(g: PyReadonlyArray2<'_, f64>) -> PyResult<f64> {
    snss_core::mdi(&matrix_from_py(&g)).map_err(to_py_err)
}

/// Centered log-ratio transform of an n×m matrix of strictly positive
/// compositions: row-wise log minus the mean log.
#[pyfunction]
fn clr<'py>(
    py: Python<'py>,
    composition: PyReadonlyArray2<'py, f64>,
) -> PyResult<Bound<'py, PyArray2<f64>>> {
    let comp = snss_core::coda::Composition::new(matrix_from_py(&composition)).map_err(to_py_err)?;
    Ok(matrix_to_py(py, &snss_core::coda::clr(&comp)))
}

/// Pivot isometric log-ratio transform. Returns the n×(m−1) coordinate
/// matrix and the m×(m−1) contrast matrix V, with ilr = clr · V.
#[pyfunction]
fn ilr_pivot<'py>(
    py: Python<'py>,
    composition: PyReadonlyArray2<'py, f64>,
) -> PyResult<(Bound<'py, PyArray2<f64>>, Bound<'py, PyArray2<f64>>)> {
    let comp = snss_core::coda::Composition::new(matrix_from_py(&composition)).map_err(to_py_err)?;
    let (z, v) = snss_core::coda::ilr_pivot(&comp);
    Ok((matrix_to_py(py, &z), matrix_to_py(py, v.as_matrix())))
}

/// Moving-block variance map of one score component. Returns cell centers
/// (k×2), in-block counts (k), and sample variances (k) in row-major order
/// (y outer, x inner); cells with fewer than two points carry NaN.
#[pyfunction]
fn moving_block_variance<'py>(
    py: Python<'py>,
    scores: Vec<f64>,
    coords: PyReadonlyArray2<'py, f64>,
    grid_res: f64,
    block_size: f64,
) -> PyResult<(
    Bound<'py, PyArray2<f64>>,
    Bound<'py, PyArray1<usize>>,
    Bound<'py, PyArray1<f64>>,
)> {
    let coords = coords_from_py(&coords)?;
    let cells = snss_core::coda::moving_block_variance(&scores, &coords, grid_res, block_size)
        .map_err(to_py_err)?;
    let centers =
        Array2::from_shape_fn((cells.len(), 2), |(i, j)| cells[i].center[j]).into_pyarray(py);
    let counts: Vec<usize> = cells.iter().map(|c| c.count).collect();
    let variances: Vec<f64> = cells.iter().map(|c| c.variance.unwrap_or(f64::NAN)).collect();
    Ok((centers, counts.into_pyarray(py), variances.into_pyarray(py)))
}

/// Stationary Matérn covariance at distance h with parameters (σ², ν, φ).
#[pyfunction]
fn matern_cov(h: f64, sigma2: f64, nu: f64, phi: f64) -> PyResult<f64> {
    let params = MaternParams::new(sigma2, nu, phi).map_err(to_py_err)?;
    Ok(snss_core::fields::matern_cov(h, params))
}

/// Non-stationary Matérn covariance between sites s1 and s2 with per-site
/// parameter triples (σ², ν, φ).
#[pyfunction]
fn nonstat_matern_cov(
    s1: [f64; 2],
    s2: [f64; 2],
    params1: (f64, f64, f64),
    params2: (f64, f64, f64),
) -> PyResult<f64> {
    let p1 = MaternParams::new(params1.0, params1.1, params1.2).map_err(to_py_err)?;
    let p2 = MaternParams::new(params2.0, params2.1, params2.2).map_err(to_py_err)?;
    Ok(snss_core::fields::nonstat_matern_cov(s1, s2, p1, p2))
}

/// Modified Bessel function of the second kind K_ν(x) for ν ≥ 0, x > 0.
#[pyfunction]
fn bessel_k(nu: f64, x: f64) -> f64 {
    snss_core::fields::bessel_k(nu, x)
}

#[pymodule]
fn snss_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyUnmixingModel>()?;
    m.add_function(wrap_pyfunction!(gen_uniform_coords, m)?)?;
    m.add_function(wrap_pyfunction!(gen_skewed_coords, m)?)?;
    m.add_function(wrap_pyfunction!(nearest_center_labels, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_setting, m)?)?;
    m.add_function(wrap_pyfunction!(replicate_seed, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(mdi, m)?)?;
    m.add_function(wrap_pyfunction!(clr, m)?)?;
    m.add_function(wrap_pyfunction!(ilr_pivot, m)?)?;
    m.add_function(wrap_pyfunction!(moving_block_variance, m)?)?;
    m.add_function(wrap_pyfunction!(matern_cov, m)?)?;
    m.add_function(wrap_pyfunction!(nonstat_matern_cov, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    Ok(())
}
