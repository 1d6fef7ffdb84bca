//! Python bindings over the core estimators.
//!
//! Matrices cross the boundary as row-major lists of lists and vectors as
//! flat lists. Input validation errors raise ValueError; solver
//! non-convergence raises RuntimeError.

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mindescent::error::Error;
use mindescent::feature_pipeline;
use mindescent::interp_ols::{self, FeatureSubset, LooStrategy, RegressionDataset};
use mindescent::numcore::{self, RankTolerance};
use mindescent::synth_control::{self, SimplexWeights, SolverSettings};

fn pyerr(e: Error) -> PyErr {
    match e {
        Error::NonConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("matrix rows have unequal lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

fn matrix_out(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().cloned().collect())
        .collect()
}

fn rank_tol(rel_tol: Option<f64>) -> PyResult<RankTolerance> {
    match rel_tol {
        Some(t) => RankTolerance::new(t).map_err(pyerr),
        None => Ok(RankTolerance::default()),
    }
}

fn solver(opt_tol: Option<f64>, max_iter: Option<usize>) -> SolverSettings {
    let mut s = SolverSettings::default();
    if let Some(t) = opt_tol {
        s.opt_tol = t;
    }
    if let Some(m) = max_iter {
        s.max_iter = m;
    }
    s
}

fn dataset(x: &[Vec<f64>], y: Vec<f64>) -> PyResult<RegressionDataset> {
    RegressionDataset::new(matrix(x)?, DVector::from_vec(y)).map_err(pyerr)
}

fn subset_of(indices: Option<Vec<usize>>, num_features: usize) -> PyResult<FeatureSubset> {
    match indices {
        Some(idx) => FeatureSubset::new(idx, num_features).map_err(pyerr),
        None => Ok(FeatureSubset::full(num_features)),
    }
}

/// Fitted coefficients of one feature subset. `beta` spans the full feature
/// set, zero outside `subset`.
#[pyclass(frozen)]
struct Fit {
    #[pyo3(get)]
    subset: Vec<usize>,
    #[pyo3(get)]
    beta: Vec<f64>,
    #[pyo3(get)]
    in_rmse: f64,
    #[pyo3(get)]
    coef_norm: f64,
}

impl Fit {
    fn from_core(fit: &interp_ols::SubsetFit) -> Self {
        Fit {
            subset: fit.subset().indices().to_vec(),
            beta: fit.beta().iter().cloned().collect(),
            in_rmse: fit.in_sample_rmse(),
            coef_norm: fit.coef_norm(),
        }
    }
}

/// Minimum-norm least-squares solution of `a @ x = b`.
#[pyfunction]
#[pyo3(signature = (a, b, rel_tol=None))]
fn min_norm_least_squares(a: Vec<Vec<f64>>, b: Vec<f64>, rel_tol: Option<f64>) -> PyResult<Vec<f64>> {
    let sol = numcore::min_norm_least_squares(&matrix(&a)?, &DVector::from_vec(b), rank_tol(rel_tol)?)
        .map_err(pyerr)?;
    Ok(sol.iter().cloned().collect())
}

/// Leverage of each column in the row space of `a`.
#[pyfunction]
#[pyo3(signature = (a, rel_tol=None))]
fn feature_leverages(a: Vec<Vec<f64>>, rel_tol: Option<f64>) -> PyResult<Vec<f64>> {
    let h = numcore::feature_leverages(&matrix(&a)?, rank_tol(rel_tol)?).map_err(pyerr)?;
    Ok(h.iter().cloned().collect())
}

/// Least squares below the interpolation threshold, minimum-norm
/// interpolation above it; errors on rank deficiency.
#[pyfunction]
#[pyo3(signature = (x, y, subset=None, rel_tol=None))]
fn fit_subset(
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    subset: Option<Vec<usize>>,
    rel_tol: Option<f64>,
) -> PyResult<Fit> {
    let data = dataset(&x, y)?;
    let subset = subset_of(subset, data.num_features())?;
    let fit = interp_ols::fit_subset(&data, &subset, rank_tol(rel_tol)?).map_err(pyerr)?;
    Ok(Fit::from_core(&fit))
}

/// Leave-one-feature-out fits of an interpolating subset, in subset order.
#[pyfunction]
#[pyo3(signature = (x, y, subset=None, rel_tol=None))]
fn leave_one_out_fits(
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    subset: Option<Vec<usize>>,
    rel_tol: Option<f64>,
) -> PyResult<Vec<Fit>> {
    let data = dataset(&x, y)?;
    let subset = subset_of(subset, data.num_features())?;
    let fits = interp_ols::leave_one_out_fits(&data, &subset, rank_tol(rel_tol)?, LooStrategy::Recompute)
        .map_err(pyerr)?;
    Ok(fits.iter().map(Fit::from_core).collect())
}

/// Convex weights `(1 - h_j) / (|J| - n)` as `(feature index, weight)`
/// pairs; the full-subset interpolant equals the weighted average of the
/// leave-one-out fits under these weights.
#[pyfunction]
#[pyo3(signature = (x, y, subset=None, rel_tol=None))]
fn averaging_weights(
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    subset: Option<Vec<usize>>,
    rel_tol: Option<f64>,
) -> PyResult<Vec<(usize, f64)>> {
    let data = dataset(&x, y)?;
    let subset = subset_of(subset, data.num_features())?;
    let w = interp_ols::averaging_weights(&data, &subset, rank_tol(rel_tol)?).map_err(pyerr)?;
    Ok(w.iter().collect())
}

/// Variance proxy `sigma^2 * trace((X_J X_J')^{-1})` of an interpolating
/// subset.
#[pyfunction]
#[pyo3(signature = (x, subset=None, noise_variance=1.0, rel_tol=None))]
fn trace_variance(
    x: Vec<Vec<f64>>,
    subset: Option<Vec<usize>>,
    noise_variance: f64,
    rel_tol: Option<f64>,
) -> PyResult<f64> {
    let x = matrix(&x)?;
    let subset = subset_of(subset, x.ncols())?;
    interp_ols::trace_variance_interpolating(&x, &subset, noise_variance, rank_tol(rel_tol)?)
        .map_err(pyerr)
}

/// Simplex-constrained least squares `min |Xw - y|` over the probability
/// simplex.
#[pyfunction]
#[pyo3(signature = (x, y, opt_tol=None, max_iter=None))]
fn simplex_lsq(
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    opt_tol: Option<f64>,
    max_iter: Option<usize>,
) -> PyResult<Vec<f64>> {
    let w = synth_control::simplex_lsq(&matrix(&x)?, &DVector::from_vec(y), &solver(opt_tol, max_iter))
        .map_err(pyerr)?;
    Ok(w.values().iter().cloned().collect())
}

/// Minimum-norm synthetic-control weights: the least-norm point among the
/// simplex least-squares optima, via a vanishing-ridge path.
#[pyfunction]
#[pyo3(signature = (x, y, opt_tol=None, max_iter=None))]
fn min_norm_synth(
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    opt_tol: Option<f64>,
    max_iter: Option<usize>,
) -> PyResult<Vec<f64>> {
    let w = synth_control::min_norm_synth(&matrix(&x)?, &DVector::from_vec(y), &solver(opt_tol, max_iter))
        .map_err(pyerr)?;
    Ok(w.values().iter().cloned().collect())
}

/// Convex donor weights expressing the full-pool weights as an average of
/// the leave-one-donor-out weights, as `(donor index, weight)` pairs.
#[pyfunction]
#[pyo3(signature = (full, loo, tol=1e-6, opt_tol=None, max_iter=None))]
fn sc_averaging_decomposition(
    full: Vec<f64>,
    loo: Vec<Vec<f64>>,
    tol: f64,
    opt_tol: Option<f64>,
    max_iter: Option<usize>,
) -> PyResult<Vec<(usize, f64)>> {
    let full = SimplexWeights::new(DVector::from_vec(full)).map_err(pyerr)?;
    let loo: Vec<SimplexWeights> = loo
        .into_iter()
        .map(|w| SimplexWeights::new(DVector::from_vec(w)).map_err(pyerr))
        .collect::<PyResult<_>>()?;
    let lam = synth_control::sc_averaging_decomposition(&full, &loo, tol, &solver(opt_tol, max_iter))
        .map_err(pyerr)?;
    Ok(lam.iter().collect())
}

/// Weighted donor combination `post @ w` for the post periods.
#[pyfunction]
fn impute(weights: Vec<f64>, post: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let w = SimplexWeights::new(DVector::from_vec(weights)).map_err(pyerr)?;
    let out = synth_control::impute(&w, &matrix(&post)?).map_err(pyerr)?;
    Ok(out.iter().cloned().collect())
}

/// Indicator columns, bin labels, interior edges, and the constant flag.
type BinnedParts = (Vec<Vec<f64>>, Vec<String>, Vec<f64>, bool);

/// Quantile-bin a column; returns `(indicators, labels, edges, constant)`.
#[pyfunction]
fn quantile_bin(values: Vec<f64>, bins: usize) -> PyResult<BinnedParts> {
    let binned = feature_pipeline::quantile_bin(&values, bins).map_err(pyerr)?;
    Ok((binned.indicators, binned.labels, binned.edges, binned.constant))
}

/// Seeded Gaussian jitter added entrywise to a matrix.
#[pyfunction]
fn jitter(x: Vec<Vec<f64>>, sd: f64, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let out = feature_pipeline::jitter(&matrix(&x)?, sd, seed).map_err(pyerr)?;
    Ok(matrix_out(&out))
}

/// Seeded Fisher-Yates permutation of `0..k`.
#[pyfunction]
fn random_ordering(k: usize, seed: u64) -> Vec<usize> {
    feature_pipeline::random_ordering(k, seed)
}

#[pymodule]
fn mindescent_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Fit>()?;
    m.add_function(wrap_pyfunction!(min_norm_least_squares, m)?)?;
    m.add_function(wrap_pyfunction!(feature_leverages, m)?)?;
    m.add_function(wrap_pyfunction!(fit_subset, m)?)?;
    m.add_function(wrap_pyfunction!(leave_one_out_fits, m)?)?;
    m.add_function(wrap_pyfunction!(averaging_weights, m)?)?;
    m.add_function(wrap_pyfunction!(trace_variance, m)?)?;
    m.add_function(wrap_pyfunction!(simplex_lsq, m)?)?;
    m.add_function(wrap_pyfunction!(min_norm_synth, m)?)?;
    m.add_function(wrap_pyfunction!(sc_averaging_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(impute, m)?)?;
    m.add_function(wrap_pyfunction!(quantile_bin, m)?)?;
    m.add_function(wrap_pyfunction!(jitter, m)?)?;
    m.add_function(wrap_pyfunction!(random_ordering, m)?)?;
    Ok(())
}
