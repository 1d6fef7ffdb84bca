//! Least-squares fits over feature subsets, on both sides of the
//! interpolation threshold.
//!
//! A fit over subset `J` is ordinary least squares while `|J| <= n` and the
//! minimum-norm interpolant once `|J| > n`. In the interpolating regime the
//! fit over `J` is exactly a convex combination of the fits over every
//! `J \ {j}`, with weights determined by column leverages; this module
//! computes those weights and the leave-one-out fits, and exposes the
//! variance and parameter-variation quantities that the averaging structure
//! controls.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numcore::{
    self, check_finite_matrix, check_finite_vector, feature_leverages, min_norm_least_squares,
    RankTolerance,
};

/// Design matrix and outcome, with optional column names.
#[derive(Debug, Clone)]
pub struct RegressionDataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    names: Option<Vec<String>>,
}

impl RegressionDataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "design must be non-empty, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "design has {} rows but outcome has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        check_finite_matrix("design", &x)?;
        check_finite_vector("outcome", &y)?;
        Ok(RegressionDataset { x, y, names: None })
    }

    pub fn with_names(x: DMatrix<f64>, y: DVector<f64>, names: Vec<String>) -> Result<Self> {
        if names.len() != x.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} column names for {} columns",
                names.len(),
                x.ncols()
            )));
        }
        let mut data = Self::new(x, y)?;
        data.names = Some(names);
        Ok(data)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }
}

/// Non-empty set of feature indices, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSubset {
    indices: Vec<usize>,
}

impl FeatureSubset {
    pub fn new(indices: impl IntoIterator<Item = usize>, num_features: usize) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        if indices.is_empty() {
            return Err(Error::InvalidArgument("feature subset is empty".into()));
        }
        indices.sort_unstable();
        for pair in indices.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidArgument(format!(
                    "feature index {} listed twice",
                    pair[0]
                )));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= num_features {
                return Err(Error::InvalidArgument(format!(
                    "feature index {last} out of range for {num_features} features"
                )));
            }
        }
        Ok(FeatureSubset { indices })
    }

    pub fn full(num_features: usize) -> Self {
        FeatureSubset {
            indices: (0..num_features).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// The subset with feature `j` removed; `j` must be present and not the
    /// only member.
    pub fn without(&self, j: usize) -> Result<Self> {
        if !self.contains(j) {
            return Err(Error::InvalidArgument(format!(
                "feature {j} is not in the subset"
            )));
        }
        if self.len() == 1 {
            return Err(Error::InvalidArgument(
                "cannot remove the only feature in a subset".into(),
            ));
        }
        Ok(FeatureSubset {
            indices: self
                .indices
                .iter()
                .cloned()
                .filter(|&i| i != j)
                .collect(),
        })
    }

    pub(crate) fn select_columns(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(x.nrows(), self.len());
        for (col, &j) in self.indices.iter().enumerate() {
            out.set_column(col, &x.column(j));
        }
        out
    }
}

/// A fitted subset model: coefficients live in the full feature space, zero
/// outside the subset.
#[derive(Debug, Clone)]
pub struct SubsetFit {
    subset: FeatureSubset,
    beta: DVector<f64>,
    in_sample_rmse: f64,
    coef_norm: f64,
}

impl SubsetFit {
    pub fn subset(&self) -> &FeatureSubset {
        &self.subset
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn in_sample_rmse(&self) -> f64 {
        self.in_sample_rmse
    }

    pub fn coef_norm(&self) -> f64 {
        self.coef_norm
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        if x.ncols() != self.beta.len() {
            return Err(Error::DimensionMismatch(format!(
                "design has {} columns but fit has {} coefficients",
                x.ncols(),
                self.beta.len()
            )));
        }
        Ok(x * &self.beta)
    }
}

/// Euclidean norm of the fitted coefficient vector.
pub fn coefficient_norm(fit: &SubsetFit) -> f64 {
    fit.coef_norm
}

/// Convex weights over the members of a subset, one weight per feature index.
///
/// Entries lie in `[0, 1]` and sum to one to within 1e-10.
#[derive(Debug, Clone)]
pub struct AveragingWeights {
    entries: Vec<(usize, f64)>,
}

impl AveragingWeights {
    pub const SIMPLEX_TOL: f64 = 1e-10;

    pub fn new(mut entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("no averaging weights given".into()));
        }
        entries.sort_by_key(|&(j, _)| j);
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::InvalidArgument(format!(
                    "weight for index {} listed twice",
                    pair[0].0
                )));
            }
        }
        let mut sum = 0.0;
        for &(j, w) in &entries {
            if !w.is_finite() {
                return Err(Error::NonFinite(format!("weight for index {j}")));
            }
            if !(-Self::SIMPLEX_TOL..=1.0 + Self::SIMPLEX_TOL).contains(&w) {
                return Err(Error::InvalidArgument(format!(
                    "weight {w} for index {j} outside [0, 1]"
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > Self::SIMPLEX_TOL {
            return Err(Error::InvalidArgument(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        for entry in &mut entries {
            entry.1 = entry.1.clamp(0.0, 1.0);
        }
        Ok(AveragingWeights { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, j: usize) -> Option<f64> {
        self.entries
            .binary_search_by_key(&j, |&(i, _)| i)
            .ok()
            .map(|pos| self.entries[pos].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().cloned()
    }

    /// Weights in index order, as a dense vector.
    pub fn values(&self) -> DVector<f64> {
        DVector::from_iterator(self.entries.len(), self.entries.iter().map(|&(_, w)| w))
    }
}

/// Least-squares fit over a feature subset.
///
/// With `|J| <= n` the subset design must have full column rank and the fit
/// is ordinary least squares; with `|J| > n` it must have full row rank and
/// the fit is the minimum-norm interpolant. Anything rank-deficient under
/// `tol` is an error.
pub fn fit_subset(
    data: &RegressionDataset,
    subset: &FeatureSubset,
    tol: RankTolerance,
) -> Result<SubsetFit> {
    check_subset(data, subset)?;
    let x_j = subset.select_columns(data.x());
    let rank = numcore::numerical_rank(&x_j, tol)?;
    let n = data.n();
    let d = subset.len();
    if d > n && rank < n {
        return Err(Error::RankDeficient(format!(
            "subset design {n}x{d} has rank {rank}, needs full row rank {n}"
        )));
    }
    if d <= n && rank < d {
        return Err(Error::RankDeficient(format!(
            "subset design {n}x{d} has rank {rank}, needs full column rank {d}"
        )));
    }
    fit_on_columns(data, subset, &x_j, tol)
}

/// Same computation as [`fit_subset`] with the rank gate skipped: the
/// pseudoinverse drops deficient directions instead. Leave-one-out fits need
/// this, since removing a leverage-one column is exactly the case where the
/// reduced design loses rank.
pub(crate) fn fit_subset_unchecked(
    data: &RegressionDataset,
    subset: &FeatureSubset,
    tol: RankTolerance,
) -> Result<SubsetFit> {
    check_subset(data, subset)?;
    let x_j = subset.select_columns(data.x());
    fit_on_columns(data, subset, &x_j, tol)
}

fn check_subset(data: &RegressionDataset, subset: &FeatureSubset) -> Result<()> {
    if let Some(&last) = subset.indices().last() {
        if last >= data.num_features() {
            return Err(Error::InvalidArgument(format!(
                "feature index {last} out of range for {} features",
                data.num_features()
            )));
        }
    }
    Ok(())
}

fn fit_on_columns(
    data: &RegressionDataset,
    subset: &FeatureSubset,
    x_j: &DMatrix<f64>,
    tol: RankTolerance,
) -> Result<SubsetFit> {
    let beta_j = min_norm_least_squares(x_j, data.y(), tol)?;
    let mut beta = DVector::zeros(data.num_features());
    for (col, &j) in subset.indices().iter().enumerate() {
        beta[j] = beta_j[col];
    }
    let residual = data.y() - x_j * &beta_j;
    Ok(SubsetFit {
        subset: subset.clone(),
        beta,
        in_sample_rmse: residual.norm() / (data.n() as f64).sqrt(),
        coef_norm: beta_j.norm(),
    })
}

/// How [`leave_one_out_fits`] computes the reduced fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LooStrategy {
    /// Fit each reduced subset from scratch.
    Recompute,
    /// Rank-one downdate of the full-subset interpolant. Only valid in the
    /// interpolating regime; columns with leverage near one fall back to
    /// recomputation. Must agree with [`LooStrategy::Recompute`] to 1e-8.
    RankOneUpdate,
}

/// Minimum-norm fits over every `J \ {j}`, in subset index order.
pub fn leave_one_out_fits(
    data: &RegressionDataset,
    subset: &FeatureSubset,
    tol: RankTolerance,
    strategy: LooStrategy,
) -> Result<Vec<SubsetFit>> {
    if subset.len() < 2 {
        return Err(Error::InvalidArgument(
            "leave-one-out needs at least two features".into(),
        ));
    }
    check_subset(data, subset)?;
    match strategy {
        LooStrategy::Recompute => subset
            .indices()
            .iter()
            .map(|&j| fit_subset_unchecked(data, &subset.without(j)?, tol))
            .collect(),
        LooStrategy::RankOneUpdate => rank_one_loo_fits(data, subset, tol),
    }
}

/// Downdate formula: with `G = X_J X_J'`, `z = G^-1 Y`, `r_j = G^-1 X_j`,
/// `h_j = X_j . r_j` and `q_j = X_j . z`,
/// `beta_loo_j = beta_full + q_j / (1 - h_j) * (X_J' r_j - e_j)`.
fn rank_one_loo_fits(
    data: &RegressionDataset,
    subset: &FeatureSubset,
    tol: RankTolerance,
) -> Result<Vec<SubsetFit>> {
    let n = data.n();
    if subset.len() <= n {
        return Err(Error::InvalidArgument(format!(
            "rank-one downdate needs an interpolating subset, got {} features for {} rows",
            subset.len(),
            n
        )));
    }
    let x_j = subset.select_columns(data.x());
    let svd = numcore::full_row_rank_svd(&x_j, tol)?;

    // G^-1 v = U S^-2 U' v, accumulated over kept triplets.
    let apply_gram_inverse = |v: &DVector<f64>| -> DVector<f64> {
        let mut out = DVector::zeros(n);
        for i in 0..svd.singular_values.len() {
            if !svd.keep[i] {
                continue;
            }
            let s = svd.singular_values[i];
            let u_i = svd.u.column(i).clone_owned();
            out.axpy(u_i.dot(v) / (s * s), &u_i, 1.0);
        }
        out
    };

    let z = apply_gram_inverse(data.y());
    let beta_full_j = x_j.transpose() * &z;
    let k = data.num_features();
    let mut fits = Vec::with_capacity(subset.len());
    for (col, &j) in subset.indices().iter().enumerate() {
        let x_col = x_j.column(col).clone_owned();
        let r = apply_gram_inverse(&x_col);
        let h = x_col.dot(&r);
        if 1.0 - h < 1e-8 {
            fits.push(fit_subset_unchecked(data, &subset.without(j)?, tol)?);
            continue;
        }
        let q = x_col.dot(&z);
        let correction_j = x_j.transpose() * &r;
        let mut beta = DVector::zeros(k);
        for (c2, &j2) in subset.indices().iter().enumerate() {
            beta[j2] = beta_full_j[c2] + q / (1.0 - h) * correction_j[c2];
        }
        beta[j] -= q / (1.0 - h);
        // The downdated fit has no support on j; snap rounding residue.
        beta[j] = 0.0;
        let residual = data.y() - data.x() * &beta;
        fits.push(SubsetFit {
            subset: subset.without(j)?,
            beta: beta.clone(),
            in_sample_rmse: residual.norm() / (n as f64).sqrt(),
            coef_norm: beta.norm(),
        });
    }
    Ok(fits)
}

/// Averaging weights `(1 - h_j) / (|J| - n)` for an interpolating subset.
///
/// These are exactly the convex weights for which the full-subset interpolant
/// equals the weighted average of the leave-one-out fits. A leverage-one
/// column gets weight zero, which is also the only case where its
/// leave-one-out design is rank-deficient.
pub fn averaging_weights(
    data: &RegressionDataset,
    subset: &FeatureSubset,
    tol: RankTolerance,
) -> Result<AveragingWeights> {
    check_subset(data, subset)?;
    let n = data.n();
    let d = subset.len();
    if d <= n {
        return Err(Error::InvalidArgument(format!(
            "averaging weights need |J| > n, got |J| = {d}, n = {n}"
        )));
    }
    let x_j = subset.select_columns(data.x());
    let h = feature_leverages(&x_j, tol)?;
    let denom = (d - n) as f64;
    let entries = subset
        .indices()
        .iter()
        .enumerate()
        .map(|(col, &j)| (j, ((1.0 - h[col]) / denom).clamp(0.0, 1.0)))
        .collect();
    AveragingWeights::new(entries)
}

/// Norm in which to compare two coefficient vectors.
#[derive(Debug, Clone, Copy)]
pub enum VariationMetric<'a> {
    /// Plain Euclidean distance, the natural scale past the threshold.
    Euclidean,
    /// `|X (a - b)|`, the prediction-scale distance `|a - b|_{X'X}` used
    /// below the threshold.
    DesignWeighted(&'a DMatrix<f64>),
}

/// Distance between two fitted coefficient vectors under the chosen metric.
pub fn variation_distance(a: &SubsetFit, b: &SubsetFit, metric: VariationMetric) -> Result<f64> {
    if a.beta.len() != b.beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "fits have {} and {} coefficients",
            a.beta.len(),
            b.beta.len()
        )));
    }
    let diff = &a.beta - &b.beta;
    match metric {
        VariationMetric::Euclidean => Ok(diff.norm()),
        VariationMetric::DesignWeighted(x) => {
            if x.ncols() != diff.len() {
                return Err(Error::DimensionMismatch(format!(
                    "design has {} columns but fits have {} coefficients",
                    x.ncols(),
                    diff.len()
                )));
            }
            check_finite_matrix("design", x)?;
            Ok((x * diff).norm())
        }
    }
}

/// Exact sampling variance of the interpolating fit under homoskedastic
/// noise: `sigma^2 * trace((X_J X_J')^-1)`.
pub fn trace_variance_interpolating(
    x: &DMatrix<f64>,
    subset: &FeatureSubset,
    noise_variance: f64,
    tol: RankTolerance,
) -> Result<f64> {
    if !(noise_variance > 0.0 && noise_variance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be positive and finite, got {noise_variance}"
        )));
    }
    if let Some(&last) = subset.indices().last() {
        if last >= x.ncols() {
            return Err(Error::InvalidArgument(format!(
                "feature index {last} out of range for {} features",
                x.ncols()
            )));
        }
    }
    let n = x.nrows();
    if subset.len() <= n {
        return Err(Error::InvalidArgument(format!(
            "trace variance needs |J| > n, got |J| = {}, n = {n}",
            subset.len()
        )));
    }
    let x_j = subset.select_columns(x);
    Ok(noise_variance * numcore::inverse_gram_trace(&x_j, tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn tol() -> RankTolerance {
        RankTolerance::default()
    }

    fn gaussian_data(rng: &mut impl Rng, n: usize, k: usize) -> RegressionDataset {
        let x = DMatrix::from_fn(n, k, |_, _| rng.sample(StandardNormal));
        let y = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
        RegressionDataset::new(x, y).unwrap()
    }

    #[test]
    fn identity_design_interpolates() {
        let data = RegressionDataset::new(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![3.0, -1.0]),
        )
        .unwrap();
        let fit = fit_subset(&data, &FeatureSubset::full(2), tol()).unwrap();
        assert_abs_diff_eq!(fit.beta()[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.beta()[1], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.in_sample_rmse(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rank_deficient_square_design_rejected() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let data = RegressionDataset::new(x, DVector::from_vec(vec![1.0, 0.0])).unwrap();
        assert!(matches!(
            fit_subset(&data, &FeatureSubset::full(2), tol()),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn duplicate_subset_index_rejected() {
        assert!(FeatureSubset::new(vec![1, 1], 3).is_err());
    }

    #[test]
    fn weights_zero_out_leverage_one_column() {
        // Single row (1, 0, 0): the first column carries all the leverage,
        // so its weight vanishes and the other two split evenly.
        let x = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let data = RegressionDataset::new(x, DVector::from_vec(vec![2.0])).unwrap();
        let subset = FeatureSubset::full(3);
        let w = averaging_weights(&data, &subset, tol()).unwrap();
        assert_abs_diff_eq!(w.get(0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.get(1).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w.get(2).unwrap(), 0.5, epsilon = 1e-12);

        // The averaging identity still holds through the degenerate column.
        let fit = fit_subset(&data, &subset, tol()).unwrap();
        let loo = leave_one_out_fits(&data, &subset, tol(), LooStrategy::Recompute).unwrap();
        let mut avg = DVector::zeros(3);
        for (fit_j, (_, lambda)) in loo.iter().zip(w.iter()) {
            avg.axpy(lambda, fit_j.beta(), 1.0);
        }
        assert!((fit.beta() - avg).norm() <= 1e-10);
    }

    #[test]
    fn averaging_rejected_below_threshold() {
        let mut rng = crate::seeding::stream_rng(9, "test-interp", 0);
        let data = gaussian_data(&mut rng, 4, 3);
        assert!(matches!(
            averaging_weights(&data, &FeatureSubset::full(3), tol()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn trace_variance_single_row() {
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let v =
            trace_variance_interpolating(&x, &FeatureSubset::full(2), 4.0, tol()).unwrap();
        assert_abs_diff_eq!(v, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn variation_distance_metrics() {
        let mut rng = crate::seeding::stream_rng(9, "test-interp", 1);
        let data = gaussian_data(&mut rng, 2, 4);
        let a = fit_subset(&data, &FeatureSubset::new(vec![0, 1], 4).unwrap(), tol()).unwrap();
        let b = fit_subset(&data, &FeatureSubset::new(vec![2, 3], 4).unwrap(), tol()).unwrap();
        let euclid = variation_distance(&a, &b, VariationMetric::Euclidean).unwrap();
        assert_abs_diff_eq!(euclid, (a.beta() - b.beta()).norm(), epsilon = 1e-12);
        let weighted =
            variation_distance(&a, &b, VariationMetric::DesignWeighted(data.x())).unwrap();
        assert_abs_diff_eq!(
            weighted,
            (data.x() * (a.beta() - b.beta())).norm(),
            epsilon = 1e-12
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_averaging_identity(seed in 0u64..2000, n in 1usize..5, extra in 1usize..6) {
            let mut rng = crate::seeding::stream_rng(seed, "prop-avg-identity", 0);
            let k = n + extra;
            let data = gaussian_data(&mut rng, n, k);
            let subset = FeatureSubset::full(k);
            let fit = fit_subset(&data, &subset, tol()).unwrap();
            let w = averaging_weights(&data, &subset, tol()).unwrap();
            let loo = leave_one_out_fits(&data, &subset, tol(), LooStrategy::Recompute).unwrap();
            let mut avg = DVector::zeros(k);
            for (fit_j, (_, lambda)) in loo.iter().zip(w.iter()) {
                avg.axpy(lambda, fit_j.beta(), 1.0);
            }
            let resid = (fit.beta() - &avg).norm();
            prop_assert!(resid <= 1e-8 * (1.0 + fit.coef_norm()));
        }

        #[test]
        fn prop_rank_one_update_matches_recompute(seed in 0u64..2000, n in 1usize..5, extra in 1usize..6) {
            let mut rng = crate::seeding::stream_rng(seed, "prop-smw", 0);
            let k = n + extra;
            let data = gaussian_data(&mut rng, n, k);
            let subset = FeatureSubset::full(k);
            let slow = leave_one_out_fits(&data, &subset, tol(), LooStrategy::Recompute).unwrap();
            let fast = leave_one_out_fits(&data, &subset, tol(), LooStrategy::RankOneUpdate).unwrap();
            for (s, f) in slow.iter().zip(fast.iter()) {
                prop_assert!((s.beta() - f.beta()).norm() <= 1e-8 * (1.0 + s.coef_norm()));
            }
        }

        #[test]
        fn prop_weights_form_simplex(seed in 0u64..2000, n in 1usize..5, extra in 1usize..6) {
            let mut rng = crate::seeding::stream_rng(seed, "prop-simplex", 0);
            let k = n + extra;
            let data = gaussian_data(&mut rng, n, k);
            let w = averaging_weights(&data, &FeatureSubset::full(k), tol()).unwrap();
            let sum: f64 = w.iter().map(|(_, lambda)| lambda).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
        }

        #[test]
        fn prop_trace_variance_positive_and_exact(seed in 0u64..2000, n in 1usize..4, extra in 1usize..5) {
            let mut rng = crate::seeding::stream_rng(seed, "prop-trace", 0);
            let k = n + extra;
            let x = DMatrix::from_fn(n, k, |_, _| rng.sample(StandardNormal));
            let subset = FeatureSubset::full(k);
            let v = trace_variance_interpolating(&x, &subset, 2.25, tol()).unwrap();
            let x_j = subset.select_columns(&x);
            let direct = 2.25 * (&x_j * x_j.transpose()).try_inverse().unwrap().trace();
            prop_assert!((v - direct).abs() <= 1e-8 * (1.0 + direct.abs()));
        }
    }
}
