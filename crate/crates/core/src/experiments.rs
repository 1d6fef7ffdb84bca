//! Risk curves over nested model families, and the averaging diagnostics
//! evaluated along them.
//!
//! The regression curve grows a feature subset one column at a time along
//! seeded random orderings (intercept pinned first) and records in-sample
//! error, out-of-sample error against mean-of-`m` evaluation draws, and
//! coefficient norm at each size. The synthetic-control curve averages
//! donor subsets of each size, exhaustively or capped by seeded sampling.
//! Work is parallelized per model but reduced in a fixed order, so results
//! are identical across thread counts.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::feature_pipeline::random_ordering;
use crate::interp_ols::{fit_subset, AveragingWeights, FeatureSubset, RegressionDataset};
use crate::numcore::RankTolerance;
use crate::seeding;
use crate::synth_control::{impute, min_norm_synth, DonorSubset, Panel, SolverSettings};

/// One point of a risk curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentCurveRow {
    /// Number of features (or donors) in the model.
    pub complexity: usize,
    pub in_rmse: f64,
    /// Absent when there are no evaluation periods.
    pub out_rmse: Option<f64>,
    /// Mean coefficient norm; absent for weight-based models.
    pub coef_norm: Option<f64>,
    /// How many models were averaged into this row.
    pub n_models_averaged: usize,
}

/// Risk curve indexed by strictly increasing model complexity.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentCurve {
    rows: Vec<DescentCurveRow>,
}

impl DescentCurve {
    pub fn new(rows: Vec<DescentCurveRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("curve has no rows".into()));
        }
        for pair in rows.windows(2) {
            if pair[1].complexity <= pair[0].complexity {
                return Err(Error::InvalidArgument(
                    "curve complexities must be strictly increasing".into(),
                ));
            }
        }
        for row in &rows {
            let finite = row.in_rmse.is_finite()
                && row.out_rmse.is_none_or(|v| v.is_finite())
                && row.coef_norm.is_none_or(|v| v.is_finite());
            if !finite {
                return Err(Error::NonFinite(format!(
                    "curve row at complexity {}",
                    row.complexity
                )));
            }
        }
        Ok(DescentCurve { rows })
    }

    pub fn rows(&self) -> &[DescentCurveRow] {
        &self.rows
    }

    pub fn row_at(&self, complexity: usize) -> Option<&DescentCurveRow> {
        self.rows.iter().find(|r| r.complexity == complexity)
    }
}

/// How to turn observation-level predictions into an evaluation error.
#[derive(Debug, Clone)]
pub struct EvalPlan {
    /// Size of each evaluation draw.
    pub subset_size: usize,
    /// Number of draws; ignored for the two exact cases.
    pub num_draws: usize,
    pub seed: u64,
}

/// Index sets drawn once per subset size and reused across every model, so
/// that models are compared on identical draws.
#[derive(Debug, Clone)]
pub struct EvalDraws {
    subset_size: usize,
    draws: Vec<Vec<usize>>,
}

impl EvalDraws {
    /// Draws `num_draws` subsets of `subset_size` indices out of `0..len`
    /// without replacement, by partial Fisher-Yates on a persistent index
    /// array. `subset_size == 1` and `subset_size == len` are exact and draw
    /// nothing.
    pub fn generate(len: usize, plan: &EvalPlan) -> Result<Self> {
        if plan.subset_size == 0 {
            return Err(Error::InvalidArgument(
                "evaluation subset size must be positive".into(),
            ));
        }
        if plan.subset_size > len {
            return Err(Error::InvalidArgument(format!(
                "evaluation subset size {} exceeds {} observations",
                plan.subset_size, len
            )));
        }
        if plan.subset_size == 1 || plan.subset_size == len {
            return Ok(EvalDraws {
                subset_size: plan.subset_size,
                draws: Vec::new(),
            });
        }
        if plan.num_draws == 0 {
            return Err(Error::InvalidArgument(
                "need at least one evaluation draw".into(),
            ));
        }
        let mut rng = seeding::stream_rng(plan.seed, "eval-draws", plan.subset_size as u64);
        let mut pool: Vec<usize> = (0..len).collect();
        let mut draws = Vec::with_capacity(plan.num_draws);
        for _ in 0..plan.num_draws {
            for i in 0..plan.subset_size {
                let j = rand::Rng::random_range(&mut rng, i..len);
                pool.swap(i, j);
            }
            draws.push(pool[..plan.subset_size].to_vec());
        }
        Ok(EvalDraws {
            subset_size: plan.subset_size,
            draws,
        })
    }

    /// Root-mean-square of mean-prediction errors across the draws.
    ///
    /// Size 1 is the plain observation-level RMSE over the whole set; the
    /// full size is the single exact full-set draw.
    pub fn rmse(&self, predictions: &DVector<f64>, truths: &DVector<f64>) -> Result<f64> {
        if predictions.len() != truths.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} predictions for {} outcomes",
                predictions.len(),
                truths.len()
            )));
        }
        let len = truths.len();
        if self.subset_size == 1 {
            let mut total = 0.0;
            for i in 0..len {
                let e = predictions[i] - truths[i];
                total += e * e;
            }
            return Ok((total / len as f64).sqrt());
        }
        if self.subset_size == len {
            let e = (predictions.sum() - truths.sum()) / len as f64;
            return Ok(e.abs());
        }
        let m = self.subset_size as f64;
        let mut total = 0.0;
        for draw in &self.draws {
            let mut err = 0.0;
            for &i in draw {
                err += predictions[i] - truths[i];
            }
            err /= m;
            total += err * err;
        }
        Ok((total / self.draws.len() as f64).sqrt())
    }
}

/// One-shot version of [`EvalDraws::generate`] + [`EvalDraws::rmse`].
pub fn subset_mean_rmse(
    predictions: &DVector<f64>,
    truths: &DVector<f64>,
    plan: &EvalPlan,
) -> Result<f64> {
    EvalDraws::generate(truths.len(), plan)?.rmse(predictions, truths)
}

/// Settings for the regression risk curve.
#[derive(Debug, Clone)]
pub struct OlsCurveOptions {
    pub num_orderings: usize,
    pub ordering_seed: u64,
    /// Evaluation subset sizes; one averaged curve is produced per size.
    pub eval_sizes: Vec<usize>,
    pub num_draws: usize,
    pub eval_seed: u64,
    pub tol: RankTolerance,
}

/// Curve of one feature ordering, all evaluation sizes at once.
#[derive(Debug, Clone)]
pub struct OrderingCurve {
    pub ordering: Vec<usize>,
    pub complexities: Vec<usize>,
    pub in_rmse: Vec<f64>,
    pub coef_norm: Vec<f64>,
    /// `out_rmse[s][i]`: evaluation size index `s`, grid point `i`.
    pub out_rmse: Vec<Vec<f64>>,
}

/// Output of [`ols_descent_curve`]: per-ordering curves plus the averaged
/// curve for each evaluation size.
#[derive(Debug, Clone)]
pub struct OlsCurves {
    pub per_ordering: Vec<OrderingCurve>,
    pub averaged: Vec<(usize, DescentCurve)>,
}

/// Grows feature subsets along seeded orderings and records risk at each
/// size in `grid`.
///
/// Column 0 is pinned first in every ordering: complexity 1 is the
/// intercept-only model and the remaining columns enter in permuted order.
/// Fits at different grid points run in parallel; reduction order is fixed.
pub fn ols_descent_curve(
    train: &RegressionDataset,
    eval: &RegressionDataset,
    grid: &[usize],
    opts: &OlsCurveOptions,
) -> Result<OlsCurves> {
    let k = train.num_features();
    if eval.num_features() != k {
        return Err(Error::DimensionMismatch(format!(
            "train has {k} features but eval has {}",
            eval.num_features()
        )));
    }
    if let (Some(tn), Some(en)) = (train.feature_names(), eval.feature_names()) {
        if tn != en {
            return Err(Error::Data(
                "train and eval column names disagree".into(),
            ));
        }
    }
    let mut grid: Vec<usize> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty complexity grid".into()));
    }
    if grid[0] == 0 || *grid.last().unwrap() > k {
        return Err(Error::InvalidArgument(format!(
            "complexity grid must stay within 1..={k}"
        )));
    }
    if opts.num_orderings == 0 {
        return Err(Error::InvalidArgument(
            "need at least one ordering".into(),
        ));
    }
    if opts.eval_sizes.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one evaluation size".into(),
        ));
    }
    let eval_draws: Vec<EvalDraws> = opts
        .eval_sizes
        .iter()
        .map(|&m| {
            EvalDraws::generate(
                eval.n(),
                &EvalPlan {
                    subset_size: m,
                    num_draws: opts.num_draws,
                    seed: opts.eval_seed,
                },
            )
        })
        .collect::<Result<_>>()?;

    let orderings: Vec<Vec<usize>> = (0..opts.num_orderings)
        .map(|o| {
            let seed = seeding::derive_seed(opts.ordering_seed, "ordering", o as u64);
            // Permute the non-intercept columns; column 0 stays first.
            let mut cols = vec![0usize];
            cols.extend(random_ordering(k - 1, seed).into_iter().map(|i| i + 1));
            cols
        })
        .collect();

    let tasks: Vec<(usize, usize)> = (0..opts.num_orderings)
        .flat_map(|o| grid.iter().map(move |&l| (o, l)))
        .collect();
    let results: Vec<Result<(f64, f64, Vec<f64>)>> = tasks
        .par_iter()
        .map(|&(o, l)| {
            let subset = FeatureSubset::new(orderings[o][..l].iter().cloned(), k)?;
            let fit = fit_subset(train, &subset, opts.tol).map_err(|e| match e {
                Error::RankDeficient(msg) => Error::RankDeficient(format!(
                    "ordering {o}, complexity {l}: {msg}"
                )),
                other => other,
            })?;
            let preds = fit.predict(eval.x())?;
            let outs = eval_draws
                .iter()
                .map(|d| d.rmse(&preds, eval.y()))
                .collect::<Result<Vec<f64>>>()?;
            Ok((fit.in_sample_rmse(), fit.coef_norm(), outs))
        })
        .collect();

    let mut per_ordering: Vec<OrderingCurve> = orderings
        .iter()
        .map(|ord| OrderingCurve {
            ordering: ord.clone(),
            complexities: grid.clone(),
            in_rmse: Vec::with_capacity(grid.len()),
            coef_norm: Vec::with_capacity(grid.len()),
            out_rmse: vec![Vec::with_capacity(grid.len()); opts.eval_sizes.len()],
        })
        .collect();
    for (task, result) in tasks.iter().zip(results) {
        let (in_rmse, coef_norm, outs) = result?;
        let curve = &mut per_ordering[task.0];
        curve.in_rmse.push(in_rmse);
        curve.coef_norm.push(coef_norm);
        for (s, v) in outs.into_iter().enumerate() {
            curve.out_rmse[s].push(v);
        }
    }

    // Nested subsets along a fixed ordering can only improve the training
    // fit, and past the interpolation threshold the fit is exact.
    let outcome_rms = train.y().norm() / (train.n() as f64).sqrt();
    for curve in &per_ordering {
        for pair in curve.in_rmse.windows(2) {
            debug_assert!(
                pair[1] <= pair[0] + 1e-10,
                "in-sample RMSE rose along a nested ordering: {} -> {}",
                pair[0],
                pair[1]
            );
        }
        for (i, &l) in grid.iter().enumerate() {
            if l >= train.n() {
                debug_assert!(
                    curve.in_rmse[i] <= 1e-6 * (1.0 + outcome_rms),
                    "interpolating fit left residual {} at complexity {l}",
                    curve.in_rmse[i]
                );
            }
        }
    }

    let n_ord = opts.num_orderings as f64;
    let mut averaged = Vec::with_capacity(opts.eval_sizes.len());
    for (s, &m) in opts.eval_sizes.iter().enumerate() {
        let rows = grid
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let mean = |f: &dyn Fn(&OrderingCurve) -> f64| {
                    per_ordering.iter().map(f).sum::<f64>() / n_ord
                };
                DescentCurveRow {
                    complexity: l,
                    in_rmse: mean(&|c| c.in_rmse[i]),
                    out_rmse: Some(mean(&|c| c.out_rmse[s][i])),
                    coef_norm: Some(mean(&|c| c.coef_norm[i])),
                    n_models_averaged: opts.num_orderings,
                }
            })
            .collect();
        averaged.push((m, DescentCurve::new(rows)?));
    }
    Ok(OlsCurves {
        per_ordering,
        averaged,
    })
}

/// Settings for the synthetic-control risk curve.
#[derive(Debug, Clone)]
pub struct ScCurveOptions {
    /// Most donor subsets evaluated per size; larger counts are sampled.
    pub max_subsets: usize,
    pub subset_seed: u64,
    pub settings: SolverSettings,
}

/// Number of `len`-subsets of a `pool`-set, saturating at `usize::MAX`.
fn binomial(pool: usize, len: usize) -> usize {
    if len > pool {
        return 0;
    }
    let len = len.min(pool - len);
    let mut acc: u128 = 1;
    for i in 0..len {
        acc = acc * (pool - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// All `len`-subsets of `pool` in lexicographic order, or `cap` distinct
/// sampled ones when the count exceeds `cap`.
fn donor_subsets(
    pool: &[usize],
    len: usize,
    cap: usize,
    seed: u64,
) -> Vec<Vec<usize>> {
    let total = binomial(pool.len(), len);
    if total <= cap {
        let mut out = Vec::with_capacity(total);
        let mut idx: Vec<usize> = (0..len).collect();
        loop {
            out.push(idx.iter().map(|&i| pool[i]).collect());
            // Advance the combination odometer.
            let mut pos = len;
            while pos > 0 {
                pos -= 1;
                if idx[pos] != pos + pool.len() - len {
                    idx[pos] += 1;
                    for p in (pos + 1)..len {
                        idx[p] = idx[p - 1] + 1;
                    }
                    break;
                }
                if pos == 0 {
                    return out;
                }
            }
        }
    }
    let mut rng = seeding::stream_rng(seed, "subset-sampling", len as u64);
    let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(cap);
    let mut out = Vec::with_capacity(cap);
    let mut scratch: Vec<usize> = pool.to_vec();
    while out.len() < cap {
        for i in 0..len {
            let j = rand::Rng::random_range(&mut rng, i..scratch.len());
            scratch.swap(i, j);
        }
        let mut combo: Vec<usize> = scratch[..len].to_vec();
        combo.sort_unstable();
        if seen.insert(combo.clone()) {
            out.push(combo);
        }
    }
    out
}

/// Average risk of the minimum-norm synthetic control over donor subsets of
/// each size in `grid`.
pub fn sc_descent_curve(
    panel: &Panel,
    pool: &DonorSubset,
    grid: &[usize],
    opts: &ScCurveOptions,
) -> Result<DescentCurve> {
    opts.settings.validate()?;
    if opts.max_subsets == 0 {
        return Err(Error::InvalidArgument(
            "subset cap must be positive".into(),
        ));
    }
    let mut grid: Vec<usize> = grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty complexity grid".into()));
    }
    if grid[0] == 0 || *grid.last().unwrap() > pool.len() {
        return Err(Error::InvalidArgument(format!(
            "complexity grid must stay within 1..={}",
            pool.len()
        )));
    }
    let y_pre = panel.pre_target();
    let y_post = panel.post_target();
    let t = panel.pre_periods() as f64;
    let s = panel.post_periods() as f64;

    let mut rows = Vec::with_capacity(grid.len());
    for &l in &grid {
        let subsets = donor_subsets(pool.indices(), l, opts.max_subsets, opts.subset_seed);
        let per_subset: Vec<Result<(f64, Option<f64>)>> = subsets
            .par_iter()
            .map(|combo| {
                let subset = DonorSubset::new(combo.iter().cloned(), panel.num_donors())?;
                let pre = panel.donor_pre(&subset);
                let w = min_norm_synth(&pre, &y_pre, &opts.settings)?;
                let train_rmse = (&pre * w.values() - &y_pre).norm() / t.sqrt();
                let out_rmse = if panel.post_periods() > 0 {
                    let post = panel.donor_post(&subset);
                    let imputed = impute(&w, &post)?;
                    Some((imputed - &y_post).norm() / s.sqrt())
                } else {
                    None
                };
                Ok((train_rmse, out_rmse))
            })
            .collect();
        let mut in_sum = 0.0;
        let mut out_sum = 0.0;
        let count = per_subset.len();
        for item in per_subset {
            let (train_rmse, out_rmse) = item?;
            in_sum += train_rmse;
            if let Some(o) = out_rmse {
                out_sum += o;
            }
        }
        rows.push(DescentCurveRow {
            complexity: l,
            in_rmse: in_sum / count as f64,
            out_rmse: (panel.post_periods() > 0).then_some(out_sum / count as f64),
            coef_norm: None,
            n_models_averaged: count,
        });
    }
    DescentCurve::new(rows)
}

/// Outcome of one portfolio-bound check.
#[derive(Debug, Clone, Copy)]
pub struct BoundCheck {
    /// `sum_j lambda_j (y - f_j)^2 - (y - f_complex)^2`; the bound holds
    /// when this is non-negative.
    pub slack: f64,
    pub holds: bool,
}

/// Checks the convexity bound
/// `(y - f_complex)^2 <= sum_j lambda_j (y - f_j)^2`
/// at one evaluation point, where `f_complex` must be the lambda-average of
/// the simple predictions (that identity is a precondition, not a result).
pub fn jensen_bound_check(
    truth: f64,
    simple_preds: &[f64],
    complex_pred: f64,
    lambda: &AveragingWeights,
) -> Result<BoundCheck> {
    if simple_preds.len() != lambda.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} predictions for {} weights",
            simple_preds.len(),
            lambda.len()
        )));
    }
    if !truth.is_finite() || !complex_pred.is_finite() {
        return Err(Error::NonFinite("bound check inputs".into()));
    }
    let mut averaged = 0.0;
    for (pred, (_, l)) in simple_preds.iter().zip(lambda.iter()) {
        if !pred.is_finite() {
            return Err(Error::NonFinite("simple prediction".into()));
        }
        averaged += l * pred;
    }
    if (averaged - complex_pred).abs() > 1e-8 * (1.0 + complex_pred.abs()) {
        return Err(Error::InvalidArgument(format!(
            "complex prediction {complex_pred} is not the weighted average \
             {averaged} of the simple predictions"
        )));
    }
    let mut rhs = 0.0;
    for (pred, (_, l)) in simple_preds.iter().zip(lambda.iter()) {
        let e = truth - pred;
        rhs += l * e * e;
    }
    let lhs = (truth - complex_pred) * (truth - complex_pred);
    let slack = rhs - lhs;
    Ok(BoundCheck {
        slack,
        holds: slack >= -1e-9,
    })
}

/// Which permutations [`permutation_audit`] applies to the weights.
#[derive(Debug, Clone)]
pub enum PermutationSpec {
    /// Explicit permutations of `0..d`.
    Explicit(Vec<Vec<usize>>),
    /// `count` seeded uniform permutations.
    UniformRandom { count: usize, seed: u64 },
}

/// Mean-squared errors of the correctly-matched average against
/// weight-permuted averages and the simple models themselves.
#[derive(Debug, Clone)]
pub struct PermutationAuditReport {
    pub complex_mse: f64,
    pub permuted_mse: Vec<f64>,
    pub mean_permuted_mse: f64,
    pub simple_mse: Vec<f64>,
    pub mean_simple_mse: f64,
    /// `mean_permuted_mse - complex_mse`.
    pub premise_slack: f64,
    /// `mean_simple_mse - complex_mse`.
    pub conclusion_slack: f64,
}

/// Compares the lambda-weighted prediction average against versions whose
/// weights were shuffled across models.
///
/// `simple_preds` holds one column of evaluation predictions per simple
/// model, matched to `lambda` by position. Averaging over all permutations
/// of the weights recovers the uniform model average, whose MSE is at most
/// the mean simple-model MSE; so whenever the matched average beats the mean
/// permuted average (the premise), it also beats the mean simple MSE (the
/// conclusion). Both slacks are reported as diagnostics.
pub fn permutation_audit(
    simple_preds: &DMatrix<f64>,
    lambda: &AveragingWeights,
    truths: &DVector<f64>,
    perms: &PermutationSpec,
) -> Result<PermutationAuditReport> {
    let d = lambda.len();
    if simple_preds.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} prediction columns for {} weights",
            simple_preds.ncols(),
            d
        )));
    }
    if simple_preds.nrows() != truths.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} prediction rows for {} outcomes",
            simple_preds.nrows(),
            truths.len()
        )));
    }
    if truths.is_empty() {
        return Err(Error::InvalidArgument("no evaluation points".into()));
    }
    crate::numcore::check_finite_matrix("predictions", simple_preds)?;
    crate::numcore::check_finite_vector("outcomes", truths)?;
    let permutations: Vec<Vec<usize>> = match perms {
        PermutationSpec::Explicit(list) => {
            for p in list {
                let mut sorted = p.clone();
                sorted.sort_unstable();
                if sorted != (0..d).collect::<Vec<_>>() {
                    return Err(Error::InvalidArgument(format!(
                        "{p:?} is not a permutation of 0..{d}"
                    )));
                }
            }
            list.clone()
        }
        PermutationSpec::UniformRandom { count, seed } => {
            if *count == 0 {
                return Err(Error::InvalidArgument(
                    "need at least one permutation".into(),
                ));
            }
            (0..*count)
                .map(|i| {
                    random_ordering(d, seeding::derive_seed(*seed, "permutation", i as u64))
                })
                .collect()
        }
    };
    if permutations.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one permutation".into(),
        ));
    }

    let weights = lambda.values();
    let mse_for = |w: &DVector<f64>| -> f64 {
        let preds = simple_preds * w;
        let mut total = 0.0;
        for i in 0..truths.len() {
            let e = truths[i] - preds[i];
            total += e * e;
        }
        total / truths.len() as f64
    };
    // Model j gets the weight of the model the permutation maps j to.
    let complex_mse = mse_for(&weights);
    let permuted_mse: Vec<f64> = permutations
        .iter()
        .map(|p| mse_for(&DVector::from_fn(d, |j, _| weights[p[j]])))
        .collect();
    let mean_permuted_mse = permuted_mse.iter().sum::<f64>() / permuted_mse.len() as f64;
    let simple_mse: Vec<f64> = (0..d)
        .map(|j| {
            let mut total = 0.0;
            for i in 0..truths.len() {
                let e = truths[i] - simple_preds[(i, j)];
                total += e * e;
            }
            total / truths.len() as f64
        })
        .collect();
    let mean_simple_mse = simple_mse.iter().sum::<f64>() / d as f64;
    Ok(PermutationAuditReport {
        premise_slack: mean_permuted_mse - complex_mse,
        conclusion_slack: mean_simple_mse - complex_mse,
        complex_mse,
        permuted_mse,
        mean_permuted_mse,
        simple_mse,
        mean_simple_mse,
    })
}

/// All permutations of `0..d` in lexicographic order. Factorial growth;
/// meant for small `d`.
pub fn all_permutations(d: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..d).permutations(d).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn size_one_is_plain_rmse() {
        let preds = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let truths = DVector::from_vec(vec![1.0, 1.0, 1.0]);
        let plan = EvalPlan {
            subset_size: 1,
            num_draws: 10,
            seed: 0,
        };
        let rmse = subset_mean_rmse(&preds, &truths, &plan).unwrap();
        assert_abs_diff_eq!(rmse, (5.0_f64 / 3.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn full_size_is_mean_gap() {
        let preds = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let truths = DVector::from_vec(vec![2.0, 2.0, 2.0]);
        let plan = EvalPlan {
            subset_size: 3,
            num_draws: 10,
            seed: 0,
        };
        let rmse = subset_mean_rmse(&preds, &truths, &plan).unwrap();
        assert_abs_diff_eq!(rmse, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn oversized_subset_rejected() {
        let preds = DVector::from_vec(vec![1.0]);
        let plan = EvalPlan {
            subset_size: 2,
            num_draws: 10,
            seed: 0,
        };
        assert!(subset_mean_rmse(&preds, &preds, &plan).is_err());
    }

    #[test]
    fn draws_match_exhaustive_enumeration() {
        // For m = 2 out of 4 the sampled RMSE over many draws approaches the
        // exhaustive value over all 6 pairs.
        let mut rng = crate::seeding::stream_rng(11, "test-eval", 0);
        let preds = DVector::from_fn(4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let truths = DVector::from_fn(4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut exhaustive = 0.0;
        let mut count = 0.0;
        for a in 0..4 {
            for b in (a + 1)..4 {
                let e = (preds[a] - truths[a] + preds[b] - truths[b]) / 2.0;
                exhaustive += e * e;
                count += 1.0;
            }
        }
        exhaustive = (exhaustive / count).sqrt();
        let plan = EvalPlan {
            subset_size: 2,
            num_draws: 200_000,
            seed: 3,
        };
        let sampled = subset_mean_rmse(&preds, &truths, &plan).unwrap();
        assert!((sampled - exhaustive).abs() <= 0.02 * exhaustive.max(0.1));
    }

    #[test]
    fn draws_are_deterministic() {
        let plan = EvalPlan {
            subset_size: 3,
            num_draws: 50,
            seed: 9,
        };
        let a = EvalDraws::generate(10, &plan).unwrap();
        let b = EvalDraws::generate(10, &plan).unwrap();
        assert_eq!(a.draws, b.draws);
    }

    #[test]
    fn jensen_bound_holds_for_exact_average() {
        let lambda =
            AveragingWeights::new(vec![(0, 0.25), (1, 0.75)]).unwrap();
        let simple = [2.0, -1.0];
        let complex = 0.25 * 2.0 - 0.75;
        let check = jensen_bound_check(0.5, &simple, complex, &lambda).unwrap();
        assert!(check.holds);
        assert!(check.slack >= 0.0);
    }

    #[test]
    fn jensen_bound_rejects_mismatched_average() {
        let lambda =
            AveragingWeights::new(vec![(0, 0.5), (1, 0.5)]).unwrap();
        assert!(jensen_bound_check(0.0, &[1.0, -1.0], 0.7, &lambda).is_err());
    }

    #[test]
    fn identity_permutation_reproduces_complex_mse() {
        let preds = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let lambda = AveragingWeights::new(vec![(0, 0.3), (1, 0.7)]).unwrap();
        let truths = DVector::from_vec(vec![0.5, 0.5, 1.0]);
        let report = permutation_audit(
            &preds,
            &lambda,
            &truths,
            &PermutationSpec::Explicit(vec![vec![0, 1]]),
        )
        .unwrap();
        assert_abs_diff_eq!(report.permuted_mse[0], report.complex_mse, epsilon = 1e-15);
    }

    #[test]
    fn exhaustive_permutations_bound_mean_simple_mse() {
        // Over all permutations the mean permuted MSE never exceeds the mean
        // simple MSE; this is the algebraic core of the audit.
        let mut rng = crate::seeding::stream_rng(17, "test-audit", 0);
        for _ in 0..20 {
            let d = 2 + rand::Rng::random_range(&mut rng, 0..3usize);
            let preds = DMatrix::from_fn(6, d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let truths = DVector::from_fn(6, |_, _| rng.sample::<f64, _>(StandardNormal));
            let mut raw = vec![0.0; d];
            let mut total = 0.0;
            for item in raw.iter_mut() {
                let u: f64 = rand::Rng::random_range(&mut rng, 0.0..1.0);
                *item = u;
                total += u;
            }
            let lambda = AveragingWeights::new(
                raw.iter().enumerate().map(|(i, &v)| (i, v / total)).collect(),
            )
            .unwrap();
            let report = permutation_audit(
                &preds,
                &lambda,
                &truths,
                &PermutationSpec::Explicit(all_permutations(d)),
            )
            .unwrap();
            assert!(
                report.mean_permuted_mse <= report.mean_simple_mse + 1e-12,
                "mean permuted {} > mean simple {}",
                report.mean_permuted_mse,
                report.mean_simple_mse
            );
        }
    }

    #[test]
    fn binomial_counts() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(20, 10), 184_756);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(7, 0), 1);
    }

    #[test]
    fn subsets_enumerate_lexicographically() {
        let subsets = donor_subsets(&[2, 5, 7], 2, 100, 0);
        assert_eq!(subsets, vec![vec![2, 5], vec![2, 7], vec![5, 7]]);
    }

    #[test]
    fn sampled_subsets_are_distinct_and_deterministic() {
        let pool: Vec<usize> = (0..12).collect();
        let a = donor_subsets(&pool, 4, 50, 3);
        let b = donor_subsets(&pool, 4, 50, 3);
        assert_eq!(a, b);
        assert_eq!(a.len(), 50);
        let set: HashSet<&Vec<usize>> = a.iter().collect();
        assert_eq!(set.len(), 50);
        for combo in &a {
            assert_eq!(combo.len(), 4);
            for pair in combo.windows(2) {
                assert!(pair[0] < pair[1]);
            }
        }
    }
}
